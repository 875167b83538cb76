#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "liteswarm/provider.hpp"

namespace liteswarm {

struct ToTConfig {
    bool enabled = false;
    std::optional<ProviderConfig> provider;

    void validate() const;
};

/// The eight planning step titles, in canonical order.
extern const std::array<std::string, 8> kPlanStepTitles;

struct ThoughtPlan {
    std::string raw_text;
    std::array<std::optional<std::string>, 8> steps;

    bool empty() const;

    std::optional<std::string>& problem_definition() { return steps[0]; }
    std::optional<std::string>& information_gathering() { return steps[1]; }
    std::optional<std::string>& problem_decomposition() { return steps[2]; }
    std::optional<std::string>& multi_dimensional_analysis() { return steps[3]; }
    std::optional<std::string>& establishing_connections() { return steps[4]; }
    std::optional<std::string>& solution_generation() { return steps[5]; }
    std::optional<std::string>& evaluation_and_selection() { return steps[6]; }
    std::optional<std::string>& implementation_and_feedback() { return steps[7]; }
};

/// Splits a planner reply on the eight numbered headings (case-insensitive;
/// any order; later duplicates overwrite). No heading → steps absent,
/// raw_text keeps the full reply.
ThoughtPlan parse_plan(const std::string& text);

/// Deterministic "PLAN:" context block, populated steps in canonical order.
/// Empty plan renders to the empty string.
std::string render_plan(const ThoughtPlan& plan);

/// Single planning call. Provider failure degrades to an empty plan; the run
/// proceeds without one.
ThoughtPlan plan(Provider& planner, const std::string& query,
                 const std::string& context_summary);

std::string build_planner_prompt(const std::string& query,
                                 const std::string& context_summary);

}  // namespace liteswarm
