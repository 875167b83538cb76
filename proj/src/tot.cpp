#include "liteswarm/tot.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace liteswarm {

const std::array<std::string, 8> kPlanStepTitles = {
    "Problem Definition",
    "Information Gathering",
    "Problem Decomposition",
    "Multi-Dimensional Analysis",
    "Establishing Connections",
    "Solution Generation",
    "Evaluation and Selection",
    "Implementation and Feedback",
};

void ToTConfig::validate() const {
    if (enabled && !provider) {
        throw std::runtime_error("tree-of-thought is enabled but no planner provider is set");
    }
    if (provider) provider->validate();
}

bool ThoughtPlan::empty() const {
    if (!raw_text.empty()) return false;
    return std::all_of(steps.begin(), steps.end(),
                       [](const auto& s) { return !s.has_value(); });
}

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::regex heading_pattern(std::size_t step_index) {
    std::string title = kPlanStepTitles[step_index];
    std::string escaped;
    for (char c : title) {
        if (c == '-') escaped += "\\-";
        else if (c == ' ') escaped += "[ \\t]+";
        else escaped += c;
    }
    return std::regex(std::to_string(step_index + 1) + "\\.[ \\t]*" + escaped + "[ \\t]*:?",
                      std::regex::icase);
}

struct HeadingHit {
    std::size_t step = 0;
    std::size_t begin = 0;
    std::size_t end = 0;   // end of the heading itself
};

}  // namespace

ThoughtPlan parse_plan(const std::string& text) {
    ThoughtPlan plan;
    std::vector<HeadingHit> hits;
    for (std::size_t i = 0; i < kPlanStepTitles.size(); ++i) {
        const std::regex pattern = heading_pattern(i);
        for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern);
             it != std::sregex_iterator(); ++it) {
            hits.push_back({i, static_cast<std::size_t>(it->position()),
                            static_cast<std::size_t>(it->position() + it->length())});
        }
    }
    if (hits.empty()) {
        plan.raw_text = text;
        return plan;
    }
    std::sort(hits.begin(), hits.end(),
              [](const HeadingHit& a, const HeadingHit& b) { return a.begin < b.begin; });
    plan.raw_text = text;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const std::size_t content_begin = hits[i].end;
        const std::size_t content_end = i + 1 < hits.size() ? hits[i + 1].begin : text.size();
        const std::string content = trim(text.substr(content_begin, content_end - content_begin));
        if (!content.empty()) {
            plan.steps[hits[i].step] = content;
        }
    }
    return plan;
}

std::string render_plan(const ThoughtPlan& plan) {
    if (plan.empty()) return {};
    std::ostringstream out;
    out << "PLAN:\n";
    bool any_step = false;
    for (std::size_t i = 0; i < kPlanStepTitles.size(); ++i) {
        if (!plan.steps[i]) continue;
        any_step = true;
        out << (i + 1) << ". " << kPlanStepTitles[i] << ":\n" << *plan.steps[i] << "\n";
    }
    if (!any_step) out << plan.raw_text << "\n";
    return out.str();
}

std::string build_planner_prompt(const std::string& query,
                                 const std::string& context_summary) {
    std::ostringstream out;
    out << "Plan how to solve the task below. Answer under exactly these eight headings, "
           "in this order, one section each:\n";
    for (std::size_t i = 0; i < kPlanStepTitles.size(); ++i) {
        out << (i + 1) << ". " << kPlanStepTitles[i] << "\n";
    }
    out << "\nTask:\n" << query << "\n";
    if (!context_summary.empty()) {
        out << "\nConversation context:\n" << context_summary << "\n";
    }
    return out.str();
}

ThoughtPlan plan(Provider& planner, const std::string& query,
                 const std::string& context_summary) {
    if (query.empty()) throw std::invalid_argument("planning query must be non-empty");
    std::vector<ChatMessage> messages{
        ChatMessage::system("You are a planning assistant that decomposes problems into "
                            "structured steps."),
        ChatMessage::user(build_planner_prompt(query, context_summary))};
    try {
        const ChatResponse response = planner.complete(messages, {});
        return parse_plan(response.message.content);
    } catch (const std::exception&) {
        return ThoughtPlan{};   // degraded: the agent proceeds without a plan
    }
}

}  // namespace liteswarm
