#pragma once

#include <string>
#include <vector>

#include "liteswarm/provider.hpp"
#include "liteswarm/tool_registry.hpp"

namespace liteswarm {

struct GenerationRequest {
    std::string doc_text;
    std::string output_dir;
    bool overwrite = false;
    int max_repair_rounds = 1;
};

struct GenerationReport {
    std::vector<ToolSpec> specs;
    std::vector<std::string> files_written;
    int repair_rounds_used = 0;
    std::vector<std::string> warnings;
};

struct EmptyInput : std::runtime_error { using std::runtime_error::runtime_error; };
struct GenerationInvalid : std::runtime_error {
    GenerationInvalid(std::string message, std::vector<std::string> errors)
        : std::runtime_error(std::move(message)), validation_errors(std::move(errors)) {}
    std::vector<std::string> validation_errors;
};
struct FileExists : std::runtime_error { using std::runtime_error::runtime_error; };
struct IoError : std::runtime_error { using std::runtime_error::runtime_error; };

/// Drives the provider to emit declarative tool specs from free-text API
/// documentation, re-prompting with the validation errors until they pass or
/// repair rounds run out. File writes are all-or-nothing.
GenerationReport generate(Provider& provider, const GenerationRequest& request);

/// Parses a `.tool.json` file and enforces every ToolSpec invariant.
struct ParseError : std::runtime_error { using std::runtime_error::runtime_error; };
ToolSpec validate_spec_file(const std::string& path);

/// Writes `<spec.name>.tool.json` into dir; returns the path.
std::string write_spec_file(const ToolSpec& spec, const std::string& dir,
                            bool overwrite = false);

std::string build_generation_prompt(const std::string& doc_text);

/// Extracts the contents of the first fenced code block, or the whole text
/// when no fence is present.
std::string extract_fenced_block(const std::string& text);

}  // namespace liteswarm
