#include "liteswarm/toolgen.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace liteswarm {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string extract_fenced_block(const std::string& text) {
    const auto open = text.find("```");
    if (open == std::string::npos) return trim(text);
    auto body_start = text.find('\n', open);
    if (body_start == std::string::npos) return trim(text);
    ++body_start;
    const auto close = text.find("```", body_start);
    if (close == std::string::npos) return trim(text.substr(body_start));
    return trim(text.substr(body_start, close - body_start));
}

std::string build_generation_prompt(const std::string& doc_text) {
    std::ostringstream out;
    out << "Read the API documentation below and emit declarative tool definitions for it.\n"
           "Reply with a single fenced code block containing a JSON array. Each element must "
           "have exactly this shape:\n"
           "{\"name\": \"lowercase_identifier\", \"description\": \"...\", "
           "\"params\": [{\"name\": \"...\", \"ptype\": \"string|integer|number|boolean\", "
           "\"description\": \"...\", \"required\": true|false, \"default\": <optional>}], "
           "\"binding\": {\"kind\": \"http\", \"method\": \"GET|POST\", "
           "\"url_template\": \"http://... with {param} placeholders\", "
           "\"param_mapping\": {\"param\": \"path|query|body\"}, "
           "\"static_headers\": {}, \"timeout\": 10}}\n"
           "Every {placeholder} in url_template must name a declared param mapped as \"path\". "
           "Required params must not carry defaults.\n\n"
           "API documentation:\n"
        << doc_text;
    return out.str();
}

namespace {

std::vector<ToolSpec> parse_generated(const std::string& reply,
                                      std::vector<std::string>& errors) {
    const std::string block = extract_fenced_block(reply);
    json parsed;
    try {
        parsed = json::parse(block);
    } catch (const json::exception& e) {
        errors.push_back(std::string("reply is not valid JSON: ") + e.what());
        return {};
    }
    if (!parsed.is_array() || parsed.empty()) {
        errors.push_back("reply must be a non-empty JSON array of tool specs");
        return {};
    }
    std::vector<ToolSpec> specs;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        try {
            specs.push_back(ToolSpec::from_json(parsed[i]));
        } catch (const std::exception& e) {
            errors.push_back("spec " + std::to_string(i) + ": " + e.what());
        }
    }
    return errors.empty() ? specs : std::vector<ToolSpec>{};
}

}  // namespace

std::string write_spec_file(const ToolSpec& spec, const std::string& dir, bool overwrite) {
    const fs::path path = fs::path(dir) / (spec.name + ".tool.json");
    if (!overwrite && fs::exists(path)) {
        throw FileExists("refusing to overwrite existing file: " + path.string());
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tool spec file: " + path.string());
    out << spec.to_json().dump(2) << "\n";
    return path.string();
}

GenerationReport generate(Provider& provider, const GenerationRequest& request) {
    if (trim(request.doc_text).size() < 20) {
        throw EmptyInput("documentation text must be at least 20 characters");
    }

    GenerationReport report;
    std::vector<ChatMessage> messages{
        ChatMessage::system("You generate declarative tool definitions from API "
                            "documentation."),
        ChatMessage::user(build_generation_prompt(request.doc_text))};

    std::vector<std::string> errors;
    for (int round = 0; round <= request.max_repair_rounds; ++round) {
        if (round > 0) {
            std::ostringstream repair;
            repair << "The previous output failed validation:\n";
            for (const auto& e : errors) repair << "- " << e << "\n";
            repair << "Emit the corrected JSON array in a single fenced block.";
            messages.push_back(ChatMessage::user(repair.str()));
            report.repair_rounds_used = round;
        }
        errors.clear();
        const ChatResponse response = provider.complete(messages, {});
        messages.push_back(response.message);
        report.specs = parse_generated(response.message.content, errors);
        if (errors.empty() && !report.specs.empty()) break;
        report.specs.clear();
    }
    if (report.specs.empty()) {
        throw GenerationInvalid("tool generation failed after repairs", errors);
    }

    // All-or-nothing: refuse the whole batch before touching the filesystem.
    if (!request.overwrite) {
        for (const auto& spec : report.specs) {
            const fs::path path = fs::path(request.output_dir) / (spec.name + ".tool.json");
            if (fs::exists(path)) {
                throw FileExists("refusing to overwrite existing file: " + path.string());
            }
        }
    }
    std::error_code ec;
    fs::create_directories(request.output_dir, ec);
    for (const auto& spec : report.specs) {
        report.files_written.push_back(
            write_spec_file(spec, request.output_dir, request.overwrite));
    }
    return report;
}

ToolSpec validate_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open tool spec file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json parsed;
    try {
        parsed = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw ParseError("file is not valid JSON (" + path + "): " + e.what());
    }
    return ToolSpec::from_json(parsed);   // throws InvalidSpec on contract violations
}

}  // namespace liteswarm
