#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "liteswarm/gateway.hpp"

namespace liteswarm {

struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };

/// Fully validated engine definition loaded from a single JSON document.
/// Nothing is constructed until validation of every reference has passed.
struct LoadedEngine {
    Engine engine;
    GatewayConfig gateway;
    std::string toolgen_provider;   // provider name used by the toolgen command
    std::map<std::string, std::shared_ptr<Provider>> providers;
};

/// Loads and validates an engine config. When script_path is non-empty every
/// provider is replaced by a scripted one built from the fixture file,
/// enabling fully offline operation.
LoadedEngine load_engine(const std::string& config_path, const std::string& script_path = "");

LoadedEngine load_engine_from_json(const json& config, const std::string& script_path = "");

/// Parses a scripted-provider fixture: {"<provider>": [{"match_substring",
/// "response", "default"?, "fail"?, "latency_ms"?}, ...]}.
std::map<std::string, std::shared_ptr<Provider>> load_provider_scripts(const json& fixture);

/// Demo builtin from the tool-calling walkthrough; installed on every agent.
std::string search_news_handler(const json& args);
ToolSpec search_news_spec();

}  // namespace liteswarm
