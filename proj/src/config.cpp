#include "liteswarm/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "liteswarm/toolgen.hpp"

namespace liteswarm {

namespace {

json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + what + ": " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw ConfigError(what + " is not valid JSON (" + path + "): " + e.what());
    }
}

ProviderConfig provider_config_from_json(const std::string& name, const json& j) {
    ProviderConfig cfg;
    if (!j.contains("base_url") || !j["base_url"].is_string()) {
        throw ConfigError("provider '" + name + "': field 'base_url' must be a string");
    }
    cfg.base_url = j["base_url"].get<std::string>();
    cfg.api_key_ref = j.value("api_key_ref", "");
    cfg.model_id = j.value("model_id", "");
    cfg.request_timeout = j.value("request_timeout", 60.0);
    cfg.max_retries = j.value("max_retries", 2);
    cfg.default_temperature = j.value("default_temperature", 0.7);
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError("provider '" + name + "': " + e.what());
    }
    return cfg;
}

ChatResponse response_from_fixture(const json& j) {
    if (j.is_string()) return text_response(j.get<std::string>());
    ChatResponse resp;
    resp.message.role = Role::Assistant;
    resp.message.content = j.value("content", "");
    for (const auto& tc : j.value("tool_calls", json::array())) {
        ToolCall call;
        call.call_id = tc.value("id", "call-" + tc.value("name", "tool"));
        call.name = tc.at("name").get<std::string>();
        const json& args = tc.contains("arguments") ? tc["arguments"] : json::object();
        call.arguments_text = args.is_string() ? args.get<std::string>() : args.dump();
        resp.message.tool_calls.push_back(std::move(call));
    }
    resp.finish_reason =
        resp.message.tool_calls.empty() ? FinishReason::Stop : FinishReason::ToolCalls;
    return resp;
}

}  // namespace

std::map<std::string, std::shared_ptr<Provider>> load_provider_scripts(const json& fixture) {
    if (!fixture.is_object()) {
        throw ConfigError("provider script fixture must map provider names to rule lists");
    }
    std::map<std::string, std::shared_ptr<Provider>> providers;
    for (const auto& [name, rules_json] : fixture.items()) {
        if (!rules_json.is_array() || rules_json.empty()) {
            throw ConfigError("provider script '" + name + "' must be a non-empty rule list");
        }
        std::vector<ScriptRule> rules;
        for (const auto& rj : rules_json) {
            ScriptRule rule;
            const bool is_default = rj.value("default", false) || !rj.contains("match_substring");
            if (is_default) {
                rule = ScriptRule::fallback(response_from_fixture(rj.value("response", json(""))));
            } else {
                rule = ScriptRule::on_substring(rj["match_substring"].get<std::string>(),
                                                response_from_fixture(rj.value("response", json(""))));
            }
            rule.fail_transport = rj.value("fail", false);
            rule.latency_ms = rj.value("latency_ms", 0);
            rules.push_back(std::move(rule));
        }
        if (!rules.back().is_default) {
            throw ConfigError("provider script '" + name + "' must end with a default rule");
        }
        providers[name] = make_scripted(std::move(rules), name);
    }
    return providers;
}

std::string search_news_handler(const json& args) {
    return "By searching for " + args.at("keyword").get<std::string>() + ", I've found " +
           std::to_string(args.at("max_results").get<int>()) +
           " related pieces of information.";
}

ToolSpec search_news_spec() {
    ToolSpec spec;
    spec.name = "search_news";
    spec.description = "Search news based on keywords";
    spec.params = {ParamSpec{"keyword", ParamType::String, "Search keyword", true, std::nullopt},
                   ParamSpec{"max_results", ParamType::Integer, "How many results to return",
                             false, json(5)}};
    spec.binding = BuiltinBinding{"search_news"};
    return spec;
}

LoadedEngine load_engine(const std::string& config_path, const std::string& script_path) {
    return load_engine_from_json(read_json_file(config_path, "engine config"), script_path);
}

LoadedEngine load_engine_from_json(const json& config, const std::string& script_path) {
    if (!config.is_object()) throw ConfigError("engine config must be a JSON object");

    // Phase 1: parse and validate everything before constructing anything.
    std::map<std::string, ProviderConfig> provider_configs;
    const json providers_json = config.value("providers", json::object());
    for (const auto& [name, pj] : providers_json.items()) {
        provider_configs[name] = provider_config_from_json(name, pj);
    }
    if (provider_configs.empty()) {
        throw ConfigError("field 'providers' must define at least one provider");
    }

    struct AgentPlan {
        AgentConfig config;
        std::string provider_name;
        std::string planner_name;
    };
    std::vector<AgentPlan> agent_plans;
    const json agents_json = config.value("agents", json::array());
    for (const auto& aj : agents_json) {
        AgentPlan plan;
        if (!aj.contains("name") || !aj["name"].is_string()) {
            throw ConfigError("every agent needs a string field 'name'");
        }
        plan.config.name = aj["name"].get<std::string>();
        plan.config.instructions = aj.value("instructions", "");
        plan.config.role = aj.value("role", "");
        plan.config.memory_enabled = aj.value("memory_enabled", false);
        plan.config.self_learning = aj.value("self_learning", false);
        plan.config.max_iterations = aj.value("max_iterations", 10);
        plan.provider_name = aj.value("provider", "");
        if (!provider_configs.count(plan.provider_name)) {
            throw ConfigError("agent '" + plan.config.name +
                              "': field 'provider' must name a defined provider");
        }
        plan.config.provider = provider_configs.at(plan.provider_name);
        if (aj.contains("tot")) {
            const json& tj = aj["tot"];
            plan.config.tot.enabled = tj.value("enabled", false);
            plan.planner_name = tj.value("provider", "");
            if (plan.config.tot.enabled) {
                if (!provider_configs.count(plan.planner_name)) {
                    throw ConfigError("agent '" + plan.config.name +
                                      "': field 'tot.provider' must name a defined provider");
                }
                plan.config.tot.provider = provider_configs.at(plan.planner_name);
            }
        }
        for (const auto& tj : aj.value("tools", json::array())) {
            if (tj.is_string()) {
                try {
                    plan.config.tools.push_back(validate_spec_file(tj.get<std::string>()));
                } catch (const std::exception& e) {
                    throw ConfigError("agent '" + plan.config.name + "': field 'tools': " +
                                      e.what());
                }
            } else {
                try {
                    plan.config.tools.push_back(ToolSpec::from_json(tj));
                } catch (const std::exception& e) {
                    throw ConfigError("agent '" + plan.config.name + "': field 'tools': " +
                                      e.what());
                }
            }
        }
        try {
            plan.config.validate();
        } catch (const std::exception& e) {
            throw ConfigError("agent '" + plan.config.name + "': " + e.what());
        }
        for (const auto& existing : agent_plans) {
            if (existing.config.name == plan.config.name) {
                throw ConfigError("duplicate agent name: " + plan.config.name);
            }
        }
        agent_plans.push_back(std::move(plan));
    }
    if (agent_plans.empty()) throw ConfigError("field 'agents' must define at least one agent");

    struct SwarmPlan {
        std::string router_provider;
        std::vector<std::pair<std::string, std::optional<int>>> members;
    };
    std::optional<SwarmPlan> swarm_plan;
    const json swarms_json = config.value("swarms", json::array());
    if (swarms_json.size() > 1) {
        throw ConfigError("field 'swarms' supports at most one swarm");
    }
    for (const auto& sj : swarms_json) {
        SwarmPlan plan;
        plan.router_provider = sj.value("router_provider", agent_plans.front().provider_name);
        if (!provider_configs.count(plan.router_provider)) {
            throw ConfigError("swarm field 'router_provider' must name a defined provider");
        }
        for (const auto& mj : sj.value("members", json::array())) {
            std::string agent_name;
            std::optional<int> capacity;
            if (mj.is_string()) {
                agent_name = mj.get<std::string>();
            } else {
                agent_name = mj.at("agent").get<std::string>();
                if (mj.contains("capacity")) capacity = mj["capacity"].get<int>();
            }
            const bool known = std::any_of(
                agent_plans.begin(), agent_plans.end(),
                [&](const AgentPlan& a) { return a.config.name == agent_name; });
            if (!known) {
                throw ConfigError("swarm field 'members' references unknown agent '" +
                                  agent_name + "'");
            }
            plan.members.emplace_back(agent_name, capacity);
        }
        if (plan.members.empty()) {
            throw ConfigError("swarm field 'members' must list at least one agent");
        }
        swarm_plan = std::move(plan);
    }

    GatewayConfig gateway;
    if (config.contains("gateway")) {
        const json& gj = config["gateway"];
        gateway.bind_address = gj.value("bind_address", gateway.bind_address);
        const json served_json = gj.value("served", json::object());
        for (const auto& [model, target] : served_json.items()) {
            gateway.served[model] = target.get<std::string>();
        }
        gateway.request_body_limit = gj.value("request_body_limit", gateway.request_body_limit);
        gateway.bearer_token = gj.value("bearer_token", "");
    }

    // Gateway targets are checked against the plans so an invalid config
    // never constructs providers or opens the journal.
    for (const auto& [model, target] : gateway.served) {
        if (model.empty()) throw ConfigError("field 'gateway.served': model names must be non-empty");
        std::string agent_name = target;
        if (target.starts_with("swarm:")) {
            if (!swarm_plan) {
                throw ConfigError("field 'gateway.served': model '" + model +
                                  "' targets a swarm but none is defined");
            }
            agent_name = target.substr(6);
        }
        const bool known =
            std::any_of(agent_plans.begin(), agent_plans.end(),
                        [&](const AgentPlan& a) { return a.config.name == agent_name; });
        if (!known) {
            throw ConfigError("field 'gateway.served': model '" + model +
                              "' targets unknown agent '" + agent_name + "'");
        }
    }

    std::string journal_path;
    if (config.contains("memory")) {
        journal_path = config["memory"].value("journal", "");
    }

    std::string toolgen_provider =
        config.value("toolgen_provider", provider_configs.begin()->first);
    if (!provider_configs.count(toolgen_provider)) {
        throw ConfigError("field 'toolgen_provider' must name a defined provider");
    }

    // Phase 2: construct providers, memory, agents, swarm.
    LoadedEngine loaded;
    if (!script_path.empty()) {
        loaded.providers =
            load_provider_scripts(read_json_file(script_path, "provider script fixture"));
        for (const auto& [name, cfg] : provider_configs) {
            if (!loaded.providers.count(name)) {
                throw ConfigError("provider script fixture is missing provider '" + name + "'");
            }
        }
    } else {
        for (const auto& [name, cfg] : provider_configs) {
            loaded.providers[name] = std::make_shared<HttpProvider>(cfg);
        }
    }

    loaded.engine.memory = journal_path.empty() ? std::make_shared<MemoryStore>()
                                                : std::make_shared<MemoryStore>(journal_path);

    for (auto& plan : agent_plans) {
        std::shared_ptr<Provider> planner;
        if (plan.config.tot.enabled) planner = loaded.providers.at(plan.planner_name);
        auto agent = new_agent(plan.config, loaded.providers.at(plan.provider_name), planner,
                               loaded.engine.memory);
        agent->tool_registry().register_builtin_handler("search_news", search_news_handler);
        loaded.engine.agents[agent->name()] = agent;
    }

    if (swarm_plan) {
        auto swarm = std::make_shared<Swarm>(loaded.providers.at(swarm_plan->router_provider));
        for (const auto& [agent_name, capacity] : swarm_plan->members) {
            swarm->register_agent(loaded.engine.agents.at(agent_name), capacity);
        }
        loaded.engine.swarm = swarm;
    }

    loaded.gateway = std::move(gateway);
    loaded.toolgen_provider = std::move(toolgen_provider);
    return loaded;
}

}  // namespace liteswarm
