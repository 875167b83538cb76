#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "liteswarm/config.hpp"
#include "liteswarm/toolgen.hpp"

using namespace liteswarm;

namespace {

std::atomic<bool> interrupted{false};

void on_signal(int) { interrupted = true; }

int cmd_chat(const std::string& config_path, const std::string& script_path,
             const std::string& target, const std::string& user_id, bool stream,
             bool show_plan, bool show_trace) {
    LoadedEngine loaded;
    try {
        loaded = load_engine(config_path, script_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const bool via_swarm = target.starts_with("swarm:");
    const std::string agent_name = via_swarm ? target.substr(6) : target;
    std::shared_ptr<Agent> agent =
        via_swarm && loaded.engine.swarm ? loaded.engine.swarm->find(agent_name)
                                         : loaded.engine.find_agent(agent_name);
    if (!agent || (via_swarm && !loaded.engine.swarm)) {
        std::cerr << "unknown agent: " << agent_name << "\n";
        return 2;
    }

    RunOptions options;
    options.user_id = user_id;
    options.stream = stream;

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line == "/quit") break;
        if (line.empty()) continue;
        if (line == "/memories") {
            auto store = agent->memory() ? agent->memory() : loaded.engine.memory;
            const auto records = store->records_in_scope(MemoryScope::user(user_id));
            for (const auto& r : records) {
                std::cout << "[" << r.record_id << "] " << r.text << "\n";
            }
            if (records.empty()) std::cout << "(no memories stored for " << user_id << ")\n";
            continue;
        }

        RunResult result;
        try {
            if (stream) {
                result = via_swarm
                             ? loaded.engine.swarm
                                   ->run(agent_name, line, options,
                                         [](const std::string& piece) {
                                             std::cout << piece << std::flush;
                                         })
                                   .first
                             : agent->run(line, options, [](const std::string& piece) {
                                   std::cout << piece << std::flush;
                               });
                std::cout << "\n";
            } else {
                result = via_swarm ? loaded.engine.swarm->run(agent_name, line, options).first
                                   : agent->run(line, options);
                std::cout << result.final_text << "\n";
            }
        } catch (const std::exception& e) {
            std::cerr << "run failed: " << e.what() << "\n";
            continue;
        }
        if (show_plan && result.plan) {
            std::cout << render_plan(*result.plan);
        }
        if (show_trace) {
            for (const auto& event : result.trace) {
                std::cout << "trace: " << event.kind << " " << event.detail << "\n";
            }
        }
    }
    return 0;
}

int cmd_serve(const std::string& config_path, const std::string& script_path) {
    LoadedEngine loaded;
    try {
        loaded = load_engine(config_path, script_path);
        if (loaded.gateway.served.empty()) {
            std::cerr << "config error: field 'gateway.served' must list at least one model\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    std::unique_ptr<Gateway> gateway;
    try {
        gateway = serve(loaded.gateway, loaded.engine);
    } catch (const BindError& e) {
        std::cerr << "bind error: " << e.what() << "\n";
        return 1;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on " << loaded.gateway.bind_address << " (port " << gateway->port()
              << ")" << std::endl;
    while (!interrupted) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    gateway->stop();   // drains in-flight requests
    return 0;
}

int cmd_toolgen(const std::string& config_path, const std::string& script_path,
                const std::string& doc, const std::string& out_dir, bool force) {
    LoadedEngine loaded;
    try {
        loaded = load_engine(config_path, script_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    GenerationRequest request;
    request.output_dir = out_dir;
    request.overwrite = force;
    if (doc == "-") {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        request.doc_text = buffer.str();
    } else {
        std::ifstream in(doc);
        if (!in) {
            std::cerr << "cannot open documentation file: " << doc << "\n";
            return 2;
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        request.doc_text = buffer.str();
    }

    try {
        const GenerationReport report =
            generate(*loaded.providers.at(loaded.toolgen_provider), request);
        for (const auto& path : report.files_written) std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const GenerationInvalid& e) {
        std::cerr << "generation invalid:\n";
        for (const auto& err : e.validation_errors) std::cerr << "  - " << err << "\n";
        return 3;
    } catch (const FileExists& e) {
        std::cerr << e.what() << " (pass --force to overwrite)\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "toolgen failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_validate(const std::vector<std::string>& paths) {
    bool all_ok = true;
    for (const auto& path : paths) {
        std::ifstream probe(path);
        if (!probe) {
            std::cout << "FAIL " << path << ": not found\n";
            all_ok = false;
            continue;
        }
        try {
            const ToolSpec spec = validate_spec_file(path);
            std::cout << "OK " << spec.name << "\n";
        } catch (const std::exception& e) {
            std::cout << "FAIL " << path << ": " << e.what() << "\n";
            all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"liteswarm — lightweight agent orchestration engine"};
    app.require_subcommand(1);

    std::string provider_script;
    app.add_option("--provider-script", provider_script,
                   "Fixture file substituting scripted providers (offline mode)");

    std::string config_path;
    std::string target;
    std::string user_id = "default";
    bool stream = false, show_plan = false, show_trace = false;
    auto* chat = app.add_subcommand("chat", "Interactive REPL against an agent or swarm");
    chat->add_option("--config", config_path, "Engine config JSON")->required();
    chat->add_option("--agent", target, "Agent name, or swarm:<entry>")->required();
    chat->add_option("--user", user_id, "Memory user id");
    chat->add_flag("--stream", stream, "Print replies incrementally");
    chat->add_flag("--show-plan", show_plan, "Print the planning block after each reply");
    chat->add_flag("--show-trace", show_trace, "Print run trace events");

    std::string serve_config;
    auto* serve_cmd = app.add_subcommand("serve", "Run the OpenAI-compatible gateway");
    serve_cmd->add_option("--config", serve_config, "Engine config JSON")->required();

    std::string gen_config, gen_doc, gen_out;
    bool gen_force = false;
    auto* toolgen = app.add_subcommand("toolgen", "Generate tool specs from API docs");
    toolgen->add_option("--config", gen_config, "Engine config JSON")->required();
    toolgen->add_option("--doc", gen_doc, "Documentation file, or - for stdin")->required();
    toolgen->add_option("--out", gen_out, "Output directory")->required();
    toolgen->add_flag("--force", gen_force, "Overwrite existing files");

    std::vector<std::string> validate_paths;
    auto* validate = app.add_subcommand("validate", "Validate .tool.json files");
    validate->add_option("paths", validate_paths, "Tool spec files")->required();

    CLI11_PARSE(app, argc, argv);

    if (chat->parsed()) {
        return cmd_chat(config_path, provider_script, target, user_id, stream, show_plan,
                        show_trace);
    }
    if (serve_cmd->parsed()) return cmd_serve(serve_config, provider_script);
    if (toolgen->parsed()) {
        return cmd_toolgen(gen_config, provider_script, gen_doc, gen_out, gen_force);
    }
    if (validate->parsed()) return cmd_validate(validate_paths);
    return 0;
}
