#include "liteswarm/gateway.hpp"

#include <atomic>
#include <chrono>
#include <sstream>

#include <httplib.h>

namespace liteswarm {

std::shared_ptr<Agent> Engine::find_agent(const std::string& name) const {
    auto it = agents.find(name);
    return it == agents.end() ? nullptr : it->second;
}

void GatewayConfig::validate(const Engine& engine) const {
    if (served.empty()) throw std::runtime_error("gateway must serve at least one model");
    if (bind_address.find(':') == std::string::npos) {
        throw std::runtime_error("bind_address must be host:port");
    }
    for (const auto& [model, target] : served) {
        if (model.empty()) throw std::runtime_error("served model names must be non-empty");
        if (target.starts_with("swarm:")) {
            if (!engine.swarm) {
                throw std::runtime_error("model '" + model + "' targets a swarm but none exists");
            }
            const std::string entry = target.substr(6);
            if (!engine.swarm->find(entry)) {
                throw std::runtime_error("model '" + model + "' targets unknown swarm entry '" +
                                         entry + "'");
            }
        } else if (!engine.find_agent(target)) {
            throw std::runtime_error("model '" + model + "' targets unknown agent '" + target +
                                     "'");
        }
    }
}

namespace {

json error_body(const std::string& message, const std::string& type) {
    return json{{"error", {{"message", message}, {"type", type}}}};
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& type = "invalid_request_error") {
    res.status = status;
    res.set_content(error_body(message, type).dump(), "application/json");
}

std::uint64_t unix_now() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
}

std::atomic<std::uint64_t> completion_counter{0};

std::string next_completion_id() {
    return "chatcmpl-" + std::to_string(unix_now()) + "-" +
           std::to_string(++completion_counter);
}

json chunk_json(const std::string& id, std::uint64_t created, const std::string& model,
                json delta, const json& finish_reason) {
    return json{{"id", id},
                {"object", "chat.completion.chunk"},
                {"created", created},
                {"model", model},
                {"choices", json::array({json{{"index", 0},
                                              {"delta", std::move(delta)},
                                              {"finish_reason", finish_reason}}})}};
}

}  // namespace

struct Gateway::Impl {
    GatewayConfig config;
    Engine engine;
    httplib::Server server;

    Impl(GatewayConfig cfg, Engine eng) : config(std::move(cfg)), engine(std::move(eng)) {
        setup_routes();
    }

    struct RunOutcome {
        std::string content;
        std::vector<std::string> deltas;
        bool errored = false;
    };

    RunOutcome run_target(const std::string& target, const std::string& query,
                          const std::string& user_id, std::optional<double> temperature,
                          bool stream) {
        RunOutcome outcome;
        RunOptions options;
        options.user_id = user_id;
        options.stream = stream;
        options.temperature = temperature;
        DeltaCallback on_delta;
        if (stream) {
            on_delta = [&outcome](const std::string& piece) {
                outcome.deltas.push_back(piece);
            };
        }
        try {
            if (target.starts_with("swarm:")) {
                auto [result, trace] =
                    engine.swarm->run(target.substr(6), query, options, on_delta);
                outcome.content = result.final_text;
            } else {
                outcome.content =
                    engine.find_agent(target)->run(query, options, on_delta).final_text;
            }
        } catch (const std::exception& e) {
            outcome.errored = true;
            outcome.content = std::string("The engine failed to answer: ") + e.what();
            outcome.deltas = {outcome.content};
        }
        return outcome;
    }

    void setup_routes() {
        server.set_payload_max_length(config.request_body_limit);
        // SO_REUSEADDR only: a port held by a live listener must fail to
        // bind (httplib's default SO_REUSEPORT would silently share it).
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                       reinterpret_cast<const void*>(&yes), sizeof(yes));
        });

        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });

        server.Get("/v1/models", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req, res)) return;
            json data = json::array();
            for (const auto& [model, target] : config.served) {
                data.push_back({{"id", model}, {"object", "model"}});
            }
            res.set_content(json{{"object", "list"}, {"data", std::move(data)}}.dump(),
                            "application/json");
        });

        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        if (!authorized(req, res)) return;
                        handle_chat(req, res);
                    });
    }

    bool authorized(const httplib::Request& req, httplib::Response& res) const {
        if (config.bearer_token.empty()) return true;
        if (req.get_header_value("Authorization") == "Bearer " + config.bearer_token) {
            return true;
        }
        send_error(res, 401, "invalid or missing bearer token", "invalid_request_error");
        return false;
    }

    void handle_chat(const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            send_error(res, 400, "request body is not valid JSON");
            return;
        }
        if (!body.is_object() || !body.contains("model") || !body["model"].is_string()) {
            send_error(res, 400, "request must carry a string 'model' field");
            return;
        }
        const std::string model = body["model"].get<std::string>();
        auto target_it = config.served.find(model);
        if (target_it == config.served.end()) {
            send_error(res, 404, "model not found: " + model);
            return;
        }
        if (!body.contains("messages") || !body["messages"].is_array() ||
            body["messages"].empty()) {
            send_error(res, 400, "request must carry a non-empty 'messages' array");
            return;
        }
        const json& last = body["messages"].back();
        if (!last.is_object() || last.value("role", "") != "user" ||
            !last.contains("content") || !last["content"].is_string()) {
            send_error(res, 400, "the last message must be a user message with string content");
            return;
        }
        // The engine owns conversation history and memory; earlier wire
        // messages are intentionally ignored.
        const std::string query = last["content"].get<std::string>();
        const std::string user_id = body.value("user", "default");
        std::optional<double> temperature;
        if (body.contains("temperature") && body["temperature"].is_number()) {
            temperature = body["temperature"].get<double>();
        }
        const bool stream = body.value("stream", false);

        const std::string id = next_completion_id();
        const std::uint64_t created = unix_now();

        if (!stream) {
            const RunOutcome outcome =
                run_target(target_it->second, query, user_id, temperature, false);
            if (outcome.errored) {
                send_error(res, 500, outcome.content, "server_error");
                return;
            }
            json response{{"id", id},
                          {"object", "chat.completion"},
                          {"created", created},
                          {"model", model},
                          {"choices",
                           json::array({json{{"index", 0},
                                             {"message", {{"role", "assistant"},
                                                          {"content", outcome.content}}},
                                             {"finish_reason", "stop"}}})}};
            res.set_content(response.dump(), "application/json");
            return;
        }

        // Run first, then frame the collected deltas as SSE. Every stream
        // terminates with data: [DONE], including engine failures.
        const RunOutcome outcome =
            run_target(target_it->second, query, user_id, temperature, true);
        std::ostringstream sse;
        sse << "data: "
            << chunk_json(id, created, model, json{{"role", "assistant"}}, nullptr).dump()
            << "\n\n";
        for (const auto& piece : outcome.deltas) {
            sse << "data: "
                << chunk_json(id, created, model, json{{"content", piece}}, nullptr).dump()
                << "\n\n";
        }
        sse << "data: " << chunk_json(id, created, model, json::object(), "stop").dump()
            << "\n\n";
        sse << "data: [DONE]\n\n";
        res.set_content(sse.str(), "text/event-stream");
    }
};

Gateway::Gateway(GatewayConfig config, Engine engine) {
    config.validate(engine);
    impl_ = std::make_unique<Impl>(std::move(config), std::move(engine));
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
    const auto& address = impl_->config.bind_address;
    const auto colon = address.rfind(':');
    const std::string host = address.substr(0, colon);
    const int requested_port = std::stoi(address.substr(colon + 1));

    if (requested_port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
        if (port_ < 0) throw BindError("cannot bind to " + address);
    } else {
        if (!impl_->server.bind_to_port(host, requested_port)) {
            throw BindError("cannot bind to " + address);
        }
        port_ = requested_port;
    }
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Gateway::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

std::unique_ptr<Gateway> serve(GatewayConfig config, Engine engine) {
    auto gateway = std::make_unique<Gateway>(std::move(config), std::move(engine));
    gateway->start();
    return gateway;
}

}  // namespace liteswarm
