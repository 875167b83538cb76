#pragma once

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "liteswarm/agent.hpp"
#include "liteswarm/swarm.hpp"

namespace liteswarm {

/// The runnable surface the gateway and CLI expose: named agents plus an
/// optional swarm for "swarm:<entry>" targets.
struct Engine {
    std::map<std::string, std::shared_ptr<Agent>> agents;
    std::shared_ptr<Swarm> swarm;
    std::shared_ptr<MemoryStore> memory;

    std::shared_ptr<Agent> find_agent(const std::string& name) const;
};

struct GatewayConfig {
    std::string bind_address = "127.0.0.1:8080";   // host:port
    std::map<std::string, std::string> served;     // model name -> agent | "swarm:<entry>"
    std::size_t request_body_limit = 1024 * 1024;
    std::string bearer_token;                      // empty = no auth

    void validate(const Engine& engine) const;
};

struct BindError : std::runtime_error { using std::runtime_error::runtime_error; };

class Gateway {
public:
    Gateway(GatewayConfig config, Engine engine);
    ~Gateway();

    /// Binds and serves on a background thread; throws BindError on failure.
    void start();
    void stop();

    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
};

/// Convenience wrapper matching the one-call service entry point.
std::unique_ptr<Gateway> serve(GatewayConfig config, Engine engine);

}  // namespace liteswarm
