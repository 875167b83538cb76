#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "liteswarm/agent.hpp"

namespace liteswarm {

struct RoutingDecision {
    std::string target;
    std::string rationale;
    bool was_fallback = false;
};

struct HandoffHop {
    std::string from_agent;
    std::string to_agent;
    std::string rationale;
};

struct HandoffTrace {
    std::vector<HandoffHop> hops;
    std::string entry;
    std::string final_agent;
};

constexpr int kMaxHandoffs = 3;

/// Agent registry with intent-based routing. A dedicated router call picks the
/// target agent; unmatched or at-capacity replies fall back to the entry agent.
class Swarm {
public:
    explicit Swarm(std::shared_ptr<Provider> router_provider = nullptr);

    void register_agent(std::shared_ptr<Agent> agent,
                        std::optional<int> capacity = std::nullopt);

    RoutingDecision route(const std::string& query, const std::string& entry);

    std::pair<RunResult, HandoffTrace> run(const std::string& entry, const std::string& query,
                                           const RunOptions& options = {},
                                           const DeltaCallback& on_delta = nullptr);

    std::shared_ptr<Agent> find(const std::string& name) const;
    std::vector<std::string> agent_names() const;
    std::size_t size() const { return agents_.size(); }

    /// Test instrumentation: called on run entry (entering = true) and exit.
    void set_run_probe(std::function<void(const std::string&, bool)> probe);

    std::string build_router_prompt(const std::string& query) const;

private:
    bool at_capacity(const std::string& name) const;

    struct Entry {
        std::shared_ptr<Agent> agent;
        std::optional<int> capacity;
        int in_flight = 0;
    };

    std::shared_ptr<Provider> router_provider_;
    std::vector<std::string> order_;
    std::map<std::string, Entry> agents_;
    mutable std::mutex mutex_;
    std::condition_variable slot_available_;
    std::function<void(const std::string&, bool)> run_probe_;
};

}  // namespace liteswarm
