#include "liteswarm/swarm.hpp"

#include <condition_variable>
#include <sstream>

namespace liteswarm {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Swarm::Swarm(std::shared_ptr<Provider> router_provider)
    : router_provider_(std::move(router_provider)) {}

void Swarm::register_agent(std::shared_ptr<Agent> agent, std::optional<int> capacity) {
    if (!agent) throw std::invalid_argument("agent must not be null");
    if (capacity && *capacity < 1) throw std::invalid_argument("capacity must be >= 1");
    std::lock_guard lock(mutex_);
    const std::string& name = agent->name();
    if (agents_.count(name)) throw DuplicateName("agent already registered: " + name);
    agents_[name] = Entry{std::move(agent), capacity, 0};
    order_.push_back(name);
    if (!router_provider_) router_provider_ = agents_[name].agent->provider();
}

std::shared_ptr<Agent> Swarm::find(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = agents_.find(name);
    return it == agents_.end() ? nullptr : it->second.agent;
}

std::vector<std::string> Swarm::agent_names() const {
    std::lock_guard lock(mutex_);
    return order_;
}

void Swarm::set_run_probe(std::function<void(const std::string&, bool)> probe) {
    run_probe_ = std::move(probe);
}

bool Swarm::at_capacity(const std::string& name) const {
    auto it = agents_.find(name);
    if (it == agents_.end()) return true;
    return it->second.capacity && it->second.in_flight >= *it->second.capacity;
}

std::string Swarm::build_router_prompt(const std::string& query) const {
    std::ostringstream out;
    out << "You dispatch user requests to the best-suited agent. Agents:\n";
    {
        std::lock_guard lock(mutex_);
        for (const auto& name : order_) {
            const auto& entry = agents_.at(name);
            out << "- " << name << " — " << entry.agent->config().instructions << " — "
                << entry.agent->config().role << "\n";
        }
    }
    out << "\nUser request:\n" << query
        << "\n\nReply with exactly one agent name from the list above and nothing else.";
    return out.str();
}

RoutingDecision Swarm::route(const std::string& query, const std::string& entry) {
    {
        std::lock_guard lock(mutex_);
        if (!agents_.count(entry)) {
            throw std::invalid_argument("entry agent is not registered: " + entry);
        }
        if (agents_.size() == 1) {
            return RoutingDecision{entry, "only one registered agent", false};
        }
    }

    std::string reply;
    try {
        const ChatResponse response = router_provider_->complete(
            {ChatMessage::system("You are an intent router."),
             ChatMessage::user(build_router_prompt(query))},
            {});
        reply = trim(response.message.content);
    } catch (const std::exception& e) {
        return RoutingDecision{entry, std::string("router provider failed: ") + e.what(), true};
    }

    std::lock_guard lock(mutex_);
    auto it = agents_.find(reply);
    if (it == agents_.end()) {
        return RoutingDecision{entry, "router reply '" + reply + "' names no registered agent",
                               true};
    }
    if (at_capacity(reply)) {
        return RoutingDecision{entry, "agent '" + reply + "' is at capacity", true};
    }
    return RoutingDecision{reply, "router selected " + reply, false};
}

std::pair<RunResult, HandoffTrace> Swarm::run(const std::string& entry,
                                              const std::string& query,
                                              const RunOptions& options,
                                              const DeltaCallback& on_delta) {
    HandoffTrace trace;
    trace.entry = entry;

    std::string current = entry;
    for (int round = 0; round < kMaxHandoffs; ++round) {
        const RoutingDecision decision = route(query, current);
        if (decision.target == current) break;
        trace.hops.push_back({current, decision.target, decision.rationale});
        current = decision.target;
    }
    trace.final_agent = current;

    std::shared_ptr<Agent> agent = find(current);

    // Capacity admission: wait for a slot, then run.
    {
        std::unique_lock lock(mutex_);
        auto& slot = agents_.at(current);
        slot_available_.wait(lock, [&] {
            return !slot.capacity || slot.in_flight < *slot.capacity;
        });
        ++slot.in_flight;
    }
    if (run_probe_) run_probe_(current, true);

    RunOptions agent_options = options;
    if (!trace.hops.empty()) {
        agent_options.system_notes.push_back("Handed off from " + entry +
                                             ": user query follows.");
    }

    RunResult result;
    try {
        result = agent->run(query, agent_options, on_delta);
    } catch (...) {
        if (run_probe_) run_probe_(current, false);
        {
            std::lock_guard lock(mutex_);
            --agents_.at(current).in_flight;
        }
        slot_available_.notify_all();
        throw;
    }
    if (run_probe_) run_probe_(current, false);
    {
        std::lock_guard lock(mutex_);
        --agents_.at(current).in_flight;
    }
    slot_available_.notify_all();

    return {std::move(result), std::move(trace)};
}

}  // namespace liteswarm
