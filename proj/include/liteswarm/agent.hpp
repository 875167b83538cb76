#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liteswarm/memory.hpp"
#include "liteswarm/provider.hpp"
#include "liteswarm/tool_registry.hpp"
#include "liteswarm/tot.hpp"

namespace liteswarm {

struct InvalidConfig : std::runtime_error { using std::runtime_error::runtime_error; };

struct AgentConfig {
    std::string name;
    std::string instructions;
    std::string role;   // system prompt body
    ProviderConfig provider;
    ToTConfig tot;
    bool memory_enabled = false;
    bool self_learning = false;
    int max_iterations = 10;
    std::vector<ToolSpec> tools;
    bool debug_show_plan = false;

    void validate() const;
};

struct RunOptions {
    std::string user_id = "default";
    bool stream = false;
    std::optional<double> temperature;
    /// Extra system messages inserted after the role prompt (used for
    /// swarm handoff provenance notes).
    std::vector<std::string> system_notes;
};

struct TraceEvent {
    std::string kind;
    std::string detail;
};

struct RunResult {
    std::string final_text;
    int iterations_used = 0;
    std::vector<std::pair<ToolCall, ToolResult>> tool_invocations;
    std::optional<ThoughtPlan> plan;
    std::vector<std::string> memories_injected;
    std::vector<TraceEvent> trace;
    bool hit_iteration_limit = false;
};

enum class ToolErrorAction { FeedBack, Mask };

/// Self-correction policy: the model gets two chances to fix a failing tool,
/// after which the tool is masked for the remainder of the run.
ToolErrorAction tool_error_action(int attempt);

constexpr int kMaxToolErrorFeedbacks = 2;
constexpr std::size_t kMemoryInjectionCap = 5;
constexpr std::size_t kHistoryCap = 20;
constexpr std::size_t kWriteBackTruncation = 1000;

/// True when the lowercased message begins with or contains a teach-me
/// directive ("please remember" / "remember:" / the Chinese equivalent).
bool is_learning_directive(const std::string& query);

using DeltaCallback = std::function<void(const std::string&)>;

class Agent {
public:
    Agent(AgentConfig config, std::shared_ptr<Provider> provider,
          std::shared_ptr<Provider> planner = nullptr,
          std::shared_ptr<MemoryStore> memory = nullptr);

    /// One full run: memory retrieval, optional planning, bounded tool loop,
    /// write-back. When on_delta is set the final answer is also streamed
    /// through it; the concatenated deltas equal final_text.
    RunResult run(const std::string& query, const RunOptions& options = {},
                  const DeltaCallback& on_delta = nullptr);

    /// Deterministic prompt assembly:
    /// [system role] [memories] [plan] ++ history ++ [user query].
    std::vector<ChatMessage> compose_context(const std::string& query,
                                             const std::vector<ScoredMemory>& memories,
                                             const std::optional<ThoughtPlan>& plan,
                                             const std::vector<ChatMessage>& history,
                                             const std::vector<std::string>& notes = {}) const;

    const AgentConfig& config() const { return config_; }
    const std::string& name() const { return config_.name; }
    ToolRegistry& tool_registry() { return registry_; }
    std::shared_ptr<MemoryStore> memory() const { return memory_; }
    std::shared_ptr<Provider> provider() const { return provider_; }

    std::vector<ChatMessage> history(const std::string& user_id) const;

private:
    std::vector<ScoredMemory> gather_memories(const std::string& query,
                                              const std::string& user_id) const;
    std::string context_summary(const std::vector<ChatMessage>& history) const;
    void write_back(const std::string& query, const std::string& final_text,
                    const std::string& user_id);

    AgentConfig config_;
    std::shared_ptr<Provider> provider_;
    std::shared_ptr<Provider> planner_;
    std::shared_ptr<MemoryStore> memory_;
    ToolRegistry registry_;

    mutable std::mutex state_mutex_;
    std::map<std::string, std::vector<ChatMessage>> histories_;
    std::map<std::string, std::shared_ptr<std::mutex>> user_locks_;

    std::shared_ptr<std::mutex> lock_for_user(const std::string& user_id);
};

/// Builds an agent from its config; builtin handlers can be added afterwards
/// through tool_registry().
std::shared_ptr<Agent> new_agent(AgentConfig config, std::shared_ptr<Provider> provider,
                                 std::shared_ptr<Provider> planner = nullptr,
                                 std::shared_ptr<MemoryStore> memory = nullptr);

}  // namespace liteswarm
