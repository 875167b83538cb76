#include "liteswarm/agent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace liteswarm {

void AgentConfig::validate() const {
    if (name.empty()) throw InvalidConfig("agent name must be non-empty");
    if (max_iterations < 1) throw InvalidConfig("max_iterations must be >= 1");
    try {
        tot.validate();
    } catch (const std::exception& e) {
        throw InvalidConfig(e.what());
    }
}

ToolErrorAction tool_error_action(int attempt) {
    return attempt <= kMaxToolErrorFeedbacks ? ToolErrorAction::FeedBack
                                             : ToolErrorAction::Mask;
}

bool is_learning_directive(const std::string& query) {
    std::string lowered;
    lowered.reserve(query.size());
    for (unsigned char c : query) lowered.push_back(static_cast<char>(std::tolower(c)));
    return lowered.find("please remember") != std::string::npos ||
           lowered.find("remember:") != std::string::npos ||
           lowered.find("\xe8\xaf\xb7\xe8\xae\xb0\xe4\xbd\x8f") != std::string::npos;  // 请记住
}

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string truncated(const std::string& text, std::size_t limit) {
    return text.size() <= limit ? text : text.substr(0, limit);
}

}  // namespace

Agent::Agent(AgentConfig config, std::shared_ptr<Provider> provider,
             std::shared_ptr<Provider> planner, std::shared_ptr<MemoryStore> memory)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      planner_(std::move(planner)),
      memory_(std::move(memory)) {
    config_.validate();
    if (!provider_) throw InvalidConfig("agent requires a provider");
    if (config_.tot.enabled && !planner_) {
        throw InvalidConfig("tree-of-thought is enabled but no planner provider was given");
    }
    if (config_.memory_enabled && !memory_) {
        memory_ = std::make_shared<MemoryStore>();
    }
    for (const auto& spec : config_.tools) {
        registry_.register_tool(spec);   // throws DuplicateName / InvalidSpec
    }
}

std::shared_ptr<Agent> new_agent(AgentConfig config, std::shared_ptr<Provider> provider,
                                 std::shared_ptr<Provider> planner,
                                 std::shared_ptr<MemoryStore> memory) {
    return std::make_shared<Agent>(std::move(config), std::move(provider),
                                   std::move(planner), std::move(memory));
}

std::shared_ptr<std::mutex> Agent::lock_for_user(const std::string& user_id) {
    std::lock_guard lock(state_mutex_);
    auto& entry = user_locks_[user_id];
    if (!entry) entry = std::make_shared<std::mutex>();
    return entry;
}

std::vector<ChatMessage> Agent::history(const std::string& user_id) const {
    std::lock_guard lock(state_mutex_);
    auto it = histories_.find(user_id);
    return it == histories_.end() ? std::vector<ChatMessage>{} : it->second;
}

std::vector<ScoredMemory> Agent::gather_memories(const std::string& query,
                                                 const std::string& user_id) const {
    std::vector<ScoredMemory> merged =
        memory_->retrieve(query, MemoryScope::user(user_id), kMemoryInjectionCap);
    if (config_.self_learning) {
        auto shared = memory_->retrieve(query, MemoryScope::agent_shared(config_.name),
                                        kMemoryInjectionCap);
        merged.insert(merged.end(), shared.begin(), shared.end());
        std::stable_sort(merged.begin(), merged.end(),
                         [](const ScoredMemory& a, const ScoredMemory& b) {
                             return a.score > b.score;
                         });
        if (merged.size() > kMemoryInjectionCap) merged.resize(kMemoryInjectionCap);
    }
    return merged;
}

std::vector<ChatMessage> Agent::compose_context(const std::string& query,
                                                const std::vector<ScoredMemory>& memories,
                                                const std::optional<ThoughtPlan>& plan,
                                                const std::vector<ChatMessage>& history,
                                                const std::vector<std::string>& notes) const {
    std::vector<ChatMessage> messages;
    std::string role_prompt = config_.role.empty() ? config_.instructions : config_.role;
    if (role_prompt.empty()) role_prompt = "You are a helpful assistant.";
    messages.push_back(ChatMessage::system(role_prompt));
    for (const auto& note : notes) messages.push_back(ChatMessage::system(note));
    if (!memories.empty()) {
        std::ostringstream block;
        block << "RELEVANT MEMORIES:";
        for (const auto& m : memories) block << "\n- " << m.record.text;
        messages.push_back(ChatMessage::system(block.str()));
    }
    if (plan) {
        const std::string rendered = render_plan(*plan);
        if (!rendered.empty()) messages.push_back(ChatMessage::system(rendered));
    }
    messages.insert(messages.end(), history.begin(), history.end());
    messages.push_back(ChatMessage::user(query));
    return messages;
}

std::string Agent::context_summary(const std::vector<ChatMessage>& history) const {
    // Last 4 turns, each clipped to 500 characters.
    std::ostringstream out;
    const std::size_t start = history.size() > 4 ? history.size() - 4 : 0;
    for (std::size_t i = start; i < history.size(); ++i) {
        out << role_to_string(history[i].role) << ": "
            << truncated(history[i].content, 500) << "\n";
    }
    return out.str();
}

void Agent::write_back(const std::string& query, const std::string& final_text,
                       const std::string& user_id) {
    memory_->store("User: " + query + " / Assistant: " +
                       truncated(final_text, kWriteBackTruncation),
                   MemoryScope::user(user_id));
    if (config_.self_learning && is_learning_directive(query)) {
        memory_->store(query, MemoryScope::agent_shared(config_.name));
    }
}

RunResult Agent::run(const std::string& query, const RunOptions& options,
                     const DeltaCallback& on_delta) {
    if (trim(query).empty()) throw std::invalid_argument("query must be non-empty");
    if (options.user_id.empty()) throw std::invalid_argument("user_id must be non-empty");

    auto user_lock = lock_for_user(options.user_id);
    std::lock_guard run_guard(*user_lock);

    RunResult result;

    std::vector<ScoredMemory> memories;
    if (config_.memory_enabled) {
        memories = gather_memories(query, options.user_id);
        for (const auto& m : memories) {
            result.memories_injected.push_back(m.record.text);
            result.trace.push_back({"memory_injected", m.record.text});
        }
    }

    const std::vector<ChatMessage> prior_history = history(options.user_id);

    if (config_.tot.enabled) {
        result.plan = plan(*planner_, query, context_summary(prior_history));
        result.trace.push_back({"plan", result.plan->raw_text});
    }

    std::vector<ChatMessage> messages =
        compose_context(query, memories, result.plan, prior_history, options.system_notes);

    std::vector<std::string> masked_tools;
    std::map<std::string, int> error_counts;
    std::string final_text;
    std::string last_assistant_text;
    bool finished = false;

    std::vector<StreamChunk> final_chunks;

    for (int iteration = 1; iteration <= config_.max_iterations; ++iteration) {
        result.iterations_used = iteration;
        const std::vector<json> schemas = registry_.wire_schemas(masked_tools);
        result.trace.push_back({"provider_call", "iteration " + std::to_string(iteration)});

        ChatResponse response;
        std::vector<StreamChunk> chunks;
        if (options.stream || on_delta) {
            chunks = provider_->complete_stream(messages, schemas, options.temperature);
            response = assemble_stream(chunks);
        } else {
            response = provider_->complete(messages, schemas, options.temperature);
        }

        if (!response.message.content.empty()) {
            last_assistant_text = response.message.content;
        }

        if (response.finish_reason == FinishReason::ToolCalls) {
            messages.push_back(response.message);
            std::vector<ChatMessage> follow_ups;
            for (const auto& call : response.message.tool_calls) {
                result.trace.push_back({"tool_call", call.name});
                ToolResult tool_result = registry_.execute(call);
                result.trace.push_back(
                    {"tool_result", (tool_result.ok ? "ok: " : "error: ") + tool_result.content});
                result.tool_invocations.emplace_back(call, tool_result);
                messages.push_back(ChatMessage::tool_result(call.call_id, tool_result.content));
                if (!tool_result.ok) {
                    const int attempt = ++error_counts[call.name];
                    if (tool_error_action(attempt) == ToolErrorAction::Mask) {
                        masked_tools.push_back(call.name);
                        follow_ups.push_back(ChatMessage::system(
                            "Tool " + call.name + " is unavailable; answer without it."));
                        result.trace.push_back({"tool_masked", call.name});
                    }
                }
            }
            messages.insert(messages.end(), follow_ups.begin(), follow_ups.end());
            continue;
        }

        final_text = response.message.content;
        final_chunks = std::move(chunks);
        finished = true;
        break;
    }

    if (!finished) {
        result.hit_iteration_limit = true;
        result.trace.push_back({"iteration_limit",
                                "no final answer within " +
                                    std::to_string(config_.max_iterations) + " iterations"});
        final_text = !last_assistant_text.empty()
                         ? last_assistant_text
                         : "I'm sorry, I could not complete this request within the "
                           "allowed number of steps.";
    }

    result.final_text = final_text;
    result.trace.push_back({"final", final_text});

    if (on_delta) {
        if (finished && !final_chunks.empty()) {
            for (const auto& chunk : final_chunks) {
                if (chunk.delta_content) on_delta(*chunk.delta_content);
            }
        } else if (!final_text.empty()) {
            on_delta(final_text);
        }
    }

    if (config_.memory_enabled) {
        write_back(query, final_text, options.user_id);
    }

    {
        std::lock_guard lock(state_mutex_);
        auto& hist = histories_[options.user_id];
        hist.push_back(ChatMessage::user(query));
        hist.push_back(ChatMessage::assistant(final_text));
        if (hist.size() > kHistoryCap) {
            hist.erase(hist.begin(), hist.begin() + (hist.size() - kHistoryCap));
        }
    }

    return result;
}

}  // namespace liteswarm
