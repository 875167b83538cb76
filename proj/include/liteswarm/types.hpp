#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace liteswarm {

using json = nlohmann::json;

enum class Role { System, User, Assistant, Tool };

std::string role_to_string(Role role);
Role role_from_string(const std::string& s);

/// A tool invocation as emitted by a provider. arguments_text is kept as the
/// raw serialized object so malformed output can be surfaced back to the model.
struct ToolCall {
    std::string call_id;
    std::string name;
    std::string arguments_text;

    bool operator==(const ToolCall&) const = default;
};

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    std::vector<ToolCall> tool_calls;   // assistant messages only
    std::string tool_call_id;           // required iff role == Tool
    std::string name;

    static ChatMessage system(std::string text);
    static ChatMessage user(std::string text);
    static ChatMessage assistant(std::string text);
    static ChatMessage tool_result(std::string call_id, std::string text);

    /// Enforces the role/tool_calls/tool_call_id coupling.
    void validate() const;

    bool operator==(const ChatMessage&) const = default;
};

enum class FinishReason { Stop, ToolCalls, Length };

std::string finish_reason_to_string(FinishReason r);

struct Usage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;

    bool operator==(const Usage&) const = default;
};

struct ChatResponse {
    ChatMessage message;   // role == Assistant
    FinishReason finish_reason = FinishReason::Stop;
    std::optional<Usage> usage;

    void validate() const;

    bool operator==(const ChatResponse&) const = default;
};

/// One increment of a streamed completion. At most one of delta_content /
/// delta_tool_call is set; finish_reason only on the terminal chunk.
struct ToolCallDelta {
    std::size_t index = 0;
    std::optional<std::string> id;
    std::optional<std::string> name;
    std::optional<std::string> arguments_fragment;

    bool operator==(const ToolCallDelta&) const = default;
};

struct StreamChunk {
    std::optional<std::string> delta_content;
    std::optional<ToolCallDelta> delta_tool_call;
    std::optional<FinishReason> finish_reason;

    bool operator==(const StreamChunk&) const = default;
};

/// Reassembles a chunk sequence into the equivalent non-streamed response.
/// Throws std::runtime_error if the sequence is not terminated by a
/// finish_reason chunk.
ChatResponse assemble_stream(const std::vector<StreamChunk>& chunks);

// OpenAI wire mapping.
json message_to_wire(const ChatMessage& msg);
ChatMessage message_from_wire(const json& j);
json response_to_wire(const ChatResponse& resp);
ChatResponse response_from_wire_choice(const json& choice);

}  // namespace liteswarm
