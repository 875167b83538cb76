#include "liteswarm/types.hpp"

namespace liteswarm {

std::string role_to_string(Role role) {
    switch (role) {
        case Role::System:    return "system";
        case Role::User:      return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool:      return "tool";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system")    return Role::System;
    if (s == "user")      return Role::User;
    if (s == "assistant") return Role::Assistant;
    if (s == "tool")      return Role::Tool;
    throw std::runtime_error("unknown chat role: " + s);
}

std::string finish_reason_to_string(FinishReason r) {
    switch (r) {
        case FinishReason::Stop:      return "stop";
        case FinishReason::ToolCalls: return "tool_calls";
        case FinishReason::Length:    return "length";
    }
    return "stop";
}

ChatMessage ChatMessage::system(std::string text) {
    return ChatMessage{Role::System, std::move(text), {}, {}, {}};
}

ChatMessage ChatMessage::user(std::string text) {
    return ChatMessage{Role::User, std::move(text), {}, {}, {}};
}

ChatMessage ChatMessage::assistant(std::string text) {
    return ChatMessage{Role::Assistant, std::move(text), {}, {}, {}};
}

ChatMessage ChatMessage::tool_result(std::string call_id, std::string text) {
    return ChatMessage{Role::Tool, std::move(text), {}, std::move(call_id), {}};
}

void ChatMessage::validate() const {
    if (role == Role::Tool && tool_call_id.empty()) {
        throw std::runtime_error("tool message requires a non-empty tool_call_id");
    }
    if (role != Role::Assistant && !tool_calls.empty()) {
        throw std::runtime_error("tool_calls are only valid on assistant messages");
    }
}

void ChatResponse::validate() const {
    message.validate();
    if (message.role != Role::Assistant) {
        throw std::runtime_error("response message must have assistant role");
    }
    const bool has_calls = !message.tool_calls.empty();
    if ((finish_reason == FinishReason::ToolCalls) != has_calls) {
        throw std::runtime_error(
            "finish_reason tool_calls must coincide with a non-empty tool_calls list");
    }
}

ChatResponse assemble_stream(const std::vector<StreamChunk>& chunks) {
    ChatResponse resp;
    resp.message.role = Role::Assistant;
    std::vector<ToolCall> calls;
    std::optional<FinishReason> finish;
    for (const auto& chunk : chunks) {
        if (finish.has_value()) {
            throw std::runtime_error("chunk received after finish_reason");
        }
        if (chunk.delta_content) {
            resp.message.content += *chunk.delta_content;
        }
        if (chunk.delta_tool_call) {
            const auto& d = *chunk.delta_tool_call;
            if (d.index >= calls.size()) calls.resize(d.index + 1);
            auto& call = calls[d.index];
            if (d.id) call.call_id = *d.id;
            if (d.name) call.name = *d.name;
            if (d.arguments_fragment) call.arguments_text += *d.arguments_fragment;
        }
        if (chunk.finish_reason) finish = chunk.finish_reason;
    }
    if (!finish.has_value()) {
        throw std::runtime_error("stream ended without a finish_reason chunk");
    }
    resp.finish_reason = *finish;
    resp.message.tool_calls = std::move(calls);
    return resp;
}

json message_to_wire(const ChatMessage& msg) {
    json j{{"role", role_to_string(msg.role)}, {"content", msg.content}};
    if (!msg.tool_calls.empty()) {
        json calls = json::array();
        for (const auto& call : msg.tool_calls) {
            calls.push_back({{"id", call.call_id},
                             {"type", "function"},
                             {"function", {{"name", call.name},
                                           {"arguments", call.arguments_text}}}});
        }
        j["tool_calls"] = std::move(calls);
    }
    if (msg.role == Role::Tool) j["tool_call_id"] = msg.tool_call_id;
    if (!msg.name.empty()) j["name"] = msg.name;
    return j;
}

ChatMessage message_from_wire(const json& j) {
    ChatMessage msg;
    msg.role = role_from_string(j.at("role").get<std::string>());
    if (j.contains("content") && j["content"].is_string()) {
        msg.content = j["content"].get<std::string>();
    }
    if (j.contains("tool_calls")) {
        for (const auto& c : j["tool_calls"]) {
            ToolCall call;
            call.call_id = c.value("id", "");
            const auto& fn = c.at("function");
            call.name = fn.value("name", "");
            call.arguments_text = fn.value("arguments", "");
            msg.tool_calls.push_back(std::move(call));
        }
    }
    msg.tool_call_id = j.value("tool_call_id", "");
    msg.name = j.value("name", "");
    return msg;
}

json response_to_wire(const ChatResponse& resp) {
    json j{{"message", message_to_wire(resp.message)},
           {"finish_reason", finish_reason_to_string(resp.finish_reason)}};
    if (resp.usage) {
        j["usage"] = {{"prompt_tokens", resp.usage->prompt_tokens},
                      {"completion_tokens", resp.usage->completion_tokens}};
    }
    return j;
}

ChatResponse response_from_wire_choice(const json& choice) {
    ChatResponse resp;
    resp.message = message_from_wire(choice.at("message"));
    const std::string reason = choice.value("finish_reason", "stop");
    if (reason == "tool_calls") {
        resp.finish_reason = FinishReason::ToolCalls;
    } else if (reason == "length") {
        resp.finish_reason = FinishReason::Length;
    } else {
        resp.finish_reason = FinishReason::Stop;
    }
    return resp;
}

}  // namespace liteswarm
