#include "liteswarm/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace liteswarm {

void ProviderConfig::validate() const {
    if (base_url.empty()) throw std::runtime_error("base_url must be non-empty");
    if (base_url.find("://") == std::string::npos) {
        throw std::runtime_error("base_url must be an absolute URL: " + base_url);
    }
    if (max_retries < 0) throw std::runtime_error("max_retries must be >= 0");
    if (request_timeout <= 0) throw std::runtime_error("request_timeout must be > 0");
    if (default_temperature < 0 || default_temperature > 2) {
        throw std::runtime_error("default_temperature must be in [0,2]");
    }
}

std::string ProviderConfig::resolve_api_key() const {
    if (api_key_ref.size() > 3 && api_key_ref.starts_with("${") && api_key_ref.ends_with("}")) {
        const std::string var = api_key_ref.substr(2, api_key_ref.size() - 3);
        const char* value = std::getenv(var.c_str());
        if (!value) throw std::runtime_error("environment variable not set: " + var);
        return value;
    }
    return api_key_ref;
}

void Provider::check_preconditions(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw std::invalid_argument("messages must be non-empty");
    const Role first = messages.front().role;
    if (first != Role::System && first != Role::User) {
        throw std::invalid_argument("first message must have system or user role");
    }
}

ChatResponse text_response(std::string text) {
    ChatResponse resp;
    resp.message = ChatMessage::assistant(std::move(text));
    resp.finish_reason = FinishReason::Stop;
    return resp;
}

ChatResponse tool_call_response(std::vector<ToolCall> calls) {
    ChatResponse resp;
    resp.message.role = Role::Assistant;
    resp.message.tool_calls = std::move(calls);
    resp.finish_reason = FinishReason::ToolCalls;
    return resp;
}

ScriptRule ScriptRule::on_substring(std::string needle, ChatResponse response) {
    ScriptRule rule;
    rule.matcher = [needle = std::move(needle)](const std::string& text) {
        return text.find(needle) != std::string::npos;
    };
    rule.response = std::move(response);
    return rule;
}

ScriptRule ScriptRule::fallback(ChatResponse response) {
    ScriptRule rule;
    rule.matcher = [](const std::string&) { return true; };
    rule.response = std::move(response);
    rule.is_default = true;
    return rule;
}

ScriptRule ScriptRule::fallback_text(std::string text) {
    return fallback(text_response(std::move(text)));
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptRule> rules, std::string model_id,
                                   std::size_t stream_chunk_size)
    : rules_(std::move(rules)),
      model_id_(std::move(model_id)),
      stream_chunk_size_(stream_chunk_size == 0 ? 1 : stream_chunk_size) {
    if (rules_.empty() || !rules_.back().is_default) {
        throw NoDefaultRule("scripted provider requires a terminal default rule");
    }
}

std::shared_ptr<ScriptedProvider> make_scripted(std::vector<ScriptRule> rules,
                                                std::string model_id,
                                                std::size_t stream_chunk_size) {
    return std::make_shared<ScriptedProvider>(std::move(rules), std::move(model_id),
                                              stream_chunk_size);
}

namespace {

std::string last_user_or_tool_text(const std::vector<ChatMessage>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::User || it->role == Role::Tool) return it->content;
    }
    return {};
}

}  // namespace

ChatResponse ScriptedProvider::match(const std::vector<ChatMessage>& messages,
                                     const std::vector<json>& tools) {
    {
        std::lock_guard lock(mutex_);
        call_log_.push_back(LoggedCall{messages, tools.size()});
    }
    const std::string text = last_user_or_tool_text(messages);
    for (const auto& rule : rules_) {
        if (!rule.matcher(text)) continue;
        if (rule.latency_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(rule.latency_ms));
        }
        if (rule.fail_transport) {
            throw TransportError("scripted transport failure");
        }
        return rule.response;
    }
    // Unreachable: construction guarantees a terminal default rule.
    throw NoDefaultRule("no rule matched");
}

ChatResponse ScriptedProvider::complete(const std::vector<ChatMessage>& messages,
                                        const std::vector<json>& tools,
                                        std::optional<double>) {
    check_preconditions(messages);
    return match(messages, tools);
}

std::vector<StreamChunk> ScriptedProvider::complete_stream(
    const std::vector<ChatMessage>& messages, const std::vector<json>& tools,
    std::optional<double>) {
    check_preconditions(messages);
    return chunk_response(match(messages, tools), stream_chunk_size_);
}

std::vector<ScriptedProvider::LoggedCall> ScriptedProvider::call_log() const {
    std::lock_guard lock(mutex_);
    return call_log_;
}

std::size_t ScriptedProvider::call_count() const {
    std::lock_guard lock(mutex_);
    return call_log_.size();
}

std::vector<StreamChunk> chunk_response(const ChatResponse& response,
                                        std::size_t chunk_size) {
    if (chunk_size == 0) chunk_size = 1;
    std::vector<StreamChunk> chunks;
    const std::string& content = response.message.content;
    for (std::size_t pos = 0; pos < content.size(); pos += chunk_size) {
        StreamChunk chunk;
        chunk.delta_content = content.substr(pos, chunk_size);
        chunks.push_back(std::move(chunk));
    }
    for (std::size_t i = 0; i < response.message.tool_calls.size(); ++i) {
        const ToolCall& call = response.message.tool_calls[i];
        StreamChunk head;
        head.delta_tool_call = ToolCallDelta{i, call.call_id, call.name, std::nullopt};
        chunks.push_back(std::move(head));
        const std::string& args = call.arguments_text;
        for (std::size_t pos = 0; pos < args.size(); pos += chunk_size) {
            StreamChunk frag;
            frag.delta_tool_call =
                ToolCallDelta{i, std::nullopt, std::nullopt, args.substr(pos, chunk_size)};
            chunks.push_back(std::move(frag));
        }
    }
    StreamChunk finish;
    finish.finish_reason = response.finish_reason;
    chunks.push_back(std::move(finish));
    return chunks;
}

// ---------------------------------------------------------------------------
// HttpProvider

namespace {

struct UrlParts {
    std::string origin;   // scheme://host[:port]
    std::string path;     // leading path, no trailing slash
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end + 3);
    UrlParts parts;
    if (path_start == std::string::npos) {
        parts.origin = url;
    } else {
        parts.origin = url.substr(0, path_start);
        parts.path = url.substr(path_start);
    }
    while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
    return parts;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    api_key_ = config_.resolve_api_key();
}

json HttpProvider::build_body(const std::vector<ChatMessage>& messages,
                              const std::vector<json>& tools,
                              std::optional<double> temperature, bool stream) const {
    json body{{"model", config_.model_id},
              {"temperature", temperature.value_or(config_.default_temperature)},
              {"stream", stream}};
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back(message_to_wire(m));
    body["messages"] = std::move(msgs);
    if (!tools.empty()) {
        json wire_tools = json::array();
        for (const auto& t : tools) {
            wire_tools.push_back({{"type", "function"}, {"function", t}});
        }
        body["tools"] = std::move(wire_tools);
    }
    return body;
}

std::string HttpProvider::post_with_retries(const json& body) {
    const UrlParts parts = split_url(config_.base_url);
    const std::string payload = body.dump();
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const int delay = backoff_base_ms_ << (attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Client client(parts.origin);
        client.set_connection_timeout(std::chrono::duration<double>(config_.request_timeout));
        client.set_read_timeout(std::chrono::duration<double>(config_.request_timeout));
        auto result = client.Post(parts.path + "/chat/completions", headers, payload,
                                  "application/json");
        if (!result) {
            last_error = "connection error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 401 || result->status == 403) {
            throw AuthError("upstream rejected credentials (HTTP " +
                            std::to_string(result->status) + ")");
        }
        if (retryable_status(result->status)) {
            last_error = "upstream HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw ProtocolError("unexpected upstream HTTP " + std::to_string(result->status) +
                                ": " + result->body);
        }
        return result->body;
    }
    throw TransportError("retries exhausted: " + last_error);
}

ChatResponse HttpProvider::complete(const std::vector<ChatMessage>& messages,
                                    const std::vector<json>& tools,
                                    std::optional<double> temperature) {
    check_preconditions(messages);
    const std::string body = post_with_retries(build_body(messages, tools, temperature, false));
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("response body is not valid JSON: ") + e.what());
    }
    try {
        return response_from_wire_choice(parsed.at("choices").at(0));
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("response is not a chat completion: ") + e.what());
    }
}

std::vector<StreamChunk> HttpProvider::complete_stream(
    const std::vector<ChatMessage>& messages, const std::vector<json>& tools,
    std::optional<double> temperature) {
    check_preconditions(messages);
    const std::string body = post_with_retries(build_body(messages, tools, temperature, true));

    std::vector<StreamChunk> chunks;
    bool done = false;
    bool saw_finish = false;
    std::istringstream lines(body);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.starts_with("data: ")) continue;
        const std::string data = line.substr(6);
        if (data == "[DONE]") {
            done = true;
            break;
        }
        json event;
        try {
            event = json::parse(data);
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("malformed SSE event: ") + e.what());
        }
        if (!event.contains("choices") || event["choices"].empty()) continue;
        const json& choice = event["choices"][0];
        const json& delta = choice.value("delta", json::object());
        StreamChunk chunk;
        if (delta.contains("content") && delta["content"].is_string() &&
            !delta["content"].get<std::string>().empty()) {
            chunk.delta_content = delta["content"].get<std::string>();
        } else if (delta.contains("tool_calls") && !delta["tool_calls"].empty()) {
            const json& tc = delta["tool_calls"][0];
            ToolCallDelta d;
            d.index = tc.value("index", 0u);
            if (tc.contains("id")) d.id = tc["id"].get<std::string>();
            if (tc.contains("function")) {
                const json& fn = tc["function"];
                if (fn.contains("name")) d.name = fn["name"].get<std::string>();
                if (fn.contains("arguments")) {
                    d.arguments_fragment = fn["arguments"].get<std::string>();
                }
            }
            chunk.delta_tool_call = std::move(d);
        }
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
            const std::string reason = choice["finish_reason"].get<std::string>();
            chunk.finish_reason = reason == "tool_calls" ? FinishReason::ToolCalls
                                : reason == "length"     ? FinishReason::Length
                                                         : FinishReason::Stop;
            saw_finish = true;
        }
        if (chunk.delta_content || chunk.delta_tool_call || chunk.finish_reason) {
            chunks.push_back(std::move(chunk));
        }
    }
    if (!done || !saw_finish) {
        throw StreamInterrupted("stream ended without finish_reason and [DONE]");
    }
    return chunks;
}

}  // namespace liteswarm
