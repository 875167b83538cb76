#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "liteswarm/types.hpp"

namespace liteswarm {

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Transport failed after retries were exhausted.
struct TransportError : ProviderError { using ProviderError::ProviderError; };
/// Response body was not a parseable chat completion.
struct ProtocolError : ProviderError { using ProviderError::ProviderError; };
/// 401/403 from upstream; never retried.
struct AuthError : ProviderError { using ProviderError::ProviderError; };
/// Stream ended without a finish_reason chunk.
struct StreamInterrupted : ProviderError { using ProviderError::ProviderError; };
struct NoDefaultRule : std::runtime_error { using std::runtime_error::runtime_error; };

struct ProviderConfig {
    std::string base_url;
    std::string api_key_ref;    // literal, or "${VAR}" resolved from the environment
    std::string model_id;
    double request_timeout = 60.0;
    int max_retries = 2;
    double default_temperature = 0.7;

    void validate() const;
    /// Resolves "${VAR}" indirection against the process environment.
    std::string resolve_api_key() const;
};

/// Uniform chat-completions interface. Implementations must be safe for
/// concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;

    virtual ChatResponse complete(const std::vector<ChatMessage>& messages,
                                  const std::vector<json>& tools,
                                  std::optional<double> temperature = std::nullopt) = 0;

    virtual std::vector<StreamChunk> complete_stream(
        const std::vector<ChatMessage>& messages,
        const std::vector<json>& tools,
        std::optional<double> temperature = std::nullopt) = 0;

    virtual const std::string& model_id() const = 0;

protected:
    static void check_preconditions(const std::vector<ChatMessage>& messages);
};

/// One scripted rule. The matcher runs against the text of the last user-or-tool
/// message in the request; the first matching rule wins.
struct ScriptRule {
    std::function<bool(const std::string&)> matcher;
    ChatResponse response;
    bool is_default = false;
    bool fail_transport = false;   // simulate an upstream failure instead of answering
    int latency_ms = 0;

    static ScriptRule on_substring(std::string needle, ChatResponse response);
    static ScriptRule fallback(ChatResponse response);
    static ScriptRule fallback_text(std::string text);
};

ChatResponse text_response(std::string text);
ChatResponse tool_call_response(std::vector<ToolCall> calls);

/// Deterministic offline stand-in for an LLM provider: identical request
/// sequences produce identical response sequences. Streaming slices the
/// scripted answer into fixed-size fragments.
class ScriptedProvider : public Provider {
public:
    ScriptedProvider(std::vector<ScriptRule> rules, std::string model_id = "scripted",
                     std::size_t stream_chunk_size = 2);

    ChatResponse complete(const std::vector<ChatMessage>& messages,
                          const std::vector<json>& tools,
                          std::optional<double> temperature = std::nullopt) override;

    std::vector<StreamChunk> complete_stream(const std::vector<ChatMessage>& messages,
                                             const std::vector<json>& tools,
                                             std::optional<double> temperature = std::nullopt) override;

    const std::string& model_id() const override { return model_id_; }

    struct LoggedCall {
        std::vector<ChatMessage> messages;
        std::size_t tool_schema_count = 0;
    };

    std::vector<LoggedCall> call_log() const;
    std::size_t call_count() const;

private:
    ChatResponse match(const std::vector<ChatMessage>& messages,
                       const std::vector<json>& tools);

    std::vector<ScriptRule> rules_;
    std::string model_id_;
    std::size_t stream_chunk_size_;
    mutable std::mutex mutex_;
    std::vector<LoggedCall> call_log_;
};

std::shared_ptr<ScriptedProvider> make_scripted(std::vector<ScriptRule> rules,
                                                std::string model_id = "scripted",
                                                std::size_t stream_chunk_size = 2);

/// Talks to any OpenAI-compatible endpoint at {base_url}/chat/completions.
/// Transient failures (connection errors, 5xx, 429) are retried with
/// exponential backoff starting at 500 ms; 401/403 raise AuthError immediately.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig config);

    ChatResponse complete(const std::vector<ChatMessage>& messages,
                          const std::vector<json>& tools,
                          std::optional<double> temperature = std::nullopt) override;

    std::vector<StreamChunk> complete_stream(const std::vector<ChatMessage>& messages,
                                             const std::vector<json>& tools,
                                             std::optional<double> temperature = std::nullopt) override;

    const std::string& model_id() const override { return config_.model_id; }

    const ProviderConfig& config() const { return config_; }

    /// Test hook: overrides the backoff base (milliseconds).
    void set_backoff_base_ms(int ms) { backoff_base_ms_ = ms; }

private:
    json build_body(const std::vector<ChatMessage>& messages,
                    const std::vector<json>& tools,
                    std::optional<double> temperature, bool stream) const;
    std::string post_with_retries(const json& body);

    ProviderConfig config_;
    std::string api_key_;
    int backoff_base_ms_ = 500;
};

/// Splits a full response into stream chunks of at most chunk_size content
/// characters. Tool calls stream as a name fragment followed by argument
/// fragments, mirroring the OpenAI chunking convention.
std::vector<StreamChunk> chunk_response(const ChatResponse& response,
                                        std::size_t chunk_size);

}  // namespace liteswarm
