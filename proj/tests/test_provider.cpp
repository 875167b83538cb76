#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include <httplib.h>

#include "liteswarm/provider.hpp"

using namespace liteswarm;

namespace {

std::vector<ChatMessage> one_user(const std::string& text) {
    return {ChatMessage::user(text)};
}

std::string concat_deltas(const std::vector<StreamChunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) {
        if (c.delta_content) out += *c.delta_content;
    }
    return out;
}

}  // namespace

TEST_CASE("scripted provider answers per rule table") {
    auto provider = make_scripted(
        {ScriptRule::on_substring("weather",
                                  tool_call_response({{"call-1", "get_weather", "{}"}})),
         ScriptRule::fallback_text("done")});

    auto weather = provider->complete(one_user("weather in Berlin"), {});
    CHECK(weather.finish_reason == FinishReason::ToolCalls);
    REQUIRE(weather.message.tool_calls.size() == 1);
    CHECK(weather.message.tool_calls[0].name == "get_weather");

    auto other = provider->complete(one_user("anything else"), {});
    CHECK(other.message.content == "done");
    CHECK(other.finish_reason == FinishReason::Stop);
}

TEST_CASE("scripted provider default-only rule answers everything and logs calls") {
    auto provider = make_scripted({ScriptRule::fallback_text("ok")});
    CHECK(provider->complete(one_user("whatever"), {}).message.content == "ok");
    CHECK(provider->call_count() == 1);
    provider->complete(one_user("again"), {});
    CHECK(provider->call_count() == 2);
}

TEST_CASE("scripted provider requires a terminal default rule") {
    CHECK_THROWS_AS(make_scripted({}), NoDefaultRule);
    CHECK_THROWS_AS(
        make_scripted({ScriptRule::on_substring("x", text_response("y"))}),
        NoDefaultRule);
}

TEST_CASE("scripted provider rejects empty or malformed message lists") {
    auto provider = make_scripted({ScriptRule::fallback_text("ok")});
    CHECK_THROWS_AS(provider->complete({}, {}), std::invalid_argument);
    std::vector<ChatMessage> bad{ChatMessage::assistant("hi")};
    CHECK_THROWS_AS(provider->complete(bad, {}), std::invalid_argument);
}

TEST_CASE("identical request sequences produce identical call logs") {
    const std::vector<ScriptRule> rules{
        ScriptRule::on_substring("alpha", text_response("a")),
        ScriptRule::fallback_text("z")};
    auto p1 = make_scripted(rules);
    auto p2 = make_scripted(rules);
    for (int i = 0; i < 10; ++i) {
        const std::string query = "query " + std::to_string(i % 3) + " alpha";
        CHECK(p1->complete(one_user(query), {}) == p2->complete(one_user(query), {}));
    }
    const auto log1 = p1->call_log();
    const auto log2 = p2->call_log();
    REQUIRE(log1.size() == log2.size());
    for (std::size_t i = 0; i < log1.size(); ++i) {
        CHECK(log1[i].messages == log2[i].messages);
    }
}

TEST_CASE("stream chunking at size 2") {
    auto provider = make_scripted({ScriptRule::fallback_text("Hello!")}, "scripted", 2);
    const auto chunks = provider->complete_stream(one_user("hi"), {});
    REQUIRE(chunks.size() == 4);
    CHECK(*chunks[0].delta_content == "He");
    CHECK(*chunks[1].delta_content == "ll");
    CHECK(*chunks[2].delta_content == "o!");
    CHECK(chunks[3].finish_reason == FinishReason::Stop);
}

TEST_CASE("empty scripted content streams as a single finish chunk") {
    auto provider = make_scripted({ScriptRule::fallback_text("")});
    const auto chunks = provider->complete_stream(one_user("hi"), {});
    REQUIRE(chunks.size() == 1);
    CHECK(!chunks[0].delta_content);
    CHECK(chunks[0].finish_reason == FinishReason::Stop);
}

TEST_CASE("streamed tool call reassembles to the non-stream response") {
    auto provider = make_scripted(
        {ScriptRule::fallback(tool_call_response(
            {{"call-9", "search_news", "{\"keyword\":\"AI\",\"max_results\":5}"}}))},
        "scripted", 3);
    const auto direct = provider->complete(one_user("x"), {});
    const auto chunks = provider->complete_stream(one_user("x"), {});
    const auto reassembled = assemble_stream(chunks);
    CHECK(reassembled.message.tool_calls == direct.message.tool_calls);
    CHECK(reassembled.finish_reason == FinishReason::ToolCalls);
    CHECK(chunks.back().finish_reason == FinishReason::ToolCalls);
}

TEST_CASE("property: stream/non-stream equivalence over random scripts") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<int> chunk(1, 7);
    std::uniform_int_distribution<int> letter('a', 'z');
    for (int trial = 0; trial < 100; ++trial) {
        std::string text;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) text.push_back(static_cast<char>(letter(rng)));
        auto provider = make_scripted({ScriptRule::fallback_text(text)}, "scripted",
                                      static_cast<std::size_t>(chunk(rng)));
        const auto direct = provider->complete(one_user("q"), {});
        const auto chunks = provider->complete_stream(one_user("q"), {});
        CHECK(concat_deltas(chunks) == direct.message.content);
        CHECK(chunks.back().finish_reason == FinishReason::Stop);
    }
}

// --- HTTP provider against a local upstream -------------------------------

namespace {

struct TestUpstream {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    explicit TestUpstream(std::function<void(int, const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions",
                    [this, handler = std::move(handler)](const httplib::Request& req,
                                                         httplib::Response& res) {
                        handler(++hits, req, res);
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestUpstream() {
        server.stop();
        thread.join();
    }

    ProviderConfig config(int max_retries = 2) const {
        ProviderConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        cfg.api_key_ref = "test-key";
        cfg.model_id = "test-model";
        cfg.max_retries = max_retries;
        return cfg;
    }
};

std::string completion_body(const std::string& content) {
    json j{{"choices",
            json::array({json{{"message", {{"role", "assistant"}, {"content", content}}},
                              {"finish_reason", "stop"}}})}};
    return j.dump();
}

}  // namespace

TEST_CASE("http provider maps a chat completion and sends auth header") {
    std::string seen_auth;
    TestUpstream upstream([&](int, const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        res.set_content(completion_body("hi there"), "application/json");
    });
    HttpProvider provider(upstream.config());
    const auto resp = provider.complete(one_user("hello"), {});
    CHECK(resp.message.content == "hi there");
    CHECK(resp.finish_reason == FinishReason::Stop);
    CHECK(seen_auth == "Bearer test-key");
}

TEST_CASE("http provider retries 5xx then succeeds") {
    TestUpstream upstream([&](int hit, const httplib::Request&, httplib::Response& res) {
        if (hit == 1) {
            res.status = 503;
        } else {
            res.set_content(completion_body("recovered"), "application/json");
        }
    });
    HttpProvider provider(upstream.config(2));
    provider.set_backoff_base_ms(10);
    CHECK(provider.complete(one_user("x"), {}).message.content == "recovered");
    CHECK(upstream.hits == 2);
}

TEST_CASE("http provider exhausts retries on persistent 429") {
    TestUpstream upstream([&](int, const httplib::Request&, httplib::Response& res) {
        res.status = 429;
    });
    HttpProvider provider(upstream.config(2));
    provider.set_backoff_base_ms(1);
    CHECK_THROWS_AS(provider.complete(one_user("x"), {}), TransportError);
    CHECK(upstream.hits == 3);   // initial attempt + max_retries
}

TEST_CASE("http provider raises AuthError on 401 with zero retries") {
    TestUpstream upstream([&](int, const httplib::Request&, httplib::Response& res) {
        res.status = 401;
    });
    HttpProvider provider(upstream.config(5));
    CHECK_THROWS_AS(provider.complete(one_user("x"), {}), AuthError);
    CHECK(upstream.hits == 1);
}

TEST_CASE("http provider raises ProtocolError on garbage body") {
    TestUpstream upstream([&](int, const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "text/plain");
    });
    HttpProvider provider(upstream.config(0));
    CHECK_THROWS_AS(provider.complete(one_user("x"), {}), ProtocolError);
}

TEST_CASE("http provider parses SSE streams and flags interrupted ones") {
    TestUpstream upstream([&](int, const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        std::string sse;
        sse += "data: " + json{{"choices", json::array({json{
                   {"delta", {{"content", "Hel"}}}, {"finish_reason", nullptr}}})}}.dump() + "\n\n";
        sse += "data: " + json{{"choices", json::array({json{
                   {"delta", {{"content", "lo"}}}, {"finish_reason", nullptr}}})}}.dump() + "\n\n";
        const bool truncate = body["messages"].back()["content"] == "truncate";
        if (!truncate) {
            sse += "data: " + json{{"choices", json::array({json{
                       {"delta", json::object()}, {"finish_reason", "stop"}}})}}.dump() + "\n\n";
            sse += "data: [DONE]\n\n";
        }
        res.set_content(sse, "text/event-stream");
    });
    HttpProvider provider(upstream.config(0));
    const auto chunks = provider.complete_stream(one_user("hello"), {});
    CHECK(concat_deltas(chunks) == "Hello");
    CHECK(chunks.back().finish_reason == FinishReason::Stop);
    CHECK_THROWS_AS(provider.complete_stream(one_user("truncate"), {}), StreamInterrupted);
}

TEST_CASE("api_key_ref resolves ${VAR} indirection") {
    setenv("LITESWARM_TEST_KEY", "sk-resolved", 1);
    ProviderConfig cfg;
    cfg.base_url = "http://example.com/v1";
    cfg.api_key_ref = "${LITESWARM_TEST_KEY}";
    CHECK(cfg.resolve_api_key() == "sk-resolved");
    cfg.api_key_ref = "literal-key";
    CHECK(cfg.resolve_api_key() == "literal-key");
    cfg.api_key_ref = "${LITESWARM_UNSET_VAR}";
    CHECK_THROWS(cfg.resolve_api_key());
}

TEST_CASE("provider config invariants") {
    ProviderConfig cfg;
    cfg.base_url = "";
    CHECK_THROWS(cfg.validate());
    cfg.base_url = "not-a-url";
    CHECK_THROWS(cfg.validate());
    cfg.base_url = "http://ok/v1";
    cfg.max_retries = -1;
    CHECK_THROWS(cfg.validate());
    cfg.max_retries = 0;
    cfg.request_timeout = 0;
    CHECK_THROWS(cfg.validate());
    cfg.request_timeout = 30;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("scripted provider call_log appends are atomic under concurrency") {
    auto provider = make_scripted({ScriptRule::fallback_text("ok")});
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 50; ++i) provider->complete(one_user("q"), {});
        });
    }
    for (auto& t : threads) t.join();
    CHECK(provider->call_count() == 400);
}
