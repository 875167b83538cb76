#include <doctest.h>

#include <random>

#include "liteswarm/config.hpp"
#include "liteswarm/tool_registry.hpp"

using namespace liteswarm;

namespace {

ToolSpec weather_spec() {
    ToolSpec spec;
    spec.name = "get_weather";
    spec.description = "Look up the weather for a city";
    spec.params = {
        {"city", ParamType::String, "City name", true, std::nullopt},
        {"units", ParamType::String, "metric or imperial", false, json("metric")},
    };
    spec.binding = BuiltinBinding{"get_weather"};
    return spec;
}

ToolSpec quote_spec() {
    ToolSpec spec;
    spec.name = "get_quote";
    spec.description = "Fetch a stock quote";
    HttpBinding binding;
    binding.method = HttpMethod::Get;
    binding.url_template = "http://quotes.example/list={code}";
    binding.param_mapping = {{"code", ParamLocation::Path},
                             {"limit", ParamLocation::Query}};
    spec.params = {
        {"code", ParamType::String, "Stock code", true, std::nullopt},
        {"limit", ParamType::Integer, "Row cap", false, json(10)},
    };
    spec.binding = binding;
    return spec;
}

}  // namespace

TEST_CASE("spec validation enforces naming and parameter invariants") {
    auto spec = weather_spec();
    CHECK_NOTHROW(spec.validate());

    SUBCASE("bad names") {
        const std::vector<std::string> bad_names{"",          "Weather",  "1tool",
                                                 "has space", "has-dash", std::string(65, 'a')};
        for (const std::string& bad : bad_names) {
            auto s = weather_spec();
            s.name = bad;
            CHECK_THROWS_AS(s.validate(), InvalidSpec);
        }
        auto ok = weather_spec();
        ok.name = std::string(64, 'a');
        CHECK_NOTHROW(ok.validate());
    }
    SUBCASE("empty description") {
        spec.description = "";
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("duplicate parameter names") {
        spec.params.push_back(spec.params[0]);
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("required parameter with a default") {
        spec.params[0].default_value = json("Berlin");
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("more than 32 parameters") {
        spec.params.clear();
        for (int i = 0; i < 33; ++i) {
            spec.params.push_back({"p" + std::to_string(i), ParamType::String, "d", false,
                                   std::nullopt});
        }
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
        spec.params.pop_back();
        CHECK_NOTHROW(spec.validate());
    }
}

TEST_CASE("http binding invariants") {
    auto spec = quote_spec();
    CHECK_NOTHROW(spec.validate());

    SUBCASE("placeholder without a matching path param") {
        auto& b = std::get<HttpBinding>(spec.binding);
        b.url_template = "http://quotes.example/list={missing}";
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("mapping references an unknown parameter") {
        auto& b = std::get<HttpBinding>(spec.binding);
        b.param_mapping["ghost"] = ParamLocation::Query;
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    }
    SUBCASE("body params require POST") {
        auto& b = std::get<HttpBinding>(spec.binding);
        b.param_mapping["limit"] = ParamLocation::Body;
        CHECK_THROWS_AS(spec.validate(), InvalidSpec);
        b.method = HttpMethod::Post;
        CHECK_NOTHROW(spec.validate());
    }
}

TEST_CASE("spec JSON round trip") {
    for (const auto& spec : {weather_spec(), quote_spec(), search_news_spec()}) {
        CHECK(ToolSpec::from_json(spec.to_json()) == spec);
    }
}

TEST_CASE("wire schema carries names, types, and required flags") {
    const auto schema = to_wire_schema(weather_spec());
    CHECK(schema["name"] == "get_weather");
    CHECK(schema["description"] == "Look up the weather for a city");
    const auto& props = schema["parameters"]["properties"];
    CHECK(props["city"]["type"] == "string");
    CHECK(props["units"]["type"] == "string");
    CHECK(schema["parameters"]["required"] == json::array({"city"}));
    CHECK(schema["parameters"]["type"] == "object");
}

TEST_CASE("parse_arguments: valid input, defaults, and failure taxonomy") {
    const auto spec = weather_spec();

    const auto args = parse_arguments(spec, R"({"city":"Berlin"})");
    CHECK(args["city"] == "Berlin");
    CHECK(args["units"] == "metric");   // default applied

    const auto both = parse_arguments(spec, R"({"city":"Oslo","units":"imperial"})");
    CHECK(both["units"] == "imperial");

    CHECK_THROWS_AS(parse_arguments(spec, "not json"), MalformedArguments);
    CHECK_THROWS_AS(parse_arguments(spec, "[1,2]"), MalformedArguments);
    CHECK_THROWS_AS(parse_arguments(spec, "{}"), MissingRequired);
    CHECK_THROWS_AS(parse_arguments(spec, R"({"city":42})"), TypeMismatch);
    CHECK_THROWS_AS(parse_arguments(spec, R"({"city":"x","bogus":1})"), UnknownParam);
}

TEST_CASE("parse_arguments type rules") {
    ToolSpec spec;
    spec.name = "typed";
    spec.description = "type matrix";
    spec.params = {
        {"s", ParamType::String, "", true, std::nullopt},
        {"i", ParamType::Integer, "", true, std::nullopt},
        {"n", ParamType::Number, "", true, std::nullopt},
        {"b", ParamType::Boolean, "", true, std::nullopt},
    };
    spec.binding = BuiltinBinding{"typed"};

    const auto ok = parse_arguments(spec, R"({"s":"x","i":3,"n":2.5,"b":true})");
    CHECK(ok["i"] == 3);
    CHECK(ok["n"] == 2.5);

    // integer is acceptable where number is expected, not the other way round
    const auto widened = parse_arguments(spec, R"({"s":"x","i":3,"n":7,"b":false})");
    CHECK(widened["n"] == 7);
    CHECK_THROWS_AS(parse_arguments(spec, R"({"s":"x","i":3.5,"n":1,"b":true})"),
                    TypeMismatch);
    CHECK_THROWS_AS(parse_arguments(spec, R"({"s":"x","i":3,"n":1,"b":"yes"})"),
                    TypeMismatch);
}

TEST_CASE("registry rejects duplicates and invalid specs") {
    ToolRegistry registry;
    registry.register_tool(weather_spec());
    CHECK_THROWS_AS(registry.register_tool(weather_spec()), DuplicateName);
    ToolSpec bad = weather_spec();
    bad.name = "Bad Name";
    CHECK_THROWS_AS(registry.register_tool(bad), InvalidSpec);
    CHECK(registry.tools().size() == 1);
}

TEST_CASE("wire_schemas preserves registration order and honors masking") {
    ToolRegistry registry;
    registry.register_tool(weather_spec());
    registry.register_tool(quote_spec());
    const auto all = registry.wire_schemas();
    REQUIRE(all.size() == 2);
    CHECK(all[0]["name"] == "get_weather");
    CHECK(all[1]["name"] == "get_quote");
    const auto masked = registry.wire_schemas({"get_weather"});
    REQUIRE(masked.size() == 1);
    CHECK(masked[0]["name"] == "get_quote");
}

TEST_CASE("execute runs builtin handlers and reports their failures") {
    ToolRegistry registry;
    registry.register_tool(weather_spec());
    registry.register_builtin_handler("get_weather", [](const json& args) {
        if (args["city"] == "Atlantis") throw std::runtime_error("city not found");
        return std::string("sunny in ") + args["city"].get<std::string>();
    });

    auto ok = registry.execute({"c1", "get_weather", R"({"city":"Berlin"})"});
    CHECK(ok.ok);
    CHECK(ok.content == "sunny in Berlin");
    CHECK(ok.call_id == "c1");

    auto thrown = registry.execute({"c2", "get_weather", R"({"city":"Atlantis"})"});
    CHECK_FALSE(thrown.ok);
    CHECK(thrown.content.find("city not found") != std::string::npos);

    auto badargs = registry.execute({"c3", "get_weather", "{}"});
    CHECK_FALSE(badargs.ok);
    CHECK(badargs.content.find("city") != std::string::npos);

    auto missing = registry.execute({"c4", "no_such_tool", "{}"});
    CHECK_FALSE(missing.ok);
    CHECK(missing.content.find("no_such_tool") != std::string::npos);
    CHECK(missing.content.find("get_weather") != std::string::npos);
}

TEST_CASE("execute is total under fuzzed inputs") {
    ToolRegistry registry;
    registry.register_tool(weather_spec());
    registry.register_builtin_handler("get_weather",
                                      [](const json&) { return std::string("ok"); });
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> len(0, 30);
    std::uniform_int_distribution<int> byte(32, 126);
    std::uniform_int_distribution<int> pick(0, 2);
    const char* names[] = {"get_weather", "unknown_tool", ""};
    for (int trial = 0; trial < 300; ++trial) {
        std::string args;
        for (int i = 0, n = len(rng); i < n; ++i) args.push_back(static_cast<char>(byte(rng)));
        ToolResult result;
        CHECK_NOTHROW(result = registry.execute({"id", names[pick(rng)], args}));
        CHECK(result.content.size() <= kToolOutputLimit + 14);   // limit + "...[truncated]"
    }
}

TEST_CASE("builtin output is truncated to the output limit") {
    ToolRegistry registry;
    ToolSpec spec;
    spec.name = "firehose";
    spec.description = "returns too much";
    spec.binding = BuiltinBinding{"firehose"};
    registry.register_tool(spec);
    registry.register_builtin_handler(
        "firehose", [](const json&) { return std::string(kToolOutputLimit + 500, 'x'); });
    const auto result = registry.execute({"c1", "firehose", "{}"});
    CHECK(result.ok);
    CHECK(result.content.size() == kToolOutputLimit + std::string("...[truncated]").size());
    CHECK(result.content.substr(0, kToolOutputLimit) == std::string(kToolOutputLimit, 'x'));
    CHECK(result.content.substr(kToolOutputLimit) == "...[truncated]");
}

TEST_CASE("build_http_request substitutes and encodes path params") {
    const auto spec = quote_spec();
    const auto& binding = std::get<HttpBinding>(spec.binding);
    const auto args = parse_arguments(spec, R"({"code":"sh600519"})");
    const auto req = build_http_request(binding, args);
    CHECK(req.method == HttpMethod::Get);
    CHECK(req.url == "http://quotes.example/list=sh600519?limit=10");
    CHECK(req.body.empty());

    const auto spicy = parse_arguments(spec, R"({"code":"a b/c&d","limit":2})");
    const auto req2 = build_http_request(binding, spicy);
    CHECK(req2.url.find('{') == std::string::npos);
    CHECK(req2.url.find(' ') == std::string::npos);
    CHECK(req2.url.find("a%20b%2Fc%26d") != std::string::npos);
    CHECK(req2.url.find("limit=2") != std::string::npos);
}

TEST_CASE("property: substituted URLs never keep placeholders or raw reserved chars") {
    const auto spec = quote_spec();
    const auto& binding = std::get<HttpBinding>(spec.binding);
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_int_distribution<int> byte(32, 126);
    for (int trial = 0; trial < 200; ++trial) {
        std::string value;
        for (int i = 0, n = len(rng); i < n; ++i) value.push_back(static_cast<char>(byte(rng)));
        json args{{"code", value}, {"limit", 1}};
        const auto req = build_http_request(binding, args);
        const auto prefix = std::string("http://quotes.example/list=");
        REQUIRE(req.url.rfind(prefix, 0) == 0);
        const auto rest = req.url.substr(prefix.size());
        for (char c : rest.substr(0, rest.find('?'))) {
            const bool allowed = std::isalnum(static_cast<unsigned char>(c)) || c == '%' ||
                                 c == '-' || c == '_' || c == '.' || c == '~';
            CHECK(allowed);
        }
    }
}

TEST_CASE("post body params serialize as a JSON object") {
    ToolSpec spec;
    spec.name = "create_note";
    spec.description = "Create a note";
    HttpBinding binding;
    binding.method = HttpMethod::Post;
    binding.url_template = "http://api.example/notes";
    binding.param_mapping = {{"title", ParamLocation::Body}, {"pinned", ParamLocation::Body}};
    spec.params = {{"title", ParamType::String, "", true, std::nullopt},
                   {"pinned", ParamType::Boolean, "", false, json(false)}};
    spec.binding = binding;
    spec.validate();

    const auto args = parse_arguments(spec, R"({"title":"hello"})");
    const auto req = build_http_request(binding, args);
    CHECK(req.method == HttpMethod::Post);
    const auto body = json::parse(req.body);
    CHECK(body["title"] == "hello");
    CHECK(body["pinned"] == false);
}

TEST_CASE("http-bound execution goes through the injected transport") {
    ToolRegistry registry;
    registry.register_tool(quote_spec());
    HttpRequestSpec seen;
    registry.set_http_transport([&](const HttpRequestSpec& req) {
        seen = req;
        return HttpResponse{200, "quote data"};
    });
    const auto result = registry.execute({"c1", "get_quote", R"({"code":"sh600519"})"});
    CHECK(result.ok);
    CHECK(result.content == "quote data");
    CHECK(seen.url == "http://quotes.example/list=sh600519?limit=10");

    registry.set_http_transport([](const HttpRequestSpec&) {
        return HttpResponse{500, "upstream exploded"};
    });
    const auto failed = registry.execute({"c2", "get_quote", R"({"code":"x"})"});
    CHECK_FALSE(failed.ok);
    CHECK(failed.content.find("500") != std::string::npos);
}

TEST_CASE("search_news builtin yields the golden sentence") {
    ToolRegistry registry;
    registry.register_tool(search_news_spec());
    registry.register_builtin_handler("search_news", search_news_handler);
    const auto result = registry.execute({"c1", "search_news", R"({"keyword":"AI"})"});
    CHECK(result.ok);
    CHECK(result.content ==
          "By searching for AI, I've found 5 related pieces of information.");
    const auto custom =
        registry.execute({"c2", "search_news", R"({"keyword":"chips","max_results":3})"});
    CHECK(custom.content ==
          "By searching for chips, I've found 3 related pieces of information.");
}
