#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "liteswarm/types.hpp"

namespace liteswarm {

enum class ParamType { String, Integer, Number, Boolean };

std::string param_type_name(ParamType t);
ParamType param_type_from_string(const std::string& s);

struct ParamSpec {
    std::string name;
    ParamType ptype = ParamType::String;
    std::string description;
    bool required = false;
    std::optional<json> default_value;

    bool operator==(const ParamSpec&) const = default;
};

struct BuiltinBinding {
    std::string handler;   // engine-registered callable, looked up by name

    bool operator==(const BuiltinBinding&) const = default;
};

enum class HttpMethod { Get, Post };
enum class ParamLocation { Path, Query, Body };

struct HttpBinding {
    HttpMethod method = HttpMethod::Get;
    std::string url_template;   // {param} placeholders for path params
    std::map<std::string, ParamLocation> param_mapping;
    std::map<std::string, std::string> static_headers;
    double timeout = 10.0;

    bool operator==(const HttpBinding&) const = default;
};

using Binding = std::variant<BuiltinBinding, HttpBinding>;

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    Binding binding = BuiltinBinding{};

    /// Throws InvalidSpec naming the first violated invariant.
    void validate() const;

    json to_json() const;
    static ToolSpec from_json(const json& j);

    bool operator==(const ToolSpec&) const = default;
};

struct ToolResult {
    std::string call_id;
    bool ok = true;
    std::string content;
};

struct InvalidSpec : std::runtime_error { using std::runtime_error::runtime_error; };
struct DuplicateName : std::runtime_error { using std::runtime_error::runtime_error; };

/// Thrown by parse_arguments; what() is a sentence the model can act on.
struct ArgumentError : std::runtime_error { using std::runtime_error::runtime_error; };
struct MalformedArguments : ArgumentError { using ArgumentError::ArgumentError; };
struct MissingRequired : ArgumentError { using ArgumentError::ArgumentError; };
struct TypeMismatch : ArgumentError { using ArgumentError::ArgumentError; };
struct UnknownParam : ArgumentError { using ArgumentError::ArgumentError; };

/// Function-calling schema for one tool: {name, description, parameters{...}}.
json to_wire_schema(const ToolSpec& spec);

/// Validates arguments_text against the spec and applies defaults.
json parse_arguments(const ToolSpec& spec, const std::string& arguments_text);

using BuiltinHandler = std::function<std::string(const json& args)>;

struct HttpRequestSpec {
    HttpMethod method = HttpMethod::Get;
    std::string url;
    std::map<std::string, std::string> headers;
    std::string body;
    double timeout = 10.0;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpTransport = std::function<HttpResponse(const HttpRequestSpec&)>;

/// Builds the outbound request for an HTTP-bound tool from validated args:
/// path params substituted percent-encoded, query params appended, body
/// params serialized as a JSON object.
HttpRequestSpec build_http_request(const HttpBinding& binding, const json& args);

std::string percent_encode(const std::string& value);

constexpr std::size_t kToolOutputLimit = 16 * 1024;

class ToolRegistry {
public:
    ToolRegistry();

    void register_tool(ToolSpec spec);
    void register_builtin_handler(const std::string& name, BuiltinHandler handler);

    const ToolSpec* find(const std::string& name) const;
    /// Registration order.
    std::vector<const ToolSpec*> tools() const;
    std::vector<json> wire_schemas(const std::vector<std::string>& masked = {}) const;

    /// Total: every failure mode becomes ToolResult{ok:false, content:<reason>}.
    ToolResult execute(const ToolCall& call) const;

    /// Test hook; defaults to a real HTTP client.
    void set_http_transport(HttpTransport transport);

private:
    std::vector<ToolSpec> specs_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, BuiltinHandler> handlers_;
    HttpTransport http_transport_;
};

/// Performs the request with cpp-httplib; used as the default transport.
HttpResponse perform_http_request(const HttpRequestSpec& request);

}  // namespace liteswarm
