#include "liteswarm/tool_registry.hpp"

#include <regex>
#include <set>
#include <sstream>

#include <httplib.h>

namespace liteswarm {

std::string param_type_name(ParamType t) {
    switch (t) {
        case ParamType::String:  return "string";
        case ParamType::Integer: return "integer";
        case ParamType::Number:  return "number";
        case ParamType::Boolean: return "boolean";
    }
    return "string";
}

ParamType param_type_from_string(const std::string& s) {
    if (s == "string")  return ParamType::String;
    if (s == "integer") return ParamType::Integer;
    if (s == "number")  return ParamType::Number;
    if (s == "boolean") return ParamType::Boolean;
    throw InvalidSpec("unknown param type: " + s);
}

namespace {

const std::regex kToolNamePattern("^[a-z][a-z0-9_]{0,63}$");

bool value_matches_type(const json& value, ParamType type) {
    switch (type) {
        case ParamType::String:  return value.is_string();
        case ParamType::Integer: return value.is_number_integer();
        case ParamType::Number:  return value.is_number();
        case ParamType::Boolean: return value.is_boolean();
    }
    return false;
}

std::set<std::string> url_placeholders(const std::string& url_template) {
    std::set<std::string> names;
    static const std::regex placeholder("\\{([^{}]*)\\}");
    for (auto it = std::sregex_iterator(url_template.begin(), url_template.end(), placeholder);
         it != std::sregex_iterator(); ++it) {
        names.insert((*it)[1].str());
    }
    return names;
}

}  // namespace

void ToolSpec::validate() const {
    if (!std::regex_match(name, kToolNamePattern)) {
        throw InvalidSpec("tool name '" + name + "' must match ^[a-z][a-z0-9_]{0,63}$");
    }
    if (description.empty()) {
        throw InvalidSpec("tool '" + name + "': description must be non-empty");
    }
    if (params.size() > 32) {
        throw InvalidSpec("tool '" + name + "': at most 32 params allowed");
    }
    std::set<std::string> seen;
    for (const auto& p : params) {
        if (!std::regex_match(p.name, kToolNamePattern)) {
            throw InvalidSpec("tool '" + name + "': invalid param name '" + p.name + "'");
        }
        if (!seen.insert(p.name).second) {
            throw InvalidSpec("tool '" + name + "': duplicate param name '" + p.name + "'");
        }
        if (p.required && p.default_value) {
            throw InvalidSpec("tool '" + name + "': required param '" + p.name +
                              "' must not carry a default");
        }
        if (p.default_value && !value_matches_type(*p.default_value, p.ptype)) {
            throw InvalidSpec("tool '" + name + "': default for '" + p.name +
                              "' does not match type " + param_type_name(p.ptype));
        }
    }
    if (const auto* http = std::get_if<HttpBinding>(&binding)) {
        for (const auto& placeholder : url_placeholders(http->url_template)) {
            auto mapped = http->param_mapping.find(placeholder);
            if (mapped == http->param_mapping.end() ||
                mapped->second != ParamLocation::Path || !seen.count(placeholder)) {
                throw InvalidSpec("tool '" + name + "': placeholder {" + placeholder +
                                  "} must name a declared param mapped as path");
            }
        }
        bool has_body = false;
        for (const auto& [param, loc] : http->param_mapping) {
            if (!seen.count(param)) {
                throw InvalidSpec("tool '" + name + "': param_mapping references undeclared '" +
                                  param + "'");
            }
            if (loc == ParamLocation::Body) has_body = true;
        }
        if (has_body && http->method != HttpMethod::Post) {
            throw InvalidSpec("tool '" + name + "': body params require the POST method");
        }
        if (http->timeout <= 0) {
            throw InvalidSpec("tool '" + name + "': timeout must be > 0");
        }
    }
}

json ToolSpec::to_json() const {
    json j{{"name", name}, {"description", description}};
    json params_json = json::array();
    for (const auto& p : params) {
        json pj{{"name", p.name},
                {"ptype", param_type_name(p.ptype)},
                {"description", p.description},
                {"required", p.required}};
        if (p.default_value) pj["default"] = *p.default_value;
        params_json.push_back(std::move(pj));
    }
    j["params"] = std::move(params_json);
    if (const auto* builtin = std::get_if<BuiltinBinding>(&binding)) {
        j["binding"] = {{"kind", "builtin"}, {"handler", builtin->handler}};
    } else {
        const auto& http = std::get<HttpBinding>(binding);
        json mapping = json::object();
        for (const auto& [param, loc] : http.param_mapping) {
            mapping[param] = loc == ParamLocation::Path    ? "path"
                             : loc == ParamLocation::Query ? "query"
                                                           : "body";
        }
        j["binding"] = {{"kind", "http"},
                        {"method", http.method == HttpMethod::Post ? "POST" : "GET"},
                        {"url_template", http.url_template},
                        {"param_mapping", std::move(mapping)},
                        {"static_headers", http.static_headers},
                        {"timeout", http.timeout}};
    }
    return j;
}

ToolSpec ToolSpec::from_json(const json& j) {
    if (!j.is_object()) throw InvalidSpec("tool spec must be a JSON object");
    ToolSpec spec;
    if (!j.contains("name") || !j["name"].is_string()) {
        throw InvalidSpec("tool spec missing string field 'name'");
    }
    spec.name = j["name"].get<std::string>();
    if (!j.contains("description") || !j["description"].is_string()) {
        throw InvalidSpec("tool '" + spec.name + "': missing string field 'description'");
    }
    spec.description = j["description"].get<std::string>();
    for (const auto& pj : j.value("params", json::array())) {
        ParamSpec p;
        p.name = pj.at("name").get<std::string>();
        p.ptype = param_type_from_string(pj.at("ptype").get<std::string>());
        p.description = pj.value("description", "");
        p.required = pj.value("required", false);
        if (pj.contains("default")) p.default_value = pj["default"];
        spec.params.push_back(std::move(p));
    }
    const json& binding = j.at("binding");
    const std::string kind = binding.at("kind").get<std::string>();
    if (kind == "builtin") {
        spec.binding = BuiltinBinding{binding.value("handler", spec.name)};
    } else if (kind == "http") {
        HttpBinding http;
        const std::string method = binding.value("method", "GET");
        if (method == "POST") {
            http.method = HttpMethod::Post;
        } else if (method == "GET") {
            http.method = HttpMethod::Get;
        } else {
            throw InvalidSpec("tool '" + spec.name + "': unsupported HTTP method " + method);
        }
        http.url_template = binding.at("url_template").get<std::string>();
        const json mapping_json = binding.value("param_mapping", json::object());
        for (const auto& [param, loc] : mapping_json.items()) {
            const std::string where = loc.get<std::string>();
            http.param_mapping[param] = where == "path"    ? ParamLocation::Path
                                        : where == "query" ? ParamLocation::Query
                                        : where == "body"
                                            ? ParamLocation::Body
                                            : throw InvalidSpec("tool '" + spec.name +
                                                                "': bad param location " + where);
        }
        const json headers_json = binding.value("static_headers", json::object());
        for (const auto& [k, v] : headers_json.items()) {
            http.static_headers[k] = v.get<std::string>();
        }
        http.timeout = binding.value("timeout", 10.0);
        spec.binding = std::move(http);
    } else {
        throw InvalidSpec("tool '" + spec.name + "': unknown binding kind " + kind);
    }
    spec.validate();
    return spec;
}

json to_wire_schema(const ToolSpec& spec) {
    json properties = json::object();
    json required = json::array();
    for (const auto& p : spec.params) {
        json prop{{"type", param_type_name(p.ptype)}, {"description", p.description}};
        if (p.default_value) prop["default"] = *p.default_value;
        properties[p.name] = std::move(prop);
        if (p.required) required.push_back(p.name);
    }
    return json{{"name", spec.name},
                {"description", spec.description},
                {"parameters", {{"type", "object"},
                                {"properties", std::move(properties)},
                                {"required", std::move(required)}}}};
}

json parse_arguments(const ToolSpec& spec, const std::string& arguments_text) {
    json parsed;
    try {
        parsed = json::parse(arguments_text.empty() ? "{}" : arguments_text);
    } catch (const json::exception&) {
        throw MalformedArguments("Arguments for tool '" + spec.name +
                                 "' are not a valid JSON object.");
    }
    if (!parsed.is_object()) {
        throw MalformedArguments("Arguments for tool '" + spec.name +
                                 "' must be a JSON object.");
    }
    json out = json::object();
    for (const auto& [key, value] : parsed.items()) {
        const ParamSpec* param = nullptr;
        for (const auto& p : spec.params) {
            if (p.name == key) { param = &p; break; }
        }
        if (!param) {
            throw UnknownParam("Tool '" + spec.name + "' has no parameter named '" + key +
                               "'.");
        }
        if (!value_matches_type(value, param->ptype)) {
            throw TypeMismatch("Parameter '" + key + "' of tool '" + spec.name +
                               "' must be of type " + param_type_name(param->ptype) + ".");
        }
        out[key] = value;
    }
    for (const auto& p : spec.params) {
        if (out.contains(p.name)) continue;
        if (p.required) {
            throw MissingRequired("Tool '" + spec.name + "' requires parameter '" + p.name +
                                  "'.");
        }
        if (p.default_value) out[p.name] = *p.default_value;
    }
    return out;
}

std::string percent_encode(const std::string& value) {
    static const char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        const bool unreserved = std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~';
        if (unreserved) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

namespace {

std::string value_as_text(const json& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

}  // namespace

HttpRequestSpec build_http_request(const HttpBinding& binding, const json& args) {
    HttpRequestSpec req;
    req.method = binding.method;
    req.headers = binding.static_headers;
    req.timeout = binding.timeout;

    std::string url = binding.url_template;
    std::string query;
    json body = json::object();
    for (const auto& [key, value] : args.items()) {
        auto loc = binding.param_mapping.find(key);
        const ParamLocation where =
            loc == binding.param_mapping.end() ? ParamLocation::Query : loc->second;
        switch (where) {
            case ParamLocation::Path: {
                const std::string placeholder = "{" + key + "}";
                std::size_t pos;
                while ((pos = url.find(placeholder)) != std::string::npos) {
                    url.replace(pos, placeholder.size(), percent_encode(value_as_text(value)));
                }
                break;
            }
            case ParamLocation::Query:
                if (!query.empty()) query += "&";
                query += percent_encode(key) + "=" + percent_encode(value_as_text(value));
                break;
            case ParamLocation::Body:
                body[key] = value;
                break;
        }
    }
    if (!query.empty()) {
        url += (url.find('?') == std::string::npos ? "?" : "&") + query;
    }
    req.url = std::move(url);
    if (!body.empty()) req.body = body.dump();
    return req;
}

HttpResponse perform_http_request(const HttpRequestSpec& request) {
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
        return {0, "invalid URL: " + request.url};
    }
    auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin =
        path_start == std::string::npos ? request.url : request.url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::duration<double>(request.timeout));
    client.set_read_timeout(std::chrono::duration<double>(request.timeout));
    httplib::Headers headers(request.headers.begin(), request.headers.end());

    httplib::Result result = request.method == HttpMethod::Post
                                 ? client.Post(path, headers, request.body, "application/json")
                                 : client.Get(path, headers);
    if (!result) {
        return {0, "connection error: " + httplib::to_string(result.error())};
    }
    return {result->status, result->body};
}

ToolRegistry::ToolRegistry() : http_transport_(perform_http_request) {}

void ToolRegistry::register_tool(ToolSpec spec) {
    spec.validate();
    if (index_.count(spec.name)) {
        throw DuplicateName("tool already registered: " + spec.name);
    }
    index_[spec.name] = specs_.size();
    specs_.push_back(std::move(spec));
}

void ToolRegistry::register_builtin_handler(const std::string& name, BuiltinHandler handler) {
    handlers_[name] = std::move(handler);
}

const ToolSpec* ToolRegistry::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &specs_[it->second];
}

std::vector<const ToolSpec*> ToolRegistry::tools() const {
    std::vector<const ToolSpec*> out;
    out.reserve(specs_.size());
    for (const auto& spec : specs_) out.push_back(&spec);
    return out;
}

std::vector<json> ToolRegistry::wire_schemas(const std::vector<std::string>& masked) const {
    std::vector<json> out;
    for (const auto& spec : specs_) {
        const bool hidden =
            std::find(masked.begin(), masked.end(), spec.name) != masked.end();
        if (!hidden) out.push_back(to_wire_schema(spec));
    }
    return out;
}

void ToolRegistry::set_http_transport(HttpTransport transport) {
    http_transport_ = std::move(transport);
}

ToolResult ToolRegistry::execute(const ToolCall& call) const {
    ToolResult result;
    result.call_id = call.call_id;
    try {
        const ToolSpec* spec = find(call.name);
        if (!spec) {
            std::ostringstream msg;
            msg << "Tool '" << call.name << "' does not exist. Available tools:";
            for (const auto& s : specs_) msg << " " << s.name;
            result.ok = false;
            result.content = msg.str();
            return result;
        }
        json args;
        try {
            args = parse_arguments(*spec, call.arguments_text);
        } catch (const ArgumentError& e) {
            result.ok = false;
            result.content = e.what();
            return result;
        }
        std::string output;
        if (const auto* builtin = std::get_if<BuiltinBinding>(&spec->binding)) {
            auto handler = handlers_.find(builtin->handler);
            if (handler == handlers_.end()) {
                result.ok = false;
                result.content = "Tool '" + spec->name + "' has no registered handler '" +
                                 builtin->handler + "'.";
                return result;
            }
            output = handler->second(args);
        } else {
            const auto& http = std::get<HttpBinding>(spec->binding);
            const HttpRequestSpec request = build_http_request(http, args);
            if (request.url.find('{') != std::string::npos) {
                result.ok = false;
                result.content = "Tool '" + spec->name +
                                 "' has unresolved URL placeholders; provide all path parameters.";
                return result;
            }
            const HttpResponse response = http_transport_(request);
            if (response.status == 0) {
                result.ok = false;
                result.content = "Tool '" + spec->name + "' request failed: " + response.body;
                return result;
            }
            if (response.status < 200 || response.status >= 300) {
                result.ok = false;
                result.content = "Tool '" + spec->name + "' returned HTTP " +
                                 std::to_string(response.status) + ": " + response.body;
                return result;
            }
            output = response.body;
        }
        if (output.size() > kToolOutputLimit) {
            output.resize(kToolOutputLimit);
            output += "...[truncated]";
        }
        result.content = std::move(output);
    } catch (const std::exception& e) {
        result.ok = false;
        result.content = "Tool '" + call.name + "' failed: " + std::string(e.what());
    } catch (...) {
        result.ok = false;
        result.content = "Tool '" + call.name + "' failed with an unknown error.";
    }
    return result;
}

}  // namespace liteswarm
