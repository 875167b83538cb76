#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liteswarm/agent.hpp"
#include "liteswarm/config.hpp"
#include "liteswarm/memory.hpp"
#include "liteswarm/provider.hpp"
#include "liteswarm/swarm.hpp"
#include "liteswarm/toolgen.hpp"
#include "liteswarm/tot.hpp"

namespace py = pybind11;
using namespace liteswarm;

namespace {

json json_from_py(const py::handle& obj) {
    return json::parse(
        py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object json_to_py(const json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

std::shared_ptr<ScriptedProvider> scripted_from_rules(const py::list& rules,
                                                      std::size_t chunk_size) {
    std::vector<ScriptRule> parsed;
    for (const auto& item : rules) {
        py::dict rule = item.cast<py::dict>();
        ChatResponse response;
        if (rule.contains("tool_calls")) {
            std::vector<ToolCall> calls;
            for (const auto& tc : rule["tool_calls"].cast<py::list>()) {
                py::dict call = tc.cast<py::dict>();
                calls.push_back(ToolCall{call.contains("id") ? call["id"].cast<std::string>()
                                                             : "call-1",
                                         call["name"].cast<std::string>(),
                                         call["arguments"].cast<std::string>()});
            }
            response = tool_call_response(std::move(calls));
        } else {
            response = text_response(rule.contains("response")
                                         ? rule["response"].cast<std::string>()
                                         : "");
        }
        if (rule.contains("match_substring")) {
            parsed.push_back(
                ScriptRule::on_substring(rule["match_substring"].cast<std::string>(),
                                         std::move(response)));
        } else {
            parsed.push_back(ScriptRule::fallback(std::move(response)));
        }
    }
    return make_scripted(std::move(parsed), "scripted", chunk_size);
}

}  // namespace

PYBIND11_MODULE(_liteswarm, m) {
    m.doc() = "liteswarm core bindings";

    m.def("lexical_score", &lexical_score, py::arg("query"), py::arg("text"));

    py::class_<MemoryScope>(m, "MemoryScope")
        .def_static("user", &MemoryScope::user)
        .def_static("agent_shared", &MemoryScope::agent_shared)
        .def_readonly("id", &MemoryScope::id);

    py::class_<MemoryRecord>(m, "MemoryRecord")
        .def_readonly("record_id", &MemoryRecord::record_id)
        .def_readonly("text", &MemoryRecord::text)
        .def_readonly("created_at", &MemoryRecord::created_at);

    py::class_<ScoredMemory>(m, "ScoredMemory")
        .def_readonly("record", &ScoredMemory::record)
        .def_readonly("score", &ScoredMemory::score);

    py::class_<MemoryStore, std::shared_ptr<MemoryStore>>(m, "MemoryStore")
        .def(py::init<>())
        .def(py::init<std::string>(), py::arg("journal_path"))
        .def("store", &MemoryStore::store, py::arg("text"), py::arg("scope"))
        .def("retrieve", &MemoryStore::retrieve, py::arg("query"), py::arg("scope"),
             py::arg("k") = 5)
        .def("forget_scope", &MemoryStore::forget_scope)
        .def("size", &MemoryStore::size);

    py::class_<ThoughtPlan>(m, "ThoughtPlan")
        .def_readonly("raw_text", &ThoughtPlan::raw_text)
        .def_property_readonly("steps", [](const ThoughtPlan& plan) {
            py::dict out;
            static const char* keys[] = {
                "problem_definition",        "information_gathering",
                "problem_decomposition",     "multi_dimensional_analysis",
                "establishing_connections",  "solution_generation",
                "evaluation_and_selection",  "implementation_and_feedback"};
            for (std::size_t i = 0; i < 8; ++i) {
                out[keys[i]] = plan.steps[i] ? py::cast(*plan.steps[i]) : py::none();
            }
            return out;
        });

    m.def("parse_plan", &parse_plan, py::arg("text"));
    m.def("render_plan", &render_plan, py::arg("plan"));

    py::class_<Provider, std::shared_ptr<Provider>>(m, "Provider");

    py::class_<ScriptedProvider, Provider, std::shared_ptr<ScriptedProvider>>(
        m, "ScriptedProvider")
        .def(py::init([](const py::list& rules, std::size_t chunk_size) {
                 return scripted_from_rules(rules, chunk_size);
             }),
             py::arg("rules"), py::arg("stream_chunk_size") = 2)
        .def("call_count", &ScriptedProvider::call_count);

    py::class_<ToolSpec>(m, "ToolSpec")
        .def_readonly("name", &ToolSpec::name)
        .def_readonly("description", &ToolSpec::description)
        .def("to_dict", [](const ToolSpec& spec) { return json_to_py(spec.to_json()); })
        .def_static("from_dict", [](const py::handle& obj) {
            return ToolSpec::from_json(json_from_py(obj));
        });

    m.def("to_wire_schema",
          [](const ToolSpec& spec) { return json_to_py(to_wire_schema(spec)); });
    m.def("parse_arguments", [](const ToolSpec& spec, const std::string& text) {
        return json_to_py(parse_arguments(spec, text));
    });
    m.def("validate_spec_file", &validate_spec_file, py::arg("path"));
    m.def("search_news_spec", &search_news_spec);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("final_text", &RunResult::final_text)
        .def_readonly("iterations_used", &RunResult::iterations_used)
        .def_readonly("memories_injected", &RunResult::memories_injected)
        .def_readonly("hit_iteration_limit", &RunResult::hit_iteration_limit)
        .def_property_readonly("tool_invocations", [](const RunResult& result) {
            py::list out;
            for (const auto& [call, tool_result] : result.tool_invocations) {
                out.append(py::make_tuple(call.name, tool_result.ok, tool_result.content));
            }
            return out;
        });

    py::class_<Agent, std::shared_ptr<Agent>>(m, "Agent")
        .def(py::init([](const std::string& name, const std::string& role,
                         std::shared_ptr<Provider> provider, bool memory_enabled,
                         bool self_learning, int max_iterations,
                         const py::list& tool_dicts) {
                 AgentConfig config;
                 config.name = name;
                 config.role = role;
                 config.memory_enabled = memory_enabled;
                 config.self_learning = self_learning;
                 config.max_iterations = max_iterations;
                 for (const auto& t : tool_dicts) {
                     config.tools.push_back(ToolSpec::from_json(json_from_py(t)));
                 }
                 auto agent = new_agent(std::move(config), std::move(provider));
                 agent->tool_registry().register_builtin_handler("search_news",
                                                                 search_news_handler);
                 return agent;
             }),
             py::arg("name"), py::arg("role"), py::arg("provider"),
             py::arg("memory_enabled") = false, py::arg("self_learning") = false,
             py::arg("max_iterations") = 10, py::arg("tools") = py::list())
        .def("run",
             [](Agent& agent, const std::string& query, const std::string& user_id) {
                 RunOptions options;
                 options.user_id = user_id;
                 return agent.run(query, options);
             },
             py::arg("query"), py::arg("user_id") = "default")
        .def_property_readonly("name", [](const Agent& a) { return a.name(); });

    py::class_<Swarm, std::shared_ptr<Swarm>>(m, "Swarm")
        .def(py::init<std::shared_ptr<Provider>>(), py::arg("router_provider"))
        .def("register_agent", &Swarm::register_agent, py::arg("agent"),
             py::arg("capacity") = py::none())
        .def("run",
             [](Swarm& swarm, const std::string& entry, const std::string& query) {
                 auto [result, trace] = swarm.run(entry, query);
                 py::list hops;
                 for (const auto& hop : trace.hops) {
                     hops.append(py::make_tuple(hop.from_agent, hop.to_agent));
                 }
                 return py::make_tuple(result, trace.final_agent, hops);
             },
             py::arg("entry"), py::arg("query"));
}
