// Python bindings. JSON crosses the boundary as text; the pure-Python
// package wraps it into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "curator/canonical.hpp"
#include "curator/curation.hpp"
#include "curator/dsl.hpp"
#include "curator/export/package.hpp"
#include "curator/import/importers.hpp"
#include "curator/schema_ops.hpp"
#include "curator/store.hpp"
#include "curator/validate.hpp"

namespace py = pybind11;
using namespace curator;

namespace {

std::string violations_json(const ValidationReport& report) { return canonical_dump(to_json(report)); }

std::string reports_json(const std::vector<OpReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j{{"index", r.index}, {"op", r.op}, {"ok", r.ok}, {"post_version", r.post_version}, {"type_count", r.type_count}};
        if (!r.ok) {
            j["rule"] = r.rule;
            j["path"] = r.path;
            j["message"] = r.message;
        }
        out.push_back(std::move(j));
    }
    return canonical_dump(out);
}

std::string schema_json(const Collection& c) {
    return canonical_dump({{"schema", to_json(c.schema)}, {"version", c.schema.version}, {"type_count", c.schema.type_count()}});
}

std::string log_json(const Collection& c) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : c.log) out.push_back(to_json(r));
    return canonical_dump(out);
}

py::bytes as_bytes(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_bytes(const py::bytes& b) {
    const auto view = static_cast<std::string_view>(b);
    return Bytes(view.begin(), view.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Collection curation engine";

    static py::handle domain_error = PyErr_NewException("curator._core.DomainError", PyExc_ValueError, nullptr);
    m.attr("DomainError") = domain_error;
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DomainError& e) {
            py::object err = py::reinterpret_borrow<py::object>(domain_error)(e.what());
            err.attr("rule") = e.rule();
            err.attr("path") = e.path();
            if (const auto* syntax = dynamic_cast<const ScriptSyntaxError*>(&e)) {
                err.attr("line") = syntax->line();
                err.attr("column") = syntax->column();
            }
            if (const auto* invalid = dynamic_cast<const InvalidCollection*>(&e)) err.attr("violations") = violations_json(invalid->report());
            PyErr_SetObject(domain_error.ptr(), err.ptr());
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        }
    });

    py::class_<Collection>(m, "Collection")
        .def(py::init<>())
        .def_static("load", &load_store, py::arg("path"))
        .def_static("from_canonical", &deserialize_collection, py::arg("text"))
        .def("save", [](const Collection& c, const std::filesystem::path& path, bool as_zip) {
            if (as_zip) {
                save_store_zip(c, path);
            } else {
                save_store(c, path);
            }
        }, py::arg("path"), py::arg("as_zip") = false)
        .def_property_readonly("version", [](const Collection& c) { return c.schema.version; })
        .def_property_readonly("type_count", [](const Collection& c) { return c.schema.type_count(); })
        .def_property_readonly("document_ids", [](const Collection& c) {
            std::vector<std::string> ids;
            for (const auto& [id, d] : c.documents) ids.push_back(id);
            return ids;
        })
        .def_property_readonly("resource_ids", [](const Collection& c) {
            std::vector<std::string> ids;
            for (const auto& [id, r] : c.resources) ids.push_back(id);
            return ids;
        })
        .def("canonical", &canonical_serialize)
        .def("schema_json", &schema_json)
        .def("document_json", [](const Collection& c, const std::string& id) {
            const auto it = c.documents.find(id);
            if (it == c.documents.end()) throw DomainError("unknown-document", id, "no document " + id);
            return canonical_document(it->second);
        }, py::arg("doc_id"))
        .def("validate_json", [](const Collection& c) { return violations_json(validate_collection(c)); })
        .def("log_json", &log_json)
        .def("log_text", [](const Collection& c) {
            std::string out;
            for (const auto& r : c.log) out += r.op + "\n";
            return out;
        })
        .def("apply", [](const Collection& c, const std::string& op_line, std::int64_t timestamp) {
            auto script = parse_script(op_line);
            if (script.ops.size() != 1) throw DomainError("malformed-input", "", "expected exactly one operation");
            return apply_op(c, script.ops.front(), timestamp);
        }, py::arg("op"), py::arg("timestamp") = 0)
        .def("apply_script", [](const Collection& c, const std::string& text, std::int64_t timestamp) {
            auto result = apply_script(c, parse_script(text).ops, timestamp);
            return py::make_tuple(result.collection, reports_json(result.reports), result.failed_index);
        }, py::arg("text"), py::arg("timestamp") = 0)
        .def("edit", [](const Collection& c, const std::string& command, std::int64_t timestamp) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(command);
            } catch (const nlohmann::json::exception& e) {
                throw DomainError("malformed-input", "", e.what());
            }
            return apply_op(c, DocumentEdit{std::move(j)}, timestamp);
        }, py::arg("command"), py::arg("timestamp") = 0)
        .def("replay", [](const Collection& c, const std::string& text, const std::vector<std::int64_t>& timestamps) {
            return replay_log(c, text, timestamps);
        }, py::arg("text"), py::arg("timestamps") = std::vector<std::int64_t>{})
        .def("export", [](const Collection& c, const std::string& profile) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(profile);
            } catch (const nlohmann::json::exception& e) {
                throw DomainError("malformed-input", "", e.what());
            }
            Bytes out;
            {
                py::gil_scoped_release release;
                out = export_package(c, profile_from_json(j));
            }
            return as_bytes(out);
        }, py::arg("profile"))
        .def("__eq__", [](const Collection& a, const Collection& b) { return a == b; });

    m.def("import_source", [](const std::string& plugin, const ImportParams& params, const Collection& sink) {
        auto p = make_plugin(plugin);
        ImportResult result;
        {
            py::gil_scoped_release release;
            result = run_import(sink, *p, params);
        }
        return py::make_tuple(result.collection, canonical_dump(to_json(result.report)));
    }, py::arg("plugin"), py::arg("params"), py::arg("sink") = Collection{});

    m.def("validate_package_json", [](const py::bytes& archive) { return violations_json(validate_package(from_bytes(archive))); },
          py::arg("archive"));
    m.def("normalize_script", [](const std::string& text) { return print_script(parse_script(text).ops); }, py::arg("text"));
}
