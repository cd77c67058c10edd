#include "curator/service.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "curator/canonical.hpp"
#include "curator/curation.hpp"
#include "curator/dsl.hpp"
#include "curator/export/package.hpp"
#include "curator/import/importers.hpp"
#include "curator/schema_ops.hpp"
#include "curator/store.hpp"

namespace curator {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t default_clock() {
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        try {
            return std::stoll(env);
        } catch (const std::exception&) {
        }
    }
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

namespace {

/// Thrown inside handlers to produce a plain HTTP error.
struct HttpError : std::runtime_error {
    int status;
    std::string code;
    HttpError(int s, std::string c, const std::string& message) : std::runtime_error(message), status(s), code(std::move(c)) {}
};

enum class JobState { Queued, Running, Done, Failed };

std::string_view to_string(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Done: return "done";
        case JobState::Failed: return "failed";
    }
    return "failed";
}

struct ExportJob {
    std::string id;
    ExportProfile profile;
    JobState state = JobState::Queued;
    fs::path artifact;
    std::string error;
    std::int64_t version = 0;
};

struct Entry {
    std::string id;
    fs::path dir;
    std::mutex write_mutex;  // one writer at a time
    mutable std::mutex head_mutex;  // guards the pointer swap only
    std::shared_ptr<const Collection> head;
    std::mutex jobs_mutex;
    std::map<std::string, ExportJob> jobs;
    std::size_t next_job = 1;

    std::shared_ptr<const Collection> snapshot() const {
        std::lock_guard lock(head_mutex);
        return head;
    }
    void publish(Collection c) {
        auto next = std::make_shared<const Collection>(std::move(c));
        std::lock_guard lock(head_mutex);
        head = std::move(next);
    }
    fs::path store_path() const { return dir / "store"; }
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(canonical_dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& rule, const std::string& path, const std::string& message,
                const json& extra = json::object()) {
    json body = {{"rule", rule}, {"path", path}, {"message", message}};
    for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = it.value();
    send_json(res, body, status);
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw HttpError(400, "malformed-request", std::string("request body is not JSON: ") + e.what());
    }
}

std::optional<std::int64_t> if_match(const httplib::Request& req) {
    if (!req.has_header("If-Match")) return std::nullopt;
    auto value = req.get_header_value("If-Match");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
        std::size_t used = 0;
        auto v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw HttpError(400, "malformed-request", "If-Match must be a version number");
    }
}

void check_version(const Collection& head, std::optional<std::int64_t> expected, bool required) {
    if (!expected) {
        if (required) throw HttpError(428, "precondition-required", "If-Match header with the current version is required");
        return;
    }
    if (*expected != head.schema.version) {
        throw HttpError(409, "stale-version",
                        "version " + std::to_string(*expected) + " is stale; current is " + std::to_string(head.schema.version));
    }
}

json report_json(const OpReport& r) {
    json j = {{"index", r.index}, {"op", r.op}, {"ok", r.ok}};
    if (r.ok) {
        j["version"] = r.post_version;
        j["type_count"] = r.type_count;
    } else {
        j["rule"] = r.rule;
        j["path"] = r.path;
        j["message"] = r.message;
    }
    return j;
}

json script_json(const ScriptResult& result) {
    json reports = json::array();
    for (const auto& r : result.reports) reports.push_back(report_json(r));
    return reports;
}

void set_etag(httplib::Response& res, std::int64_t version) { res.set_header("ETag", "\"" + std::to_string(version) + "\""); }

std::size_t query_size(const httplib::Request& req, const std::string& key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    try {
        return std::stoul(req.get_param_value(key));
    } catch (const std::exception&) {
        throw HttpError(400, "malformed-request", "query parameter " + key + " must be a number");
    }
}

}  // namespace

struct Service::Impl {
    ServiceOptions options;
    std::shared_mutex registry_mutex;
    std::map<std::string, std::shared_ptr<Entry>> entries;
    std::size_t next_id = 1;
    std::mutex threads_mutex;
    std::vector<std::thread> threads;

    explicit Impl(ServiceOptions o) : options(std::move(o)) {
        if (!options.clock) options.clock = default_clock;
        fs::create_directories(options.storage_root);
        for (const auto& item : fs::directory_iterator(options.storage_root)) {
            if (!item.is_directory() || !is_store(item.path() / "store")) continue;
            auto entry = std::make_shared<Entry>();
            entry->id = item.path().filename().string();
            entry->dir = item.path();
            entry->publish(load_store(entry->store_path()));
            entries.emplace(entry->id, entry);
            next_id = std::max(next_id, numeric_suffix(entry->id) + 1);
        }
    }

    static std::size_t numeric_suffix(const std::string& id) {
        if (id.size() < 2 || id[0] != 'c') return 0;
        try {
            return std::stoul(id.substr(1));
        } catch (const std::exception&) {
            return 0;
        }
    }

    std::shared_ptr<Entry> find(const std::string& id) {
        std::shared_lock lock(registry_mutex);
        auto it = entries.find(id);
        if (it == entries.end()) throw HttpError(404, "unknown-collection", "no collection " + id);
        return it->second;
    }

    std::shared_ptr<Entry> create(Collection c) {
        std::unique_lock lock(registry_mutex);
        auto entry = std::make_shared<Entry>();
        char buf[32];
        std::snprintf(buf, sizeof buf, "c%04zu", next_id++);
        entry->id = buf;
        entry->dir = options.storage_root / entry->id;
        fs::create_directories(entry->dir);
        save_store(c, entry->store_path());
        entry->publish(std::move(c));
        entries.emplace(entry->id, entry);
        return entry;
    }

    static void commit(Entry& entry, Collection next) {
        save_store(next, entry.store_path());
        entry.publish(std::move(next));
    }

    template <typename Fn>
    static void guarded(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const HttpError& e) {
            send_error(res, e.status, e.code, "", e.what());
        } catch (const InvalidCollection& e) {
            send_error(res, 422, e.rule(), e.path(), e.what(), {{"violations", to_json(e.report())}});
        } catch (const ScriptSyntaxError& e) {
            send_error(res, 422, e.rule(), e.path(), e.what(), {{"line", e.line()}, {"column", e.column()}});
        } catch (const DomainError& e) {
            send_error(res, 422, e.rule(), e.path(), e.what());
        } catch (const IoError& e) {
            send_error(res, 502, "io-error", "", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal-error", "", e.what());
        }
    }

    // -- collections ------------------------------------------------------

    void create_collection(const httplib::Request& req, httplib::Response& res) {
        Collection c;
        if (!req.body.empty()) {
            std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size());
            if (!zip::looks_like_zip(bytes)) throw HttpError(400, "malformed-request", "upload must be a zipped .clv store");
            c = load_store_entries(zip::read(bytes));
        }
        auto entry = create(std::move(c));
        auto head = entry->snapshot();
        set_etag(res, head->schema.version);
        send_json(res, {{"id", entry->id}, {"version", head->schema.version}}, 201);
    }

    static json summary(const Entry& entry, const Collection& c) {
        return {{"id", entry.id},
                {"version", c.schema.version},
                {"type_count", c.schema.type_count()},
                {"documents", c.documents.size()},
                {"resources", c.resources.size()},
                {"annotations", c.annotations.size()},
                {"log_length", c.log.size()}};
    }

    void list_collections(httplib::Response& res) {
        json out = json::array();
        std::shared_lock lock(registry_mutex);
        for (const auto& [id, entry] : entries) out.push_back(summary(*entry, *entry->snapshot()));
        send_json(res, out);
    }

    // -- import ----------------------------------------------------------

    ImportParams import_params(const std::string& plugin, const json& body, const Entry& entry) {
        ImportParams params;
        if (body.contains("params")) {
            if (!body["params"].is_object()) throw HttpError(400, "malformed-request", "params must be an object");
            for (const auto& [key, value] : body["params"].items()) {
                params[key] = value.is_string() ? value.get<std::string>() : value.dump();
            }
        }
        if (options.fixture_root) {
            if (plugin == "medpix" && !params.contains("base_url")) params["base_url"] = (*options.fixture_root / "medpix").string();
            if (auto it = params.find("path"); it != params.end() && fs::path(it->second).is_relative()) {
                it->second = (*options.fixture_root / it->second).string();
            }
        }
        if (plugin == "medpix" && !params.contains("state_dir")) params["state_dir"] = (entry.dir / "import-state").string();
        return params;
    }

    void run_import_request(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        const auto body = parse_body(req);
        if (!body.contains("plugin") || !body["plugin"].is_string()) throw HttpError(400, "malformed-request", "plugin is required");
        const auto name = body["plugin"].get<std::string>();
        auto plugin = make_plugin(name);
        const auto params = import_params(name, body, *entry);

        std::lock_guard write(entry->write_mutex);
        auto head = entry->snapshot();
        check_version(*head, if_match(req), false);
        auto result = run_import(*head, *plugin, params);
        commit(*entry, std::move(result.collection));
        auto j = to_json(result.report);
        j["version"] = entry->snapshot()->schema.version;
        send_json(res, j);
    }

    // -- schema ----------------------------------------------------------

    void get_schema(const httplib::Request& req, httplib::Response& res) {
        auto head = find(req.path_params.at("id"))->snapshot();
        set_etag(res, head->schema.version);
        send_json(res, {{"schema", to_json(head->schema)}, {"version", head->schema.version}, {"type_count", head->schema.type_count()}});
    }

    static std::vector<CurationOp> ops_from_request(const httplib::Request& req) {
        const auto type = req.get_header_value("Content-Type");
        if (type.starts_with("application/json")) {
            auto body = parse_body(req);
            const json* list = body.is_array() ? &body : (body.contains("ops") ? &body["ops"] : nullptr);
            if (!list || !list->is_array()) throw HttpError(400, "malformed-request", "expected {\"ops\": [...]}");
            std::string text;
            for (const auto& line : *list) {
                if (!line.is_string()) throw HttpError(400, "malformed-request", "each op must be a DSL line");
                text += line.get<std::string>() + "\n";
            }
            return parse_script(text).ops;
        }
        return parse_script(req.body).ops;
    }

    void apply_ops(Entry& entry, const httplib::Request& req, httplib::Response& res, const std::vector<CurationOp>& ops,
                   const std::function<json(const Collection&)>& extra) {
        std::lock_guard write(entry.write_mutex);
        auto head = entry.snapshot();
        check_version(*head, if_match(req), true);
        const bool dry_run = req.has_param("dry_run") && req.get_param_value("dry_run") != "0";
        auto result = apply_script(*head, ops, options.clock());
        if (!result.ok()) {
            const auto& failed = result.reports.back();
            set_etag(res, head->schema.version);
            send_error(res, 422, failed.rule, failed.path, failed.message,
                       {{"failed_index", *result.failed_index}, {"reports", script_json(result)}, {"version", head->schema.version}});
            return;
        }
        json body = {{"version", result.collection.schema.version}, {"reports", script_json(result)}, {"dry_run", dry_run}};
        if (extra) {
            auto more = extra(result.collection);
            for (auto it = more.begin(); it != more.end(); ++it) body[it.key()] = it.value();
        }
        if (!dry_run) {
            body["version"] = result.collection.schema.version;
            commit(entry, std::move(result.collection));
        } else {
            body["version"] = head->schema.version;
        }
        set_etag(res, body["version"].get<std::int64_t>());
        send_json(res, body);
    }

    void post_schema_ops(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        const auto ops = ops_from_request(req);
        apply_ops(*entry, req, res, ops, [](const Collection& c) { return json{{"type_count", c.schema.type_count()}}; });
    }

    // -- documents -------------------------------------------------------

    void list_documents(const httplib::Request& req, httplib::Response& res) {
        auto head = find(req.path_params.at("id"))->snapshot();
        const auto page = query_size(req, "page", 0);
        const auto size = std::max<std::size_t>(1, std::min<std::size_t>(query_size(req, "size", 20), 500));
        json docs = json::array();
        std::size_t i = 0;
        for (const auto& [id, doc] : head->documents) {
            if (i >= page * size && i < (page + 1) * size) docs.push_back(to_json(doc));
            ++i;
        }
        set_etag(res, head->schema.version);
        send_json(res, {{"page", page},
                        {"size", size},
                        {"total", head->documents.size()},
                        {"pages", (head->documents.size() + size - 1) / size},
                        {"version", head->schema.version},
                        {"documents", docs}});
    }

    static const Document& document_of(const Collection& c, const std::string& doc_id) {
        auto it = c.documents.find(doc_id);
        if (it == c.documents.end()) throw HttpError(404, "unknown-document", "no document " + doc_id);
        return it->second;
    }

    void get_document(const httplib::Request& req, httplib::Response& res) {
        auto head = find(req.path_params.at("id"))->snapshot();
        const auto& doc = document_of(*head, req.path_params.at("doc"));
        set_etag(res, head->schema.version);
        send_json(res, {{"document", to_json(doc)}, {"version", head->schema.version}});
    }

    void patch_document(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        const auto doc_id = req.path_params.at("doc");
        document_of(*entry->snapshot(), doc_id);
        auto body = parse_body(req);
        json commands = body.contains("commands") ? body["commands"] : json::array({body});
        if (!commands.is_array() || commands.empty()) throw HttpError(400, "malformed-request", "expected an edit command");
        std::vector<CurationOp> ops;
        for (auto command : commands) {
            if (!command.is_object() || !command.contains("op")) throw HttpError(400, "malformed-request", "edit command needs \"op\"");
            const auto op = command["op"];
            if (op == "annotate") throw HttpError(400, "malformed-request", "annotations are posted to /annotations");
            command["doc"] = doc_id;
            ops.push_back(DocumentEdit{command});
        }
        apply_ops(*entry, req, res, ops, [&](const Collection& c) { return json{{"document", to_json(c.documents.at(doc_id))}}; });
    }

    // -- annotations -----------------------------------------------------

    void post_annotation(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        auto body = parse_body(req);
        json command = {{"op", "annotate"}};
        for (const auto* key : {"resource", "region", "comment", "author"}) {
            if (body.contains(key)) command[key] = body[key];
        }
        if (!command.contains("author")) command["author"] = "";
        const auto edit = DocumentEdit{command};
        // Validate shape and compute the id before taking the write lock.
        std::string id;
        try {
            const auto& r = command.at("region");
            id = annotation_id(command.at("resource").get<std::string>(),
                               Region{r.at("x").get<std::int64_t>(), r.at("y").get<std::int64_t>(), r.at("w").get<std::int64_t>(),
                                      r.at("h").get<std::int64_t>()},
                               command.at("comment").get<std::string>());
        } catch (const json::exception& e) {
            throw HttpError(400, "malformed-request", std::string("annotation needs resource, region{x,y,w,h}, comment: ") + e.what());
        }
        if (entry->snapshot()->annotations.contains(id)) {
            auto head = entry->snapshot();
            set_etag(res, head->schema.version);
            send_json(res, {{"id", id}, {"version", head->schema.version}, {"created", false}});
            return;
        }
        std::lock_guard write(entry->write_mutex);
        auto head = entry->snapshot();
        check_version(*head, if_match(req), false);
        auto next = apply_op(*head, edit, options.clock());
        const auto version = next.schema.version;
        commit(*entry, std::move(next));
        set_etag(res, version);
        send_json(res, {{"id", id}, {"version", version}, {"created", true}}, 201);
    }

    void list_annotations(const httplib::Request& req, httplib::Response& res) {
        auto head = find(req.path_params.at("id"))->snapshot();
        const auto resource = req.has_param("resource") ? std::optional(req.get_param_value("resource")) : std::nullopt;
        json out = json::array();
        for (const auto& [id, a] : head->annotations) {
            if (!resource || a.resource_id == *resource) out.push_back(to_json(a));
        }
        send_json(res, {{"annotations", out}, {"version", head->schema.version}});
    }

    // -- exports ---------------------------------------------------------

    static json job_json(const ExportJob& job) {
        json j = {{"id", job.id}, {"state", to_string(job.state)}, {"profile", to_json(job.profile)}, {"version", job.version}};
        if (job.state == JobState::Failed) j["error"] = job.error;
        return j;
    }

    void post_export(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        auto body = parse_body(req);
        auto profile = profile_from_json(body.contains("profile") ? body["profile"] : body);
        auto snapshot = entry->snapshot();
        check_profile(*snapshot, profile);

        std::string job_id;
        {
            std::lock_guard lock(entry->jobs_mutex);
            job_id = "job-" + std::to_string(entry->next_job++);
            entry->jobs[job_id] = ExportJob{job_id, profile, JobState::Queued, {}, {}, snapshot->schema.version};
        }
        std::lock_guard lock(threads_mutex);
        threads.emplace_back([entry, snapshot, profile, job_id] { run_job(*entry, *snapshot, profile, job_id); });
        send_json(res, {{"job", job_id}, {"state", "queued"}}, 202);
    }

    static void run_job(Entry& entry, const Collection& snapshot, const ExportProfile& profile, const std::string& job_id) {
        auto set = [&](JobState state, fs::path artifact, std::string error) {
            std::lock_guard lock(entry.jobs_mutex);
            auto& job = entry.jobs.at(job_id);
            job.state = state;
            job.artifact = std::move(artifact);
            job.error = std::move(error);
        };
        set(JobState::Running, {}, {});
        try {
            auto bytes = export_package(snapshot, profile);
            auto report = validate_package(bytes);
            if (!report.empty()) {
                set(JobState::Failed, {}, "package failed validation: " + format_report(report));
                return;
            }
            const auto path = entry.dir / "exports" / (job_id + ".zip");
            fs::create_directories(path.parent_path());
            write_file_atomic(path, bytes);
            set(JobState::Done, path, {});
        } catch (const DomainError& e) {
            set(JobState::Failed, {}, e.rule() + ": " + e.what());
        } catch (const std::exception& e) {
            set(JobState::Failed, {}, e.what());
        }
    }

    ExportJob job_of(Entry& entry, const std::string& job_id) {
        std::lock_guard lock(entry.jobs_mutex);
        auto it = entry.jobs.find(job_id);
        if (it == entry.jobs.end()) throw HttpError(404, "unknown-job", "no export job " + job_id);
        return it->second;
    }

    void get_export(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        send_json(res, job_json(job_of(*entry, req.path_params.at("job"))));
    }

    void get_artifact(const httplib::Request& req, httplib::Response& res) {
        auto entry = find(req.path_params.at("id"));
        auto job = job_of(*entry, req.path_params.at("job"));
        if (job.state != JobState::Done) throw HttpError(409, "job-not-done", "export job is " + std::string(to_string(job.state)));
        auto bytes = read_file(job.artifact);
        res.status = 200;
        res.set_header("Content-Disposition", "attachment; filename=\"" + job.id + ".zip\"");
        res.set_content(std::string(bytes.begin(), bytes.end()), "application/zip");
    }

    // -- log -------------------------------------------------------------

    void get_log(const httplib::Request& req, httplib::Response& res) {
        auto head = find(req.path_params.at("id"))->snapshot();
        set_etag(res, head->schema.version);
        if (req.has_param("format") && req.get_param_value("format") == "records") {
            json records = json::array();
            for (const auto& r : head->log) records.push_back(to_json(r));
            send_json(res, {{"records", records}, {"version", head->schema.version}});
            return;
        }
        std::string text;
        for (const auto& r : head->log) text += r.op + "\n";
        res.status = 200;
        res.set_content(text, "text/plain; charset=utf-8");
    }

    void join_all() {
        std::vector<std::thread> pending;
        {
            std::lock_guard lock(threads_mutex);
            pending.swap(threads);
        }
        for (auto& t : pending) t.join();
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { impl_->join_all(); }

void Service::wait_for_jobs() { impl_->join_all(); }

void Service::mount(httplib::Server& server) {
    auto* impl = impl_.get();
    auto route = [impl](void (Impl::*fn)(const httplib::Request&, httplib::Response&)) {
        return [impl, fn](const httplib::Request& req, httplib::Response& res) { Impl::guarded(res, [&] { (impl->*fn)(req, res); }); };
    };
    server.Post("/collections", route(&Impl::create_collection));
    server.Get("/collections", [impl](const httplib::Request&, httplib::Response& res) {
        Impl::guarded(res, [&] { impl->list_collections(res); });
    });
    server.Get("/collections/:id", [impl](const httplib::Request& req, httplib::Response& res) {
        Impl::guarded(res, [&] {
            auto entry = impl->find(req.path_params.at("id"));
            auto head = entry->snapshot();
            set_etag(res, head->schema.version);
            send_json(res, Impl::summary(*entry, *head));
        });
    });
    server.Post("/collections/:id/import", route(&Impl::run_import_request));
    server.Get("/collections/:id/schema", route(&Impl::get_schema));
    server.Post("/collections/:id/schema/ops", route(&Impl::post_schema_ops));
    server.Get("/collections/:id/documents", route(&Impl::list_documents));
    server.Get("/collections/:id/documents/:doc", route(&Impl::get_document));
    server.Patch("/collections/:id/documents/:doc", route(&Impl::patch_document));
    server.Post("/collections/:id/annotations", route(&Impl::post_annotation));
    server.Get("/collections/:id/annotations", route(&Impl::list_annotations));
    server.Post("/collections/:id/exports", route(&Impl::post_export));
    server.Get("/collections/:id/exports/:job", route(&Impl::get_export));
    server.Get("/collections/:id/exports/:job/artifact", route(&Impl::get_artifact));
    server.Get("/collections/:id/log", route(&Impl::get_log));
}

bool serve(const ServiceOptions& options, const std::string& host, int port) {
    Service service(options);
    httplib::Server server;
    service.mount(server);
    return server.listen(host, port);
}

}  // namespace curator
