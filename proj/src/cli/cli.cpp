#include "curator/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "curator/canonical.hpp"
#include "curator/curation.hpp"
#include "curator/digest.hpp"
#include "curator/dsl.hpp"
#include "curator/export/package.hpp"
#include "curator/import/importers.hpp"
#include "curator/schema_ops.hpp"
#include "curator/service.hpp"
#include "curator/store.hpp"

namespace curator {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
    auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
    return out;
}

LinkTarget parse_target(const std::string& text) {
    if (text.starts_with("doc:")) return {LinkKind::InternalDocument, text.substr(4)};
    if (text.starts_with("annotation:")) return {LinkKind::InternalAnnotation, text.substr(11)};
    return {LinkKind::ExternalUrl, text};
}

void print_types(std::ostream& out, const ElementType& type, const ElementPath& at) {
    for (const auto& child : type.children) {
        auto path = at.child(child.name);
        out << print_path(path) << "  " << to_string(child.kind) << "  " << to_string(child.multiplicity) << "\n";
        print_types(out, child, path);
    }
}

// Applies ops to a stored collection under its lock and saves on success.
struct Mutation {
    fs::path path;
    StoreLock lock;
    Collection head;
    explicit Mutation(const fs::path& p) : path(p), lock(p), head(load_store(p)) {}
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    bool porcelain = false;

    void emit(const json& j) { out << canonical_dump(j); }
};

// -- commands ---------------------------------------------------------------

struct ImportArgs {
    std::string plugin;
    std::string base_url;
    std::string path;
    std::optional<std::size_t> max_cases;
    std::vector<std::string> params;
    std::string out;
};

int cmd_import(Context& ctx, const ImportArgs& a) {
    ImportParams params;
    if (!a.base_url.empty()) params["base_url"] = a.base_url;
    if (!a.path.empty()) params["path"] = a.path;
    if (a.max_cases) params["max_cases"] = std::to_string(*a.max_cases);
    for (const auto& kv : a.params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--param expects key=value, got " + kv);
        params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    auto plugin = make_plugin(a.plugin);
    const fs::path out_path = a.out;
    if (a.plugin == "medpix" && !params.contains("state_dir")) {
        params["state_dir"] = (out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path()).string();
    }
    const bool exists = fs::exists(out_path);
    std::optional<StoreLock> lock;
    if (exists) lock.emplace(out_path);
    Collection sink = exists ? load_store(out_path) : Collection{};
    auto result = run_import(sink, *plugin, params);
    save_store(result.collection, out_path);
    if (ctx.porcelain) {
        auto j = to_json(result.report);
        j["type_count"] = result.collection.schema.type_count();
        j["version"] = result.collection.schema.version;
        ctx.emit(j);
    } else {
        const auto& r = result.report;
        ctx.out << "documents: " << r.documents << "\n"
                << "linked documents: " << r.linked_documents << "\n"
                << "resources: " << r.resources << "\n"
                << "skipped: " << r.skipped << "\n"
                << "element types: " << result.collection.schema.type_count() << "\n";
        for (const auto& e : r.errors) ctx.err << "warning: " << e << "\n";
    }
    return kExitOk;
}

int cmd_schema_show(Context& ctx, const std::string& store) {
    auto c = load_store(store);
    if (ctx.porcelain) {
        ctx.emit({{"schema", to_json(c.schema)}, {"type_count", c.schema.type_count()}, {"version", c.schema.version}});
        return kExitOk;
    }
    print_types(ctx.out, c.schema.root, ElementPath{});
    ctx.out << "element types: " << c.schema.type_count() << "\n"
            << "version: " << c.schema.version << "\n";
    return kExitOk;
}

int report_script(Context& ctx, const ScriptResult& result, bool dry_run) {
    if (ctx.porcelain) {
        json reports = json::array();
        for (const auto& r : result.reports) {
            json j = {{"index", r.index}, {"op", r.op}, {"ok", r.ok}};
            if (r.ok) {
                j["version"] = r.post_version;
                j["type_count"] = r.type_count;
            } else {
                j["rule"] = r.rule;
                j["path"] = r.path;
                j["message"] = r.message;
            }
            reports.push_back(j);
        }
        ctx.emit({{"ok", result.ok()},
                  {"dry_run", dry_run},
                  {"reports", reports},
                  {"version", result.collection.schema.version},
                  {"type_count", result.collection.schema.type_count()}});
    } else {
        for (const auto& r : result.reports) {
            if (r.ok) {
                ctx.out << "ok   [" << r.index << "] " << r.op << "  (types " << r.type_count << ", version " << r.post_version << ")\n";
            } else {
                ctx.out << "FAIL [" << r.index << "] " << r.op << ": " << r.rule << " at " << r.path << ": " << r.message << "\n";
            }
        }
        if (!result.ok()) {
            ctx.out << "aborted; no changes written\n";
        } else if (dry_run) {
            ctx.out << "dry run: " << result.reports.size() << " ops would apply; no changes written\n";
        } else {
            ctx.out << "applied " << result.reports.size() << " ops; version " << result.collection.schema.version << "; element types "
                    << result.collection.schema.type_count() << "\n";
        }
    }
    if (!result.ok()) {
        const auto& failed = result.reports.back();
        ctx.err << "error: " << failed.rule << ": " << failed.message << "\n";
        return kExitDomain;
    }
    return kExitOk;
}

int apply_and_save(Context& ctx, const fs::path& store, const std::vector<CurationOp>& ops, bool dry_run) {
    if (dry_run) {
        auto c = load_store(store);
        return report_script(ctx, apply_script(c, ops, default_clock()), true);
    }
    Mutation m(store);
    auto result = apply_script(m.head, ops, default_clock());
    if (result.ok()) save_store(result.collection, store);
    return report_script(ctx, result, false);
}

int cmd_schema_apply(Context& ctx, const std::string& store, const std::string& script, bool dry_run) {
    auto parsed = parse_script(read_text(script));
    return apply_and_save(ctx, store, parsed.ops, dry_run);
}

struct DocArgs {
    std::string store;
    std::string doc;
    std::string path;
    std::vector<std::string> value;
    std::string link_type;
    bool dry_run = false;
};

int cmd_doc(Context& ctx, const std::string& action, const DocArgs& a) {
    InstancePath path;
    try {
        path = InstancePath::parse(a.path);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto text = join(a.value);
    DocumentEdit edit;
    if (action == "set") {
        edit = set_value_edit(a.doc, path, text);
    } else if (action == "link") {
        if (a.value.size() != 1) throw UsageError("doc link expects exactly one target (doc:ID, annotation:ID or a URL)");
        edit = link_edit(a.doc, path, parse_target(a.value.front()),
                         a.link_type.empty() ? std::nullopt : std::optional<std::string>(a.link_type));
    } else {
        if (path.is_root()) throw UsageError("doc insert needs the path of the new element");
        auto c = load_store(a.store);
        const auto type_path = path.type_path();
        const auto* type = c.schema.find(type_path);
        if (!type) throw DomainError("unknown-path", type_path.str(), "no element type " + type_path.str());
        ElementInstance element{type->name, std::string()};
        switch (type->kind) {
            case ElementKind::Atomic: element.payload = text; break;
            case ElementKind::Composite: element.payload = std::vector<ElementInstance>{}; break;
            case ElementKind::ResourceRef: element.payload = ResourceRef{text}; break;
            case ElementKind::Link: element.payload = parse_target(text); break;
            case ElementKind::Quiz:
                try {
                    element.payload = mcq_from_json(json::parse(text));
                } catch (const json::exception& e) {
                    throw UsageError(std::string("quiz value must be a JSON question: ") + e.what());
                }
                break;
        }
        edit = insert_edit(a.doc, path.parent(), element);
    }
    return apply_and_save(ctx, a.store, {edit}, a.dry_run);
}

struct AnnotateArgs {
    std::string store;
    std::string resource;
    std::string rect;
    std::string comment;
    std::string author;
};

int cmd_annotate(Context& ctx, const AnnotateArgs& a) {
    auto parts = split_list(a.rect);
    if (parts.size() != 4) throw UsageError("--rect expects x,y,w,h");
    Region region;
    try {
        region = {std::stoll(parts[0]), std::stoll(parts[1]), std::stoll(parts[2]), std::stoll(parts[3])};
    } catch (const std::exception&) {
        throw UsageError("--rect expects four integers");
    }
    Mutation m(a.store);
    const auto id = annotation_id(a.resource, region, a.comment);
    const bool existed = m.head.annotations.contains(id);
    if (!existed) {
        auto next = apply_op(m.head, annotate_edit(a.resource, region, a.comment, a.author), default_clock());
        save_store(next, a.store);
    }
    if (ctx.porcelain) {
        ctx.emit({{"id", id}, {"created", !existed}});
    } else {
        ctx.out << id << "\n";
    }
    return kExitOk;
}

struct ExportArgs {
    std::string store;
    std::string format = "imscp";
    std::string select;
    std::string documents;
    std::string detail = "full";
    std::string summary;
    bool quizzes = false;
    std::optional<std::int64_t> epoch;
    std::string title;
    std::string profile;
    std::string out;
};

ExportProfile export_profile(const ExportArgs& a) {
    ExportProfile p;
    if (!a.profile.empty()) p = profile_from_json(json::parse(read_text(a.profile)));
    auto format = parse_package_format(a.format);
    if (!format) throw UsageError("--format must be imscp or scorm12");
    p.format = *format;
    try {
        for (const auto& s : split_list(a.select)) p.selection.push_back(ElementPath::parse(s));
        for (const auto& s : split_list(a.summary)) p.summary_paths.push_back(ElementPath::parse(s));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!a.documents.empty()) p.document_filter = split_list(a.documents);
    if (a.detail == "summary") {
        p.detail = Detail::Summary;
    } else if (a.detail != "full") {
        throw UsageError("--detail must be full or summary");
    }
    p.include_quizzes = p.include_quizzes || a.quizzes;
    if (a.epoch) p.fixed_epoch = a.epoch;
    if (!a.title.empty()) p.title = a.title;
    return p;
}

int cmd_export(Context& ctx, const ExportArgs& a) {
    auto c = load_store(a.store);
    auto profile = export_profile(a);
    check_profile(c, profile);
    auto bytes = export_package(c, profile);
    write_file_atomic(a.out, bytes);
    const auto digest = sha256_hex(bytes);
    if (ctx.porcelain) {
        ctx.emit({{"path", a.out}, {"bytes", bytes.size()}, {"sha256", digest}, {"profile", to_json(profile)}});
    } else {
        ctx.out << "wrote " << a.out << " (" << bytes.size() << " bytes, sha256 " << digest << ")\n";
    }
    return kExitOk;
}

int cmd_validate(Context& ctx, const std::string& target) {
    ValidationReport report;
    std::string kind;
    if (is_store(target)) {
        kind = "collection";
        report = validate_collection(load_store(target));
    } else {
        kind = "package";
        auto bytes = read_file(target);
        report = validate_package(bytes);
    }
    if (ctx.porcelain) {
        ctx.emit({{"kind", kind}, {"ok", report.empty()}, {"violations", to_json(report)}});
    } else if (report.empty()) {
        ctx.out << kind << " ok\n";
    } else {
        ctx.out << format_report(report);
        ctx.out << report.size() << " violation(s)\n";
    }
    return report.empty() ? kExitOk : kExitDomain;
}

int cmd_log(Context& ctx, const std::string& store) {
    auto c = load_store(store);
    if (ctx.porcelain) {
        json records = json::array();
        for (const auto& r : c.log) records.push_back(to_json(r));
        ctx.emit({{"records", records}});
    } else {
        for (const auto& r : c.log) ctx.out << r.op << "\n";
    }
    return kExitOk;
}

int cmd_replay(Context& ctx, const std::string& base, const std::string& script, const std::string& records_from, const std::string& out) {
    auto c = load_store(base);
    std::vector<std::int64_t> timestamps;
    if (!records_from.empty()) {
        for (const auto& r : load_store(records_from).log) timestamps.push_back(r.timestamp);
    }
    auto next = replay_log(c, read_text(script), timestamps);
    save_store(next, out);
    if (ctx.porcelain) {
        ctx.emit({{"version", next.schema.version}, {"type_count", next.schema.type_count()}});
    } else {
        ctx.out << "replayed to version " << next.schema.version << "; element types " << next.schema.type_count() << "\n";
    }
    return kExitOk;
}

int cmd_serve(Context& ctx, const std::string& bind, const std::string& storage, const std::string& fixtures) {
    auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw UsageError("--bind expects host:port");
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("--bind expects host:port");
    }
    ServiceOptions options;
    options.storage_root = storage;
    options.clock = default_clock;
    if (!fixtures.empty()) options.fixture_root = fixtures;
    ctx.err << "listening on " << bind << ", storage " << storage << "\n";
    if (!serve(options, bind.substr(0, colon), port)) throw IoError("cannot bind " + bind);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Curation engine for digital medical collections", "curator"};
    app.require_subcommand(1);
    Context ctx{out, err};
    app.add_flag("--porcelain", ctx.porcelain, "Emit canonical JSON instead of human-readable text");

    ImportArgs import_args;
    auto* import = app.add_subcommand("import", "Import a source into a collection store");
    import->add_option("--plugin", import_args.plugin, "files, tabular, medpix or package")->required();
    import->add_option("--base-url", import_args.base_url, "MedPix-style endpoint (http(s)://, file:// or a directory)");
    import->add_option("--path", import_args.path, "Input file or directory");
    import->add_option("--max-cases", import_args.max_cases, "Stop after this many cases");
    import->add_option("--param", import_args.params, "Extra plugin parameter key=value");
    import->add_option("out", import_args.out, "Collection store (.clv)")->required();

    auto* schema = app.add_subcommand("schema", "Inspect or curate the schema");
    schema->require_subcommand(1);
    std::string schema_store, script_path;
    bool dry_run = false;
    auto* show = schema->add_subcommand("show", "Print element paths, kinds and multiplicities");
    show->add_option("store", schema_store)->required();
    auto* apply = schema->add_subcommand("apply", "Apply a curation script");
    apply->add_option("store", schema_store)->required();
    apply->add_option("script", script_path)->required()->check(CLI::ExistingFile);
    apply->add_flag("--dry-run", dry_run, "Report per-op results without writing");

    auto* doc = app.add_subcommand("doc", "Edit documents");
    doc->require_subcommand(1);
    DocArgs doc_args;
    std::string doc_action;
    const std::pair<const char*, const char*> doc_commands[] = {
        {"set", "Replace the text of an atomic element"},
        {"insert", "Insert a new element at the given path"},
        {"link", "Add a link under a composite (doc:ID, annotation:ID or a URL)"},
    };
    for (const auto& command : doc_commands) {
        const char* name = command.first;
        auto* sub = doc->add_subcommand(name, command.second);
        sub->add_option("store", doc_args.store)->required();
        sub->add_option("doc", doc_args.doc)->required();
        sub->add_option("path", doc_args.path)->required();
        sub->add_option("value", doc_args.value);
        sub->add_flag("--dry-run", doc_args.dry_run);
        if (std::string(name) == "link") sub->add_option("--type", doc_args.link_type, "Link element name under the parent");
        sub->callback([&doc_action, name] { doc_action = name; });
    }

    AnnotateArgs annotate_args;
    auto* annotate = app.add_subcommand("annotate", "Annotate a region of an image resource");
    annotate->add_option("store", annotate_args.store)->required();
    annotate->add_option("resource", annotate_args.resource)->required();
    annotate->add_option("--rect", annotate_args.rect, "x,y,w,h")->required();
    annotate->add_option("--comment", annotate_args.comment)->required();
    annotate->add_option("--author", annotate_args.author);

    ExportArgs export_args;
    auto* exp = app.add_subcommand("export", "Export an IMS CP or SCORM 1.2 package");
    exp->add_option("store", export_args.store)->required();
    exp->add_option("--format", export_args.format, "imscp or scorm12");
    exp->add_option("--select", export_args.select, "Comma-separated element paths");
    exp->add_option("--documents", export_args.documents, "Comma-separated document ids");
    exp->add_option("--detail", export_args.detail, "full or summary");
    exp->add_option("--summary", export_args.summary, "Comma-separated paths kept by --detail summary");
    exp->add_flag("--quizzes", export_args.quizzes, "Include quiz SCOs");
    exp->add_option("--epoch", export_args.epoch, "Fixed timestamp for archive entries");
    exp->add_option("--title", export_args.title, "Package and organization title");
    exp->add_option("--profile", export_args.profile, "Export profile JSON file");
    exp->add_option("-o,--output", export_args.out)->required();

    std::string validate_target;
    auto* validate = app.add_subcommand("validate", "Validate a collection store or a package zip");
    validate->add_option("target", validate_target)->required();

    std::string log_store;
    auto* log = app.add_subcommand("log", "Print the applied op history as a curation script");
    log->add_option("store", log_store)->required();

    std::string replay_base, replay_script, replay_records, replay_out;
    auto* replay = app.add_subcommand("replay", "Replay a curation log onto a base store");
    replay->add_option("base", replay_base)->required();
    replay->add_option("script", replay_script)->required()->check(CLI::ExistingFile);
    replay->add_option("--timestamps-from", replay_records, "Store whose log records supply timestamps");
    replay->add_option("-o,--output", replay_out)->required();

    std::string bind = "127.0.0.1:8080", storage = "storage", fixtures;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--bind", bind)->envname("CURATOR_BIND");
    serve_cmd->add_option("--storage", storage)->envname("CURATOR_STORAGE");
    serve_cmd->add_option("--fixtures", fixtures, "Fixture root for fixture mode")->envname("CURATOR_FIXTURES");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*import) return cmd_import(ctx, import_args);
        if (*show) return cmd_schema_show(ctx, schema_store);
        if (*apply) return cmd_schema_apply(ctx, schema_store, script_path, dry_run);
        if (*doc) return cmd_doc(ctx, doc_action, doc_args);
        if (*annotate) return cmd_annotate(ctx, annotate_args);
        if (*exp) return cmd_export(ctx, export_args);
        if (*validate) return cmd_validate(ctx, validate_target);
        if (*log) return cmd_log(ctx, log_store);
        if (*replay) return cmd_replay(ctx, replay_base, replay_script, replay_records, replay_out);
        if (*serve_cmd) return cmd_serve(ctx, bind, storage, fixtures);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ScriptSyntaxError& e) {
        err << "error: " << e.rule() << " at line " << e.line() << ", column " << e.column() << ": " << e.what() << "\n";
        return kExitDomain;
    } catch (const InvalidCollection& e) {
        err << "error: " << e.what() << "\n" << format_report(e.report());
        return kExitDomain;
    } catch (const DomainError& e) {
        err << "error: " << e.rule() << (e.path().empty() ? "" : " at " + e.path()) << ": " << e.what() << "\n";
        return kExitDomain;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed-input: " << e.what() << "\n";
        return kExitDomain;
    }
    err << "usage error: no command\n";
    return kExitUsage;
}

}  // namespace curator
