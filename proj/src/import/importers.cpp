#include "curator/import/importers.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "curator/canonical.hpp"
#include "curator/digest.hpp"
#include "curator/errors.hpp"
#include "curator/export/xml.hpp"
#include "curator/export/zip.hpp"
#include "curator/import/medpix.hpp"
#include "curator/store.hpp"
#include "curator/validate.hpp"

namespace curator {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

nlohmann::json to_json(const ImportReport& r) {
    return {{"documents", r.documents},
            {"linked_documents", r.linked_documents},
            {"resources", r.resources},
            {"skipped", r.skipped},
            {"errors", r.errors}};
}

// ---------------------------------------------------------------- driver

namespace {

void collect_resource_refs(const ElementInstance& node, std::set<std::string>& out) {
    if (const auto* ref = std::get_if<ResourceRef>(&node.payload)) out.insert(ref->resource_id);
    if (const auto* kids = node.children()) {
        for (const auto& k : *kids) collect_resource_refs(k, out);
    }
}

}  // namespace

ImportResult import_records(const Collection& sink, const FetchResult& fetched, const std::string& plugin) {
    ImportResult result{sink, {}};
    auto& report = result.report;
    report.skipped = fetched.skipped;
    report.errors = fetched.errors;

    std::vector<RawRecord> all = fetched.records;
    all.insert(all.end(), fetched.linked.begin(), fetched.linked.end());
    const auto primary_count = fetched.records.size();

    auto built = build_documents(all, plugin);
    std::vector<RawRecord> kept_records;
    std::vector<Document> kept_docs;
    std::vector<bool> kept_primary;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < built.documents.size(); ++i) {
        auto& doc = built.documents[i];
        if (sink.documents.contains(doc.id) || !ids.insert(doc.id).second) {
            ++report.skipped;
            report.errors.push_back("document " + doc.id + ": id already present, skipped");
            continue;
        }
        kept_records.push_back(all[i]);
        kept_primary.push_back(i < primary_count);
        kept_docs.push_back(std::move(doc));
    }

    auto inferred = infer_schema(kept_records);
    const auto version = sink.schema.version;
    result.collection.schema = union_schemas(sink.schema, inferred);
    result.collection.schema.version = version;

    std::set<std::string> referenced;
    for (std::size_t i = 0; i < kept_docs.size(); ++i) {
        collect_resource_refs(kept_docs[i].root, referenced);
        (kept_primary[i] ? report.documents : report.linked_documents)++;
        auto id = kept_docs[i].id;
        result.collection.documents.emplace(std::move(id), std::move(kept_docs[i]));
    }
    for (auto& r : built.resources) {
        if (!referenced.contains(r.id) || result.collection.resources.contains(r.id)) continue;
        ++report.resources;
        auto id = r.id;
        result.collection.resources.emplace(std::move(id), std::move(r));
    }

    auto violations = validate_collection(result.collection);
    if (!violations.empty()) throw InvalidCollection(std::move(violations));
    return result;
}

ImportResult run_import(const Collection& sink, ImportPlugin& plugin, const ImportParams& params) {
    return import_records(sink, plugin.fetch(params), plugin.name());
}

// ------------------------------------------------------------- JSON trees

namespace {

[[noreturn]] void malformed(const std::string& message) { throw DomainError("malformed-input", "", message); }

std::string scalar_text(const ojson& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
}

std::string extension_of(std::string_view name) {
    const auto slash = name.find_last_of('/');
    const auto dot = name.rfind('.');
    if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash)) return "";
    return std::string(name.substr(dot + 1));
}

std::optional<RawValue> marker_value(const ojson& obj, const fs::path& base_dir) {
    if (obj.size() != 1 && !(obj.size() == 2 && obj.contains("$url") && obj.contains("$type"))) {
        for (const auto& [k, v] : obj.items()) {
            if (k.starts_with("$")) malformed("marker key " + k + " must be the only key of its object");
        }
        return std::nullopt;
    }
    const auto entry = obj.items().begin();
    const std::string key = entry.key();
    const auto& value = entry.value();
    if (!key.starts_with("$")) return std::nullopt;
    auto text = [&](const ojson& v) {
        if (!v.is_string()) malformed(key + " expects a string");
        return v.get<std::string>();
    };
    if (key == "$resource") {
        const auto rel = text(value);
        const auto p = base_dir / rel;
        std::error_code ec;
        if (!fs::is_regular_file(p, ec)) malformed("resource file not found: " + rel);
        return RawResource{media_type_for_extension(extension_of(rel)), rel, std::make_shared<const Bytes>(read_file(p))};
    }
    if (key == "$url" || key == "$type") {
        const auto url = text(obj.at("$url"));
        if (!is_valid_url(url)) malformed("malformed URL: " + url);
        auto type = obj.contains("$type") ? text(obj.at("$type")) : media_type_for_extension(extension_of(url));
        return RawResource{type, url, nullptr};
    }
    if (key == "$link") return LinkTarget{LinkKind::InternalDocument, text(value)};
    if (key == "$annotation") return LinkTarget{LinkKind::InternalAnnotation, text(value)};
    if (key == "$href") return LinkTarget{LinkKind::ExternalUrl, text(value)};
    if (key == "$mcq") {
        try {
            return mcq_from_json(nlohmann::json::parse(value.dump()));
        } catch (const DomainError& e) {
            malformed(std::string("malformed $mcq: ") + e.what());
        }
    }
    malformed("unknown marker key " + key);
}

void append_value(RawTree& out, const std::string& name, const ojson& v, const fs::path& base_dir, bool in_array) {
    if (v.is_null()) return;
    if (v.is_array()) {
        if (in_array) malformed("nested arrays are not supported (field " + name + ")");
        for (const auto& item : v) append_value(out, name, item, base_dir, true);
        return;
    }
    if (v.is_object()) {
        if (auto marker = marker_value(v, base_dir)) {
            out.push_back({name, std::move(*marker)});
        } else {
            out.push_back({name, json_to_tree(v, base_dir)});
        }
        return;
    }
    out.push_back({name, scalar_text(v)});
}

}  // namespace

RawTree json_to_tree(const ojson& object, const fs::path& base_dir) {
    if (!object.is_object()) malformed("expected a JSON object");
    RawTree out;
    for (const auto& [k, v] : object.items()) append_value(out, k, v, base_dir, false);
    return out;
}

// ------------------------------------------------------------- plugins

namespace {

std::string required(const ImportParams& params, std::string_view key) {
    auto it = params.find(key);
    if (it == params.end() || it->second.empty()) {
        throw DomainError("missing-parameter", "", "import parameter '" + std::string(key) + "' is required");
    }
    return it->second;
}

std::optional<std::size_t> size_param(const ImportParams& params, std::string_view key) {
    auto it = params.find(key);
    if (it == params.end() || it->second.empty()) return std::nullopt;
    std::size_t value = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw DomainError("bad-parameter", "", "import parameter '" + std::string(key) + "' must be a non-negative integer");
    }
    return value;
}

class FilesPlugin : public ImportPlugin {
public:
    [[nodiscard]] std::string name() const override { return "files"; }

    FetchResult fetch(const ImportParams& params) override {
        const fs::path root = required(params, "path");
        std::vector<fs::path> files;
        std::error_code ec;
        if (fs::is_directory(root, ec)) {
            for (const auto& e : fs::directory_iterator(root)) {
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
        } else if (fs::is_regular_file(root, ec)) {
            files.push_back(root);
        } else {
            throw IoError("import path not found: " + root.string());
        }
        FetchResult out;
        for (const auto& f : files) {
            try {
                const auto bytes = read_file(f);
                auto j = ojson::parse(bytes.begin(), bytes.end());
                RawRecord r;
                r.source_id = f.stem().string();
                r.locator = f.filename().string();
                r.tree = json_to_tree(j, f.parent_path());
                out.records.push_back(std::move(r));
            } catch (const ojson::parse_error& e) {
                ++out.skipped;
                out.errors.push_back(f.filename().string() + ": " + e.what());
            } catch (const DomainError& e) {
                ++out.skipped;
                out.errors.push_back(f.filename().string() + ": " + e.what());
            }
        }
        return out;
    }
};

/// RFC 4180 rows; quoted fields may contain delimiters, quotes and newlines.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delimiter) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool row_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            row_started = true;
        } else if (c == delimiter) {
            row.push_back(std::move(cell));
            cell.clear();
            row_started = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (row_started || !cell.empty()) {
                row.push_back(std::move(cell));
                rows.push_back(std::move(row));
            }
            row.clear();
            cell.clear();
            row_started = false;
        } else {
            cell += c;
            row_started = true;
        }
    }
    if (quoted) throw DomainError("malformed-input", "", "unterminated quoted field");
    if (row_started || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

class TabularPlugin : public ImportPlugin {
public:
    [[nodiscard]] std::string name() const override { return "tabular"; }

    FetchResult fetch(const ImportParams& params) override {
        const fs::path path = required(params, "path");
        char delimiter = path.extension() == ".tsv" ? '\t' : ',';
        if (auto it = params.find("delimiter"); it != params.end()) {
            if (it->second == "\\t" || it->second == "tab") {
                delimiter = '\t';
            } else if (it->second.size() == 1) {
                delimiter = it->second[0];
            } else {
                throw DomainError("bad-parameter", "", "delimiter must be a single character");
            }
        }
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) throw IoError("import file not found: " + path.string());
        const auto bytes = read_file(path);
        std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
        const auto rows = parse_delimited(text, delimiter);
        FetchResult out;
        if (rows.empty()) return out;
        const auto& header = rows.front();
        std::optional<std::size_t> id_column;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (!is_valid_name(header[i])) throw DomainError("invalid-name", "/" + header[i], "column name '" + header[i] + "' is not a valid element name");
            if (!seen.insert(header[i]).second) throw DomainError("malformed-input", "/" + header[i], "duplicate column " + header[i]);
            if (header[i] == "id") id_column = i;
        }
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            const auto line = "row " + std::to_string(r + 1);
            if (row.size() != header.size()) {
                ++out.skipped;
                out.errors.push_back(line + ": expected " + std::to_string(header.size()) + " cells, found " + std::to_string(row.size()));
                continue;
            }
            RawRecord rec;
            rec.locator = path.filename().string() + "#" + std::to_string(r + 1);
            if (id_column) rec.source_id = row[*id_column];
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (!row[i].empty()) rec.tree.push_back({header[i], row[i]});
            }
            out.records.push_back(std::move(rec));
        }
        return out;
    }
};

class MedpixPlugin : public ImportPlugin {
public:
    [[nodiscard]] std::string name() const override { return "medpix"; }

    FetchResult fetch(const ImportParams& params) override {
        MedpixOptions options;
        options.base_url = required(params, "base_url");
        options.max_cases = size_param(params, "max_cases");
        options.max_topics = size_param(params, "max_topics");
        options.max_questions = size_param(params, "max_questions");
        if (auto p = size_param(params, "parallelism")) options.parallelism = *p;
        if (auto it = params.find("rate"); it != params.end()) {
            try {
                options.requests_per_second = std::stod(it->second);
            } catch (const std::exception&) {
                throw DomainError("bad-parameter", "", "rate must be a number");
            }
        }
        if (auto it = params.find("state_dir"); it != params.end() && !it->second.empty()) options.state_dir = it->second;
        auto fetched = medpix_fetch(options);
        FetchResult out;
        out.records = std::move(fetched.cases);
        out.linked = std::move(fetched.topics);
        out.skipped = fetched.skipped;
        out.errors = std::move(fetched.errors);
        return out;
    }
};

void collect_values(const xml::Tree& node, std::vector<std::pair<std::string, std::string>>& out) {
    for (const auto& [tag, child] : node) {
        if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
        if (xml::attribute(child, "class") == "value") {
            const auto path = xml::attribute(child, "data-path");
            if (!path.empty()) out.emplace_back(path, child.data());
            continue;
        }
        collect_values(child, out);
    }
}

/// Ensures the `ordinal`-th field named `name` exists, padding with empty
/// trees (which count as absent), and returns its index.
std::size_t nth_field(RawTree& tree, const std::string& name, std::size_t ordinal) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        if (tree[i].name == name && seen++ == ordinal) return i;
    }
    while (seen <= ordinal) {
        tree.push_back({name, RawTree{}});
        ++seen;
    }
    return tree.size() - 1;
}

void place_value(RawTree& root, const InstancePath& path, const std::string& text) {
    RawTree* tree = &root;
    const auto& steps = path.steps();
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        auto idx = nth_field(*tree, steps[i].name, steps[i].ordinal);
        tree = std::get_if<RawTree>(&(*tree)[idx].value);
        if (!tree) throw DomainError("malformed-input", path.str(), "value path crosses an atomic value: " + path.str());
    }
    const auto idx = nth_field(*tree, steps.back().name, steps.back().ordinal);
    auto& slot = (*tree)[idx].value;
    const auto* existing = std::get_if<RawTree>(&slot);
    if (!existing || !existing->empty()) throw DomainError("malformed-input", path.str(), "duplicate value for " + path.str());
    slot = text;
}

class PackagePlugin : public ImportPlugin {
public:
    [[nodiscard]] std::string name() const override { return "package"; }

    FetchResult fetch(const ImportParams& params) override {
        const fs::path path = required(params, "path");
        const auto entries = zip::read(read_file(path));
        auto manifest_it = entries.find("imsmanifest.xml");
        if (manifest_it == entries.end()) throw DomainError("missing-manifest", "", "package has no imsmanifest.xml");
        const auto manifest = xml::parse(std::string_view(reinterpret_cast<const char*>(manifest_it->second.data()), manifest_it->second.size()));
        FetchResult out;
        const auto* resources = manifest.get_child_optional("manifest.resources").get_ptr();
        if (!resources) return out;
        for (const auto& [tag, res] : *resources) {
            if (tag != "resource") continue;
            const auto href = xml::attribute(res, "href");
            auto page_it = entries.find(href);
            if (page_it == entries.end()) continue;
            const auto& bytes = page_it->second;
            xml::Tree page;
            try {
                page = xml::parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
            } catch (const DomainError& e) {
                ++out.skipped;
                out.errors.push_back(href + ": " + e.what());
                continue;
            }
            const auto* body = page.get_child_optional("html.body").get_ptr();
            if (!body || xml::attribute(*body, "data-role") != "document") continue;
            RawRecord rec;
            rec.source_id = xml::attribute(*body, "data-doc");
            rec.locator = href;
            std::vector<std::pair<std::string, std::string>> values;
            collect_values(*body, values);
            try {
                for (const auto& [p, text] : values) place_value(rec.tree, InstancePath::parse(p), text);
            } catch (const std::exception& e) {
                ++out.skipped;
                out.errors.push_back(href + ": " + e.what());
                continue;
            }
            out.records.push_back(std::move(rec));
        }
        return out;
    }
};

}  // namespace

std::unique_ptr<ImportPlugin> make_plugin(std::string_view name) {
    if (name == "files") return std::make_unique<FilesPlugin>();
    if (name == "tabular") return std::make_unique<TabularPlugin>();
    if (name == "medpix") return std::make_unique<MedpixPlugin>();
    if (name == "package") return std::make_unique<PackagePlugin>();
    throw DomainError("unknown-plugin", "", "unknown import plugin '" + std::string(name) + "'");
}

}  // namespace curator
