#include "curator/export/package.hpp"

#include <algorithm>
#include <set>

#include "curator/digest.hpp"
#include "curator/errors.hpp"
#include "curator/export/xml.hpp"
#include "curator/store.hpp"

namespace curator {

namespace {

constexpr std::string_view kStyle = R"CSS(body { font-family: sans-serif; margin: 2em auto; max-width: 60em; color: #222; }
h1 { border-bottom: 1px solid #ccc; }
section.el, section.quiz { margin: 1.5em 0; }
div.el { margin-left: 1em; }
p.value { white-space: pre-wrap; }
figure.image .frame { display: inline-block; }
figure.image .marker { border: 2px solid #e33; color: #e33; font-weight: bold; box-sizing: border-box; }
ol.annotations { font-size: 0.9em; }
fieldset.question { margin: 1em 0; }
fieldset.question label { display: block; }
)CSS";

constexpr std::string_view kScoScript = R"JS((function () {
  "use strict";

  function searchApi(win) {
    var hops = 0;
    while (win && !win.API && win.parent && win.parent !== win && hops < 500) {
      hops += 1;
      win = win.parent;
    }
    return win && win.API ? win.API : null;
  }

  var api = searchApi(window);
  if (!api && window.opener) {
    api = searchApi(window.opener);
  }
  var finished = false;

  if (api) {
    api.LMSInitialize("");
    api.LMSSetValue("cmi.core.lesson_status", "completed");
    api.LMSCommit("");
  }

  function finish() {
    if (api && !finished) {
      finished = true;
      api.LMSFinish("");
    }
  }

  window.addEventListener("unload", finish);
  window.addEventListener("beforeunload", finish);
})();
)JS";

constexpr std::string_view kStylePath = "assets/style.css";
constexpr std::string_view kScoPath = "scorm/sco.js";

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::vector<ElementPath> paths_from_json(const nlohmann::json& j, const char* key) {
    std::vector<ElementPath> out;
    if (!j.contains(key) || j.at(key).is_null()) return out;
    for (const auto& p : j.at(key)) {
        try {
            out.push_back(ElementPath::parse(p.get<std::string>()));
        } catch (const std::exception& e) {
            throw DomainError("malformed-input", key, std::string("bad path in ") + key + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::string> path_strings(const std::vector<ElementPath>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) out.push_back(p.str());
    return out;
}

struct DocEntry {
    std::string id;
    std::string token;
    std::string title;
    std::vector<std::string> files;  // case page resource files
    bool quiz = false;
    std::vector<std::string> quiz_files;
};

std::string document_title(const Collection& c, const std::string& id) {
    std::string found;
    for_each_instance(c.documents.at(id).root, InstancePath{}, [&](const ElementInstance& inst, const InstancePath&) {
        if (found.empty() && inst.name == "Title" && inst.text() && !inst.text()->empty()) found = *inst.text();
    });
    return found.empty() ? id : found;
}

std::string build_manifest(const ExportProfile& profile, const std::vector<DocEntry>& docs) {
    const bool scorm = profile.format == PackageFormat::Scorm12;
    std::string id_seed = std::string(to_string(profile.format)) + "|" + profile.title;
    for (const auto& d : docs) id_seed += "|" + d.id;

    xml::Writer w;
    xml::Attributes root = {{"identifier", "MANIFEST-" + content_id(id_seed)}, {"version", "1.0"}};
    if (scorm) {
        root.emplace_back("xmlns", "http://www.imsproject.org/xsd/imscp_rootv1p1p2");
        root.emplace_back("xmlns:adlcp", "http://www.adlnet.org/xsd/adlcp_rootv1p2");
        root.emplace_back("xmlns:xsi", "http://www.w3.org/2001/XMLSchema-instance");
        root.emplace_back("xsi:schemaLocation",
                          "http://www.imsproject.org/xsd/imscp_rootv1p1p2 imscp_rootv1p1p2.xsd "
                          "http://www.imsglobal.org/xsd/imsmd_rootv1p2p1 imsmd_rootv1p2p1.xsd "
                          "http://www.adlnet.org/xsd/adlcp_rootv1p2 adlcp_rootv1p2.xsd");
    } else {
        root.emplace_back("xmlns", "http://www.imsglobal.org/xsd/imscp_v1p1");
        root.emplace_back("xmlns:xsi", "http://www.w3.org/2001/XMLSchema-instance");
        root.emplace_back("xsi:schemaLocation", "http://www.imsglobal.org/xsd/imscp_v1p1 imscp_v1p1.xsd");
    }
    w.open("manifest", root);
    w.open("metadata");
    w.leaf("schema", scorm ? "ADL SCORM" : "IMS Content");
    w.leaf("schemaversion", scorm ? "1.2" : "1.1.4");
    w.close();

    w.open("organizations", {{"default", "ORG-1"}});
    w.open("organization", {{"identifier", "ORG-1"}});
    w.leaf("title", profile.title);
    for (const auto& d : docs) {
        w.open("item", {{"identifier", "ITEM-" + d.token}, {"identifierref", "RES-" + d.token}, {"isvisible", "true"}});
        w.leaf("title", d.title);
        w.close();
        if (d.quiz) {
            w.open("item", {{"identifier", "ITEM-" + d.token + "-QUIZ"}, {"identifierref", "RES-" + d.token + "-QUIZ"}, {"isvisible", "true"}});
            w.leaf("title", d.title + " - Quiz");
            w.close();
        }
    }
    w.close();
    w.close();

    w.open("resources");
    auto resource = [&](const std::string& id, const std::string& href, const std::vector<std::string>& files) {
        xml::Attributes attrs = {{"identifier", id}, {"type", "webcontent"}};
        if (scorm) attrs.emplace_back("adlcp:scormtype", "sco");
        attrs.emplace_back("href", href);
        w.open("resource", attrs);
        for (const auto& f : files) w.empty("file", {{"href", f}});
        w.close();
    };
    for (const auto& d : docs) {
        resource("RES-" + d.token, d.files.front(), d.files);
        if (d.quiz) resource("RES-" + d.token + "-QUIZ", d.quiz_files.front(), d.quiz_files);
    }
    w.close();
    w.close();
    return w.str();
}

}  // namespace

std::string_view to_string(PackageFormat format) { return format == PackageFormat::Scorm12 ? "scorm12" : "imscp"; }

std::optional<PackageFormat> parse_package_format(std::string_view text) {
    if (text == "imscp") return PackageFormat::ImsCp;
    if (text == "scorm12") return PackageFormat::Scorm12;
    return std::nullopt;
}

nlohmann::json to_json(const ExportProfile& p) {
    nlohmann::json j = {{"format", to_string(p.format)},
                        {"selection", path_strings(p.selection)},
                        {"detail", p.detail == Detail::Summary ? "summary" : "full"},
                        {"summary", path_strings(p.summary_paths)},
                        {"include_quizzes", p.include_quizzes},
                        {"title", p.title}};
    j["documents"] = p.document_filter ? nlohmann::json(*p.document_filter) : nlohmann::json(nullptr);
    j["fixed_epoch"] = p.fixed_epoch ? nlohmann::json(*p.fixed_epoch) : nlohmann::json(nullptr);
    return j;
}

ExportProfile profile_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DomainError("malformed-input", "", "export profile must be an object");
    ExportProfile p;
    try {
        if (j.contains("format")) {
            auto f = parse_package_format(j.at("format").get<std::string>());
            if (!f) throw DomainError("malformed-input", "format", "format must be imscp or scorm12");
            p.format = *f;
        }
        p.selection = paths_from_json(j, "selection");
        p.summary_paths = paths_from_json(j, "summary");
        if (j.contains("detail")) {
            const auto d = j.at("detail").get<std::string>();
            if (d != "full" && d != "summary") throw DomainError("malformed-input", "detail", "detail must be full or summary");
            p.detail = d == "summary" ? Detail::Summary : Detail::Full;
        }
        if (j.contains("documents") && !j.at("documents").is_null()) p.document_filter = j.at("documents").get<std::vector<std::string>>();
        p.include_quizzes = j.value("include_quizzes", false);
        if (j.contains("fixed_epoch") && !j.at("fixed_epoch").is_null()) p.fixed_epoch = j.at("fixed_epoch").get<std::int64_t>();
        p.title = j.value("title", std::string("Collection"));
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("malformed-input", "", std::string("malformed export profile: ") + e.what());
    }
    return p;
}

void check_profile(const Collection& c, const ExportProfile& profile) {
    for (const auto& p : profile.selection) {
        if (!c.schema.find(p)) throw DomainError("unknown-path", p.str(), "selection path " + p.str() + " is not in the schema");
    }
    if (profile.detail == Detail::Summary && profile.summary_paths.empty()) {
        throw DomainError("empty-summary", "", "summary detail needs at least one summary path");
    }
    for (const auto& p : profile.summary_paths) {
        if (!c.schema.find(p)) throw DomainError("unknown-path", p.str(), "summary path " + p.str() + " is not in the schema");
    }
    if (profile.document_filter) {
        for (const auto& id : *profile.document_filter) {
            if (!c.documents.contains(id)) throw DomainError("unknown-document", id, "unknown document " + id);
        }
    }
}

PackageLayout build_package(const Collection& c, const ExportProfile& profile) {
    check_profile(c, profile);
    const bool scorm = profile.format == PackageFormat::Scorm12;
    PackageLayout layout;
    auto& files = layout.files;
    std::vector<DocEntry> docs;

    for (const auto& [id, doc] : c.documents) {
        if (profile.document_filter) {
            const auto& f = *profile.document_filter;
            if (std::find(f.begin(), f.end(), id) == f.end()) continue;
        }
        auto page = render_document_html(c, id, profile);
        if (!page.has_content) continue;
        DocEntry entry{id, id_token(id), document_title(c, id), {}, false, {}};
        const auto page_path = entry.token + ".html";
        files[page_path] = to_bytes(page.html);
        entry.files.push_back(page_path);
        entry.files.emplace_back(kStylePath);
        if (scorm) entry.files.emplace_back(kScoPath);
        for (const auto& asset : page.assets) {
            entry.files.push_back(asset);
            const auto slash = asset.find('/');
            const auto dot = asset.rfind('.');
            const auto rid = asset.substr(slash + 1, dot - slash - 1);
            files[asset] = *c.resources.at(rid).data;
        }
        if (scorm && profile.include_quizzes) {
            const auto questions = document_quizzes(doc);
            if (!questions.empty()) {
                entry.quiz = true;
                const auto quiz_page = entry.token + "-quiz.html";
                const auto quiz_script = "scorm/" + entry.token + "-quiz.js";
                files[quiz_page] = to_bytes(render_quiz_html(c, id, questions));
                files[quiz_script] = to_bytes(render_quiz_script(questions));
                entry.quiz_files = {quiz_page, std::string(kStylePath), quiz_script};
            }
        }
        docs.push_back(std::move(entry));
    }
    if (docs.empty()) throw DomainError("empty-selection", "", "the export profile selects no document content");

    files[std::string(kStylePath)] = to_bytes(kStyle);
    if (scorm) files[std::string(kScoPath)] = to_bytes(kScoScript);
    layout.manifest = build_manifest(profile, docs);
    files["imsmanifest.xml"] = to_bytes(layout.manifest);
    return layout;
}

Bytes export_package(const Collection& c, const ExportProfile& profile) {
    return zip::write(build_package(c, profile).files, profile.fixed_epoch);
}

Bytes export_imscp(const Collection& c, ExportProfile profile) {
    profile.format = PackageFormat::ImsCp;
    return export_package(c, profile);
}

Bytes export_scorm12(const Collection& c, ExportProfile profile) {
    profile.format = PackageFormat::Scorm12;
    return export_package(c, profile);
}

// ------------------------------------------------------------- validation

namespace {

struct PackageChecker {
    const zip::Entries& entries;
    ValidationReport report;
    std::set<std::string> referenced;
    std::set<std::string> identifiers;
    std::set<std::string> resource_ids;
    std::vector<std::pair<std::string, std::string>> item_refs;  // item id, identifierref

    void add(std::string rule, std::string path, std::string message) {
        report.push_back({std::move(rule), "", std::move(path), std::move(message)});
    }

    void identifier(const xml::Tree& node, const std::string& what) {
        const auto id = xml::attribute(node, "identifier");
        if (id.empty()) {
            add("missing-element", what, what + " has no identifier");
            return;
        }
        if (!identifiers.insert(id).second) add("duplicate-identifier", id, "identifier " + id + " is used more than once");
    }

    void href(const std::string& h, const std::string& where) {
        if (h.empty()) return;
        auto path = h.substr(0, h.find_first_of("?#"));
        referenced.insert(path);
        if (!entries.contains(path)) add("dangling-href", where, "href " + h + " is not in the archive");
    }

    void items(const xml::Tree& node) {
        for (const auto& [tag, child] : node) {
            if (tag != "item") continue;
            identifier(child, "item");
            const auto ref = xml::attribute(child, "identifierref");
            if (!ref.empty()) item_refs.emplace_back(xml::attribute(child, "identifier"), ref);
            items(child);
        }
    }
};

}  // namespace

ValidationReport validate_package(std::span<const std::uint8_t> archive) {
    zip::Entries entries;
    try {
        entries = zip::read(archive);
    } catch (const IoError& e) {
        return {{"malformed-zip", "", "", e.what()}};
    }
    PackageChecker chk{entries, {}, {}, {}, {}, {}};
    auto it = entries.find("imsmanifest.xml");
    if (it == entries.end()) {
        chk.add("missing-manifest", "imsmanifest.xml", "no imsmanifest.xml at the archive root");
        return chk.report;
    }
    xml::Tree tree;
    try {
        tree = xml::parse(std::string_view(reinterpret_cast<const char*>(it->second.data()), it->second.size()));
    } catch (const DomainError& e) {
        chk.add("malformed-xml", "imsmanifest.xml", e.what());
        return chk.report;
    }
    const auto manifest = tree.get_child_optional("manifest");
    if (!manifest) {
        chk.add("missing-element", "manifest", "root element manifest is missing");
        return chk.report;
    }
    chk.identifier(*manifest, "manifest");

    const auto schema = manifest->get_optional<std::string>("metadata.schema");
    const bool scorm = schema && *schema == "ADL SCORM";
    if (scorm) {
        const auto version = manifest->get_optional<std::string>("metadata.schemaversion");
        if (!version) {
            chk.add("missing-element", "metadata/schemaversion", "SCORM manifest lacks schemaversion");
        } else if (*version != "1.2") {
            chk.add("missing-element", "metadata/schemaversion", "unsupported SCORM schemaversion " + *version);
        }
    }

    const auto orgs = manifest->get_child_optional("organizations");
    if (!orgs) chk.add("missing-element", "organizations", "manifest lacks organizations");
    const auto resources = manifest->get_child_optional("resources");
    if (!resources) chk.add("missing-element", "resources", "manifest lacks resources");

    std::set<std::string> org_ids;
    if (orgs) {
        for (const auto& [tag, org] : *orgs) {
            if (tag != "organization") continue;
            chk.identifier(org, "organization");
            org_ids.insert(xml::attribute(org, "identifier"));
            chk.items(org);
        }
        const auto def = xml::attribute(*orgs, "default");
        if (!def.empty() && !org_ids.contains(def)) {
            chk.add("dangling-identifierref", "organizations", "default organization " + def + " does not exist");
        }
    }
    if (resources) {
        for (const auto& [tag, res] : *resources) {
            if (tag != "resource") continue;
            chk.identifier(res, "resource");
            const auto id = xml::attribute(res, "identifier");
            chk.resource_ids.insert(id);
            if (xml::attribute(res, "type").empty()) chk.add("missing-element", id, "resource " + id + " has no type");
            const auto scormtype = xml::attribute(res, "adlcp:scormtype");
            if (!scormtype.empty() && scormtype != "sco" && scormtype != "asset") {
                chk.add("bad-scormtype", id, "scormtype must be sco or asset, found " + scormtype);
            }
            chk.href(xml::attribute(res, "href"), id);
            for (const auto& [ftag, file] : res) {
                if (ftag == "file") chk.href(xml::attribute(file, "href"), id);
            }
        }
    }
    for (const auto& [item, ref] : chk.item_refs) {
        if (!chk.resource_ids.contains(ref)) chk.add("dangling-identifierref", item, "item " + item + " references missing resource " + ref);
    }
    for (const auto& [name, bytes] : entries) {
        if (name == "imsmanifest.xml") continue;
        if (!chk.referenced.contains(name)) chk.add("orphan-file", name, "archive file " + name + " is not referenced by the manifest");
    }
    std::sort(chk.report.begin(), chk.report.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.path, a.rule) < std::tie(b.path, b.rule);
    });
    return chk.report;
}

}  // namespace curator
