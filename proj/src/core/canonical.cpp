#include "curator/canonical.hpp"

#include "curator/digest.hpp"

namespace curator {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw DomainError("malformed-input", "", "malformed input: " + what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object()) malformed(std::string("expected object with '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) malformed(std::string("missing field '") + key + "'");
    return *it;
}

std::string string_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) malformed(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::int64_t int_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number_integer()) malformed(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::string summarize(const ValidationReport& report) {
    std::string msg = "collection is invalid (" + std::to_string(report.size()) + " violations)";
    if (!report.empty()) msg += ": first " + report.front().rule + " at " + report.front().path;
    return msg;
}

}  // namespace

InvalidCollection::InvalidCollection(ValidationReport report)
    : DomainError("invalid-collection", report.empty() ? "" : report.front().path, summarize(report)),
      report_(std::move(report)) {}

std::string canonical_dump(const json& j) {
    try {
        return j.dump(-1, ' ', false, json::error_handler_t::strict) + "\n";
    } catch (const json::type_error& e) {
        throw DomainError("invalid-utf8", "", e.what());
    }
}

json to_json(const ElementType& type) {
    json j = {{"name", type.name}, {"kind", to_string(type.kind)}, {"multiplicity", to_string(type.multiplicity)}};
    if (type.kind == ElementKind::Composite) {
        json kids = json::array();
        for (const auto& c : type.children) kids.push_back(to_json(c));
        j["children"] = std::move(kids);
    }
    return j;
}

json to_json(const Schema& schema) { return {{"root", to_json(schema.root)}, {"version", schema.version}}; }

json to_json(const LinkTarget& link) { return {{"kind", to_string(link.kind)}, {"value", link.value}}; }

json to_json(const Mcq& mcq) {
    json j = {{"stem", mcq.stem}, {"choices", mcq.choices}, {"correct_index", mcq.correct_index}};
    if (mcq.explanation) j["explanation"] = *mcq.explanation;
    return j;
}

json to_json(const ElementInstance& instance) {
    json j = {{"name", instance.name}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                j["text"] = p;
            } else if constexpr (std::is_same_v<T, std::vector<ElementInstance>>) {
                json kids = json::array();
                for (const auto& c : p) kids.push_back(to_json(c));
                j["children"] = std::move(kids);
            } else if constexpr (std::is_same_v<T, ResourceRef>) {
                j["resource"] = p.resource_id;
            } else if constexpr (std::is_same_v<T, LinkTarget>) {
                j["link"] = to_json(p);
            } else {
                j["quiz"] = to_json(p);
            }
        },
        instance.payload);
    return j;
}

json to_json(const Document& doc) {
    return {{"id", doc.id},
            {"origin", {{"plugin", doc.origin.plugin}, {"locator", doc.origin.locator}}},
            {"root", to_json(doc.root)}};
}

json to_json(const Annotation& a) {
    return {{"id", a.id},
            {"resource_id", a.resource_id},
            {"region", {{"x", a.region.x}, {"y", a.region.y}, {"w", a.region.w}, {"h", a.region.h}}},
            {"comment", a.comment},
            {"author", a.author}};
}

json to_json(const LogRecord& r) {
    return {{"op", r.op}, {"timestamp", r.timestamp}, {"pre_version", r.pre_version}, {"post_version", r.post_version}};
}

json to_json(const Resource& r, bool embed_data) {
    json j = {{"id", r.id},
              {"kind", to_string(r.kind)},
              {"media_type", r.media_type},
              {"locator", r.locator},
              {"byte_size", r.byte_size}};
    if (embed_data && r.data) j["data"] = base64_encode(*r.data);
    return j;
}

json to_json(const Violation& v) {
    return {{"rule", v.rule}, {"document_id", v.document_id}, {"path", v.path}, {"message", v.message}};
}

json to_json(const ValidationReport& report) {
    json arr = json::array();
    for (const auto& v : report) arr.push_back(to_json(v));
    return arr;
}

ElementType element_type_from_json(const json& j) {
    ElementType t;
    t.name = string_field(j, "name");
    auto kind = parse_element_kind(string_field(j, "kind"));
    if (!kind) malformed("unknown element kind");
    t.kind = *kind;
    auto mult = parse_multiplicity(string_field(j, "multiplicity"));
    if (!mult) malformed("unknown multiplicity");
    t.multiplicity = *mult;
    if (auto it = j.find("children"); it != j.end()) {
        if (!it->is_array()) malformed("children must be an array");
        for (const auto& c : *it) t.children.push_back(element_type_from_json(c));
    }
    return t;
}

Schema schema_from_json(const json& j) {
    Schema s;
    s.root = element_type_from_json(field(j, "root"));
    s.version = int_field(j, "version");
    return s;
}

LinkTarget link_from_json(const json& j) {
    auto kind = parse_link_kind(string_field(j, "kind"));
    if (!kind) malformed("unknown link kind");
    return {*kind, string_field(j, "value")};
}

Mcq mcq_from_json(const json& j) {
    Mcq m;
    m.stem = string_field(j, "stem");
    const auto& choices = field(j, "choices");
    if (!choices.is_array()) malformed("choices must be an array");
    for (const auto& c : choices) {
        if (!c.is_string()) malformed("choices must be strings");
        m.choices.push_back(c.get<std::string>());
    }
    auto idx = int_field(j, "correct_index");
    if (idx < 0) malformed("correct_index must be non-negative");
    m.correct_index = static_cast<std::size_t>(idx);
    if (auto it = j.find("explanation"); it != j.end() && it->is_string()) m.explanation = it->get<std::string>();
    return m;
}

ElementInstance instance_from_json(const json& j) {
    ElementInstance inst;
    inst.name = string_field(j, "name");
    if (j.contains("text")) {
        inst.payload = string_field(j, "text");
    } else if (j.contains("children")) {
        const auto& kids = j.at("children");
        if (!kids.is_array()) malformed("children must be an array");
        std::vector<ElementInstance> out;
        for (const auto& c : kids) out.push_back(instance_from_json(c));
        inst.payload = std::move(out);
    } else if (j.contains("resource")) {
        inst.payload = ResourceRef{string_field(j, "resource")};
    } else if (j.contains("link")) {
        inst.payload = link_from_json(j.at("link"));
    } else if (j.contains("quiz")) {
        inst.payload = mcq_from_json(j.at("quiz"));
    } else {
        malformed("instance '" + inst.name + "' has no payload");
    }
    return inst;
}

Document document_from_json(const json& j) {
    Document d;
    d.id = string_field(j, "id");
    const auto& origin = field(j, "origin");
    d.origin = {string_field(origin, "plugin"), string_field(origin, "locator")};
    d.root = instance_from_json(field(j, "root"));
    return d;
}

Annotation annotation_from_json(const json& j) {
    Annotation a;
    a.id = string_field(j, "id");
    a.resource_id = string_field(j, "resource_id");
    const auto& r = field(j, "region");
    a.region = {int_field(r, "x"), int_field(r, "y"), int_field(r, "w"), int_field(r, "h")};
    a.comment = string_field(j, "comment");
    a.author = string_field(j, "author");
    return a;
}

LogRecord log_record_from_json(const json& j) {
    return {string_field(j, "op"), int_field(j, "timestamp"), int_field(j, "pre_version"), int_field(j, "post_version")};
}

Resource resource_from_json(const json& j) {
    Resource r;
    r.id = string_field(j, "id");
    auto kind = parse_resource_kind(string_field(j, "kind"));
    if (!kind) malformed("unknown resource kind");
    r.kind = *kind;
    r.media_type = string_field(j, "media_type");
    r.locator = string_field(j, "locator");
    auto size = int_field(j, "byte_size");
    if (size < 0) malformed("byte_size must be non-negative");
    r.byte_size = static_cast<std::uint64_t>(size);
    if (auto it = j.find("data"); it != j.end()) {
        if (!it->is_string()) malformed("data must be base64 text");
        auto bytes = base64_decode(it->get<std::string>());
        if (!bytes) malformed("data is not valid base64");
        r.data = std::make_shared<const Bytes>(std::move(*bytes));
    }
    return r;
}

std::string canonical_serialize(const Collection& c) {
    auto report = validate_collection(c);
    if (!report.empty()) throw InvalidCollection(std::move(report));
    json docs = json::array();
    for (const auto& [id, d] : c.documents) docs.push_back(to_json(d));
    json resources = json::array();
    for (const auto& [id, r] : c.resources) resources.push_back(to_json(r, true));
    json annotations = json::array();
    for (const auto& [id, a] : c.annotations) annotations.push_back(to_json(a));
    json log = json::array();
    for (const auto& r : c.log) log.push_back(to_json(r));
    json j = {{"format", kCollectionFormat},
              {"schema", to_json(c.schema)},
              {"documents", std::move(docs)},
              {"resources", std::move(resources)},
              {"annotations", std::move(annotations)},
              {"log", std::move(log)}};
    return canonical_dump(j);
}

Collection deserialize_collection(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        malformed(e.what());
    }
    if (string_field(j, "format") != kCollectionFormat) malformed("unsupported collection format");
    Collection c;
    c.schema = schema_from_json(field(j, "schema"));
    for (const auto& d : field(j, "documents")) {
        auto doc = document_from_json(d);
        auto id = doc.id;
        c.documents.emplace(std::move(id), std::move(doc));
    }
    for (const auto& r : field(j, "resources")) {
        auto res = resource_from_json(r);
        auto id = res.id;
        c.resources.emplace(std::move(id), std::move(res));
    }
    for (const auto& a : field(j, "annotations")) {
        auto ann = annotation_from_json(a);
        auto id = ann.id;
        c.annotations.emplace(std::move(id), std::move(ann));
    }
    for (const auto& r : field(j, "log")) c.log.push_back(log_record_from_json(r));
    return c;
}

std::string canonical_document(const Document& doc) { return canonical_dump(to_json(doc)); }

}  // namespace curator
