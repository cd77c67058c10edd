#include "curator/curation.hpp"

#include <algorithm>
#include <cctype>

#include "curator/canonical.hpp"
#include "curator/digest.hpp"
#include "curator/validate.hpp"

namespace curator {

namespace {

ElementInstance* find_mut(ElementInstance& root, const InstancePath& path) {
    ElementInstance* node = &root;
    for (const auto& step : path.steps()) {
        auto* kids = node->children();
        if (!kids) return nullptr;
        std::size_t seen = 0;
        ElementInstance* next = nullptr;
        for (auto& k : *kids) {
            if (k.name == step.name && seen++ == step.ordinal) {
                next = &k;
                break;
            }
        }
        if (!next) return nullptr;
        node = next;
    }
    return node;
}

Document& document(Collection& c, const std::string& doc_id) {
    auto it = c.documents.find(doc_id);
    if (it == c.documents.end()) throw DomainError("unknown-document", doc_id, "unknown document " + doc_id);
    return it->second;
}

Collection checked(Collection c) {
    auto report = validate_collection(c);
    if (!report.empty()) throw InvalidCollection(std::move(report));
    return c;
}

ElementKind payload_kind(const Payload& p) {
    switch (p.index()) {
        case 0: return ElementKind::Atomic;
        case 1: return ElementKind::Composite;
        case 2: return ElementKind::ResourceRef;
        case 3: return ElementKind::Link;
        default: return ElementKind::Quiz;
    }
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

void check_target(const Collection& c, const LinkTarget& target) {
    switch (target.kind) {
        case LinkKind::InternalDocument:
            if (!c.documents.contains(target.value)) throw DomainError("dangling-link", target.value, "unknown target document " + target.value);
            break;
        case LinkKind::InternalAnnotation:
            if (!c.annotations.contains(target.value)) throw DomainError("dangling-link", target.value, "unknown target annotation " + target.value);
            break;
        case LinkKind::ExternalUrl:
            if (!is_valid_url(target.value)) throw DomainError("bad-url", target.value, "malformed URL " + target.value);
            break;
    }
}

}  // namespace

const ElementInstance* find_instance(const Document& doc, const InstancePath& path) {
    return find_mut(const_cast<ElementInstance&>(doc.root), path);
}

Collection set_value(const Collection& c, const std::string& doc_id, const InstancePath& path, std::string text) {
    Collection out = c;
    auto& doc = document(out, doc_id);
    auto* node = path.is_root() ? nullptr : find_mut(doc.root, path);
    if (!node) throw DomainError("unknown-path", path.str(), "no instance at " + path.str() + " in " + doc_id);
    auto* value = std::get_if<std::string>(&node->payload);
    if (!value) throw DomainError("non-atomic", path.str(), path.str() + " is not an atomic element");
    *value = std::move(text);
    return checked(std::move(out));
}

Collection insert_element(const Collection& c, const std::string& doc_id, const InstancePath& parent,
                          const ElementPath& type_path, Payload payload) {
    Collection out = c;
    auto& doc = document(out, doc_id);
    auto* host = find_mut(doc.root, parent);
    if (!host) throw DomainError("unknown-path", parent.str(), "no instance at " + parent.str() + " in " + doc_id);
    const auto* parent_type = c.schema.find(parent.type_path());
    const auto* type = c.schema.find(type_path);
    if (!type || type_path.is_root() || type_path.parent() != parent.type_path() || !parent_type) {
        throw DomainError("unknown-path", type_path.str(), type_path.str() + " is not a child type of " + parent.type_path().str());
    }
    auto* kids = host->children();
    if (!kids) throw DomainError("not-composite", parent.str(), parent.str() + " is not a composite instance");
    if (payload_kind(payload) != type->kind) {
        throw DomainError("kind-mismatch", type_path.str(),
                          "payload of kind " + std::string(to_string(payload_kind(payload))) + " does not fit " + type_path.str() + " (" +
                              std::string(to_string(type->kind)) + ")");
    }
    if (const auto* ref = std::get_if<ResourceRef>(&payload); ref && !c.resources.contains(ref->resource_id)) {
        throw DomainError("unknown-resource", "/resources/" + ref->resource_id, "unknown resource " + ref->resource_id);
    }
    if (const auto* link = std::get_if<LinkTarget>(&payload)) check_target(c, *link);
    const auto existing = static_cast<std::size_t>(std::count_if(kids->begin(), kids->end(), [&](const auto& k) { return k.name == type->name; }));
    if (existing > 0 && type->multiplicity != Multiplicity::Many) {
        throw DomainError("multiplicity", parent.child(type->name, existing).str(),
                          type_path.str() + " allows at most one instance per parent");
    }

    // Position: after the last same-typed sibling, else before the first
    // sibling whose type comes later in schema order.
    auto rank = [&](const std::string& name) {
        for (std::size_t i = 0; i < parent_type->children.size(); ++i) {
            if (parent_type->children[i].name == name) return i;
        }
        return parent_type->children.size();
    };
    const auto my_rank = rank(type->name);
    auto pos = kids->end();
    if (existing > 0) {
        auto last = std::find_if(kids->rbegin(), kids->rend(), [&](const auto& k) { return k.name == type->name; });
        pos = last.base();
    } else {
        pos = std::find_if(kids->begin(), kids->end(), [&](const auto& k) { return rank(k.name) > my_rank; });
    }
    kids->insert(pos, ElementInstance{type->name, std::move(payload)});
    return checked(std::move(out));
}

std::string annotation_id(const std::string& resource_id, const Region& r, const std::string& comment) {
    return content_id(resource_id + "|" + std::to_string(r.x) + "," + std::to_string(r.y) + "," + std::to_string(r.w) + "," +
                      std::to_string(r.h) + "|" + comment);
}

AnnotationResult add_annotation(const Collection& c, const std::string& resource_id, const Region& region,
                                const std::string& comment, const std::string& author) {
    auto it = c.resources.find(resource_id);
    const auto where = "/resources/" + resource_id;
    if (it == c.resources.end()) throw DomainError("unknown-resource", where, "unknown resource " + resource_id);
    const auto& res = it->second;
    if (!res.media_type.starts_with("image/")) throw DomainError("not-image", where, "resource " + resource_id + " is not an image");
    if (blank(comment)) throw DomainError("empty-comment", where, "annotation comment is empty");
    if (region.w <= 0 || region.h <= 0 || region.x < 0 || region.y < 0) {
        throw DomainError("bad-region", where, "region must have non-negative origin and positive size");
    }
    if (res.data) {
        if (auto size = probe_image_size(*res.data)) {
            if (region.x + region.w > size->width || region.y + region.h > size->height) {
                throw DomainError("out-of-bounds", where,
                                  "region exceeds image bounds " + std::to_string(size->width) + "x" + std::to_string(size->height));
            }
        }
    }
    const auto id = annotation_id(resource_id, region, comment);
    if (c.annotations.contains(id)) return {c, id};
    Collection out = c;
    out.annotations.emplace(id, Annotation{id, resource_id, region, comment, author});
    return {checked(std::move(out)), id};
}

Collection add_link(const Collection& c, const std::string& doc_id, const InstancePath& parent, const LinkTarget& target,
                    const std::optional<std::string>& link_type) {
    if (!c.documents.contains(doc_id)) throw DomainError("unknown-document", doc_id, "unknown document " + doc_id);
    const auto parent_type_path = parent.type_path();
    const auto* parent_type = c.schema.find(parent_type_path);
    if (!parent_type) throw DomainError("unknown-path", parent.str(), "no element type for " + parent.str());

    const ElementType* chosen = nullptr;
    if (link_type) {
        chosen = parent_type->find_child(*link_type);
        if (!chosen) throw DomainError("unknown-path", parent_type_path.child(*link_type).str(), "no element type " + *link_type + " under " + parent_type_path.str());
        if (chosen->kind != ElementKind::Link) {
            throw DomainError("kind-mismatch", parent_type_path.child(*link_type).str(), *link_type + " is not a link element");
        }
    } else {
        for (const auto& child : parent_type->children) {
            if (child.kind != ElementKind::Link) continue;
            if (chosen) throw DomainError("ambiguous-link-type", parent_type_path.str(), "several link elements under " + parent_type_path.str() + "; name one");
            chosen = &child;
        }
        if (!chosen) throw DomainError("no-link-type", parent_type_path.str(), "no link element under " + parent_type_path.str());
    }

    check_target(c, target);
    return insert_element(c, doc_id, parent, parent_type_path.child(chosen->name), target);
}

DocumentEdit set_value_edit(const std::string& doc_id, const InstancePath& path, const std::string& text) {
    return {{{"op", "set"}, {"doc", doc_id}, {"path", path.str()}, {"text", text}}};
}

DocumentEdit insert_edit(const std::string& doc_id, const InstancePath& parent, const ElementInstance& element) {
    return {{{"op", "insert"}, {"doc", doc_id}, {"parent", parent.str()}, {"element", to_json(element)}}};
}

DocumentEdit link_edit(const std::string& doc_id, const InstancePath& parent, const LinkTarget& target,
                       const std::optional<std::string>& link_type) {
    nlohmann::json j = {{"op", "link"}, {"doc", doc_id}, {"parent", parent.str()}, {"target", to_json(target)}};
    if (link_type) j["type"] = *link_type;
    return {std::move(j)};
}

DocumentEdit annotate_edit(const std::string& resource_id, const Region& region, const std::string& comment,
                           const std::string& author) {
    return {{{"op", "annotate"},
             {"resource", resource_id},
             {"region", {{"x", region.x}, {"y", region.y}, {"w", region.w}, {"h", region.h}}},
             {"comment", comment},
             {"author", author}}};
}

Collection apply_edit(const Collection& c, const DocumentEdit& edit) {
    const auto& j = edit.command;
    std::string op;
    try {
        op = j.at("op").get<std::string>();
        if (op == "set") {
            return set_value(c, j.at("doc").get<std::string>(), InstancePath::parse(j.at("path").get<std::string>()),
                             j.at("text").get<std::string>());
        }
        if (op == "insert") {
            const auto parent = InstancePath::parse(j.at("parent").get<std::string>());
            auto element = instance_from_json(j.at("element"));
            auto type_path = parent.type_path().child(element.name);
            return insert_element(c, j.at("doc").get<std::string>(), parent, type_path, std::move(element.payload));
        }
        if (op == "link") {
            std::optional<std::string> type;
            if (j.contains("type")) type = j.at("type").get<std::string>();
            return add_link(c, j.at("doc").get<std::string>(), InstancePath::parse(j.at("parent").get<std::string>()),
                            link_from_json(j.at("target")), type);
        }
        if (op == "annotate") {
            const auto& r = j.at("region");
            Region region{r.at("x").get<std::int64_t>(), r.at("y").get<std::int64_t>(), r.at("w").get<std::int64_t>(),
                          r.at("h").get<std::int64_t>()};
            return add_annotation(c, j.at("resource").get<std::string>(), region, j.at("comment").get<std::string>(),
                                  j.value("author", std::string()))
                .collection;
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("malformed-input", "", "malformed " + op + " edit: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DomainError("malformed-input", "", "malformed " + op + " edit: " + e.what());
    }
    throw DomainError("malformed-input", "", "unknown edit command '" + op + "'");
}

}  // namespace curator
