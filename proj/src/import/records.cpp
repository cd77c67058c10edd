#include "curator/import/records.hpp"

#include <algorithm>

#include "curator/canonical.hpp"
#include "curator/digest.hpp"
#include "curator/errors.hpp"

namespace curator {

bool RawResource::operator==(const RawResource& other) const {
    if (media_type != other.media_type || locator != other.locator) return false;
    if (!data || !other.data) return !data && !other.data;
    return *data == *other.data;
}

namespace {

ElementKind kind_of(const RawValue& v) {
    switch (v.index()) {
        case 0: return ElementKind::Atomic;
        case 1: return ElementKind::Composite;
        case 2: return ElementKind::ResourceRef;
        case 3: return ElementKind::Link;
        default: return ElementKind::Quiz;
    }
}

// Empty nested values carry no structure and are treated as absent.
bool is_empty_tree(const RawValue& v) {
    const auto* t = std::get_if<RawTree>(&v);
    return t && t->empty();
}

struct InferNode {
    std::optional<ElementKind> kind;
    bool repeated = false;
    std::size_t instances = 0;   ///< times this type occurred (as a parent)
    std::size_t present_in = 0;  ///< parent instances that held at least one
    std::vector<std::string> order;
    std::map<std::string, InferNode, std::less<>> children;
};

void visit(InferNode& node, const RawTree& tree, const ElementPath& at) {
    ++node.instances;
    std::map<std::string, std::size_t, std::less<>> counts;
    for (const auto& field : tree) {
        if (is_empty_tree(field.value)) continue;
        const auto kind = kind_of(field.value);
        const auto child_path = at.child(field.name);
        if (!is_valid_name(field.name)) {
            throw DomainError("invalid-name", child_path.str(), "record field name '" + field.name + "' is not a valid element name");
        }
        auto [it, inserted] = node.children.try_emplace(field.name);
        if (inserted) node.order.push_back(field.name);
        auto& child = it->second;
        if (child.kind && *child.kind != kind) {
            throw DomainError("kind-conflict", child_path.str(),
                              "conflicting kinds at " + child_path.str() + ": " + std::string(to_string(*child.kind)) + " vs " +
                                  std::string(to_string(kind)));
        }
        child.kind = kind;
        if (++counts[field.name] == 2) child.repeated = true;
        if (const auto* nested = std::get_if<RawTree>(&field.value)) visit(child, *nested, child_path);
    }
    for (const auto& [name, n] : counts) node.children.find(name)->second.present_in++;
}

ElementType materialize(const std::string& name, const InferNode& node, std::size_t parent_instances) {
    ElementType t;
    t.name = name;
    t.kind = node.kind.value_or(ElementKind::Composite);
    if (node.repeated) {
        t.multiplicity = Multiplicity::Many;
    } else if (node.present_in < parent_instances) {
        t.multiplicity = Multiplicity::Optional;
    } else {
        t.multiplicity = Multiplicity::One;
    }
    for (const auto& child_name : node.order) {
        t.children.push_back(materialize(child_name, node.children.find(child_name)->second, node.instances));
    }
    return t;
}

void union_into(ElementType& target, const ElementType& source, const ElementPath& at) {
    if (target.kind != source.kind) {
        throw DomainError("kind-conflict", at.str(),
                          "conflicting kinds at " + at.str() + ": " + std::string(to_string(target.kind)) + " vs " +
                              std::string(to_string(source.kind)));
    }
    target.multiplicity = loosest(target.multiplicity, source.multiplicity);
    for (const auto& child : source.children) {
        if (auto* existing = target.find_child(child.name)) {
            union_into(*existing, child, at.child(child.name));
        } else {
            target.children.push_back(child);
        }
    }
}

Resource ingest(const RawResource& raw) {
    Resource r;
    r.media_type = raw.media_type;
    if (raw.data) {
        r.kind = ResourceKind::LocalFile;
        r.id = content_id(*raw.data);
        r.data = raw.data;
        r.byte_size = raw.data->size();
        r.locator = "resources/" + r.id + "." + extension_for_media_type(r.media_type);
    } else {
        r.kind = ResourceKind::ExternalUrl;
        r.id = content_id(raw.locator);
        r.locator = raw.locator;
    }
    return r;
}

std::vector<ElementInstance> mirror(const RawTree& tree, std::map<std::string, Resource>& resources) {
    std::vector<ElementInstance> out;
    out.reserve(tree.size());
    for (const auto& field : tree) {
        if (is_empty_tree(field.value)) continue;
        ElementInstance inst;
        inst.name = field.name;
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, RawTree>) {
                    inst.payload = mirror(v, resources);
                } else if constexpr (std::is_same_v<T, RawResource>) {
                    auto r = ingest(v);
                    inst.payload = ResourceRef{r.id};
                    resources.try_emplace(r.id, std::move(r));
                } else {
                    inst.payload = v;
                }
            },
            field.value);
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace

Schema infer_schema(const std::vector<RawRecord>& records) {
    InferNode root;
    root.kind = ElementKind::Composite;
    for (const auto& r : records) visit(root, r.tree, ElementPath{});
    Schema schema;
    for (const auto& name : root.order) {
        schema.root.children.push_back(materialize(name, root.children.find(name)->second, root.instances));
    }
    return schema;
}

Schema union_schemas(const Schema& a, const Schema& b) {
    Schema out = a;
    union_into(out.root, b.root, ElementPath{});
    return out;
}

BuiltItems build_documents(const std::vector<RawRecord>& records, const std::string& plugin) {
    std::map<std::string, Resource> resources;
    BuiltItems out;
    for (const auto& record : records) {
        Document doc;
        doc.root = ElementInstance{std::string(kRootName), mirror(record.tree, resources)};
        doc.origin = {plugin, record.locator};
        doc.id = record.source_id.empty() ? content_id(canonical_dump(to_json(doc.root))) : record.source_id;
        out.documents.push_back(std::move(doc));
    }
    for (auto& [id, r] : resources) out.resources.push_back(std::move(r));
    return out;
}

}  // namespace curator
