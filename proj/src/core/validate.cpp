#include "curator/validate.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <tuple>

#include "curator/digest.hpp"

namespace curator {

namespace {

void add(ValidationReport& out, std::string rule, std::string doc, std::string path, std::string message) {
    out.push_back({std::move(rule), std::move(doc), std::move(path), std::move(message)});
}

void check_type(const ElementType& type, const ElementPath& at, bool is_root, ValidationReport& out) {
    const auto where = at.str();
    if (!is_root && !is_valid_name(type.name)) add(out, "schema-invalid-name", "", where, "invalid element name");
    if (type.kind == ElementKind::Composite) {
        if (type.children.empty() && !is_root) {
            add(out, "schema-empty-composite", "", where, "composite element type has no children");
        }
    } else if (!type.children.empty()) {
        add(out, "schema-leaf-children", "", where, "non-composite element type has children");
    }
    std::set<std::string, std::less<>> names;
    for (const auto& child : type.children) {
        if (!names.insert(child.name).second) {
            add(out, "schema-duplicate-name", "", at.child(child.name).str(), "duplicate sibling name");
        }
        check_type(child, at.child(child.name), false, out);
    }
}

struct DocumentChecker {
    const Collection& c;
    const std::string& doc_id;
    ValidationReport& out;

    void check_payload(const ElementInstance& inst, const ElementType& type, const InstancePath& at) {
        const auto where = at.str();
        if (inst.kind() != type.kind) {
            add(out, "kind-mismatch", doc_id, where,
                "instance is " + std::string(to_string(inst.kind())) + " but type is " + std::string(to_string(type.kind)));
            return;
        }
        if (const auto* ref = std::get_if<ResourceRef>(&inst.payload)) {
            if (!c.resources.contains(ref->resource_id)) {
                add(out, "dangling-resource", doc_id, where, "unknown resource " + ref->resource_id);
            }
        } else if (const auto* link = std::get_if<LinkTarget>(&inst.payload)) {
            switch (link->kind) {
                case LinkKind::InternalDocument:
                    if (!c.documents.contains(link->value)) add(out, "dangling-link", doc_id, where, "unknown document " + link->value);
                    break;
                case LinkKind::InternalAnnotation:
                    if (!c.annotations.contains(link->value)) add(out, "dangling-link", doc_id, where, "unknown annotation " + link->value);
                    break;
                case LinkKind::ExternalUrl:
                    if (!is_valid_url(link->value)) add(out, "bad-url", doc_id, where, "malformed URL " + link->value);
                    break;
            }
        } else if (const auto* mcq = std::get_if<Mcq>(&inst.payload)) {
            validate_mcq(*mcq, doc_id, where, out);
        } else if (const auto* kids = inst.children()) {
            check_children(*kids, type, at);
        }
    }

    void check_children(const std::vector<ElementInstance>& kids, const ElementType& parent, const InstancePath& at) {
        std::map<std::string, std::size_t, std::less<>> counts;
        for (const auto& child : kids) {
            const auto ordinal = counts[child.name]++;
            const auto child_at = at.child(child.name, ordinal);
            const auto* type = parent.find_child(child.name);
            if (!type) {
                add(out, "unknown-path", doc_id, child_at.str(), "no element type at " + child_at.type_path().str());
                continue;
            }
            if (ordinal == 1 && type->multiplicity != Multiplicity::Many) {
                add(out, "multiplicity", doc_id, child_at.str(),
                    "more than one instance of " + std::string(to_string(type->multiplicity)) + " element");
            }
            check_payload(child, *type, child_at);
        }
    }
};

void check_resources(const Collection& c, ValidationReport& out) {
    for (const auto& [id, r] : c.resources) {
        const auto where = "/resources/" + id;
        if (r.id != id) add(out, "resource-id-mismatch", "", where, "resource key differs from its id");
        if (r.kind == ResourceKind::LocalFile) {
            if (!r.data) {
                add(out, "resource-missing-data", "", where, "local resource has no bytes");
                continue;
            }
            if (r.data->empty() || r.byte_size == 0) add(out, "resource-empty", "", where, "local resource is empty");
            if (r.byte_size != r.data->size()) add(out, "resource-size-mismatch", "", where, "byte_size differs from stored bytes");
            if (content_id(*r.data) != r.id) add(out, "resource-id-mismatch", "", where, "id is not the content hash");
        } else {
            if (!is_valid_url(r.locator)) add(out, "bad-url", "", where, "external resource locator is not a URL");
            if (content_id(r.locator) != r.id) add(out, "resource-id-mismatch", "", where, "id is not the URL hash");
        }
    }
}

void check_annotations(const Collection& c, ValidationReport& out) {
    for (const auto& [id, a] : c.annotations) {
        const auto where = "/annotations/" + id;
        if (a.comment.empty()) add(out, "annotation-empty-comment", "", where, "annotation comment is empty");
        const auto& r = a.region;
        if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0) {
            add(out, "annotation-bad-region", "", where, "region must have non-negative origin and positive size");
        }
        auto it = c.resources.find(a.resource_id);
        if (it == c.resources.end()) {
            add(out, "annotation-dangling-resource", "", where, "unknown resource " + a.resource_id);
            continue;
        }
        if (!it->second.media_type.starts_with("image/")) {
            add(out, "annotation-not-image", "", where, "annotated resource is not an image");
            continue;
        }
        if (it->second.data) {
            if (auto size = probe_image_size(*it->second.data)) {
                if (r.x + r.w > size->width || r.y + r.h > size->height) {
                    add(out, "annotation-out-of-bounds", "", where, "region exceeds image bounds");
                }
            }
        }
    }
}

}  // namespace

bool is_valid_url(std::string_view url) {
    static const std::regex kUrl(R"(^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/?#]+[^\s]*$)");
    return std::regex_match(url.begin(), url.end(), kUrl);
}

void validate_schema(const Schema& schema, ValidationReport& out) {
    if (schema.root.kind != ElementKind::Composite) add(out, "schema-root-kind", "", "/", "schema root must be composite");
    check_type(schema.root, ElementPath{}, true, out);
}

void validate_mcq(const Mcq& mcq, const std::string& document_id, const std::string& path, ValidationReport& out) {
    if (mcq.choices.size() < 2) {
        add(out, "invalid-mcq", document_id, path, "an MCQ needs at least two choices");
        return;
    }
    if (mcq.correct_index >= mcq.choices.size()) add(out, "invalid-mcq", document_id, path, "correct index out of range");
    std::set<std::string, std::less<>> distinct;
    for (const auto& choice : mcq.choices) {
        if (choice.empty()) add(out, "invalid-mcq", document_id, path, "empty choice");
        if (!distinct.insert(choice).second) add(out, "invalid-mcq", document_id, path, "duplicate choice '" + choice + "'");
    }
}

ValidationReport validate_collection(const Collection& c) {
    ValidationReport out;
    validate_schema(c.schema, out);
    check_resources(c, out);
    check_annotations(c, out);
    for (const auto& [id, doc] : c.documents) {
        if (doc.id != id || id.empty()) add(out, "document-id", id, "/", "document key differs from its id");
        const auto* kids = doc.root.children();
        if (!kids) {
            add(out, "document-root", id, "/", "document root must be composite");
            continue;
        }
        DocumentChecker{c, id, out}.check_children(*kids, c.schema.root, InstancePath{});
    }
    std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.document_id, a.path, a.rule) < std::tie(b.document_id, b.path, b.rule);
    });
    return out;
}

std::string format_report(const ValidationReport& report) {
    std::string out;
    for (const auto& v : report) {
        out += v.rule + "\t" + (v.document_id.empty() ? "-" : v.document_id) + "\t" + v.path + "\t" + v.message + "\n";
    }
    return out;
}

}  // namespace curator
