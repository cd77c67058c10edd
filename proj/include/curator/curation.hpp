#pragma once

/// @file curation.hpp
/// @brief Document-level edits: values, element insertion, annotations, links.
///
/// Every function returns a new collection and leaves all documents other
/// than the edited one untouched. An edit that would leave the collection
/// invalid is rejected with a DomainError and no new value is produced.
///
/// Rule ids raised: unknown-document, unknown-path, non-atomic,
/// multiplicity, kind-mismatch, unknown-resource, not-image, empty-comment,
/// bad-region, out-of-bounds, dangling-link, bad-url, no-link-type,
/// ambiguous-link-type.

#include <optional>
#include <string>

#include "curator/errors.hpp"
#include "curator/model.hpp"
#include "curator/schema_ops.hpp"

namespace curator {

/// Replaces the text of an atomic instance. Empty text is a value.
Collection set_value(const Collection& c, const std::string& doc_id, const InstancePath& path, std::string text);

/// Appends an instance of `type_path` under `parent`, after the existing
/// siblings of the same type (or at its schema position when there are none).
Collection insert_element(const Collection& c, const std::string& doc_id, const InstancePath& parent,
                          const ElementPath& type_path, Payload payload);

/// Content-derived annotation id over resource, region and comment.
std::string annotation_id(const std::string& resource_id, const Region& region, const std::string& comment);

struct AnnotationResult {
    Collection collection;
    std::string id;
};

/// Stores a rectangular annotation on an image resource. Adding the same
/// resource/region/comment again returns the existing id unchanged.
AnnotationResult add_annotation(const Collection& c, const std::string& resource_id, const Region& region,
                                const std::string& comment, const std::string& author);

/// Appends a link under `parent`. Without `link_type`, the parent type must
/// have exactly one link-kind child. Internal targets must exist; external
/// URLs are checked syntactically only.
Collection add_link(const Collection& c, const std::string& doc_id, const InstancePath& parent, const LinkTarget& target,
                    const std::optional<std::string>& link_type = std::nullopt);

// Loggable forms of the edits above, for apply_op / apply_script. The
// command JSON is {"op": "set" | "insert" | "link" | "annotate", ...}.
DocumentEdit set_value_edit(const std::string& doc_id, const InstancePath& path, const std::string& text);
DocumentEdit insert_edit(const std::string& doc_id, const InstancePath& parent, const ElementInstance& element);
DocumentEdit link_edit(const std::string& doc_id, const InstancePath& parent, const LinkTarget& target,
                       const std::optional<std::string>& link_type = std::nullopt);
DocumentEdit annotate_edit(const std::string& resource_id, const Region& region, const std::string& comment,
                           const std::string& author);

/// Runs the edit described by a command. Throws DomainError
/// ("malformed-input") on an unknown or ill-shaped command.
Collection apply_edit(const Collection& c, const DocumentEdit& edit);

/// Resolves an instance inside a document; nullptr when absent.
const ElementInstance* find_instance(const Document& doc, const InstancePath& path);

}  // namespace curator
