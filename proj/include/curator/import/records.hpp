#pragma once

/// @file records.hpp
/// @brief Plugin-to-engine intermediate records and schema inference.

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "curator/model.hpp"

namespace curator {

/// Resource reference inside a raw record: either fetched bytes or an URL.
struct RawResource {
    std::string media_type;
    std::string locator;  ///< source path or URL
    BlobPtr data;         ///< null for external references

    bool operator==(const RawResource& other) const;
};

struct RawField;

/// Ordered name/value fields; a repeated name is a list.
using RawTree = std::vector<RawField>;

using RawValue = std::variant<std::string, RawTree, RawResource, LinkTarget, Mcq>;

struct RawField {
    std::string name;
    RawValue value;
    bool operator==(const RawField&) const = default;
};

struct RawRecord {
    std::string source_id;  ///< may be empty; the document id then becomes a content hash
    std::string locator;    ///< where the record came from (file, URL)
    RawTree tree;
    bool operator==(const RawRecord&) const = default;
};

/// Path-union of all record trees. Nested values become composite, text
/// atomic, resources resource-ref, links link and MCQs quiz. Multiplicity is
/// many when a name repeats under one parent, optional when some parent
/// instance lacks it, else one. Children keep first-appearance order.
/// Throws DomainError("kind-conflict") naming the conflicting path.
Schema infer_schema(const std::vector<RawRecord>& records);

/// Structural union of two schemas (the first one's order wins).
/// Throws DomainError("kind-conflict") on disagreeing kinds.
Schema union_schemas(const Schema& a, const Schema& b);

/// Result of turning records into collection items.
struct BuiltItems {
    std::vector<Document> documents;
    std::vector<Resource> resources;
};

/// Mirrors each record as a document and ingests its resources, keyed by
/// content hash. Document ids are the source id, or the content hash of
/// the record's canonical form when the source id is empty.
BuiltItems build_documents(const std::vector<RawRecord>& records, const std::string& plugin);

}  // namespace curator
