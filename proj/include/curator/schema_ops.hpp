#pragma once

/// @file schema_ops.hpp
/// @brief Curation algebra over collection schemas.
///
/// Each operation rewrites the schema and every document in one step, so
/// the result conforms again. Operations are pure: the input collection is
/// never modified, and a failing operation throws DomainError without
/// producing a new value. Document edits go through the same entry points,
/// so every mutation is versioned and logged.
///
/// Rule ids raised: unknown-path, root-path, invalid-name, name-collision,
/// kind-mismatch, not-composite, cycle, empty-composite,
/// ambiguous-reattachment, invalid-collection.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "curator/errors.hpp"
#include "curator/model.hpp"

namespace curator {

struct RenameOp {
    ElementPath path;
    std::string new_name;
    bool operator==(const RenameOp&) const = default;
};

struct RemoveOp {
    ElementPath path;
    bool operator==(const RemoveOp&) const = default;
};

/// Source instances are retyped to the target and appended after the
/// existing target-typed siblings. Kinds must match; composite children
/// are unioned by name.
struct MergeOp {
    ElementPath source;
    ElementPath target;
    std::optional<std::string> new_name;
    bool operator==(const MergeOp&) const = default;
};

/// Within the same parent a move is a reorder; instances move with the type.
struct MoveOp {
    ElementPath path;
    ElementPath new_parent;
    std::optional<std::size_t> index;  ///< position among the new siblings; default last
    bool operator==(const MoveOp&) const = default;
};

/// Inserts composite `new_name` where the first listed type sits and moves
/// the listed types under it, in listed order.
struct GroupOp {
    std::vector<ElementPath> paths;
    std::string new_name;
    bool operator==(const GroupOp&) const = default;
};

/// Document-level edit (value, insertion, link, annotation) recorded in the
/// op log as a JSON command. Built by the helpers in curation.hpp.
struct DocumentEdit {
    nlohmann::json command;
    bool operator==(const DocumentEdit&) const = default;
};

using CurationOp = std::variant<RenameOp, RemoveOp, MergeOp, MoveOp, GroupOp, DocumentEdit>;

/// True for the schema-changing alternatives.
bool is_schema_op(const CurationOp& op);

/// Applies one operation. `timestamp` is recorded in the log entry.
/// Requires a valid input collection (InvalidCollection otherwise).
Collection apply_op(const Collection& c, const CurationOp& op, std::int64_t timestamp = 0);

struct OpReport {
    std::size_t index = 0;
    std::string op;  ///< DSL text
    bool ok = false;
    std::string rule;  ///< on failure
    std::string path;
    std::string message;
    std::int64_t post_version = 0;
    std::size_t type_count = 0;  ///< schema size after the op
};

struct ScriptResult {
    Collection collection;  ///< the original collection when `failed`
    std::vector<OpReport> reports;
    std::optional<std::size_t> failed_index;
    [[nodiscard]] bool ok() const { return !failed_index; }
};

/// Applies ops in order; the first failure aborts and returns the original
/// collection, reports for the ops that ran, and the failing op's report.
ScriptResult apply_script(const Collection& c, const std::vector<CurationOp>& ops, std::int64_t timestamp = 0);

/// Rebuilds a collection's head from an earlier snapshot by replaying ops
/// parsed from DSL text (e.g. a stored log). Throws on the first failure.
Collection replay_log(const Collection& base, std::string_view dsl_text, const std::vector<std::int64_t>& timestamps = {});

}  // namespace curator
