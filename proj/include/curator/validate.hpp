#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "curator/model.hpp"

namespace curator {

struct Violation {
    std::string rule;         ///< stable rule id, e.g. "unknown-path"
    std::string document_id;  ///< empty for collection-level findings
    std::string path;         ///< instance path, element path, or "/resources/<id>"
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Ordered by (document id, path, rule).
using ValidationReport = std::vector<Violation>;

/// Checks schema well-formedness, document conformance, referential closure
/// of resources, links and annotations, and the per-type invariants.
ValidationReport validate_collection(const Collection& c);

/// Syntactic URL check: `scheme://authority[rest]`, no whitespace.
bool is_valid_url(std::string_view url);

/// Structural checks on a schema alone (names, kinds, composites).
void validate_schema(const Schema& schema, ValidationReport& out);

/// Checks one Mcq; appends violations under the given location.
void validate_mcq(const Mcq& mcq, const std::string& document_id, const std::string& path, ValidationReport& out);

std::string format_report(const ValidationReport& report);

}  // namespace curator
