#pragma once

/// @file canonical.hpp
/// @brief Canonical structured-text encoding of collections and their parts.
///
/// The encoding is compact JSON: UTF-8, object keys sorted bytewise, no
/// insignificant whitespace, a single trailing LF. Documents, resources and
/// annotations are emitted ordered by id; schema children keep declared order.

#include <string>
#include <string_view>

#include <json.hpp>

#include "curator/errors.hpp"
#include "curator/model.hpp"
#include "curator/validate.hpp"

namespace curator {

inline constexpr std::string_view kCollectionFormat = "curator-collection/1";

/// Raised when a collection fails validation where a valid one is required.
class InvalidCollection : public DomainError {
public:
    explicit InvalidCollection(ValidationReport report);
    [[nodiscard]] const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Compact dump with sorted keys and a trailing LF. Throws DomainError
/// ("invalid-utf8") if any string is not valid UTF-8.
std::string canonical_dump(const nlohmann::json& j);

nlohmann::json to_json(const ElementType& type);
nlohmann::json to_json(const Schema& schema);
nlohmann::json to_json(const ElementInstance& instance);
nlohmann::json to_json(const Document& doc);
nlohmann::json to_json(const LinkTarget& link);
nlohmann::json to_json(const Mcq& mcq);
nlohmann::json to_json(const Annotation& annotation);
nlohmann::json to_json(const LogRecord& record);
/// With `embed_data`, local bytes are carried as base64 under "data".
nlohmann::json to_json(const Resource& resource, bool embed_data);
nlohmann::json to_json(const Violation& violation);
nlohmann::json to_json(const ValidationReport& report);

// Parsing counterparts. Throw DomainError("malformed-input") on shape errors.
ElementType element_type_from_json(const nlohmann::json& j);
Schema schema_from_json(const nlohmann::json& j);
ElementInstance instance_from_json(const nlohmann::json& j);
Document document_from_json(const nlohmann::json& j);
LinkTarget link_from_json(const nlohmann::json& j);
Mcq mcq_from_json(const nlohmann::json& j);
Annotation annotation_from_json(const nlohmann::json& j);
LogRecord log_record_from_json(const nlohmann::json& j);
/// `data` (base64) is decoded when present.
Resource resource_from_json(const nlohmann::json& j);

/// Whole-collection encoding. Refuses invalid collections with
/// InvalidCollection carrying the report.
std::string canonical_serialize(const Collection& c);
Collection deserialize_collection(std::string_view text);

/// Canonical bytes of one document; used to check edit locality.
std::string canonical_document(const Document& doc);

}  // namespace curator
