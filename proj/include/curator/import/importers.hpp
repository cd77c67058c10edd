#pragma once

/// @file importers.hpp
/// @brief Import plugins and the import driver.
///
/// A plugin turns an external source into RawRecords. The driver infers a
/// schema over them, unions it with the sink's schema and adds the
/// resulting documents and resources to the sink.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "curator/import/records.hpp"
#include "curator/model.hpp"

namespace curator {

/// Plugin parameters: "path", "base_url", "max_cases", "delimiter", ...
using ImportParams = std::map<std::string, std::string, std::less<>>;

/// Records produced by a plugin. `linked` records are secondary documents
/// (e.g. topic pages) the primary records point to.
struct FetchResult {
    std::vector<RawRecord> records;
    std::vector<RawRecord> linked;
    std::size_t skipped = 0;
    std::vector<std::string> errors;
};

class ImportPlugin {
public:
    virtual ~ImportPlugin() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    virtual FetchResult fetch(const ImportParams& params) = 0;
};

/// Known plugins: "files", "tabular", "medpix", "package".
/// Throws DomainError("unknown-plugin").
std::unique_ptr<ImportPlugin> make_plugin(std::string_view name);

struct ImportReport {
    std::size_t documents = 0;         ///< primary documents added
    std::size_t linked_documents = 0;  ///< secondary documents added
    std::size_t resources = 0;         ///< resources new to the collection
    std::size_t skipped = 0;           ///< malformed, unreachable or duplicate records
    std::vector<std::string> errors;   ///< one message per skipped record
};

nlohmann::json to_json(const ImportReport& report);

struct ImportResult {
    Collection collection;
    ImportReport report;
};

/// Adds fetched records to `sink`. Records whose document id already
/// exists are skipped. Throws DomainError("kind-conflict") when the records
/// disagree with each other or with the sink schema, and InvalidCollection
/// if the result would not validate.
ImportResult import_records(const Collection& sink, const FetchResult& fetched, const std::string& plugin);

/// fetch + import_records.
ImportResult run_import(const Collection& sink, ImportPlugin& plugin, const ImportParams& params);

/// Converts a JSON object into record fields, in key order. Arrays repeat
/// the field name, null is skipped, scalars become text. Objects with a
/// single marker key become references:
///   {"$resource": "rel/path"}  local file relative to `base_dir`
///   {"$url": "https://..."}    external resource
///   {"$link": "doc-id"}        link to another document
///   {"$annotation": "id"}      link to an annotation
///   {"$href": "https://..."}   external link
///   {"$mcq": {...}}            multiple-choice question
/// Throws DomainError("malformed-input").
RawTree json_to_tree(const nlohmann::ordered_json& object, const std::filesystem::path& base_dir);

}  // namespace curator
