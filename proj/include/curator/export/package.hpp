#pragma once

/// @file package.hpp
/// @brief IMS Content Package and SCORM 1.2 export.
///
/// Archive layout:
///   imsmanifest.xml
///   <doc>.html              one page per document
///   <doc>-quiz.html         SCORM quiz SCO page (when quizzes are included)
///   resources/<id>.<ext>    local resources used by the pages
///   assets/style.css        shared stylesheet
///   scorm/sco.js            SCORM runtime for case pages
///   scorm/<doc>-quiz.js     quiz runtime with the embedded answer key
/// `<doc>` is the document id mapped through id_token.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "curator/export/zip.hpp"
#include "curator/model.hpp"
#include "curator/validate.hpp"

namespace curator {

enum class PackageFormat { ImsCp, Scorm12 };
enum class Detail { Full, Summary };

struct ExportProfile {
    PackageFormat format = PackageFormat::ImsCp;
    std::vector<ElementPath> selection;  ///< subtrees to render; empty renders everything
    std::optional<std::vector<std::string>> document_filter;
    Detail detail = Detail::Full;
    std::vector<ElementPath> summary_paths;  ///< subtrees kept by Detail::Summary
    bool include_quizzes = false;
    std::optional<std::int64_t> fixed_epoch;
    std::string title = "Collection";
};

std::string_view to_string(PackageFormat format);
std::optional<PackageFormat> parse_package_format(std::string_view text);
nlohmann::json to_json(const ExportProfile& profile);
/// Throws DomainError("malformed-input").
ExportProfile profile_from_json(const nlohmann::json& j);

/// Checks selection and summary paths against the schema and the document
/// filter against the collection. Throws DomainError.
void check_profile(const Collection& c, const ExportProfile& profile);

struct RenderedPage {
    std::string html;
    std::vector<std::string> assets;  ///< archive paths of local resources the page embeds
    bool has_content = false;         ///< false when the profile selects nothing in this document
};

/// One self-contained XHTML page for a document. Selected subtrees render
/// as sections, their ancestors as plain groups. Quiz elements are rendered
/// only in the quiz block, which appears when quizzes are included.
RenderedPage render_document_html(const Collection& c, const std::string& doc_id, const ExportProfile& profile);

/// Quiz SCO page and its runtime script for a document's MCQs.
std::string render_quiz_html(const Collection& c, const std::string& doc_id, const std::vector<Mcq>& questions);
std::string render_quiz_script(const std::vector<Mcq>& questions);

/// MCQs of a document in document order.
std::vector<Mcq> document_quizzes(const Document& doc);

struct PackageLayout {
    std::string manifest;
    zip::Entries files;  ///< every archive entry, manifest included
};

/// Builds the archive contents. Throws DomainError("empty-selection") when
/// no document has content to render.
PackageLayout build_package(const Collection& c, const ExportProfile& profile);

/// Zip bytes in the profile's format.
Bytes export_package(const Collection& c, const ExportProfile& profile);
Bytes export_imscp(const Collection& c, ExportProfile profile);
Bytes export_scorm12(const Collection& c, ExportProfile profile);

/// Structural checks of a package. Rules: missing-manifest, malformed-zip,
/// malformed-xml, missing-element, dangling-href, dangling-identifierref,
/// duplicate-identifier, orphan-file, bad-scormtype.
ValidationReport validate_package(std::span<const std::uint8_t> archive);

}  // namespace curator
