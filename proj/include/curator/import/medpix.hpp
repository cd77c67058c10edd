#pragma once

/// @file medpix.hpp
/// @brief Client for a MedPix-style clinical case service.
///
/// The service exposes, relative to a base URL:
///   index.json               {"first_page": "cases/page-1.json", ...}
///   cases/page-N.json        {"cases": [ids], "next": "cases/page-N+1.json"?}
///   cases/<id>.json          case fields plus "topics", "questions", "images"
///   topics/<id>.json         topic fields
///   questions/<id>.json      {"stem", "choices", "answer", "explanation"?}
///   images/<file>            image bytes
/// Base URLs may be http(s):// or file:// (or a plain directory path).
/// Response-to-record mapping lives in namespace `medpix` so another
/// endpoint shape only needs a different mapping.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "curator/import/records.hpp"

namespace curator {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Fetches paths relative to a base location. Throws IoError when the
/// source cannot be reached; HTTP-level errors are returned as statuses.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& relative) = 0;
    /// Whether requests count against the rate limit (remote sources only).
    [[nodiscard]] virtual bool remote() const = 0;
};

std::unique_ptr<Transport> open_transport(const std::string& base_url);

struct MedpixOptions {
    std::string base_url;
    std::optional<std::size_t> max_cases;
    std::optional<std::size_t> max_topics;
    std::optional<std::size_t> max_questions;
    double requests_per_second = 2.0;  ///< remote sources only; <= 0 disables
    std::size_t parallelism = 4;
    /// Holds `.import-cursor` and `.import-cache/` for resuming after a
    /// network failure. Unset disables resuming.
    std::optional<std::filesystem::path> state_dir;
};

struct MedpixRecords {
    std::vector<RawRecord> cases;
    std::vector<RawRecord> topics;
    std::size_t questions = 0;
    std::size_t images = 0;        ///< distinct image files fetched
    std::size_t skipped = 0;       ///< cases answered with 4xx
    std::vector<std::string> errors;
    std::size_t requests = 0;      ///< requests sent to the transport
    std::size_t cached = 0;        ///< responses served from the resume cache
};

/// Paginated retrieval of cases with their topics, questions and images.
/// On a network failure the responses fetched so far are kept in the
/// state directory and IoError is thrown; rerunning with the same options
/// resumes from there. The state is removed after a complete run.
MedpixRecords medpix_fetch(const MedpixOptions& options, Transport* transport = nullptr);

namespace medpix {

inline constexpr std::string_view kIndex = "index.json";

std::string case_path(const std::string& id);
std::string topic_path(const std::string& id);
std::string question_path(const std::string& id);
std::string image_path(const std::string& file);
std::string topic_document_id(const std::string& topic_id);

struct Page {
    std::vector<std::string> case_ids;
    std::optional<std::string> next;
};

struct CaseRefs {
    std::vector<std::string> topics;
    std::vector<std::string> questions;
    std::vector<std::string> images;
};

std::string first_page(const nlohmann::ordered_json& index);
Page parse_page(const nlohmann::ordered_json& page);
CaseRefs case_refs(const nlohmann::ordered_json& case_json);
Mcq map_question(const nlohmann::ordered_json& question);
RawRecord map_topic(const std::string& topic_id, const nlohmann::ordered_json& topic);

/// Builds a case record. Topics, questions and images missing from the
/// given maps are left out, so the record only references fetched items.
RawRecord map_case(const std::string& case_id, const nlohmann::ordered_json& case_json,
                   const std::set<std::string>& topics, const std::map<std::string, Mcq>& questions,
                   const std::map<std::string, BlobPtr>& images);

}  // namespace medpix

}  // namespace curator
