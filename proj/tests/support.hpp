#pragma once

// Shared helpers for the test binaries.

#include <atomic>
#include <fstream>
#include <iterator>
#include <filesystem>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "curator/canonical.hpp"
#include "curator/import/importers.hpp"
#include "curator/model.hpp"

namespace curator::test {

namespace fs = std::filesystem;

inline constexpr std::int64_t kFixedTime = 1700000000;

inline fs::path source_path(const std::string& relative) { return fs::path(CURATOR_SOURCE_DIR) / relative; }
inline fs::path fixture_dir() { return source_path("fixtures"); }
inline fs::path medpix_fixture() { return source_path("fixtures/medpix"); }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("curator-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

/// Two small documents with text, nesting, an image, links and a quiz.
inline Collection sample_collection() {
    using nlohmann::ordered_json;
    const auto a = ordered_json::parse(R"({
        "Title": "Alpha",
        "Findings": {"Note": ["first", "second"], "Size": "3 cm"},
        "Image": {"$resource": "images/MPX1007-1.png"},
        "See": {"$link": "b"},
        "Web": {"$href": "https://example.org/atlas"},
        "Quiz": {"$mcq": {"stem": "Which bone?", "choices": ["Talus", "Calcaneus", "Cuboid"], "correct_index": 1,
                          "explanation": "Heel."}}
    })");
    const auto b = ordered_json::parse(R"({"Title": "Beta", "Findings": {"Note": "third"}})");
    FetchResult fetched;
    fetched.records.push_back({"a", "a.json", json_to_tree(a, medpix_fixture())});
    fetched.records.push_back({"b", "b.json", json_to_tree(b, medpix_fixture())});
    return import_records(Collection{}, fetched, "files").collection;
}

/// The bundled MedPix-style fixture imported through the file transport.
inline const Collection& fixture_collection() {
    static const Collection c = [] {
        auto plugin = make_plugin("medpix");
        return run_import(Collection{}, *plugin, {{"base_url", medpix_fixture().string()}}).collection;
    }();
    return c;
}

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace curator::test
