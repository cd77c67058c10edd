#pragma once

// Runs tests/harness/scorm_harness.js on an emitted quiz script.

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "curator/export/package.hpp"
#include "support.hpp"

namespace curator::test {

struct HarnessRun {
    int exit_code = -1;
    std::string output;  ///< the harness' JSON summary line
};

inline HarnessRun run_scorm_harness(const std::string& script, const std::vector<Mcq>& questions, const fs::path& workdir) {
    const auto script_path = workdir / "quiz.js";
    const auto config_path = workdir / "config.json";
    std::ofstream(script_path, std::ios::binary) << script;
    nlohmann::json key = nlohmann::json::array();
    nlohmann::json choices = nlohmann::json::array();
    for (const auto& q : questions) {
        key.push_back(q.correct_index);
        choices.push_back(q.choices.size());
    }
    std::ofstream(config_path) << nlohmann::json{{"script", script_path.string()}, {"key", key}, {"choices", choices}}.dump();

    const std::string command =
        std::string(CURATOR_NODE) + " " + source_path("tests/harness/scorm_harness.js").string() + " " + config_path.string() + " 2>&1";
    HarnessRun run;
    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) return run;
    std::array<char, 4096> buf{};
    while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) run.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return run;
}

/// n questions with varied choice counts and answer positions.
inline std::vector<Mcq> make_questions(std::size_t n, unsigned seed = 7) {
    std::vector<Mcq> out;
    for (std::size_t i = 0; i < n; ++i) {
        Mcq q;
        q.stem = "Question " + std::to_string(i + 1) + " <b>&amp;</b> \"quoted\"";
        const std::size_t count = 2 + (i * 3 + seed) % 4;
        for (std::size_t k = 0; k < count; ++k) q.choices.push_back("Choice " + std::to_string(k));
        q.correct_index = (i * 7 + seed) % count;
        if (i % 2) q.explanation = "Because </script> and 'quotes'";
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace curator::test
