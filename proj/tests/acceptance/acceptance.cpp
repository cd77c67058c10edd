// Acceptance checks for the primary component. Prints one PASS/FAIL line
// per criterion and exits non-zero when any criterion fails. Drives the
// installed CLI binary, the HTTP service and the library directly.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

#include "curator/canonical.hpp"
#include "curator/digest.hpp"
#include "curator/export/package.hpp"
#include "curator/export/xml.hpp"
#include "curator/export/zip.hpp"
#include "curator/schema_ops.hpp"
#include "curator/store.hpp"
#include "curator/validate.hpp"
#include "oracles.hpp"
#include "scorm_driver.hpp"
#include "service_fixture.hpp"
#include "support.hpp"

using namespace curator;
using namespace curator::test;

namespace {

using Clock = std::chrono::steady_clock;

struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failed(what);
}

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return out + "'";
}

struct Proc {
    int code = -1;
    std::string out;
};

Proc run(const std::string& program, const std::vector<std::string>& args) {
    std::string cmd = quote(program);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>&1";
    Proc p;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("cannot spawn " + program);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) p.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

Proc curator_cli(const std::vector<std::string>& args) { return run(CURATOR_CLI, args); }

Proc cli_ok(const std::vector<std::string>& args) {
    auto p = curator_cli(args);
    if (p.code != 0) {
        std::string line = "curator";
        for (const auto& a : args) line += " " + a;
        throw Failed(line + " exited " + std::to_string(p.code) + ": " + p.out);
    }
    return p;
}

std::string tree_digest(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + read_text(f) + "\n";
    return sha256_hex(std::string_view(all));
}

std::size_t docs_with_root(const Collection& c, const std::string& name) {
    std::size_t n = 0;
    for (const auto& [id, d] : c.documents) {
        const auto& kids = *d.root.children();
        if (!kids.empty() && kids.front().name == name) ++n;
    }
    return n;
}

bool has_type_named(const ElementType& t, const std::string& name) {
    for (const auto& child : t.children) {
        if (child.name == name || has_type_named(child, name)) return true;
    }
    return false;
}

std::string import_fixture(const TempDir& dir) {
    const auto store = (dir / "head.clv").string();
    cli_ok({"import", "--plugin", "medpix", "--base-url", medpix_fixture().string(), store});
    return store;
}

std::string curated_fixture(const TempDir& dir) {
    const auto store = import_fixture(dir);
    cli_ok({"schema", "apply", store, source_path("fixtures/medpix_curation.cdsl").string()});
    return store;
}

// 1
std::string fixture_import() {
    TempDir dir;
    const auto start = Clock::now();
    const auto store = import_fixture(dir);
    const auto elapsed = seconds_since(start);
    const auto c = load_store(store);
    const auto cases = docs_with_root(c, "Cases");
    const auto topics = docs_with_root(c, "Topic");
    const auto report = validate_collection(c);
    expect(cases == 12, "expected 12 case documents, got " + std::to_string(cases));
    expect(topics > 0, "no topic documents");
    expect(cases + topics == c.documents.size(), "documents other than cases and topics");
    expect(report.empty(), "validation report not empty:\n" + format_report(report));
    expect(elapsed < 5.0, "import took " + std::to_string(elapsed) + " s");
    std::ostringstream s;
    s << cases << " cases, " << topics << " topics, 0 violations, " << elapsed << " s";
    return s.str();
}

// 2
std::string schema_inventory() {
    TempDir dir;
    const auto store = import_fixture(dir);
    const auto show = cli_ok({"schema", "show", store});
    expect(show.out.find("element types: 88\n") != std::string::npos, "schema show does not report 88 element types");
    const auto count = load_store(store).schema.type_count();
    expect(count == 88, "library counts " + std::to_string(count) + " types");
    return "88 element types";
}

// 3
std::string curation_replay() {
    std::vector<std::string> digests;
    std::vector<std::string> serialized;
    for (int run = 0; run < 2; ++run) {
        TempDir dir;
        const auto store = curated_fixture(dir);
        const auto c = load_store(store);
        expect(c.schema.type_count() == 33, "curated schema has " + std::to_string(c.schema.type_count()) + " types");
        expect(has_type_named(c.schema.root, "Personal Data"), "no Personal Data element type");
        const auto report = validate_collection(c);
        expect(report.empty(), "curated collection invalid:\n" + format_report(report));
        expect(cli_ok({"validate", store}).out == "collection ok\n", "CLI validate disagrees");
        digests.push_back(tree_digest(store));
        serialized.push_back(canonical_serialize(c));
    }
    expect(digests[0] == digests[1], "stores differ between fresh runs");
    expect(serialized[0] == serialized[1], "canonical serializations differ between fresh runs");
    return "33 element types incl. Personal Data, valid, store sha " + digests[0].substr(0, 12) + " on both runs";
}

// 4
std::string op_algebra() {
    const auto start = Clock::now();
    const auto p = run(CURATOR_PROPERTY_TESTS, {"--test-case=op algebra*"});
    const auto elapsed = seconds_since(start);
    expect(p.code == 0, "property suite failed:\n" + p.out);
    std::smatch m;
    expect(std::regex_search(p.out, m, std::regex(R"((\d+) applied ops on (\d+) collections)")), "no op count reported");
    const auto applied = std::stoul(m[1]);
    expect(applied >= 1000, "only " + std::to_string(applied) + " ops applied");
    expect(elapsed < 60.0, "suite took " + std::to_string(elapsed) + " s");
    std::ostringstream s;
    s << applied << " applied ops on " << m[2] << " collections, " << elapsed << " s";
    return s.str();
}

// 5
std::string imscp_export() {
    TempDir dir;
    const auto store = curated_fixture(dir);
    const auto zip_path = (dir / "imscp.zip").string();
    const std::vector<std::string> selection{"/Cases/Title", "/Cases/Findings", "/Cases/Diagnosis", "/Topic/Title"};
    std::string select;
    for (const auto& s : selection) select += (select.empty() ? "" : ",") + s;
    cli_ok({"export", store, "--format", "imscp", "--select", select, "--epoch", "0", "-o", zip_path});
    const auto bytes = read_file(zip_path);
    const auto report = validate_package(bytes);
    expect(report.empty(), "validate_package:\n" + format_report(report));
    expect(cli_ok({"validate", zip_path}).out == "package ok\n", "CLI validate disagrees");
    const auto entries = zip::read(bytes);
    expect(entries.contains("imsmanifest.xml"), "manifest not at archive root");

    const auto back_store = (dir / "back.clv").string();
    cli_ok({"import", "--plugin", "package", "--path", zip_path, back_store});
    const auto expected = atomic_values(load_store(store), selection);
    const auto actual = atomic_values(load_store(back_store));
    expect(!expected.empty(), "selection holds no atomic values");
    expect(actual == expected, "re-imported atomic values differ (" + std::to_string(actual.size()) + " vs " +
                                   std::to_string(expected.size()) + ")");
    return std::to_string(entries.size()) + " entries valid, " + std::to_string(expected.size()) + " atomic values re-imported exactly";
}

// 6
std::string scorm_export() {
    TempDir dir;
    const auto store = curated_fixture(dir);
    const auto zip_path = (dir / "scorm.zip").string();
    cli_ok({"export", store, "--format", "scorm12", "--quizzes", "--epoch", "0", "-o", zip_path});
    const auto bytes = read_file(zip_path);
    expect(validate_package(bytes).empty(), "package does not validate");
    const auto entries = zip::read(bytes);
    const std::string manifest(entries.at("imsmanifest.xml").begin(), entries.at("imsmanifest.xml").end());
    const auto tree = xml::parse(manifest);
    const auto& m = tree.get_child("manifest");
    expect(m.get<std::string>("metadata.schemaversion") == "1.2", "schemaversion is not 1.2");
    std::size_t quiz_scos = 0;
    for (const auto& [tag, r] : m.get_child("resources")) {
        if (tag != "resource") continue;
        const auto href = xml::attribute(r, "href");
        if (href.ends_with("-quiz.html")) {
            expect(xml::attribute(r, "adlcp:scormtype") == "sco", "quiz resource " + href + " is not a sco");
            ++quiz_scos;
        }
    }
    expect(quiz_scos > 0, "no quiz resources");

    // The quiz scripts shipped in the package, against their own questions.
    const auto c = load_store(store);
    std::size_t shipped = 0;
    for (const auto& [id, doc] : c.documents) {
        const auto questions = document_quizzes(doc);
        if (questions.empty()) continue;
        const auto& js = entries.at("scorm/" + id + "-quiz.js");
        auto r = run_scorm_harness(std::string(js.begin(), js.end()), questions, dir.path());
        expect(r.exit_code == 0, "shipped quiz for " + id + ": " + r.output);
        ++shipped;
    }
    expect(shipped == quiz_scos, "quiz resources and quiz documents disagree");

    // Exhaustive right/wrong patterns for 1..8 questions.
    std::size_t patterns = 0;
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto questions = make_questions(n, n);
        auto r = run_scorm_harness(render_quiz_script(questions), questions, dir.path());
        expect(r.exit_code == 0, std::to_string(n) + " questions: " + r.output);
        auto j = nlohmann::json::parse(r.output);
        expect(j["failed"] == 0 && j["patterns"] == (1u << n), std::to_string(n) + " questions: " + r.output);
        patterns += j["patterns"].get<std::size_t>();
    }
    return "schemaversion 1.2, " + std::to_string(quiz_scos) + " quiz scos, " + std::to_string(shipped) +
           " shipped scripts and " + std::to_string(patterns) + " answer patterns (1-8 questions) scored correctly";
}

// 7
std::string determinism() {
    TempDir dir;
    const auto store = curated_fixture(dir);
    const auto golden = nlohmann::json::parse(read_text(source_path("fixtures/golden/exports.json")));
    std::ostringstream s;
    for (const auto& [name, args] : golden["exports"].items()) {
        std::vector<std::string> base{"export", store};
        for (const auto& a : args["args"]) base.push_back(a.get<std::string>());
        std::vector<std::string> shas;
        for (int i = 0; i < 2; ++i) {
            auto argv = base;
            const auto out = (dir / (name + std::to_string(i) + ".zip")).string();
            argv.insert(argv.end(), {"--epoch", "0", "-o", out});
            cli_ok(argv);
            shas.push_back(sha256_hex(read_file(out)));
        }
        expect(shas[0] == shas[1], name + " differs between runs");
        expect(shas[0] == args["sha256"].get<std::string>(), name + " sha " + shas[0] + " differs from golden");
        s << name << " " << shas[0].substr(0, 12) << " ";
    }
    return s.str() + "(identical twice, equal to golden)";
}

// 8
std::string log_replay() {
    ServiceFixture server;
    auto client = server.client();
    const auto head_id = create_fixture_collection(client);
    const auto base = "/collections/" + head_id;

    auto r = client.Post(base + "/schema/ops", {{"If-Match", "0"}}, read_text(source_path("fixtures/medpix_curation.cdsl")), "text/plain");
    expect(r && r->status == 200, "schema ops rejected");
    const auto version = body_json(r)["version"].get<std::int64_t>();
    r = client.Patch(base + "/documents/MPX1007", {{"If-Match", std::to_string(version)}},
                     R"({"op": "set", "path": "/Cases/Title", "text": "Foot fracture"})", "application/json");
    expect(r && r->status == 200, "document edit rejected: " + (r ? r->body : std::string("no response")));
    const std::string resource = load_store(server.storage()->path() / head_id / "store").resources.begin()->first;
    r = client.Post(base + "/annotations",
                    nlohmann::json{{"resource", resource}, {"region", {{"x", 1}, {"y", 1}, {"w", 4}, {"h", 4}}}, {"comment", "an injury"}}.dump(),
                    "application/json");
    expect(r && r->status == 201, "annotation rejected: " + (r ? r->body : std::string("no response")));

    r = client.Get(base + "/log");
    expect(r && r->status == 200, "GET /log failed");
    const auto log_text = r->body;
    r = client.Get(base + "/log?format=records");
    std::vector<std::int64_t> timestamps;
    const auto records = body_json(r);
    for (const auto& rec : records["records"]) timestamps.push_back(rec["timestamp"].get<std::int64_t>());

    const auto head_store = server.storage()->path() / head_id / "store";
    expect(read_text(head_store / "log" / "ops.cdsl") == log_text, "log/ops.cdsl differs from GET /log");
    const auto head = canonical_serialize(load_store(head_store));

    // Fresh import over HTTP, then replay through the library.
    const auto fresh_id = create_fixture_collection(client);
    const auto fresh = load_store(server.storage()->path() / fresh_id / "store");
    const auto replayed = canonical_serialize(replay_log(fresh, log_text, timestamps));
    expect(replayed == head, "library replay differs from the head snapshot");

    // And through the CLI, comparing stored bytes.
    TempDir dir;
    const auto fresh_cli = import_fixture(dir);
    write_file_atomic(dir / "ops.cdsl", log_text);
    const auto out = (dir / "replayed.clv").string();
    cli_ok({"replay", fresh_cli, (dir / "ops.cdsl").string(), "--timestamps-from", head_store.string(), "-o", out});
    expect(tree_digest(out) == tree_digest(head_store), "CLI replay store differs from the head store");
    return std::to_string(timestamps.size()) + " logged ops replayed; snapshot sha " + sha256_hex(std::string_view(head)).substr(0, 12) +
           " reproduced via library and CLI";
}

}  // namespace

int main() {
    ::setenv("SOURCE_DATE_EPOCH", std::to_string(kFixedTime).c_str(), 1);
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
        {"fixture import", fixture_import},
        {"schema inventory", schema_inventory},
        {"curation replay", curation_replay},
        {"op-algebra property suite", op_algebra},
        {"IMS CP export", imscp_export},
        {"SCORM export", scorm_export},
        {"determinism", determinism},
        {"log replay", log_replay},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& [name, check] = criteria[i];
        std::string verdict;
        std::string detail;
        try {
            detail = check();
            verdict = "PASS";
        } catch (const std::exception& e) {
            detail = e.what();
            verdict = "FAIL";
            ++failures;
        }
        std::cout << verdict << " [" << i + 1 << "] " << name << ": " << detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
