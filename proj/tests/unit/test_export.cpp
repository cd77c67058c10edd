#include <doctest.h>

#include "curator/digest.hpp"
#include "curator/export/package.hpp"
#include "curator/export/xml.hpp"
#include "curator/export/zip.hpp"
#include "curator/import/importers.hpp"
#include "curator/store.hpp"
#include "oracles.hpp"
#include "scorm_driver.hpp"
#include "support.hpp"

using namespace curator;
using curator::test::TempDir;

namespace {

Bytes B(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string S(const Bytes& b) { return {b.begin(), b.end()}; }

std::vector<std::string> rules(const ValidationReport& r) {
    std::vector<std::string> out;
    for (const auto& v : r) out.push_back(v.rule);
    return out;
}

bool has_rule(const ValidationReport& r, const std::string& rule) {
    auto all = rules(r);
    return std::find(all.begin(), all.end(), rule) != all.end();
}

ExportProfile scorm_profile() {
    ExportProfile p;
    p.format = PackageFormat::Scorm12;
    p.include_quizzes = true;
    p.fixed_epoch = 0;
    return p;
}

}  // namespace

TEST_CASE("zip round-trips and is deterministic with a fixed epoch") {
    zip::Entries entries{{"b.txt", B("bee")}, {"a/x.bin", Bytes{0, 1, 2, 255}}, {"empty", {}}};
    auto one = zip::write(entries, 0);
    auto two = zip::write(entries, 0);
    CHECK(one == two);
    CHECK(zip::looks_like_zip(one));
    CHECK(zip::read(one) == entries);
    CHECK(zip::write(entries, 1700000000) != one);
    CHECK_THROWS_AS(zip::read(B("PK\x03\x04 truncated")), IoError);
    auto corrupt = one;
    corrupt[40] ^= 0xff;
    CHECK_THROWS_AS(zip::read(corrupt), IoError);
}

TEST_CASE("xml writer escapes and the parser reads attributes") {
    xml::Writer w;
    w.open("root", {{"a", "x\"<&>"}});
    w.leaf("t", "1 < 2 & 3");
    w.empty("e", {{"href", "p q.html"}});
    w.close();
    auto tree = xml::parse(w.str());
    const auto& root = tree.get_child("root");
    CHECK(xml::attribute(root, "a") == "x\"<&>");
    CHECK(root.get<std::string>("t") == "1 < 2 & 3");
    CHECK_THROWS_AS(xml::parse("<a><b></a>"), DomainError);
}

TEST_CASE("profiles serialize and are checked against the collection") {
    ExportProfile p = scorm_profile();
    p.selection = {ElementPath::parse("/Findings")};
    p.detail = Detail::Summary;
    p.summary_paths = {ElementPath::parse("/Findings/Note")};
    p.document_filter = std::vector<std::string>{"a"};
    p.title = "Teaching file";
    auto back = profile_from_json(to_json(p));
    CHECK(to_json(back) == to_json(p));

    const auto c = curator::test::sample_collection();
    CHECK_NOTHROW(check_profile(c, p));
    auto bad = p;
    bad.selection = {ElementPath::parse("/Nope")};
    CHECK_THROWS_WITH_AS(check_profile(c, bad), doctest::Contains("/Nope"), DomainError);
    bad = p;
    bad.summary_paths.clear();
    CHECK_THROWS_AS(check_profile(c, bad), DomainError);
    bad = p;
    bad.document_filter = std::vector<std::string>{"zz"};
    CHECK_THROWS_AS(check_profile(c, bad), DomainError);
    CHECK_THROWS_AS(profile_from_json(nlohmann::json{{"format", "pdf"}}), DomainError);
}

TEST_CASE("document pages carry values, figures, links and annotations") {
    auto c = curator::test::sample_collection();
    std::string image;
    for (const auto& [id, r] : c.resources) image = id;
    c.annotations.emplace("ann1", Annotation{"ann1", image, Region{1, 2, 3, 4}, "fracture <here>", "dr"});
    auto page = render_document_html(c, "a", ExportProfile{});
    CHECK(page.has_content);
    CHECK(page.html.find("data-role=\"document\"") != std::string::npos);
    CHECK(page.html.find("class=\"value\" data-path=\"/Findings/Note[1]\">second</p>") != std::string::npos);
    CHECK(page.html.find("href=\"b.html\"") != std::string::npos);
    CHECK(page.html.find("https://example.org/atlas") != std::string::npos);
    CHECK(page.html.find("fracture &lt;here&gt;") != std::string::npos);
    CHECK(page.html.find("Which bone?") == std::string::npos);  // quizzes are opt-in
    REQUIRE(page.assets.size() == 1);
    CHECK(page.assets[0].starts_with("resources/" + image));
    CHECK_NOTHROW(xml::parse(page.html));

    ExportProfile narrow;
    narrow.selection = {ElementPath::parse("/Findings/Size")};
    CHECK_FALSE(render_document_html(c, "b", narrow).has_content);
    auto small = render_document_html(c, "a", narrow);
    CHECK(small.html.find("3 cm") != std::string::npos);
    CHECK(small.html.find("data-path=\"/Title\"") == std::string::npos);
    CHECK(small.html.find("class=\"group\" data-type=\"/Findings\"") != std::string::npos);
}

TEST_CASE("summary detail keeps only summary subtrees") {
    const auto c = curator::test::sample_collection();
    ExportProfile p;
    p.detail = Detail::Summary;
    p.summary_paths = {ElementPath::parse("/Title")};
    auto page = render_document_html(c, "a", p);
    CHECK(page.html.find("Alpha") != std::string::npos);
    CHECK(page.html.find("3 cm") == std::string::npos);
}

TEST_CASE("empty selection is refused") {
    const auto c = curator::test::sample_collection();
    ExportProfile p;
    p.document_filter = std::vector<std::string>{"b"};
    p.selection = {ElementPath::parse("/Web")};
    try {
        build_package(c, p);
        FAIL("expected empty-selection");
    } catch (const DomainError& e) {
        CHECK(e.rule() == "empty-selection");
    }
}

TEST_CASE("IMS CP layout and manifest") {
    const auto c = curator::test::sample_collection();
    ExportProfile p;
    p.fixed_epoch = 0;
    auto layout = build_package(c, p);
    CHECK(layout.files.contains("imsmanifest.xml"));
    CHECK(layout.files.contains("a.html"));
    CHECK(layout.files.contains("b.html"));
    CHECK(layout.files.contains("assets/style.css"));
    CHECK_FALSE(layout.files.contains("scorm/sco.js"));
    auto tree = xml::parse(layout.manifest);
    const auto& m = tree.get_child("manifest");
    CHECK(m.get<std::string>("metadata.schemaversion") == "1.1.4");
    CHECK(xml::attribute(m, "xmlns") == "http://www.imsglobal.org/xsd/imscp_v1p1");
    CHECK(validate_package(export_package(c, p)).empty());
}

TEST_CASE("SCORM manifest, SCO resources and quiz pages") {
    const auto c = curator::test::sample_collection();
    auto layout = build_package(c, scorm_profile());
    CHECK(layout.files.contains("a-quiz.html"));
    CHECK(layout.files.contains("scorm/a-quiz.js"));
    CHECK_FALSE(layout.files.contains("b-quiz.html"));
    auto tree = xml::parse(layout.manifest);
    const auto& m = tree.get_child("manifest");
    CHECK(m.get<std::string>("metadata.schema") == "ADL SCORM");
    CHECK(m.get<std::string>("metadata.schemaversion") == "1.2");
    std::size_t scos = 0;
    bool quiz_resource = false;
    for (const auto& [tag, r] : m.get_child("resources")) {
        if (tag != "resource") continue;
        CHECK(xml::attribute(r, "adlcp:scormtype") == "sco");
        ++scos;
        if (xml::attribute(r, "identifier") == "RES-a-QUIZ") quiz_resource = xml::attribute(r, "href") == "a-quiz.html";
    }
    CHECK(scos == 3);
    CHECK(quiz_resource);
    const auto quiz_page = S(layout.files.at("a-quiz.html"));
    CHECK(quiz_page.find("data-role=\"quiz\"") != std::string::npos);
    CHECK(quiz_page.find("name=\"q0\"") != std::string::npos);
    CHECK(validate_package(export_package(c, scorm_profile())).empty());
}

TEST_CASE("exports are byte-deterministic with a fixed epoch") {
    const auto c = curator::test::sample_collection();
    CHECK(export_package(c, scorm_profile()) == export_package(c, scorm_profile()));
    ExportProfile p;
    p.fixed_epoch = 0;
    CHECK(sha256_hex(export_package(c, p)) == sha256_hex(export_package(curator::test::sample_collection(), p)));
}

TEST_CASE("package validator rules") {
    const auto c = curator::test::sample_collection();
    const auto good = build_package(c, scorm_profile()).files;
    auto check = [](zip::Entries files) { return validate_package(zip::write(files, 0)); };

    auto f = good;
    f.erase("imsmanifest.xml");
    CHECK(rules(check(f)) == std::vector<std::string>{"missing-manifest"});

    f = good;
    f["extra.txt"] = B("x");
    CHECK(rules(check(f)) == std::vector<std::string>{"orphan-file"});

    f = good;
    f.erase("b.html");
    CHECK(has_rule(check(f), "dangling-href"));

    f = good;
    f["imsmanifest.xml"] = B("<manifest><unclosed></manifest>");
    CHECK(rules(check(f)) == std::vector<std::string>{"malformed-xml"});

    auto manifest = S(good.at("imsmanifest.xml"));
    auto replace = [&](std::string from, std::string to) {
        auto m = manifest;
        auto pos = m.find(from);
        REQUIRE(pos != std::string::npos);
        m.replace(pos, from.size(), to);
        auto files = good;
        files["imsmanifest.xml"] = B(m);
        return check(files);
    };
    CHECK(has_rule(replace("adlcp:scormtype=\"sco\"", "adlcp:scormtype=\"lesson\""), "bad-scormtype"));
    CHECK(has_rule(replace("identifierref=\"RES-b\"", "identifierref=\"RES-zz\""), "dangling-identifierref"));
    CHECK(has_rule(replace("identifier=\"RES-b\"", "identifier=\"RES-a\""), "duplicate-identifier"));
    CHECK(has_rule(replace("<schemaversion>1.2</schemaversion>", ""), "missing-element"));
    CHECK(rules(validate_package(B("not a zip at all"))) == std::vector<std::string>{"malformed-zip"});
}

TEST_CASE("package re-import reproduces the exported atomic values") {
    TempDir dir;
    const auto c = curator::test::sample_collection();
    for (const auto& selection : std::vector<std::vector<std::string>>{{}, {"/Findings"}, {"/Title", "/Findings/Size"}}) {
        ExportProfile p;
        p.fixed_epoch = 0;
        for (const auto& s : selection) p.selection.push_back(ElementPath::parse(s));
        const auto path = dir / "pkg.zip";
        write_file_atomic(path, export_package(c, p));
        auto plugin = make_plugin("package");
        auto back = run_import(Collection{}, *plugin, {{"path", path.string()}}).collection;
        CHECK(curator::test::atomic_values(back) == curator::test::atomic_values(c, selection));
    }
}

TEST_CASE("quiz script reports scores to a stub LMS") {
    TempDir dir;
    for (std::size_t n : {1u, 3u}) {
        auto questions = curator::test::make_questions(n);
        auto run = curator::test::run_scorm_harness(render_quiz_script(questions), questions, dir.path());
        INFO(run.output);
        CHECK(run.exit_code == 0);
        CHECK(run.output.find("\"failed\":0") != std::string::npos);
    }
}

TEST_CASE("quiz harness catches a wrong key") {
    TempDir dir;
    auto questions = curator::test::make_questions(2);
    auto script = render_quiz_script(questions);
    auto wrong = questions;
    wrong[0].correct_index = (wrong[0].correct_index + 1) % wrong[0].choices.size();
    auto run = curator::test::run_scorm_harness(script, wrong, dir.path());
    CHECK(run.exit_code == 1);
}
