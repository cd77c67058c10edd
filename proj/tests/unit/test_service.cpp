#include <doctest.h>

#include <atomic>

#include "curator/canonical.hpp"
#include "curator/dsl.hpp"
#include "curator/export/package.hpp"
#include "curator/store.hpp"
#include "service_fixture.hpp"

using namespace curator;
using namespace curator::test;
using nlohmann::json;

namespace {

httplib::Headers if_match(std::int64_t v) { return {{"If-Match", std::to_string(v)}}; }

std::int64_t version_of(httplib::Client& c, const std::string& id) {
    return body_json(c.Get("/collections/" + id + "/schema"))["version"].get<std::int64_t>();
}

}  // namespace

TEST_CASE("collections are created, listed and 404 when unknown") {
    ServiceFixture fx;
    auto c = fx.client();
    auto r = c.Post("/collections");
    REQUIRE(r);
    CHECK(r->status == 201);
    const auto id = body_json(r)["id"].get<std::string>();
    CHECK(body_json(c.Get("/collections")).size() == 1);
    CHECK(c.Get("/collections/" + id)->status == 200);
    CHECK(c.Get("/collections/nope")->status == 404);
    CHECK(c.Get("/collections/nope/schema")->status == 404);
    CHECK(body_json(c.Get("/collections/nope/schema"))["rule"] == "unknown-collection");
}

TEST_CASE("uploading a zipped store creates a collection from it") {
    TempDir dir;
    save_store_zip(sample_collection(), dir / "s.clv");
    const auto bytes = read_file(dir / "s.clv");
    ServiceFixture fx;
    auto c = fx.client();
    auto r = c.Post("/collections", std::string(bytes.begin(), bytes.end()), "application/zip");
    REQUIRE(r->status == 201);
    const auto id = body_json(r)["id"].get<std::string>();
    auto docs = body_json(c.Get("/collections/" + id + "/documents"));
    CHECK(docs["total"] == 2);
    CHECK(c.Post("/collections", "garbage", "application/zip")->status == 400);
}

TEST_CASE("fixture import through the service") {
    ServiceFixture fx;
    auto c = fx.client();
    const auto id = body_json(c.Post("/collections"))["id"].get<std::string>();
    auto r = c.Post("/collections/" + id + "/import", R"({"plugin": "medpix"})", "application/json");
    REQUIRE(r->status == 200);
    auto report = body_json(r);
    CHECK(report["documents"] == 12);
    CHECK(report["linked_documents"] == 6);
    auto schema = body_json(c.Get("/collections/" + id + "/schema"));
    CHECK(schema["type_count"] == 88);

    CHECK(c.Post("/collections/" + id + "/import", R"({"plugin": "gopher"})", "application/json")->status == 422);
    CHECK(c.Post("/collections/" + id + "/import", R"({)", "application/json")->status == 400);
    auto unreachable = c.Post("/collections/" + id + "/import", R"({"plugin": "medpix", "params": {"base_url": "http://127.0.0.1:1/x"}})",
                              "application/json");
    CHECK(unreachable->status == 502);
}

TEST_CASE("schema ops are guarded by If-Match") {
    ServiceFixture fx;
    auto c = fx.client();
    const auto id = create_fixture_collection(c);
    const auto path = "/collections/" + id + "/schema/ops";

    CHECK(c.Post(path, "rename /Cases/Title as Heading\n", "text/plain")->status == 428);
    auto stale = c.Post(path, if_match(5), "rename /Cases/Title as Heading\n", "text/plain");
    CHECK(stale->status == 409);
    CHECK(version_of(c, id) == 0);

    auto ok = c.Post(path, if_match(0), "rename /Cases/Title as Heading\nremove /Cases/Author\n", "text/plain");
    REQUIRE(ok->status == 200);
    CHECK(body_json(ok)["version"] == 2);
    CHECK(ok->get_header_value("ETag") == "\"2\"");
    CHECK(version_of(c, id) == 2);

    auto as_json = c.Post(path, if_match(2), R"({"ops": ["rename /Cases/Heading as Title"]})", "application/json");
    CHECK(body_json(as_json)["version"] == 3);

    auto failing = c.Post(path, if_match(3), "rename /Cases/Title as Heading\nremove /Nope\n", "text/plain");
    CHECK(failing->status == 422);
    auto err = body_json(failing);
    CHECK(err["rule"] == "unknown-path");
    CHECK(err["failed_index"] == 1);
    CHECK(version_of(c, id) == 3);

    auto syntax = c.Post(path, if_match(3), "frobnicate /x\n", "text/plain");
    CHECK(syntax->status == 422);
    CHECK(body_json(syntax)["line"] == 1);

    auto dry = c.Post(path + "?dry_run=1", if_match(3), "remove /Cases/Exam\n", "text/plain");
    CHECK(body_json(dry)["dry_run"] == true);
    CHECK(version_of(c, id) == 3);
}

TEST_CASE("documents page, read and patch") {
    ServiceFixture fx;
    auto c = fx.client();
    const auto id = create_fixture_collection(c);
    auto page = body_json(c.Get("/collections/" + id + "/documents?page=1&size=5"));
    CHECK(page["total"] == 18);
    CHECK(page["pages"] == 4);
    CHECK(page["documents"].size() == 5);
    CHECK(page["documents"][0]["id"] == "MPX1006");
    CHECK(c.Get("/collections/" + id + "/documents?page=x")->status == 400);

    auto doc = c.Get("/collections/" + id + "/documents/MPX1007");
    REQUIRE(doc->status == 200);
    CHECK(c.Get("/collections/" + id + "/documents/none")->status == 404);

    const auto path = "/collections/" + id + "/documents/MPX1007";
    const json set = {{"op", "set"}, {"path", "/Cases/Title"}, {"text", "Edited title"}};
    CHECK(c.Patch(path, set.dump(), "application/json")->status == 428);
    auto patched = c.Patch(path, if_match(0), set.dump(), "application/json");
    REQUIRE(patched->status == 200);
    auto pj = body_json(patched);
    CHECK(pj["version"] == 1);
    CHECK(pj["document"]["root"]["children"][0]["children"][0]["text"] == "Edited title");

    const json two = {{"commands",
                       {{{"op", "set"}, {"path", "/Cases/Age"}, {"text", "23"}},
                        {{"op", "link"}, {"parent", "/Cases"}, {"target", {{"kind", "external-url"}, {"value", "https://example.org/x"}}},
                         {"type", "Topics"}}}}};
    auto multi = c.Patch(path, if_match(1), two.dump(), "application/json");
    REQUIRE(multi->status == 200);
    CHECK(body_json(multi)["version"] == 3);
    CHECK(body_json(multi)["reports"].size() == 2);

    // A batch applies entirely or not at all.
    const json half = {{"commands",
                        {{{"op", "set"}, {"path", "/Cases/Age"}, {"text", "99"}},
                         {{"op", "set"}, {"path", "/Cases/Nope"}, {"text", "x"}}}}};
    auto refused = c.Patch(path, if_match(3), half.dump(), "application/json");
    CHECK(refused->status == 422);
    CHECK(body_json(refused)["failed_index"] == 1);
    CHECK(version_of(c, id) == 3);
    auto age = body_json(c.Get(path))["document"]["root"]["children"][0]["children"][2];
    CHECK(age["text"] == "23");

    auto bad = c.Patch(path, if_match(3), R"({"op": "set", "path": "/Cases", "text": "x"})", "application/json");
    CHECK(bad->status == 422);
    CHECK(body_json(bad)["rule"] == "non-atomic");
}

TEST_CASE("annotations are created once and listed per resource") {
    ServiceFixture fx;
    auto c = fx.client();
    const auto id = create_fixture_collection(c);
    auto head = body_json(c.Get("/collections/" + id + "/documents/MPX1007"))["document"];
    // Find the image resource of the foot case.
    std::string resource;
    std::function<void(const json&)> find = [&](const json& n) {
        if (n.contains("resource")) resource = n["resource"];
        if (n.contains("children"))
            for (const auto& k : n["children"]) find(k);
    };
    find(head["root"]);
    REQUIRE_FALSE(resource.empty());

    const json body = {{"resource", resource}, {"region", {{"x", 100}, {"y", 80}, {"w", 40}, {"h", 30}}}, {"comment", "an injury"}, {"author", "rad"}};
    auto first = c.Post("/collections/" + id + "/annotations", body.dump(), "application/json");
    REQUIRE(first->status == 201);
    auto again = c.Post("/collections/" + id + "/annotations", body.dump(), "application/json");
    CHECK(again->status == 200);
    CHECK(body_json(again)["id"] == body_json(first)["id"]);
    auto listed = body_json(c.Get("/collections/" + id + "/annotations?resource=" + resource));
    REQUIRE(listed["annotations"].size() == 1);
    CHECK(listed["annotations"][0]["region"]["x"] == 100);
    CHECK(body_json(c.Get("/collections/" + id + "/annotations?resource=other"))["annotations"].empty());

    auto oob = json(body);
    oob["region"]["w"] = 1000;
    auto rejected = c.Post("/collections/" + id + "/annotations", oob.dump(), "application/json");
    CHECK(rejected->status == 422);
    CHECK(body_json(rejected)["rule"] == "out-of-bounds");
    CHECK(c.Post("/collections/" + id + "/annotations", R"({"comment": "x"})", "application/json")->status == 400);
}

TEST_CASE("export jobs produce valid artifacts") {
    ServiceFixture fx;
    auto c = fx.client();
    const auto id = create_fixture_collection(c);
    auto r = c.Post("/collections/" + id + "/exports", R"({"profile": {"format": "scorm12", "include_quizzes": true, "fixed_epoch": 0}})",
                    "application/json");
    REQUIRE(r->status == 202);
    const auto job = body_json(r)["job"].get<std::string>();
    auto state = wait_for_job(c, id, job);
    REQUIRE(state["state"] == "done");
    auto artifact = c.Get("/collections/" + id + "/exports/" + job + "/artifact");
    REQUIRE(artifact->status == 200);
    CHECK(artifact->get_header_value("Content-Type") == "application/zip");
    Bytes bytes(artifact->body.begin(), artifact->body.end());
    CHECK(validate_package(bytes).empty());

    CHECK(c.Get("/collections/" + id + "/exports/job-99")->status == 404);
    auto bad = c.Post("/collections/" + id + "/exports", R"({"profile": {"selection": ["/Nope"]}})", "application/json");
    CHECK(bad->status == 422);
    auto empty = c.Post("/collections/" + id + "/exports", R"({"profile": {"documents": ["MPX1001"], "selection": ["/Topic"]}})",
                        "application/json");
    REQUIRE(empty->status == 202);
    auto failed = wait_for_job(c, id, body_json(empty)["job"]);
    CHECK(failed["state"] == "failed");
    CHECK(failed["error"].get<std::string>().find("empty-selection") != std::string::npos);
    CHECK(c.Get("/collections/" + id + "/exports/" + failed["id"].get<std::string>() + "/artifact")->status == 409);
}

TEST_CASE("GET /log reparses to the applied script") {
    ServiceFixture fx;
    auto c = fx.client();
    const auto id = create_fixture_collection(c);
    const auto script = read_text(source_path("fixtures/medpix_curation.cdsl"));
    auto applied = c.Post("/collections/" + id + "/schema/ops", if_match(0), script, "text/plain");
    REQUIRE(applied->status == 200);
    auto log = c.Get("/collections/" + id + "/log");
    CHECK(log->get_header_value("Content-Type").starts_with("text/plain"));
    CHECK(parse_script(log->body).ops == parse_script(script).ops);
    auto records = body_json(c.Get("/collections/" + id + "/log?format=records"));
    CHECK(records["records"].size() == 32);
    CHECK(records["records"][0]["timestamp"] == kFixedTime);
}

TEST_CASE("collections survive a service restart") {
    auto storage = std::make_shared<TempDir>();
    std::string id;
    {
        ServiceFixture fx(storage);
        auto c = fx.client();
        id = create_fixture_collection(c);
        c.Post("/collections/" + id + "/schema/ops", if_match(0), "remove /Cases/Author\n", "text/plain");
    }
    ServiceFixture fx(storage);
    auto c = fx.client();
    CHECK(version_of(c, id) == 1);
    auto second = body_json(c.Post("/collections"))["id"].get<std::string>();
    CHECK(second != id);
}

TEST_CASE("concurrent writers serialize; readers see whole versions") {
    ServiceFixture fx;
    auto setup = fx.client();
    const auto id = create_fixture_collection(setup);
    const std::vector<std::string> names = {"Title", "History", "Exam", "Findings"};
    std::atomic<int> succeeded{0}, conflicts{0};
    std::atomic<bool> torn{false};
    std::vector<std::thread> writers;
    for (std::size_t w = 0; w < names.size(); ++w) {
        writers.emplace_back([&, w] {
            auto c = fx.client();
            for (int attempt = 0; attempt < 50; ++attempt) {
                const auto v = version_of(c, id);
                auto r = c.Post("/collections/" + id + "/schema/ops", if_match(v),
                                "rename /Cases/" + names[w] + " as " + names[w] + "X\n", "text/plain");
                if (r->status == 200) {
                    ++succeeded;
                    return;
                }
                if (r->status == 409) ++conflicts;
            }
        });
    }
    std::thread reader([&] {
        auto c = fx.client();
        for (int i = 0; i < 50; ++i) {
            auto s = body_json(c.Get("/collections/" + id + "/schema"));
            std::size_t renamed = 0;
            for (const auto& child : s["schema"]["root"]["children"][0]["children"]) {
                renamed += child["name"].get<std::string>().ends_with("X");
            }
            if (static_cast<std::int64_t>(renamed) != s["version"].get<std::int64_t>()) torn = true;
        }
    });
    for (auto& t : writers) t.join();
    reader.join();
    CHECK(succeeded == 4);
    CHECK(version_of(setup, id) == 4);
    CHECK_FALSE(torn);
}
