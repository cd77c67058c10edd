#include <doctest.h>

#include "curator/canonical.hpp"
#include "curator/curation.hpp"
#include "support.hpp"

using namespace curator;
using curator::test::sample_collection;

namespace {

std::string rule_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DomainError& e) {
        return e.rule();
    }
    return "ok";
}

std::string image_id(const Collection& c) {
    for (const auto& [id, r] : c.resources) {
        if (r.media_type == "image/png") return id;
    }
    return {};
}

InstancePath I(std::string_view s) { return InstancePath::parse(s); }

}  // namespace

TEST_CASE("set_value touches only the edited document") {
    const auto c = sample_collection();
    auto next = set_value(c, "a", I("/Findings/Note[1]"), "revised");
    CHECK(*(*(*next.documents.at("a").root.children())[1].children())[1].text() == "revised");
    CHECK(canonical_document(next.documents.at("b")) == canonical_document(c.documents.at("b")));
    CHECK(next.schema == c.schema);

    CHECK(rule_of([&] { set_value(c, "zzz", I("/Title"), "x"); }) == "unknown-document");
    CHECK(rule_of([&] { set_value(c, "a", I("/Findings"), "x"); }) == "non-atomic");
    CHECK(rule_of([&] { set_value(c, "a", I("/Findings/Note[5]"), "x"); }) == "unknown-path");
}

TEST_CASE("insert_element respects multiplicity and schema order") {
    const auto c = sample_collection();
    auto next = insert_element(c, "b", I("/Findings"), ElementPath::parse("/Findings/Size"), std::string("2 cm"));
    const auto& kids = *(*next.documents.at("b").root.children())[1].children();
    REQUIRE(kids.size() == 2);
    CHECK(kids[1].name == "Size");

    auto more = insert_element(c, "a", I("/Findings"), ElementPath::parse("/Findings/Note"), std::string("third"));
    const auto& notes = *(*more.documents.at("a").root.children())[1].children();
    CHECK(notes[2].name == "Note");
    CHECK(notes[3].name == "Size");

    // Before later-ranked siblings when none of its type exists.
    auto linked = insert_element(c, "b", I("/"), ElementPath::parse("/Image"), ResourceRef{image_id(c)});
    CHECK((*linked.documents.at("b").root.children())[2].name == "Image");

    CHECK(rule_of([&] { insert_element(c, "a", I("/"), ElementPath::parse("/Title"), std::string("again")); }) == "multiplicity");
    CHECK(rule_of([&] { insert_element(c, "a", I("/"), ElementPath::parse("/Title"), ResourceRef{"x"}); }) == "kind-mismatch");
    CHECK(rule_of([&] { insert_element(c, "a", I("/"), ElementPath::parse("/Findings/Note"), std::string("x")); }) == "unknown-path");
    CHECK(rule_of([&] { insert_element(c, "b", I("/"), ElementPath::parse("/Image"), ResourceRef{"missing"}); }) == "unknown-resource");
}

TEST_CASE("annotations are checked and idempotent") {
    const auto c = sample_collection();
    const auto img = image_id(c);
    auto first = add_annotation(c, img, Region{10, 20, 30, 40}, "injury", "expert");
    CHECK(first.id == annotation_id(img, Region{10, 20, 30, 40}, "injury"));
    CHECK(first.collection.annotations.at(first.id).author == "expert");
    auto again = add_annotation(first.collection, img, Region{10, 20, 30, 40}, "injury", "someone else");
    CHECK(again.id == first.id);
    CHECK(again.collection == first.collection);

    CHECK(rule_of([&] { add_annotation(c, "nope", Region{0, 0, 1, 1}, "x", ""); }) == "unknown-resource");
    CHECK(rule_of([&] { add_annotation(c, img, Region{0, 0, 1, 1}, "  ", ""); }) == "empty-comment");
    CHECK(rule_of([&] { add_annotation(c, img, Region{0, 0, 0, 1}, "x", ""); }) == "bad-region");
    CHECK(rule_of([&] { add_annotation(c, img, Region{-1, 0, 1, 1}, "x", ""); }) == "bad-region");
    CHECK(rule_of([&] { add_annotation(c, img, Region{300, 0, 21, 1}, "x", ""); }) == "out-of-bounds");
    CHECK(rule_of([&] { add_annotation(c, img, Region{300, 200, 20, 40}, "x", ""); }) == "ok");

    auto text = c;
    text.resources.emplace("txt", Resource{"txt", ResourceKind::ExternalUrl, "text/plain", "https://example.org/a.txt", 0, nullptr});
    CHECK(rule_of([&] { add_annotation(text, "txt", Region{0, 0, 1, 1}, "x", ""); }) == "not-image");
}

TEST_CASE("links resolve their element type and target") {
    const auto c = sample_collection();
    auto ann = add_annotation(c, image_id(c), Region{1, 1, 5, 5}, "mark", "");
    auto to_doc = add_link(c, "b", I("/"), LinkTarget{LinkKind::InternalDocument, "a"}, std::string("See"));
    CHECK(std::get<LinkTarget>((*to_doc.documents.at("b").root.children()).back().payload).value == "a");
    auto to_ann = add_link(ann.collection, "b", I("/"), LinkTarget{LinkKind::InternalAnnotation, ann.id}, std::string("See"));
    CHECK(validate_collection(to_ann).empty());

    CHECK(rule_of([&] { add_link(c, "b", I("/"), LinkTarget{LinkKind::InternalDocument, "a"}); }) == "ambiguous-link-type");
    CHECK(rule_of([&] { add_link(c, "b", I("/Findings"), LinkTarget{LinkKind::InternalDocument, "a"}); }) == "no-link-type");
    CHECK(rule_of([&] { add_link(c, "b", I("/"), LinkTarget{LinkKind::InternalDocument, "zz"}, std::string("See")); }) == "dangling-link");
    CHECK(rule_of([&] { add_link(c, "b", I("/"), LinkTarget{LinkKind::InternalAnnotation, "zz"}, std::string("See")); }) == "dangling-link");
    CHECK(rule_of([&] { add_link(c, "b", I("/"), LinkTarget{LinkKind::ExternalUrl, "not a url"}, std::string("Web")); }) == "bad-url");
    CHECK(rule_of([&] { add_link(c, "b", I("/"), LinkTarget{LinkKind::ExternalUrl, "https://x.org"}, std::string("Title")); }) == "kind-mismatch");
    CHECK(rule_of([&] { add_link(c, "a", I("/"), LinkTarget{LinkKind::ExternalUrl, "https://x.org"}, std::string("Web")); }) == "multiplicity");
}

TEST_CASE("edit builders round-trip through apply_edit") {
    const auto c = sample_collection();
    CHECK(apply_edit(c, set_value_edit("b", I("/Title"), "B")) == set_value(c, "b", I("/Title"), "B"));
    CHECK(apply_edit(c, insert_edit("b", I("/Findings"), ElementInstance{"Size", std::string("1")})) ==
          insert_element(c, "b", I("/Findings"), ElementPath::parse("/Findings/Size"), std::string("1")));
    const LinkTarget t{LinkKind::InternalDocument, "a"};
    CHECK(apply_edit(c, link_edit("b", I("/"), t, std::string("See"))) == add_link(c, "b", I("/"), t, std::string("See")));
    const auto img = image_id(c);
    CHECK(apply_edit(c, annotate_edit(img, Region{1, 2, 3, 4}, "m", "x")) == add_annotation(c, img, Region{1, 2, 3, 4}, "m", "x").collection);
}
