#include <doctest.h>

#include "curator/canonical.hpp"
#include "curator/curation.hpp"
#include "curator/dsl.hpp"
#include "curator/schema_ops.hpp"
#include "support.hpp"

using namespace curator;
using curator::test::kFixedTime;
using curator::test::sample_collection;

namespace {

ElementPath P(std::string_view s) { return ElementPath::parse(s); }

std::string rule_of(const Collection& c, const CurationOp& op) {
    try {
        apply_op(c, op);
    } catch (const DomainError& e) {
        return e.rule();
    }
    return "ok";
}

std::vector<std::string> child_names(const ElementType& t) {
    std::vector<std::string> out;
    for (const auto& c : t.children) out.push_back(c.name);
    return out;
}

}  // namespace

TEST_CASE("sample schema shape") {
    const auto c = sample_collection();
    CHECK(child_names(c.schema.root) == std::vector<std::string>{"Title", "Findings", "Image", "See", "Web", "Quiz"});
    CHECK(c.schema.find(P("/Findings/Note"))->multiplicity == Multiplicity::Many);
    CHECK(c.schema.find(P("/Findings/Size"))->multiplicity == Multiplicity::Optional);
    CHECK(c.schema.find(P("/Image"))->kind == ElementKind::ResourceRef);
    CHECK(c.schema.type_count() == 8);
}

TEST_CASE("dsl parses every form and prints canonically") {
    const std::string text =
        "# comment\n"
        "rename /Title as Heading\n"
        "\n"
        "remove /Findings/Size   # trailing\n"
        "merge /A into /B as \"New Name\"\n"
        "move /Findings/Note under / at 0\n"
        "group /Title, /Web as \"Personal Data\"\n"
        "edit {\"op\":\"set\",\"doc\":\"a\",\"path\":\"/Title\",\"text\":\"x\"}\n";
    auto script = parse_script(text);
    REQUIRE(script.ops.size() == 6);
    CHECK(std::get<RenameOp>(script.ops[0]).new_name == "Heading");
    CHECK(std::get<MergeOp>(script.ops[2]).new_name == "New Name");
    CHECK(std::get<MoveOp>(script.ops[3]).index == 0u);
    CHECK(std::get<MoveOp>(script.ops[3]).new_parent.is_root());
    CHECK(std::get<GroupOp>(script.ops[4]).paths.size() == 2);
    CHECK(std::get<DocumentEdit>(script.ops[5]).command["text"] == "x");

    const auto printed = print_script(script.ops);
    CHECK(parse_script(printed).ops == script.ops);
    CHECK(print_script(parse_script(printed).ops) == printed);
    CHECK(print_op(script.ops[4]) == "group /Title, /Web as \"Personal Data\"");
}

TEST_CASE("dsl quoting round-trips awkward names") {
    RenameOp op{P("/Title"), "say \"hi\" \\ there"};
    const auto line = print_op(op);
    CHECK(std::get<RenameOp>(parse_script(line).ops.front()) == op);
}

TEST_CASE("dsl syntax errors carry line and column") {
    auto expect_error = [](const std::string& text, std::size_t line, std::size_t column) {
        try {
            parse_script(text);
            FAIL("expected a syntax error for: " << text);
        } catch (const ScriptSyntaxError& e) {
            CHECK(e.rule() == "syntax-error");
            CHECK(e.line() == line);
            CHECK(e.column() == column);
        }
    };
    expect_error("rename /A as B\nfrobnicate /A\n", 2, 1);
    expect_error("rename /A B\n", 1, 11);
    expect_error("remove A\n", 1, 8);
    expect_error("remove /A extra\n", 1, 11);
    expect_error("edit [1]\n", 1, 6);
    expect_error("rename\t/A as B\n", 1, 7);
}

TEST_CASE("rename rewrites schema and instances") {
    const auto c = sample_collection();
    auto next = apply_op(c, RenameOp{P("/Findings/Note"), "Remark"}, kFixedTime);
    CHECK(next.schema.find(P("/Findings/Remark")));
    CHECK_FALSE(next.schema.find(P("/Findings/Note")));
    CHECK((*next.documents.at("a").root.children())[1].children()->front().name == "Remark");
    CHECK(next.schema.version == c.schema.version + 1);
    REQUIRE(next.log.size() == 1);
    CHECK(next.log[0].op == "rename /Findings/Note as Remark");
    CHECK(next.log[0].timestamp == kFixedTime);
    CHECK(next.log[0].post_version == 1);

    CHECK(rule_of(c, RenameOp{P("/Findings/Note"), "Size"}) == "name-collision");
    CHECK(rule_of(c, RenameOp{P("/Nope"), "X"}) == "unknown-path");
    CHECK(rule_of(c, RenameOp{P("/"), "X"}) == "root-path");
    CHECK(rule_of(c, RenameOp{P("/Title"), "a/b"}) == "invalid-name");
}

TEST_CASE("remove drops subtrees and refuses to empty a composite") {
    const auto c = sample_collection();
    auto next = apply_op(c, RemoveOp{P("/Findings/Size")});
    CHECK(next.schema.type_count() == 7);
    CHECK(rule_of(next, RemoveOp{P("/Findings/Note")}) == "empty-composite");
    auto whole = apply_op(c, RemoveOp{P("/Findings")});
    CHECK(whole.schema.type_count() == 5);
    for (const auto& [id, doc] : whole.documents) {
        for (const auto& k : *doc.root.children()) CHECK(k.name != "Findings");
    }
}

TEST_CASE("merge retypes source instances after the target ones") {
    const auto c = sample_collection();
    auto next = apply_op(c, MergeOp{P("/Findings/Size"), P("/Findings/Note"), std::nullopt});
    CHECK_FALSE(next.schema.find(P("/Findings/Size")));
    const auto& notes = *(*next.documents.at("a").root.children())[1].children();
    REQUIRE(notes.size() == 3);
    CHECK(*notes[2].text() == "3 cm");
    CHECK(rule_of(c, MergeOp{P("/Title"), P("/Image"), std::nullopt}) == "kind-mismatch");
    CHECK(rule_of(c, MergeOp{P("/Findings"), P("/Findings/Note"), std::nullopt}) == "cycle");

    auto renamed = apply_op(c, MergeOp{P("/Findings/Size"), P("/Findings/Note"), std::string("Detail")});
    CHECK(renamed.schema.find(P("/Findings/Detail")));
}

TEST_CASE("move reparents and reorders") {
    const auto c = sample_collection();
    auto up = apply_op(c, MoveOp{P("/Findings/Size"), P("/"), std::nullopt});
    CHECK(child_names(up.schema.root).back() == "Size");
    CHECK(up.schema.find(P("/Size"))->multiplicity == Multiplicity::Optional);

    auto first = apply_op(c, MoveOp{P("/Quiz"), P("/"), std::size_t{0}});
    CHECK(child_names(first.schema.root).front() == "Quiz");
    CHECK((*first.documents.at("a").root.children()).front().name == "Quiz");

    CHECK(rule_of(c, MoveOp{P("/Findings"), P("/Findings/Note"), std::nullopt}) == "not-composite");
    CHECK(rule_of(c, MoveOp{P("/Findings"), P("/Findings"), std::nullopt}) == "cycle");
    CHECK(rule_of(c, MoveOp{P("/Title"), P("/Findings/Note"), std::nullopt}) == "not-composite");
}

TEST_CASE("group inserts a composite at the first member's position") {
    const auto c = sample_collection();
    auto next = apply_op(c, GroupOp{{P("/See"), P("/Web")}, "Links"});
    CHECK(child_names(next.schema.root) == std::vector<std::string>{"Title", "Findings", "Image", "Links", "Quiz"});
    CHECK(child_names(*next.schema.find(P("/Links"))) == std::vector<std::string>{"See", "Web"});
    // "b" has neither member, so the group is optional there.
    CHECK(next.schema.find(P("/Links"))->multiplicity == Multiplicity::Optional);
    CHECK(validate_collection(next).empty());
    CHECK(rule_of(c, GroupOp{{P("/Title")}, "Findings"}) == "name-collision");
    CHECK(rule_of(c, GroupOp{{P("/Findings"), P("/Findings/Note")}, "G"}) == "cycle");
}

TEST_CASE("failed script leaves the collection untouched") {
    const auto c = sample_collection();
    const auto before = canonical_serialize(c);
    auto script = parse_script("rename /Title as Heading\nremove /Nope\nrename /Web as Site\n");
    auto result = apply_script(c, script.ops, kFixedTime);
    CHECK_FALSE(result.ok());
    CHECK(result.failed_index == 1u);
    CHECK(result.reports.size() == 2);
    CHECK(result.reports[0].ok);
    CHECK(result.reports[1].rule == "unknown-path");
    CHECK(canonical_serialize(result.collection) == before);
}

TEST_CASE("document edits are versioned, logged and replayable") {
    const auto c = sample_collection();
    std::vector<CurationOp> ops{
        RenameOp{P("/Title"), "Heading"},
        set_value_edit("b", InstancePath::parse("/Heading"), "Beta prime"),
        insert_edit("b", InstancePath::parse("/Findings"), ElementInstance{"Size", std::string("1 cm")}),
        link_edit("b", InstancePath::parse("/"), LinkTarget{LinkKind::InternalDocument, "a"}, std::string("See")),
        annotate_edit(c.resources.begin()->first, Region{1, 2, 30, 40}, "lesion", "expert"),
    };
    auto result = apply_script(c, ops, kFixedTime);
    REQUIRE(result.ok());
    const auto& head = result.collection;
    CHECK(head.schema.version == 5);
    CHECK(head.log.size() == 5);
    CHECK(head.annotations.size() == 1);

    std::string log_text;
    for (const auto& r : head.log) log_text += r.op + "\n";
    CHECK(parse_script(log_text).ops == ops);
    std::vector<std::int64_t> stamps(5, kFixedTime);
    CHECK(canonical_serialize(replay_log(c, log_text, stamps)) == canonical_serialize(head));
}

TEST_CASE("malformed edit commands are domain errors") {
    const auto c = sample_collection();
    CHECK(rule_of(c, DocumentEdit{{{"op", "explode"}}}) == "malformed-input");
    CHECK(rule_of(c, DocumentEdit{{{"op", "set"}, {"doc", "a"}}}) == "malformed-input");
    CHECK(rule_of(c, DocumentEdit{{{"op", "set"}, {"doc", "a"}, {"path", "bad"}, {"text", "x"}}}) == "malformed-input");
}

TEST_CASE("ops refuse invalid input collections") {
    auto c = sample_collection();
    c.resources.clear();
    CHECK_THROWS_AS(apply_op(c, RenameOp{P("/Title"), "X"}), InvalidCollection);
}
