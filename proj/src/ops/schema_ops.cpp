#include "curator/schema_ops.hpp"

#include <algorithm>

#include "curator/canonical.hpp"
#include "curator/curation.hpp"
#include "curator/dsl.hpp"
#include "curator/validate.hpp"

namespace curator {

namespace {

using Instances = std::vector<ElementInstance>;

[[noreturn]] void fail(std::string rule, const ElementPath& path, const std::string& message) {
    throw DomainError(std::move(rule), path.str(), message + " (" + path.str() + ")");
}

ElementType& resolve(Schema& schema, const ElementPath& path) {
    auto* t = schema.find(path);
    if (!t) fail("unknown-path", path, "no element type at path");
    return *t;
}

ElementType& resolve_non_root(Schema& schema, const ElementPath& path) {
    if (path.is_root()) fail("root-path", path, "operation cannot target the schema root");
    return resolve(schema, path);
}

void require_name(const std::string& name, const ElementPath& at) {
    if (!is_valid_name(name)) fail("invalid-name", at, "invalid element name '" + name + "'");
}

/// Fails when detaching one child from `parent_path` would leave a
/// non-root composite without children.
void require_not_emptied(const Schema& schema, const ElementPath& parent_path) {
    if (parent_path.is_root()) return;
    if (schema.find(parent_path)->children.size() <= 1) {
        fail("empty-composite", parent_path, "operation would leave a composite element type without children");
    }
}

ElementType detach_type(Schema& schema, const ElementPath& path) {
    auto& parent = *schema.find(path.parent());
    auto it = std::find_if(parent.children.begin(), parent.children.end(), [&](const ElementType& t) { return t.name == path.leaf(); });
    ElementType out = std::move(*it);
    parent.children.erase(it);
    return out;
}

void insert_type(ElementType& parent, ElementType child, std::optional<std::size_t> index) {
    auto at = std::min(index.value_or(parent.children.size()), parent.children.size());
    parent.children.insert(parent.children.begin() + static_cast<std::ptrdiff_t>(at), std::move(child));
}

/// Instances (in document order) whose type path equals `rel`, relative to `node`.
void collect(ElementInstance& node, const std::vector<std::string>& rel, std::size_t depth, std::vector<ElementInstance*>& out) {
    if (depth == rel.size()) {
        out.push_back(&node);
        return;
    }
    auto* kids = node.children();
    if (!kids) return;
    for (auto& child : *kids) {
        if (child.name == rel[depth]) collect(child, rel, depth + 1, out);
    }
}

std::vector<ElementInstance*> instances_at(ElementInstance& node, const std::vector<std::string>& rel) {
    std::vector<ElementInstance*> out;
    collect(node, rel, 0, out);
    return out;
}

std::vector<std::string> relative(const ElementPath& from, const ElementPath& to) {
    return {to.segments().begin() + static_cast<std::ptrdiff_t>(from.depth()), to.segments().end()};
}

ElementPath common_prefix(const ElementPath& a, const ElementPath& b) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(a.depth(), b.depth()) && a.segments()[i] == b.segments()[i]; ++i) {
        out.push_back(a.segments()[i]);
    }
    return ElementPath(std::move(out));
}

/// Removes and returns children named `name`, preserving order.
Instances extract_children(ElementInstance& parent, const std::string& name) {
    Instances out;
    auto* kids = parent.children();
    if (!kids) return out;
    Instances keep;
    for (auto& child : *kids) {
        (child.name == name ? out : keep).push_back(std::move(child));
    }
    *kids = std::move(keep);
    return out;
}

/// Places `moved` after the last child named `after_name`, or at the end.
void insert_after_siblings(ElementInstance& parent, const std::string& after_name, Instances moved) {
    auto& kids = *parent.children();
    auto last = std::find_if(kids.rbegin(), kids.rend(), [&](const ElementInstance& c) { return c.name == after_name; });
    auto pos = last == kids.rend() ? kids.end() : last.base();
    kids.insert(pos, std::make_move_iterator(moved.begin()), std::make_move_iterator(moved.end()));
}

std::size_t max_sibling_count(ElementInstance& root, const ElementPath& parent_path, const std::string& name) {
    std::size_t best = 0;
    for (auto* parent : instances_at(root, parent_path.segments())) {
        const auto* kids = parent->children();
        if (!kids) continue;
        best = std::max<std::size_t>(best, std::count_if(kids->begin(), kids->end(), [&](const ElementInstance& c) { return c.name == name; }));
    }
    return best;
}

void widen_if_repeated(Collection& c, const ElementPath& type_path) {
    auto* type = c.schema.find(type_path);
    if (type->multiplicity == Multiplicity::Many) return;
    for (auto& [id, doc] : c.documents) {
        if (max_sibling_count(doc.root, type_path.parent(), type_path.leaf()) > 1) {
            type->multiplicity = Multiplicity::Many;
            return;
        }
    }
}

/// Moves every instance of `from` (old type path) under instances of
/// `to_parent`, pairing each with the host reachable from their closest
/// common ancestor instance. Missing hosts are created empty; several
/// candidate hosts make the re-attachment ambiguous. `after_name` places
/// the moved instances after existing siblings of that name.
void reattach(Document& doc, const ElementPath& from, const ElementPath& to_parent, const std::string& after_name,
              const std::string& new_name) {
    const auto anchor = common_prefix(from.parent(), to_parent);
    const auto from_rel = relative(anchor, from.parent());
    const auto host_rel = relative(anchor, to_parent);
    for (auto* a : instances_at(doc.root, anchor.segments())) {
        Instances moved;
        for (auto* old_parent : instances_at(*a, from_rel)) {
            auto batch = extract_children(*old_parent, from.leaf());
            moved.insert(moved.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
        }
        if (moved.empty()) continue;
        ElementInstance* host = a;
        ElementPath walked = anchor;
        for (const auto& step : host_rel) {
            walked = walked.child(step);
            auto& kids = *host->children();
            std::vector<ElementInstance*> matches;
            for (auto& k : kids) {
                if (k.name == step) matches.push_back(&k);
            }
            if (matches.size() > 1) {
                throw DomainError("ambiguous-reattachment", walked.str(),
                                  "document " + doc.id + " holds several " + walked.str() + " instances to re-attach under");
            }
            if (matches.empty()) {
                kids.push_back(ElementInstance{step, Instances{}});
                host = &kids.back();
            } else {
                host = matches.front();
            }
        }
        for (auto& m : moved) m.name = new_name;
        insert_after_siblings(*host, after_name, std::move(moved));
    }
}

/// Unions `source` into `target` by child name; kinds must agree throughout.
void union_types(ElementType& target, const ElementType& source, const ElementPath& at) {
    if (target.kind != source.kind) {
        fail("kind-mismatch", at,
             "cannot merge " + std::string(to_string(source.kind)) + " into " + std::string(to_string(target.kind)));
    }
    target.multiplicity = loosest(target.multiplicity, source.multiplicity);
    for (const auto& child : source.children) {
        if (auto* existing = target.find_child(child.name)) {
            union_types(*existing, child, at.child(child.name));
        } else {
            target.children.push_back(child);
        }
    }
}

void rename_instances(Collection& c, const ElementPath& path, const std::string& new_name) {
    for (auto& [id, doc] : c.documents) {
        for (auto* parent : instances_at(doc.root, path.parent().segments())) {
            for (auto& child : *parent->children()) {
                if (child.name == path.leaf()) child.name = new_name;
            }
        }
    }
}

void do_rename(Collection& c, const RenameOp& op) {
    auto& type = resolve_non_root(c.schema, op.path);
    require_name(op.new_name, op.path);
    if (op.new_name == type.name) return;
    if (c.schema.find(op.path.parent())->find_child(op.new_name)) {
        fail("name-collision", op.path.parent().child(op.new_name), "an element type with this name already exists");
    }
    type.name = op.new_name;
    rename_instances(c, op.path, op.new_name);
}

void do_remove(Collection& c, const RemoveOp& op) {
    resolve_non_root(c.schema, op.path);
    require_not_emptied(c.schema, op.path.parent());
    detach_type(c.schema, op.path);
    for (auto& [id, doc] : c.documents) {
        for (auto* parent : instances_at(doc.root, op.path.parent().segments())) extract_children(*parent, op.path.leaf());
    }
}

void do_merge(Collection& c, const MergeOp& op) {
    auto& source = resolve_non_root(c.schema, op.source);
    resolve_non_root(c.schema, op.target);
    if (op.source.is_prefix_of(op.target) || op.target.is_prefix_of(op.source)) {
        fail("cycle", op.source, "cannot merge an element type with its own ancestor or descendant");
    }
    if (op.new_name) {
        require_name(*op.new_name, op.target);
        const auto* siblings = c.schema.find(op.target.parent());
        for (const auto& s : siblings->children) {
            bool is_source = op.source.parent() == op.target.parent() && s.name == op.source.leaf();
            if (s.name == *op.new_name && s.name != op.target.leaf() && !is_source) {
                fail("name-collision", op.target.parent().child(*op.new_name), "an element type with this name already exists");
            }
        }
    }
    require_not_emptied(c.schema, op.source.parent());
    const ElementType source_copy = source;
    union_types(*c.schema.find(op.target), source_copy, op.target);
    detach_type(c.schema, op.source);

    const auto& target_name = op.target.leaf();
    for (auto& [id, doc] : c.documents) {
        if (op.source.parent() == op.target.parent()) {
            for (auto* parent : instances_at(doc.root, op.source.parent().segments())) {
                auto moved = extract_children(*parent, op.source.leaf());
                if (moved.empty()) continue;
                for (auto& m : moved) m.name = target_name;
                insert_after_siblings(*parent, target_name, std::move(moved));
            }
        } else {
            reattach(doc, op.source, op.target.parent(), target_name, target_name);
        }
    }
    widen_if_repeated(c, op.target);
    if (op.new_name && *op.new_name != target_name) {
        c.schema.find(op.target)->name = *op.new_name;
        rename_instances(c, op.target, *op.new_name);
    }
}

void move_type(Collection& c, const ElementPath& path, const ElementPath& new_parent, std::optional<std::size_t> index) {
    resolve_non_root(c.schema, path);
    auto& parent_type = resolve(c.schema, new_parent);
    if (parent_type.kind != ElementKind::Composite) fail("not-composite", new_parent, "new parent is not a composite element type");
    if (path.is_prefix_of(new_parent)) fail("cycle", new_parent, "cannot move an element type under itself or its descendants");
    if (new_parent == path.parent()) {
        auto moved = detach_type(c.schema, path);
        auto& parent = *c.schema.find(new_parent);
        insert_type(parent, std::move(moved), index);
        // Instances follow: placed before the first sibling ranked after them.
        auto rank = [&](const std::string& name) {
            for (std::size_t i = 0; i < parent.children.size(); ++i) {
                if (parent.children[i].name == name) return i;
            }
            return parent.children.size();
        };
        const auto my_rank = rank(path.leaf());
        for (auto& [id, doc] : c.documents) {
            for (auto* p : instances_at(doc.root, new_parent.segments())) {
                auto batch = extract_children(*p, path.leaf());
                if (batch.empty()) continue;
                auto& kids = *p->children();
                auto pos = std::find_if(kids.begin(), kids.end(), [&](const ElementInstance& k) { return rank(k.name) > my_rank; });
                kids.insert(pos, std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
            }
        }
        return;
    }
    if (parent_type.find_child(path.leaf())) {
        fail("name-collision", new_parent.child(path.leaf()), "an element type with this name already exists");
    }
    require_not_emptied(c.schema, path.parent());
    auto moved = detach_type(c.schema, path);
    insert_type(*c.schema.find(new_parent), std::move(moved), index);
    for (auto& [id, doc] : c.documents) reattach(doc, path, new_parent, path.leaf(), path.leaf());
    widen_if_repeated(c, new_parent.child(path.leaf()));
}

void do_group(Collection& c, const GroupOp& op) {
    if (op.paths.empty()) throw DomainError("unknown-path", "", "group needs at least one path");
    require_name(op.new_name, op.paths.front());
    std::vector<std::string> leaves;
    for (std::size_t i = 0; i < op.paths.size(); ++i) {
        resolve_non_root(c.schema, op.paths[i]);
        for (std::size_t j = 0; j < op.paths.size(); ++j) {
            if (i != j && op.paths[i].is_prefix_of(op.paths[j])) {
                fail("cycle", op.paths[j], "grouped element types must not contain one another");
            }
        }
        if (std::find(leaves.begin(), leaves.end(), op.paths[i].leaf()) != leaves.end()) {
            fail("name-collision", op.paths[i], "grouped element types must have distinct names");
        }
        leaves.push_back(op.paths[i].leaf());
    }
    const auto parent_path = op.paths.front().parent();
    auto& parent = *c.schema.find(parent_path);
    if (parent.find_child(op.new_name)) {
        fail("name-collision", parent_path.child(op.new_name), "an element type with this name already exists");
    }
    const auto first = std::find_if(parent.children.begin(), parent.children.end(),
                                    [&](const ElementType& t) { return t.name == op.paths.front().leaf(); });
    const auto position = static_cast<std::size_t>(first - parent.children.begin());
    insert_type(parent, ElementType{op.new_name, ElementKind::Composite, Multiplicity::One, {}}, position);

    const auto group_path = parent_path.child(op.new_name);
    for (const auto& path : op.paths) move_type(c, path, group_path, std::nullopt);

    // Optional when some parent instance ended up without a group instance.
    for (auto& [id, doc] : c.documents) {
        for (auto* p : instances_at(doc.root, parent_path.segments())) {
            const auto& kids = *p->children();
            if (std::none_of(kids.begin(), kids.end(), [&](const ElementInstance& k) { return k.name == op.new_name; })) {
                c.schema.find(group_path)->multiplicity = Multiplicity::Optional;
            }
        }
    }
}

}  // namespace

bool is_schema_op(const CurationOp& op) { return !std::holds_alternative<DocumentEdit>(op); }

Collection apply_op(const Collection& c, const CurationOp& op, std::int64_t timestamp) {
    if (auto report = validate_collection(c); !report.empty()) throw InvalidCollection(std::move(report));
    Collection next = c;
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, RenameOp>) {
                do_rename(next, o);
            } else if constexpr (std::is_same_v<T, RemoveOp>) {
                do_remove(next, o);
            } else if constexpr (std::is_same_v<T, MergeOp>) {
                do_merge(next, o);
            } else if constexpr (std::is_same_v<T, MoveOp>) {
                move_type(next, o.path, o.new_parent, o.index);
            } else if constexpr (std::is_same_v<T, GroupOp>) {
                do_group(next, o);
            } else {
                next = apply_edit(next, o);
            }
        },
        op);
    if (auto report = validate_collection(next); !report.empty()) {
        throw DomainError("internal-error", report.front().path,
                          "operation produced an invalid collection: " + report.front().rule + " in " + report.front().document_id);
    }
    next.log.push_back({print_op(op), timestamp, c.schema.version, c.schema.version + 1});
    next.schema.version = c.schema.version + 1;
    return next;
}

ScriptResult apply_script(const Collection& c, const std::vector<CurationOp>& ops, std::int64_t timestamp) {
    ScriptResult result{c, {}, std::nullopt};
    Collection current = c;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        OpReport report;
        report.index = i;
        report.op = print_op(ops[i]);
        try {
            current = apply_op(current, ops[i], timestamp);
            report.ok = true;
            report.post_version = current.schema.version;
            report.type_count = current.schema.type_count();
            result.reports.push_back(std::move(report));
        } catch (const DomainError& e) {
            report.rule = e.rule();
            report.path = e.path();
            report.message = e.what();
            result.reports.push_back(std::move(report));
            result.failed_index = i;
            return result;
        }
    }
    result.collection = std::move(current);
    return result;
}

Collection replay_log(const Collection& base, std::string_view dsl_text, const std::vector<std::int64_t>& timestamps) {
    auto script = parse_script(dsl_text);
    Collection current = base;
    for (std::size_t i = 0; i < script.ops.size(); ++i) {
        current = apply_op(current, script.ops[i], i < timestamps.size() ? timestamps[i] : 0);
    }
    return current;
}

}  // namespace curator
