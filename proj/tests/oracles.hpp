#pragma once

// Independent brute-force views of a collection, used as test oracles.
// They walk the instance trees directly and share no code with the engine.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "curator/model.hpp"

namespace curator::test {

using AtomicMap = std::map<std::pair<std::string, std::string>, std::string>;

namespace detail {

inline void walk(const ElementInstance& node, const std::string& at, const std::string& type_at,
                 const std::function<void(const ElementInstance&, const std::string&, const std::string&)>& fn) {
    const auto* kids = std::get_if<std::vector<ElementInstance>>(&node.payload);
    if (!kids) return;
    std::map<std::string, int> seen;
    for (const auto& k : *kids) {
        const int ordinal = seen[k.name]++;
        const auto path = at + "/" + k.name + "[" + std::to_string(ordinal) + "]";
        const auto type_path = type_at + "/" + k.name;
        fn(k, path, type_path);
        walk(k, path, type_path, fn);
    }
}

inline bool selected(const std::string& type_path, const std::vector<std::string>& selection) {
    if (selection.empty()) return true;
    for (const auto& s : selection) {
        if (type_path == s || type_path.starts_with(s + "/")) return true;
    }
    return false;
}

}  // namespace detail

/// (document id, instance path with explicit ordinals) -> text for every
/// atomic value whose type lies inside one of `selection` (all when empty).
inline AtomicMap atomic_values(const Collection& c, const std::vector<std::string>& selection = {}) {
    AtomicMap out;
    for (const auto& entry : c.documents) {
        const auto& id = entry.first;
        detail::walk(entry.second.root, "", "", [&](const ElementInstance& inst, const std::string& path, const std::string& type_path) {
            if (const auto* text = std::get_if<std::string>(&inst.payload); text && detail::selected(type_path, selection)) {
                out[{id, path}] = *text;
            }
        });
    }
    return out;
}

/// Instance count per element-type path over all documents.
inline std::map<std::string, std::size_t> instance_counts(const Collection& c) {
    std::map<std::string, std::size_t> out;
    for (const auto& [id, doc] : c.documents) {
        detail::walk(doc.root, "", "", [&](const ElementInstance&, const std::string&, const std::string& type_path) { ++out[type_path]; });
    }
    return out;
}

/// Multiset of leaf payloads (text, resource ids, link targets, quiz stems)
/// per document, independent of where they sit in the tree.
inline std::map<std::string, std::multiset<std::string>> value_multisets(const Collection& c) {
    std::map<std::string, std::multiset<std::string>> out;
    for (const auto& [id, doc] : c.documents) {
        auto& bag = out[id];
        detail::walk(doc.root, "", "", [&](const ElementInstance& inst, const std::string&, const std::string&) {
            if (const auto* t = std::get_if<std::string>(&inst.payload)) bag.insert("t:" + *t);
            if (const auto* r = std::get_if<ResourceRef>(&inst.payload)) bag.insert("r:" + r->resource_id);
            if (const auto* l = std::get_if<LinkTarget>(&inst.payload)) bag.insert("l:" + l->value);
            if (const auto* q = std::get_if<Mcq>(&inst.payload)) bag.insert("q:" + q->stem);
        });
    }
    return out;
}

/// Total instance count of all element types.
inline std::size_t total_instances(const Collection& c) {
    std::size_t n = 0;
    for (const auto& [path, count] : instance_counts(c)) n += count;
    return n;
}

}  // namespace curator::test
