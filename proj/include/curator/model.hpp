#pragma once

/// @file model.hpp
/// @brief Collection data model: resources, schema, documents, annotations.
///
/// A Collection is an immutable value. Every mutating operation in the
/// library takes a `const Collection&` and returns a new Collection, so
/// snapshots can be shared freely between readers.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace curator {

using Bytes = std::vector<std::uint8_t>;
using BlobPtr = std::shared_ptr<const Bytes>;

/// Root-to-node sequence of element-type names. The schema root itself is
/// the empty path and prints as "/".
class ElementPath {
public:
    ElementPath() = default;
    explicit ElementPath(std::vector<std::string> segments) : segments_(std::move(segments)) {}

    /// Parses "/A/B/C". Throws std::invalid_argument on malformed input.
    static ElementPath parse(std::string_view text);

    [[nodiscard]] const std::vector<std::string>& segments() const { return segments_; }
    [[nodiscard]] bool is_root() const { return segments_.empty(); }
    [[nodiscard]] std::size_t depth() const { return segments_.size(); }
    [[nodiscard]] const std::string& leaf() const { return segments_.back(); }

    [[nodiscard]] ElementPath parent() const;
    [[nodiscard]] ElementPath child(std::string name) const;
    /// True when this path is a (non-strict) prefix of `other`.
    [[nodiscard]] bool is_prefix_of(const ElementPath& other) const;

    [[nodiscard]] std::string str() const;

    auto operator<=>(const ElementPath&) const = default;
    bool operator==(const ElementPath&) const = default;

private:
    std::vector<std::string> segments_;
};

/// One step of an instance path: element name plus 0-based ordinal among
/// same-named siblings.
struct InstanceStep {
    std::string name;
    std::size_t ordinal = 0;
    auto operator<=>(const InstanceStep&) const = default;
};

/// Addresses one element instance inside a document, e.g.
/// "/Cases/Images/Image[1]/Caption". Ordinal suffixes default to [0].
class InstancePath {
public:
    InstancePath() = default;
    explicit InstancePath(std::vector<InstanceStep> steps) : steps_(std::move(steps)) {}

    static InstancePath parse(std::string_view text);

    [[nodiscard]] const std::vector<InstanceStep>& steps() const { return steps_; }
    [[nodiscard]] bool is_root() const { return steps_.empty(); }
    [[nodiscard]] ElementPath type_path() const;
    [[nodiscard]] InstancePath child(std::string name, std::size_t ordinal) const;
    [[nodiscard]] InstancePath parent() const;
    [[nodiscard]] std::string str() const;

    auto operator<=>(const InstancePath&) const = default;
    bool operator==(const InstancePath&) const = default;

private:
    std::vector<InstanceStep> steps_;
};

enum class ResourceKind { LocalFile, ExternalUrl };

struct Resource {
    std::string id;
    ResourceKind kind = ResourceKind::LocalFile;
    std::string media_type;
    std::string locator;
    std::uint64_t byte_size = 0;
    BlobPtr data;  ///< local bytes; null for external resources

    bool operator==(const Resource& other) const;
};

enum class ElementKind { Atomic, Composite, ResourceRef, Link, Quiz };
enum class Multiplicity { One, Optional, Many };

struct ElementType {
    std::string name;
    ElementKind kind = ElementKind::Atomic;
    Multiplicity multiplicity = Multiplicity::One;
    std::vector<ElementType> children;

    [[nodiscard]] const ElementType* find_child(std::string_view child_name) const;
    ElementType* find_child(std::string_view child_name);
    [[nodiscard]] std::size_t subtree_size() const;  ///< this node plus all descendants

    bool operator==(const ElementType&) const = default;
};

inline constexpr std::string_view kRootName = "root";

struct Schema {
    ElementType root{std::string(kRootName), ElementKind::Composite, Multiplicity::One, {}};
    std::int64_t version = 0;

    /// Resolves a path; nullptr when absent. The empty path yields the root.
    [[nodiscard]] const ElementType* find(const ElementPath& path) const;
    ElementType* find(const ElementPath& path);
    /// Number of element types, excluding the root.
    [[nodiscard]] std::size_t type_count() const { return root.subtree_size() - 1; }

    bool operator==(const Schema&) const = default;
};

enum class LinkKind { InternalDocument, InternalAnnotation, ExternalUrl };

struct LinkTarget {
    LinkKind kind = LinkKind::ExternalUrl;
    std::string value;
    bool operator==(const LinkTarget&) const = default;
};

struct Mcq {
    std::string stem;
    std::vector<std::string> choices;
    std::size_t correct_index = 0;
    std::optional<std::string> explanation;
    bool operator==(const Mcq&) const = default;
};

struct ResourceRef {
    std::string resource_id;
    bool operator==(const ResourceRef&) const = default;
};

struct ElementInstance;

/// Text for atomic, children for composite, and so on by kind.
using Payload = std::variant<std::string, std::vector<ElementInstance>, ResourceRef, LinkTarget, Mcq>;

struct ElementInstance {
    std::string name;  ///< last segment of the type path; full path is positional
    Payload payload;

    [[nodiscard]] ElementKind kind() const;
    [[nodiscard]] const std::vector<ElementInstance>* children() const;
    std::vector<ElementInstance>* children();
    [[nodiscard]] const std::string* text() const { return std::get_if<std::string>(&payload); }

    bool operator==(const ElementInstance&) const = default;
};

struct Origin {
    std::string plugin;
    std::string locator;
    bool operator==(const Origin&) const = default;
};

struct Document {
    std::string id;
    ElementInstance root{std::string(kRootName), std::vector<ElementInstance>{}};
    Origin origin;
    bool operator==(const Document&) const = default;
};

struct Region {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t w = 0;
    std::int64_t h = 0;
    bool operator==(const Region&) const = default;
};

struct Annotation {
    std::string id;
    std::string resource_id;
    Region region;
    std::string comment;
    std::string author;
    bool operator==(const Annotation&) const = default;
};

/// One applied curation operation, stored as its DSL line.
struct LogRecord {
    std::string op;
    std::int64_t timestamp = 0;
    std::int64_t pre_version = 0;
    std::int64_t post_version = 0;
    bool operator==(const LogRecord&) const = default;
};

struct Collection {
    Schema schema;
    std::map<std::string, Document> documents;
    std::map<std::string, Resource> resources;
    std::map<std::string, Annotation> annotations;
    std::vector<LogRecord> log;

    bool operator==(const Collection&) const = default;
};

// Enum <-> text, shared by serialization, the DSL printer and the CLI.
std::string_view to_string(ElementKind kind);
std::string_view to_string(Multiplicity multiplicity);
std::string_view to_string(LinkKind kind);
std::string_view to_string(ResourceKind kind);
std::optional<ElementKind> parse_element_kind(std::string_view text);
std::optional<Multiplicity> parse_multiplicity(std::string_view text);
std::optional<LinkKind> parse_link_kind(std::string_view text);
std::optional<ResourceKind> parse_resource_kind(std::string_view text);

/// Loosest of two multiplicities (many > optional > one).
Multiplicity loosest(Multiplicity a, Multiplicity b);

/// Valid element-type name: non-empty, no '/', no leading/trailing whitespace.
bool is_valid_name(std::string_view name);

/// Visits every instance of a document depth-first, pre-order, with its
/// instance path. The root itself is not visited.
template <typename Fn>
void for_each_instance(const ElementInstance& node, const InstancePath& at, Fn&& fn) {
    const auto* kids = node.children();
    if (!kids) return;
    std::map<std::string, std::size_t, std::less<>> seen;
    for (const auto& child : *kids) {
        const auto ordinal = seen[child.name]++;
        auto child_path = at.child(child.name, ordinal);
        fn(child, child_path);
        for_each_instance(child, child_path, fn);
    }
}

}  // namespace curator
