#include "curator/model.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace curator {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> split_path(std::string_view text) {
    if (text.empty() || text.front() != '/') {
        throw std::invalid_argument("path must start with '/': " + std::string(text));
    }
    std::vector<std::string> out;
    if (text == "/") return out;
    std::size_t pos = 1;
    while (pos <= text.size()) {
        auto next = text.find('/', pos);
        if (next == std::string_view::npos) next = text.size();
        auto segment = text.substr(pos, next - pos);
        if (segment.empty()) throw std::invalid_argument("empty path segment in " + std::string(text));
        out.emplace_back(segment);
        pos = next + 1;
    }
    return out;
}

}  // namespace

ElementPath ElementPath::parse(std::string_view text) {
    auto segments = split_path(text);
    for (const auto& s : segments) {
        if (!is_valid_name(s)) throw std::invalid_argument("invalid element name '" + s + "'");
    }
    return ElementPath(std::move(segments));
}

ElementPath ElementPath::parent() const {
    if (segments_.empty()) return *this;
    return ElementPath({segments_.begin(), segments_.end() - 1});
}

ElementPath ElementPath::child(std::string name) const {
    auto copy = segments_;
    copy.push_back(std::move(name));
    return ElementPath(std::move(copy));
}

bool ElementPath::is_prefix_of(const ElementPath& other) const {
    if (segments_.size() > other.segments_.size()) return false;
    return std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

std::string ElementPath::str() const {
    if (segments_.empty()) return "/";
    std::string out;
    for (const auto& s : segments_) {
        out += '/';
        out += s;
    }
    return out;
}

InstancePath InstancePath::parse(std::string_view text) {
    std::vector<InstanceStep> steps;
    for (auto& segment : split_path(text)) {
        InstanceStep step;
        if (segment.size() > 2 && segment.back() == ']') {
            auto open = segment.rfind('[');
            if (open != std::string::npos && open + 1 < segment.size() - 1) {
                auto digits = segment.substr(open + 1, segment.size() - open - 2);
                if (std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                    step.ordinal = std::stoul(digits);
                    segment.resize(open);
                }
            }
        }
        if (!is_valid_name(segment)) throw std::invalid_argument("invalid element name '" + segment + "'");
        step.name = std::move(segment);
        steps.push_back(std::move(step));
    }
    return InstancePath(std::move(steps));
}

ElementPath InstancePath::type_path() const {
    std::vector<std::string> names;
    names.reserve(steps_.size());
    for (const auto& s : steps_) names.push_back(s.name);
    return ElementPath(std::move(names));
}

InstancePath InstancePath::child(std::string name, std::size_t ordinal) const {
    auto copy = steps_;
    copy.push_back({std::move(name), ordinal});
    return InstancePath(std::move(copy));
}

InstancePath InstancePath::parent() const {
    if (steps_.empty()) return *this;
    return InstancePath({steps_.begin(), steps_.end() - 1});
}

std::string InstancePath::str() const {
    if (steps_.empty()) return "/";
    std::string out;
    for (const auto& s : steps_) {
        out += '/';
        out += s.name;
        if (s.ordinal > 0) out += "[" + std::to_string(s.ordinal) + "]";
    }
    return out;
}

bool Resource::operator==(const Resource& other) const {
    if (id != other.id || kind != other.kind || media_type != other.media_type || locator != other.locator ||
        byte_size != other.byte_size) {
        return false;
    }
    if (!data || !other.data) return !data && !other.data;
    return *data == *other.data;
}

const ElementType* ElementType::find_child(std::string_view child_name) const {
    for (const auto& c : children) {
        if (c.name == child_name) return &c;
    }
    return nullptr;
}

ElementType* ElementType::find_child(std::string_view child_name) {
    for (auto& c : children) {
        if (c.name == child_name) return &c;
    }
    return nullptr;
}

std::size_t ElementType::subtree_size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.subtree_size();
    return n;
}

const ElementType* Schema::find(const ElementPath& path) const {
    const ElementType* node = &root;
    for (const auto& s : path.segments()) {
        node = node->find_child(s);
        if (!node) return nullptr;
    }
    return node;
}

ElementType* Schema::find(const ElementPath& path) {
    ElementType* node = &root;
    for (const auto& s : path.segments()) {
        node = node->find_child(s);
        if (!node) return nullptr;
    }
    return node;
}

ElementKind ElementInstance::kind() const {
    switch (payload.index()) {
        case 0: return ElementKind::Atomic;
        case 1: return ElementKind::Composite;
        case 2: return ElementKind::ResourceRef;
        case 3: return ElementKind::Link;
        default: return ElementKind::Quiz;
    }
}

const std::vector<ElementInstance>* ElementInstance::children() const {
    return std::get_if<std::vector<ElementInstance>>(&payload);
}

std::vector<ElementInstance>* ElementInstance::children() {
    return std::get_if<std::vector<ElementInstance>>(&payload);
}

std::string_view to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::Atomic: return "atomic";
        case ElementKind::Composite: return "composite";
        case ElementKind::ResourceRef: return "resource-ref";
        case ElementKind::Link: return "link";
        case ElementKind::Quiz: return "quiz";
    }
    return "atomic";
}

std::string_view to_string(Multiplicity multiplicity) {
    switch (multiplicity) {
        case Multiplicity::One: return "one";
        case Multiplicity::Optional: return "optional";
        case Multiplicity::Many: return "many";
    }
    return "one";
}

std::string_view to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::InternalDocument: return "internal-document";
        case LinkKind::InternalAnnotation: return "internal-annotation";
        case LinkKind::ExternalUrl: return "external-url";
    }
    return "external-url";
}

std::string_view to_string(ResourceKind kind) {
    return kind == ResourceKind::LocalFile ? "local-file" : "external-url";
}

std::optional<ElementKind> parse_element_kind(std::string_view text) {
    for (auto k : {ElementKind::Atomic, ElementKind::Composite, ElementKind::ResourceRef, ElementKind::Link, ElementKind::Quiz}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<Multiplicity> parse_multiplicity(std::string_view text) {
    for (auto m : {Multiplicity::One, Multiplicity::Optional, Multiplicity::Many}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

std::optional<LinkKind> parse_link_kind(std::string_view text) {
    for (auto k : {LinkKind::InternalDocument, LinkKind::InternalAnnotation, LinkKind::ExternalUrl}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<ResourceKind> parse_resource_kind(std::string_view text) {
    if (text == "local-file") return ResourceKind::LocalFile;
    if (text == "external-url") return ResourceKind::ExternalUrl;
    return std::nullopt;
}

Multiplicity loosest(Multiplicity a, Multiplicity b) {
    return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

bool is_valid_name(std::string_view name) {
    if (name.empty()) return false;
    if (name.find('/') != std::string_view::npos) return false;
    if (is_space(name.front()) || is_space(name.back())) return false;
    return std::none_of(name.begin(), name.end(), [](char c) { return static_cast<unsigned char>(c) < 0x20 || c == 0x7f; });
}

}  // namespace curator
