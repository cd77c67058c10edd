#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace curator::xml {

using Attributes = std::vector<std::pair<std::string, std::string>>;

std::string escape(std::string_view text, bool attribute = false);

/// Streaming writer with two-space indentation. Output is a pure function
/// of the call sequence.
class Writer {
public:
    explicit Writer(bool declaration = true);

    Writer& open(std::string_view tag, const Attributes& attrs = {});
    Writer& close();
    /// <tag attrs>text</tag> on one line.
    Writer& leaf(std::string_view tag, std::string_view text, const Attributes& attrs = {});
    /// <tag attrs/>
    Writer& empty(std::string_view tag, const Attributes& attrs = {});
    /// Raw pre-escaped markup on its own line.
    Writer& raw(std::string_view markup);

    [[nodiscard]] std::string str() const;

private:
    void indent();
    std::string out_;
    std::vector<std::string> stack_;
};

using Tree = boost::property_tree::ptree;

/// Parses well-formed XML. Throws DomainError("malformed-xml").
Tree parse(std::string_view text);

/// Attribute value or empty string.
std::string attribute(const Tree& node, const std::string& name);

}  // namespace curator::xml
