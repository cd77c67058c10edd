#include "curator/export/xml.hpp"

#include <sstream>

#include <boost/property_tree/xml_parser.hpp>

#include "curator/errors.hpp"

namespace curator::xml {

std::string escape(std::string_view text, bool attribute) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += attribute ? "&quot;" : "\""; break;
            case '\r': out += "&#13;"; break;
            case '\n': out += attribute ? "&#10;" : "\n"; break;
            case '\t': out += attribute ? "&#9;" : "\t"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

std::string render_attrs(const Attributes& attrs) {
    std::string out;
    for (const auto& [k, v] : attrs) out += " " + k + "=\"" + escape(v, true) + "\"";
    return out;
}

}  // namespace

Writer::Writer(bool declaration) {
    if (declaration) out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
}

void Writer::indent() { out_.append(stack_.size() * 2, ' '); }

Writer& Writer::open(std::string_view tag, const Attributes& attrs) {
    indent();
    out_ += "<" + std::string(tag) + render_attrs(attrs) + ">\n";
    stack_.emplace_back(tag);
    return *this;
}

Writer& Writer::close() {
    auto tag = std::move(stack_.back());
    stack_.pop_back();
    indent();
    out_ += "</" + tag + ">\n";
    return *this;
}

Writer& Writer::leaf(std::string_view tag, std::string_view text, const Attributes& attrs) {
    indent();
    out_ += "<" + std::string(tag) + render_attrs(attrs) + ">" + escape(text) + "</" + std::string(tag) + ">\n";
    return *this;
}

Writer& Writer::empty(std::string_view tag, const Attributes& attrs) {
    indent();
    out_ += "<" + std::string(tag) + render_attrs(attrs) + "/>\n";
    return *this;
}

Writer& Writer::raw(std::string_view markup) {
    indent();
    out_ += std::string(markup) + "\n";
    return *this;
}

std::string Writer::str() const { return out_; }

Tree parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    Tree tree;
    try {
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw DomainError("malformed-xml", "", std::string("malformed XML: ") + e.what());
    }
    return tree;
}

std::string attribute(const Tree& node, const std::string& name) {
    return node.get<std::string>("<xmlattr>." + name, "");
}

}  // namespace curator::xml
