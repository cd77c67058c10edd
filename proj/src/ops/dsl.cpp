#include "curator/dsl.hpp"

#include <charconv>

#include "curator/canonical.hpp"

namespace curator {

ScriptSyntaxError::ScriptSyntaxError(std::size_t line, std::size_t column, const std::string& message)
    : DomainError("syntax-error", "", "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

bool is_boundary(char c) { return c == ' ' || c == ',' || c == '#' || c == '/'; }

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : text_(line), line_no_(line_no) {}

    /// Returns false for blank and comment-only lines.
    bool parse(std::vector<CurationOp>& out) {
        skip_spaces();
        if (at_end()) return false;
        const auto keyword_col = pos_;
        auto keyword = read_keyword();
        if (keyword == "rename") {
            RenameOp op;
            op.path = read_path();
            expect_keyword("as");
            op.new_name = read_name();
            out.emplace_back(std::move(op));
        } else if (keyword == "remove") {
            out.emplace_back(RemoveOp{read_path()});
        } else if (keyword == "merge") {
            MergeOp op;
            op.source = read_path();
            expect_keyword("into");
            op.target = read_path();
            if (peek_keyword("as")) op.new_name = read_name();
            out.emplace_back(std::move(op));
        } else if (keyword == "move") {
            MoveOp op;
            op.path = read_path();
            expect_keyword("under");
            op.new_parent = read_path();
            if (peek_keyword("at")) op.index = read_index();
            out.emplace_back(std::move(op));
        } else if (keyword == "group") {
            GroupOp op;
            op.paths.push_back(read_path());
            while (true) {
                auto save = pos_;
                skip_spaces();
                if (!at_end() && text_[pos_] == ',') {
                    ++pos_;
                    op.paths.push_back(read_path(false));
                } else {
                    pos_ = save;
                    break;
                }
            }
            expect_keyword("as");
            op.new_name = read_name();
            out.emplace_back(std::move(op));
        } else if (keyword == "edit") {
            require_space("edit command");
            const auto start = pos_;
            nlohmann::json command;
            try {
                command = nlohmann::json::parse(text_.substr(pos_));
            } catch (const nlohmann::json::parse_error& e) {
                fail(start, std::string("malformed edit command: ") + e.what());
            }
            if (!command.is_object() || !command.contains("op") || !command.at("op").is_string()) {
                fail(start, "edit command must be a JSON object with an \"op\" string");
            }
            out.emplace_back(DocumentEdit{std::move(command)});
            return true;
        } else {
            fail(keyword_col, keyword.empty() ? "expected an operation keyword" : "unknown operation '" + keyword + "'");
        }
        expect_line_end();
        return true;
    }

private:
    [[noreturn]] void fail(std::size_t at, const std::string& message) const {
        throw ScriptSyntaxError(line_no_, at + 1, message);
    }

    bool at_end() const { return pos_ >= text_.size() || text_[pos_] == '#'; }

    void skip_spaces() {
        while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '\t' || text_[pos_] == '\r')) {
            fail(pos_, text_[pos_] == '\t' ? "tab character; tokens are separated by spaces" : "carriage return; use LF line endings");
        }
    }

    /// Requires at least one space, then skips the rest.
    void require_space(const char* before) {
        if (pos_ >= text_.size() || text_[pos_] != ' ') {
            if (pos_ < text_.size() && (text_[pos_] == '\t' || text_[pos_] == '\r')) skip_spaces();
            fail(pos_, std::string("expected a space before ") + before);
        }
        skip_spaces();
    }

    std::string read_keyword() {
        auto start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z') ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    void expect_keyword(std::string_view keyword) {
        require_space(keyword.data());
        auto at = pos_;
        if (at_end()) fail(at, "expected '" + std::string(keyword) + "'");
        auto word = read_keyword();
        if (word != keyword) fail(at, "expected '" + std::string(keyword) + "'");
    }

    /// Consumes ` <keyword>` when it is next on the line.
    bool peek_keyword(std::string_view keyword) {
        auto save = pos_;
        skip_spaces();
        if (pos_ == save || at_end()) {
            pos_ = save;
            return false;
        }
        auto at = pos_;
        auto word = read_keyword();
        if (word == keyword) return true;
        fail(at, "unexpected token; expected '" + std::string(keyword) + "' or end of line");
    }

    void expect_line_end() {
        auto save = pos_;
        skip_spaces();
        if (!at_end()) fail(pos_, "unexpected trailing input");
        if (pos_ < text_.size() && text_[pos_] == '#' && pos_ == save && pos_ > 0) {
            fail(pos_, "expected a space before comment");
        }
    }

    std::string read_segment() {
        const auto start = pos_;
        std::string out;
        if (pos_ < text_.size() && text_[pos_] == '"') {
            ++pos_;
            bool closed = false;
            while (pos_ < text_.size()) {
                char c = text_[pos_++];
                if (c == '\\') {
                    if (pos_ >= text_.size()) fail(pos_, "dangling escape");
                    char next = text_[pos_++];
                    if (next != '"' && next != '\\') fail(pos_ - 2, "unknown escape \\" + std::string(1, next));
                    out += next;
                } else if (c == '"') {
                    closed = true;
                    break;
                } else {
                    out += c;
                }
            }
            if (!closed) fail(start, "unterminated quoted name");
            if (pos_ < text_.size() && !is_boundary(text_[pos_])) fail(pos_, "quoted name must be followed by a separator");
        } else {
            while (pos_ < text_.size() && !is_boundary(text_[pos_])) {
                if (text_[pos_] == '"') fail(pos_, "quote inside an unquoted name");
                if (text_[pos_] == '\t' || text_[pos_] == '\r') skip_spaces();
                out += text_[pos_++];
            }
        }
        if (!is_valid_name(out)) fail(start, "invalid element name");
        return out;
    }

    ElementPath read_path(bool need_space = true) {
        if (need_space) {
            require_space("path");
        } else {
            skip_spaces();
        }
        const auto start = pos_;
        if (pos_ >= text_.size() || text_[pos_] != '/') fail(start, "expected a path starting with '/'");
        ++pos_;
        std::vector<std::string> segments;
        if (pos_ >= text_.size() || text_[pos_] == ' ' || text_[pos_] == ',' || text_[pos_] == '#') return ElementPath{};
        while (true) {
            segments.push_back(read_segment());
            if (pos_ < text_.size() && text_[pos_] == '/') {
                ++pos_;
                continue;
            }
            break;
        }
        return ElementPath(std::move(segments));
    }

    std::string read_name() {
        require_space("name");
        if (at_end()) fail(pos_, "expected a name");
        if (text_[pos_] == '/') fail(pos_, "expected a name, not a path");
        auto name = read_segment();
        return name;
    }

    std::size_t read_index() {
        require_space("index");
        const auto start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        std::size_t value = 0;
        auto digits = text_.substr(start, pos_ - start);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) fail(start, "expected a non-negative integer");
        if (pos_ < text_.size() && !is_boundary(text_[pos_])) fail(pos_, "expected a non-negative integer");
        return value;
    }

    std::string_view text_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

}  // namespace

CurationScript parse_script(std::string_view text) {
    CurationScript script;
    script.source = std::string(text);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        LineParser(text.substr(start, end - start), line_no).parse(script.ops);
        start = end + 1;
    }
    return script;
}

std::string print_name(std::string_view name) {
    bool plain = !name.empty();
    for (char c : name) {
        if (c == ' ' || c == '"' || c == ',' || c == '#' || c == '\\' || c == '/' || static_cast<unsigned char>(c) < 0x20) {
            plain = false;
            break;
        }
    }
    if (plain) return std::string(name);
    std::string out = "\"";
    for (char c : name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string print_path(const ElementPath& path) {
    if (path.is_root()) return "/";
    std::string out;
    for (const auto& s : path.segments()) out += "/" + print_name(s);
    return out;
}

std::string print_op(const CurationOp& op) {
    return std::visit(
        [](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, RenameOp>) {
                return "rename " + print_path(o.path) + " as " + print_name(o.new_name);
            } else if constexpr (std::is_same_v<T, RemoveOp>) {
                return "remove " + print_path(o.path);
            } else if constexpr (std::is_same_v<T, MergeOp>) {
                auto s = "merge " + print_path(o.source) + " into " + print_path(o.target);
                if (o.new_name) s += " as " + print_name(*o.new_name);
                return s;
            } else if constexpr (std::is_same_v<T, MoveOp>) {
                auto s = "move " + print_path(o.path) + " under " + print_path(o.new_parent);
                if (o.index) s += " at " + std::to_string(*o.index);
                return s;
            } else if constexpr (std::is_same_v<T, DocumentEdit>) {
                auto text = canonical_dump(o.command);
                text.pop_back();
                return "edit " + text;
            } else {
                std::string s = "group ";
                for (std::size_t i = 0; i < o.paths.size(); ++i) {
                    if (i) s += ", ";
                    s += print_path(o.paths[i]);
                }
                return s + " as " + print_name(o.new_name);
            }
        },
        op);
}

std::string print_script(const std::vector<CurationOp>& ops) {
    std::string out;
    for (const auto& op : ops) out += print_op(op) + "\n";
    return out;
}

}  // namespace curator
