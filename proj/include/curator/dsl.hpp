#pragma once

/// @file dsl.hpp
/// @brief Line-oriented curation language (`.cdsl`).
///
///   rename <path> as <NAME>
///   remove <path>
///   merge <path> into <path> [as <NAME>]
///   move <path> under <path> [at <INT>]
///   group <path> {, <path>} as <NAME>
///   edit <JSON object>      document edit, see curation.hpp
///
/// `<path>` is `/NAME{/NAME}` (or `/` for the schema root). NAMEs may be
/// double-quoted to hold spaces; inside quotes `\"` and `\\` escape. Tokens
/// are separated by spaces, keywords are case-sensitive, `#` starts a
/// comment and blank lines are ignored. An edit line is its JSON object up
/// to the end of the line.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "curator/errors.hpp"
#include "curator/schema_ops.hpp"

namespace curator {

class ScriptSyntaxError : public DomainError {
public:
    ScriptSyntaxError(std::size_t line, std::size_t column, const std::string& message);
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct CurationScript {
    std::vector<CurationOp> ops;
    std::string source;
};

/// Parses a whole script; throws ScriptSyntaxError at the first error.
CurationScript parse_script(std::string_view text);

/// Canonical one-line rendering; parse_script(print_op(op)) yields op.
std::string print_op(const CurationOp& op);
std::string print_script(const std::vector<CurationOp>& ops);
std::string print_name(std::string_view name);
std::string print_path(const ElementPath& path);

}  // namespace curator
