#pragma once

#include <string>
#include <string_view>

#include "gtdb/query/ast.hpp"

namespace gtdb::query {

/// Parses one query of the supported Cypher subset. Throws SyntaxError with
/// the position of the first offending token and the set of tokens that
/// would have been accepted there.
QueryAst parse(std::string_view text);

/// Canonical single-line rendering; parse(print(q)) == q.
std::string print(const QueryAst& q);
std::string print(const Expr& e);
std::string print(const Pattern& p);

/// Backticks `name` unless it is a plain identifier.
std::string quote_identifier(const std::string& name);

} // namespace gtdb::query
