#pragma once

#include <map>
#include <string>

#include "gtdb/query/ast.hpp"

namespace gtdb::query {

using Params = std::map<std::string, Value>;

/// A query whose parameters are all resolved. Label and relationship-type
/// parameters are substituted into the pattern, LIMIT is a non-negative
/// integer literal, and anonymous pattern elements are named `anon_N`.
struct BoundQuery {
    QueryAst ast;
    Params params;
};

/// Throws MissingParameter, QueryError(TypeMismatch) or
/// QueryError(UnboundVariable).
BoundQuery bind(const QueryAst& ast, const Params& params);

} // namespace gtdb::query
