#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gtdb/query/value.hpp"

namespace gtdb::query {

enum class ExprKind : std::uint8_t {
    Literal,
    Param,
    Variable,
    Property,  // args[0].name
    Subscript, // args[0][args[1]]
    ListLit,
    Call,      // name(args...), `distinct` for count/collect
    Reduce,    // reduce(name = args[0], iter IN args[1] | args[2])
    In,
    Eq,
    Neq,
    Not,
    And,
    Add,
    HasLabel,  // args[0]:name
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind = ExprKind::Literal;
    Value literal;
    std::string name;
    std::string iter; // Reduce only
    bool distinct = false;
    std::vector<ExprPtr> args;

    friend bool operator==(const Expr& a, const Expr& b);
};

bool same_expr(const ExprPtr& a, const ExprPtr& b);

ExprPtr make_literal(Value v);
ExprPtr make_param(std::string name);
ExprPtr make_variable(std::string name);
ExprPtr make_property(ExprPtr object, std::string key);
ExprPtr make_call(std::string fn, std::vector<ExprPtr> args, bool distinct = false);
ExprPtr make_unary(ExprKind kind, ExprPtr a);
ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b);
ExprPtr make_has_label(ExprPtr var, std::string label);

/// true for count(...) and collect(...)
bool is_aggregate_call(const Expr& e);
bool contains_aggregate(const Expr& e);

/// A label or relationship type in a pattern; `$NAME` until bound.
struct SchemaRef {
    std::string name;
    bool is_param = false;
    friend bool operator==(const SchemaRef&, const SchemaRef&) = default;
};

struct NodePattern {
    std::string var; // empty when anonymous
    std::vector<SchemaRef> labels;
    friend bool operator==(const NodePattern&, const NodePattern&) = default;
};

enum class RelDir : std::uint8_t { Right, Left, Both };

struct RelPattern {
    std::string var;
    std::optional<SchemaRef> type;
    RelDir dir = RelDir::Right;
    friend bool operator==(const RelPattern&, const RelPattern&) = default;
};

/// node (rel node)*; nodes.size() == rels.size() + 1
struct Pattern {
    std::vector<NodePattern> nodes;
    std::vector<RelPattern> rels;
    friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct ProjectionItem {
    ExprPtr expr;
    std::optional<std::string> alias;
    /// Output column name: the alias, else the printed expression.
    std::string column() const;
    friend bool operator==(const ProjectionItem& a, const ProjectionItem& b) {
        return same_expr(a.expr, b.expr) && a.alias == b.alias;
    }
};

struct SortItem {
    ExprPtr expr;
    bool descending = false;
    friend bool operator==(const SortItem& a, const SortItem& b) {
        return same_expr(a.expr, b.expr) && a.descending == b.descending;
    }
};

struct ProjectionBody {
    bool distinct = false;
    std::vector<ProjectionItem> items;
    std::vector<SortItem> order_by;
    ExprPtr limit; // null when absent
    friend bool operator==(const ProjectionBody& a, const ProjectionBody& b) {
        return a.distinct == b.distinct && a.items == b.items && a.order_by == b.order_by &&
               same_expr(a.limit, b.limit);
    }
};

enum class ClauseKind : std::uint8_t { Match, With, Unwind, Return };

struct Clause {
    ClauseKind kind = ClauseKind::Match;
    bool optional = false;   // Match
    Pattern pattern;         // Match
    ExprPtr where;           // Match, With
    ProjectionBody body;     // With, Return
    ExprPtr unwind;          // Unwind
    std::string alias;       // Unwind

    friend bool operator==(const Clause& a, const Clause& b) {
        return a.kind == b.kind && a.optional == b.optional && a.pattern == b.pattern &&
               same_expr(a.where, b.where) && a.body == b.body && same_expr(a.unwind, b.unwind) &&
               a.alias == b.alias;
    }
};

struct QueryAst {
    std::vector<Clause> clauses;
    friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

} // namespace gtdb::query
