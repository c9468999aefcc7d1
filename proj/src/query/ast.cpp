#include "gtdb/query/ast.hpp"

#include "gtdb/query/parser.hpp"

namespace gtdb::query {

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.name != b.name || a.iter != b.iter || a.distinct != b.distinct ||
        a.args.size() != b.args.size()) {
        return false;
    }
    if (a.kind == ExprKind::Literal && !(a.literal == b.literal && a.literal.type_name() == b.literal.type_name())) {
        return false;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!same_expr(a.args[i], b.args[i])) return false;
    }
    return true;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return *a == *b;
}

ExprPtr make_literal(Value v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Literal;
    e->literal = std::move(v);
    return e;
}

ExprPtr make_param(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Param;
    e->name = std::move(name);
    return e;
}

ExprPtr make_variable(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Variable;
    e->name = std::move(name);
    return e;
}

ExprPtr make_property(ExprPtr object, std::string key) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Property;
    e->name = std::move(key);
    e->args.push_back(std::move(object));
    return e;
}

ExprPtr make_call(std::string fn, std::vector<ExprPtr> args, bool distinct) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Call;
    e->name = std::move(fn);
    e->args = std::move(args);
    e->distinct = distinct;
    return e;
}

ExprPtr make_unary(ExprKind kind, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->args.push_back(std::move(a));
    return e;
}

ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->args.push_back(std::move(a));
    e->args.push_back(std::move(b));
    return e;
}

ExprPtr make_has_label(ExprPtr var, std::string label) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::HasLabel;
    e->name = std::move(label);
    e->args.push_back(std::move(var));
    return e;
}

bool is_aggregate_call(const Expr& e) {
    return e.kind == ExprKind::Call && (e.name == "count" || e.name == "collect");
}

bool contains_aggregate(const Expr& e) {
    if (is_aggregate_call(e)) return true;
    for (const auto& a : e.args) {
        if (a && contains_aggregate(*a)) return true;
    }
    return false;
}

std::string ProjectionItem::column() const { return alias ? *alias : print(*expr); }

} // namespace gtdb::query
