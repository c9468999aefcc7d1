#include "gtdb/query/binder.hpp"

#include <set>

#include "gtdb/query/errors.hpp"
#include "gtdb/query/parser.hpp"

namespace gtdb::query {

namespace {

using Scope = std::set<std::string>;

class Binder {
public:
    explicit Binder(const Params& params) : params_(params) {}

    BoundQuery run(const QueryAst& ast) {
        BoundQuery out;
        out.ast = ast;
        collect_names(out.ast);
        Scope scope;
        for (auto& c : out.ast.clauses) {
            switch (c.kind) {
                case ClauseKind::Match: bind_match(c, scope); break;
                case ClauseKind::With:
                case ClauseKind::Return: scope = bind_projection(c.body, scope); break;
                case ClauseKind::Unwind:
                    check_expr(*c.unwind, scope, false);
                    scope.insert(c.alias);
                    break;
            }
            if (c.where) {
                check_expr(*c.where, scope, false);
                if (contains_aggregate(*c.where)) {
                    throw QueryError(QueryErrc::UnsupportedConstruct, "aggregation inside WHERE");
                }
            }
        }
        out.params = params_;
        return out;
    }

private:
    void collect_names(const QueryAst& ast) {
        for (const auto& c : ast.clauses) {
            if (c.kind != ClauseKind::Match) continue;
            for (const auto& n : c.pattern.nodes) used_.insert(n.var);
            for (const auto& r : c.pattern.rels) used_.insert(r.var);
        }
    }

    std::string fresh_anon() {
        for (;;) {
            std::string name = "anon_" + std::to_string(anon_++);
            if (!used_.count(name)) {
                used_.insert(name);
                return name;
            }
        }
    }

    const Value& lookup(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw MissingParameter(name);
        return it->second;
    }

    void substitute(SchemaRef& r) {
        if (!r.is_param) return;
        const Value& v = lookup(r.name);
        if (!v.is_string() || v.as_string().empty()) {
            throw QueryError(QueryErrc::TypeMismatch, "$" + r.name + " must be a non-empty string (label or type name)");
        }
        r = SchemaRef{v.as_string(), false};
    }

    void bind_match(Clause& c, Scope& scope) {
        auto& p = c.pattern;
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
            auto& n = p.nodes[i];
            if (n.var.empty()) n.var = fresh_anon();
            for (auto& l : n.labels) substitute(l);
            scope.insert(n.var);
            if (i < p.rels.size()) {
                auto& r = p.rels[i];
                if (r.var.empty()) r.var = fresh_anon();
                if (r.type) substitute(*r.type);
                scope.insert(r.var);
            }
        }
    }

    Scope bind_projection(ProjectionBody& b, const Scope& scope) {
        Scope next;
        bool aggregating = false;
        for (const auto& it : b.items) {
            check_expr(*it.expr, scope, true);
            aggregating = aggregating || contains_aggregate(*it.expr);
            next.insert(it.alias ? *it.alias : (it.expr->kind == ExprKind::Variable ? it.expr->name : it.column()));
        }
        Scope sort_scope = next;
        if (!aggregating && !b.distinct) sort_scope.insert(scope.begin(), scope.end());
        for (const auto& s : b.order_by) {
            check_expr(*s.expr, sort_scope, false);
            if (contains_aggregate(*s.expr)) {
                throw QueryError(QueryErrc::UnsupportedConstruct, "aggregation inside ORDER BY");
            }
        }
        if (b.limit) {
            const Value* v = nullptr;
            if (b.limit->kind == ExprKind::Param) {
                v = &lookup(b.limit->name);
            } else if (b.limit->kind == ExprKind::Literal) {
                v = &b.limit->literal;
            }
            if (!v || !v->is_int() || v->as_int() < 0) {
                throw QueryError(QueryErrc::TypeMismatch, "LIMIT must be a non-negative integer, got " +
                                                              (v ? v->to_string() : print(*b.limit)));
            }
            b.limit = make_literal(Value(v->as_int()));
        }
        return next;
    }

    void check_expr(const Expr& e, const Scope& scope, bool aggregate_ok) {
        switch (e.kind) {
            case ExprKind::Variable:
                if (!scope.count(e.name)) {
                    throw QueryError(QueryErrc::UnboundVariable, "variable `" + e.name + "` is not defined");
                }
                return;
            case ExprKind::Param: lookup(e.name); return;
            case ExprKind::Reduce: {
                check_expr(*e.args[0], scope, false);
                check_expr(*e.args[1], scope, false);
                Scope inner = scope;
                inner.insert(e.name);
                inner.insert(e.iter);
                check_expr(*e.args[2], inner, false);
                return;
            }
            case ExprKind::Call:
                if (is_aggregate_call(e)) {
                    if (!aggregate_ok) {
                        throw QueryError(QueryErrc::UnsupportedConstruct, e.name + "() is only allowed as a projection");
                    }
                    for (const auto& a : e.args) check_expr(*a, scope, false);
                    return;
                }
                break;
            default: break;
        }
        for (const auto& a : e.args) check_expr(*a, scope, false);
    }

    const Params& params_;
    std::set<std::string> used_;
    int anon_ = 0;
};

} // namespace

BoundQuery bind(const QueryAst& ast, const Params& params) {
    Binder b(params);
    return b.run(ast);
}

} // namespace gtdb::query
