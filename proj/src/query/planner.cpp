#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "gtdb/query/errors.hpp"
#include "gtdb/query/parser.hpp"
#include "gtdb/query/plan.hpp"

namespace gtdb::query {

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::NodeIndexSeek: return "NodeIndexSeek";
        case OpKind::AllNodesScan: return "AllNodesScan";
        case OpKind::NodeByLabelScan: return "NodeByLabelScan";
        case OpKind::Argument: return "Argument";
        case OpKind::Expand: return "Expand(All)";
        case OpKind::Filter: return "Filter";
        case OpKind::Optional: return "Optional";
        case OpKind::Apply: return "Apply";
        case OpKind::Projection: return "Projection";
        case OpKind::Unwind: return "Unwind";
        case OpKind::Aggregate: return "Aggregate";
        case OpKind::Distinct: return "Distinct";
        case OpKind::Sort: return "Sort";
        case OpKind::Top: return "Top";
        case OpKind::Limit: return "Limit";
        case OpKind::ProduceResults: return "ProduceResults";
    }
    return "?";
}

namespace {

using VarMap = std::map<std::string, int>;

[[noreturn]] void unsupported(const std::string& what) { throw QueryError(QueryErrc::UnsupportedConstruct, what); }

void split_and(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (!e) return;
    if (e->kind == ExprKind::And) {
        split_and(e->args[0], out);
        split_and(e->args[1], out);
    } else {
        out.push_back(e);
    }
}

ExprPtr join_and(const std::vector<ExprPtr>& parts) {
    ExprPtr e;
    for (const auto& p : parts) e = e ? make_binary(ExprKind::And, e, p) : p;
    return e;
}

bool mentions_variable(const Expr& e) {
    if (e.kind == ExprKind::Variable || e.kind == ExprKind::Reduce) return true;
    return std::any_of(e.args.begin(), e.args.end(), [](const ExprPtr& a) { return a && mentions_variable(*a); });
}

bool is_id_of(const Expr& e, const std::string& var) {
    const bool prop = e.kind == ExprKind::Property && e.name == GraphStore::kIdKey;
    const bool call = e.kind == ExprKind::Call && e.name == "id";
    return (prop || call) && e.args[0]->kind == ExprKind::Variable && e.args[0]->name == var;
}

std::string join(const std::vector<std::string>& parts, const char* sep = ", ") {
    std::string s;
    for (const auto& p : parts) {
        if (!s.empty()) s += sep;
        s += p;
    }
    return s;
}

class Planner {
public:
    Planner(const BoundQuery& q, const GraphStore& store) : q_(q), store_(store), stats_(store.stats()) {}

    Plan run() {
        const auto& clauses = q_.ast.clauses;
        for (const auto& c : clauses) {
            switch (c.kind) {
                case ClauseKind::Match: plan_match(c); break;
                case ClauseKind::Unwind: plan_unwind(c); break;
                case ClauseKind::With: plan_body(c.body, false, c.where); break;
                case ClauseKind::Return: plan_body(c.body, true, nullptr); break;
            }
        }
        if (!op_ || op_->kind != OpKind::ProduceResults) unsupported("query must end with RETURN");
        Plan p;
        p.root = std::move(op_);
        int next = 0;
        assign_ids(*p.root, next);
        p.slot_count = static_cast<int>(slots_.size());
        p.slot_names = slots_;
        p.argument_count = arguments_;
        p.params = q_.params;
        return p;
    }

private:
    int new_slot(const std::string& name) {
        slots_.push_back(name);
        return static_cast<int>(slots_.size()) - 1;
    }

    double in_rows() const { return op_ ? op_->estimated_rows : 1.0; }

    void push(std::unique_ptr<PlanOp> op) {
        if (op_) op->children.insert(op->children.begin(), std::move(op_));
        op_ = std::move(op);
    }

    static std::unique_ptr<PlanOp> make(OpKind k, std::string details, double est) {
        auto op = std::make_unique<PlanOp>();
        op->kind = k;
        op->details = std::move(details);
        op->estimated_rows = est;
        return op;
    }

    void ensure_source() {
        if (op_) return;
        // a single empty row for queries that start without MATCH
        push(make(OpKind::Argument, "", 1.0));
    }

    static void assign_ids(PlanOp& op, int& next) {
        op.id = next++;
        for (auto it = op.children.rbegin(); it != op.children.rend(); ++it) assign_ids(**it, next);
    }

    CExpr compile(const Expr& e, const VarMap& scope) {
        CExpr c;
        c.kind = e.kind;
        c.name = e.name;
        c.distinct = e.distinct;
        c.literal = e.literal;
        switch (e.kind) {
            case ExprKind::Param: {
                auto it = q_.params.find(e.name);
                if (it == q_.params.end()) throw MissingParameter(e.name);
                c.kind = ExprKind::Literal;
                c.literal = it->second;
                return c;
            }
            case ExprKind::Variable: {
                auto it = scope.find(e.name);
                if (it == scope.end()) {
                    throw QueryError(QueryErrc::UnboundVariable, "variable `" + e.name + "` is not defined");
                }
                c.slot = it->second;
                return c;
            }
            case ExprKind::Reduce: {
                c.args.push_back(compile(*e.args[0], scope));
                c.args.push_back(compile(*e.args[1], scope));
                VarMap inner = scope;
                c.slot = new_slot(e.name);
                c.iter_slot = new_slot(e.iter);
                inner[e.name] = c.slot;
                inner[e.iter] = c.iter_slot;
                c.args.push_back(compile(*e.args[2], inner));
                return c;
            }
            default:
                for (const auto& a : e.args) c.args.push_back(compile(*a, scope));
                return c;
        }
    }

    double list_size(const CExpr& c) const {
        if (c.kind == ExprKind::Literal) {
            if (c.literal.is_list()) return static_cast<double>(c.literal.as_list().size());
            return c.literal.is_null() ? 0.0 : 1.0;
        }
        if (c.kind == ExprKind::ListLit) return static_cast<double>(c.args.size());
        return 1.0;
    }

    double label_selectivity(const std::string& label) const {
        if (stats_.node_count == 0) return 1.0;
        return static_cast<double>(stats_.label_count(label)) / static_cast<double>(stats_.node_count);
    }

    double selectivity(const std::vector<ExprPtr>& conj) const {
        double s = 1.0;
        for (const auto& c : conj) {
            if (c->kind == ExprKind::HasLabel) {
                s *= label_selectivity(c->name);
            } else if (c->kind == ExprKind::Not && c->args[0]->kind == ExprKind::Eq &&
                       c->args[0]->args[0]->kind == ExprKind::Variable &&
                       c->args[0]->args[1]->kind == ExprKind::Variable) {
                // relationship uniqueness; the cost model treats it as free
            } else {
                s *= 0.5;
            }
        }
        return s;
    }

    double degree(int from_slot, const RelPattern& r) const {
        const std::string type = r.type ? r.type->name : "";
        auto lit = node_labels_.find(from_slot);
        auto per_node = [&](bool out) {
            if (lit != node_labels_.end()) {
                return out ? stats_.avg_out_degree(lit->second, type) : stats_.avg_in_degree(lit->second, type);
            }
            if (stats_.node_count == 0) return 0.0;
            double edges = static_cast<double>(stats_.edge_count);
            if (!type.empty()) {
                auto it = stats_.rel_type_counts.find(type);
                edges = it == stats_.rel_type_counts.end() ? 0.0 : static_cast<double>(it->second);
            }
            return edges / static_cast<double>(stats_.node_count);
        };
        switch (r.dir) {
            case RelDir::Right: return per_node(true);
            case RelDir::Left: return per_node(false);
            case RelDir::Both: return per_node(true) + per_node(false);
        }
        return 0.0;
    }

    void add_filter(const std::vector<ExprPtr>& conj) {
        if (conj.empty()) return;
        ExprPtr pred = join_and(conj);
        auto op = make(OpKind::Filter, print(*pred), in_rows() * selectivity(conj));
        op->predicate = compile(*pred, scope_);
        push(std::move(op));
    }

    void label_filter(const NodePattern& n, const std::string& except = "") {
        std::vector<ExprPtr> conj;
        for (const auto& l : n.labels) {
            if (l.name != except) conj.push_back(make_has_label(make_variable(n.var), l.name));
        }
        add_filter(conj);
    }

    void plan_start(const NodePattern& n, std::vector<ExprPtr>& conj) {
        const int slot = new_slot(n.var);
        scope_[n.var] = slot;
        for (auto it = conj.begin(); it != conj.end(); ++it) {
            const Expr& c = **it;
            if (c.kind != ExprKind::In || !is_id_of(*c.args[0], n.var) || mentions_variable(*c.args[1])) continue;
            auto label = std::find_if(n.labels.begin(), n.labels.end(), [&](const SchemaRef& l) {
                return store_.has_index(l.name, GraphStore::kIdKey);
            });
            if (label == n.labels.end()) continue;
            auto op = make(OpKind::NodeIndexSeek,
                           "INDEX " + n.var + ":" + label->name + "(id) WHERE id IN " + print(*c.args[1]), 0);
            op->slot = slot;
            op->label = label->name;
            op->key = std::string(GraphStore::kIdKey);
            op->values = compile(*c.args[1], scope_);
            op->estimated_rows = list_size(op->values);
            push(std::move(op));
            node_labels_[slot] = label->name;
            row_keys_ = {slot};
            const std::string used = label->name;
            conj.erase(it);
            label_filter(n, used);
            return;
        }
        if (!n.labels.empty()) {
            const auto& l = n.labels.front().name;
            auto op = make(OpKind::NodeByLabelScan, n.var + ":" + l, static_cast<double>(stats_.label_count(l)));
            op->slot = slot;
            op->label = l;
            push(std::move(op));
            node_labels_[slot] = l;
            row_keys_ = {slot};
            label_filter(n, l);
            return;
        }
        auto op = make(OpKind::AllNodesScan, n.var, static_cast<double>(stats_.node_count));
        op->slot = slot;
        push(std::move(op));
        row_keys_ = {slot};
    }

    void plan_hops(const Pattern& p) {
        std::vector<std::string> rels_so_far;
        for (std::size_t i = 0; i < p.rels.size(); ++i) {
            const auto& r = p.rels[i];
            const auto& from = p.nodes[i];
            const auto& to = p.nodes[i + 1];
            if (scope_.count(to.var) || scope_.count(r.var)) {
                unsupported("pattern revisits bound variable `" + (scope_.count(to.var) ? to.var : r.var) + "`");
            }
            const int from_slot = scope_.at(from.var);
            auto op = make(OpKind::Expand, "", in_rows() * degree(from_slot, r));
            std::string type = r.type ? ":" + quote_identifier(r.type->name) : "";
            op->details = "(" + from.var + ")" + (r.dir == RelDir::Left ? "<-" : "-") + "[" + r.var + type + "]" +
                          (r.dir == RelDir::Right ? "->" : "-") + "(" + to.var + ")";
            op->from_slot = from_slot;
            op->rel_slot = new_slot(r.var);
            op->to_slot = new_slot(to.var);
            op->dir = r.dir == RelDir::Right ? Direction::Out : r.dir == RelDir::Left ? Direction::In : Direction::Both;
            if (r.type) op->rel_type = r.type->name;
            scope_[r.var] = op->rel_slot;
            scope_[to.var] = op->to_slot;
            if (!to.labels.empty()) node_labels_[op->to_slot] = to.labels.front().name;
            const bool unique_edges = row_keys_.count(from_slot) && r.dir != RelDir::Both;
            row_keys_.clear();
            if (unique_edges) row_keys_.insert(op->rel_slot);
            push(std::move(op));

            std::vector<ExprPtr> conj;
            for (auto it = rels_so_far.rbegin(); it != rels_so_far.rend(); ++it) {
                conj.push_back(make_unary(
                    ExprKind::Not, make_binary(ExprKind::Eq, make_variable(r.var), make_variable(*it))));
            }
            for (const auto& l : to.labels) conj.push_back(make_has_label(make_variable(to.var), l.name));
            add_filter(conj);
            rels_so_far.push_back(r.var);
        }
    }

    void plan_match(const Clause& c) {
        const auto& p = c.pattern;
        std::vector<ExprPtr> conj;
        split_and(c.where, conj);
        if (c.optional) {
            plan_optional(c, conj);
            return;
        }
        if (!op_) {
            plan_start(p.nodes[0], conj);
        } else {
            if (!scope_.count(p.nodes[0].var)) {
                unsupported("MATCH on `" + p.nodes[0].var + "` would need a cross product with earlier clauses");
            }
            label_filter(p.nodes[0]);
        }
        plan_hops(p);
        add_filter(conj);
    }

    void plan_optional(const Clause& c, std::vector<ExprPtr>& conj) {
        const auto& p = c.pattern;
        if (!op_) unsupported("OPTIONAL MATCH as the first clause");
        if (!scope_.count(p.nodes[0].var)) {
            unsupported("OPTIONAL MATCH on `" + p.nodes[0].var + "` would need a cross product");
        }
        auto outer = std::move(op_);
        const VarMap outer_scope = scope_;
        const double outer_rows = outer->estimated_rows;
        const int arg = arguments_++;

        std::vector<std::string> bound;
        for (const auto& n : p.nodes) {
            if (outer_scope.count(n.var) && std::find(bound.begin(), bound.end(), n.var) == bound.end()) {
                bound.push_back(n.var);
            }
        }
        auto argument = make(OpKind::Argument, join(bound), outer_rows);
        argument->argument = arg;
        push(std::move(argument));
        row_keys_.clear();
        label_filter(p.nodes[0]);
        plan_hops(p);
        add_filter(conj);

        auto optional = make(OpKind::Optional, join(bound), std::max(in_rows(), outer_rows));
        optional->argument = arg;
        for (const auto& [name, slot] : scope_) {
            if (!outer_scope.count(name)) optional->null_slots.push_back(slot);
        }
        std::sort(optional->null_slots.begin(), optional->null_slots.end());
        push(std::move(optional));

        auto apply = make(OpKind::Apply, "", op_->estimated_rows);
        apply->argument = arg;
        apply->children.push_back(std::move(outer));
        apply->children.push_back(std::move(op_));
        op_ = std::move(apply);
        row_keys_.clear();
    }

    void plan_unwind(const Clause& c) {
        ensure_source();
        auto op = make(OpKind::Unwind, print(*c.unwind) + " AS " + quote_identifier(c.alias), in_rows());
        op->values = compile(*c.unwind, scope_);
        op->slot = new_slot(c.alias);
        scope_[c.alias] = op->slot;
        push(std::move(op));
        row_keys_.clear();
    }

    struct Item {
        const ProjectionItem* src;
        std::string name;
        bool trivial;
        int slot = -1;
        bool materialized = false;
    };

    void plan_body(const ProjectionBody& b, bool is_return, const ExprPtr& where) {
        ensure_source();
        std::vector<Item> items;
        bool aggregating = false;
        for (const auto& it : b.items) {
            const bool is_var = it.expr->kind == ExprKind::Variable;
            std::string name = it.alias ? *it.alias : (is_var ? it.expr->name : it.column());
            items.push_back(Item{&it, name, is_var && name == it.expr->name});
            if (contains_aggregate(*it.expr)) {
                if (!is_aggregate_call(*it.expr)) unsupported("aggregation nested inside " + print(*it.expr));
                aggregating = true;
            }
        }
        const VarMap before = scope_;
        VarMap next;
        auto item_text = [](const Item& i) {
            const std::string e = print(*i.src->expr);
            return i.src->alias ? e + " AS " + quote_identifier(i.name) : e;
        };

        if (aggregating) {
            std::vector<std::string> keys_text, aggs_text;
            auto op = make(OpKind::Aggregate, "", 1.0);
            for (auto& i : items) {
                if (is_aggregate_call(*i.src->expr)) {
                    AggSpec a;
                    a.fn = i.src->expr->name;
                    a.distinct = i.src->expr->distinct;
                    a.arg = compile(*i.src->expr->args[0], before);
                    a.slot = i.slot = new_slot(i.name);
                    op->aggregates.push_back(std::move(a));
                    aggs_text.push_back(item_text(i));
                } else {
                    i.slot = i.trivial ? before.at(i.name) : new_slot(i.name);
                    op->projections.emplace_back(i.slot, compile(*i.src->expr, before));
                    keys_text.push_back(item_text(i));
                }
                i.materialized = true;
                next[i.name] = i.slot;
            }
            op->details = join(keys_text);
            if (!aggs_text.empty()) op->details += (keys_text.empty() ? "" : ", ") + join(aggs_text);
            op->estimated_rows = op->projections.empty() ? 1.0 : std::ceil(std::sqrt(in_rows()));
            const bool single_key = op->projections.size() == 1;
            const int key_slot = single_key ? op->projections[0].first : -1;
            push(std::move(op));
            row_keys_.clear();
            if (single_key) row_keys_.insert(key_slot);
        } else {
            const bool defer = is_return && !b.distinct;
            std::vector<std::pair<int, CExpr>> proj;
            std::vector<std::string> text;
            for (auto& i : items) {
                if (i.trivial) {
                    i.slot = before.at(i.name);
                    i.materialized = true;
                } else if (!defer) {
                    i.slot = new_slot(i.name);
                    proj.emplace_back(i.slot, compile(*i.src->expr, before));
                    text.push_back(print(*i.src->expr) + " AS " + quote_identifier(i.name));
                    i.materialized = true;
                }
                if (i.materialized) next[i.name] = i.slot;
            }
            if (!proj.empty()) {
                auto op = make(OpKind::Projection, join(text), in_rows());
                op->projections = std::move(proj);
                push(std::move(op));
            }
            std::set<int> kept;
            for (const auto& i : items) {
                if (i.materialized && row_keys_.count(i.slot)) kept.insert(i.slot);
            }
            if (b.distinct) {
                // a unique row key among the projected columns makes every row distinct
                if (kept.empty()) {
                    std::vector<std::string> names;
                    auto op = make(OpKind::Distinct, "", in_rows());
                    for (const auto& i : items) {
                        op->key_slots.push_back(i.slot);
                        names.push_back(i.name);
                    }
                    op->details = join(names);
                    push(std::move(op));
                    if (items.size() == 1) kept.insert(items[0].slot);
                }
            }
            row_keys_ = kept;
        }

        if (!b.order_by.empty()) {
            VarMap sort_scope = next;
            if (!aggregating && !b.distinct) {
                for (const auto& [n, s] : before) sort_scope.emplace(n, s);
            }
            std::vector<std::pair<int, CExpr>> proj;
            std::vector<std::string> text, keys_text;
            std::vector<SortKey> keys;
            for (const auto& s : b.order_by) {
                int slot = -1;
                if (s.expr->kind == ExprKind::Variable) {
                    auto deferred = std::find_if(items.begin(), items.end(), [&](const Item& i) {
                        return !i.materialized && i.name == s.expr->name;
                    });
                    if (deferred != items.end()) {
                        deferred->slot = new_slot(deferred->name);
                        deferred->materialized = true;
                        proj.emplace_back(deferred->slot, compile(*deferred->src->expr, before));
                        text.push_back(print(*deferred->src->expr) + " AS " + quote_identifier(deferred->name));
                        next[deferred->name] = deferred->slot;
                        sort_scope[deferred->name] = deferred->slot;
                    }
                    slot = sort_scope.at(s.expr->name);
                } else {
                    const std::string name = print(*s.expr);
                    slot = new_slot(name);
                    proj.emplace_back(slot, compile(*s.expr, sort_scope));
                    text.push_back(name + " AS " + quote_identifier(name));
                }
                keys.push_back(SortKey{slot, s.descending});
                keys_text.push_back(print(*s.expr) + (s.descending ? " DESC" : " ASC"));
            }
            if (!proj.empty()) {
                auto op = make(OpKind::Projection, join(text), in_rows());
                op->projections = std::move(proj);
                push(std::move(op));
            }
            if (b.limit) {
                const auto n = static_cast<std::uint64_t>(b.limit->literal.as_int());
                auto op = make(OpKind::Top, join(keys_text) + " LIMIT " + std::to_string(n),
                               std::min(in_rows(), static_cast<double>(n)));
                op->sort = std::move(keys);
                op->limit = n;
                push(std::move(op));
            } else {
                auto op = make(OpKind::Sort, join(keys_text), in_rows());
                op->sort = std::move(keys);
                push(std::move(op));
            }
        } else if (b.limit) {
            const auto n = static_cast<std::uint64_t>(b.limit->literal.as_int());
            auto op = make(OpKind::Limit, std::to_string(n), std::min(in_rows(), static_cast<double>(n)));
            op->limit = n;
            push(std::move(op));
        }

        if (is_return) {
            auto op = make(OpKind::ProduceResults, "", in_rows());
            std::vector<std::string> cols;
            for (const auto& i : items) {
                op->columns.push_back(i.src->column());
                if (i.materialized) {
                    CExpr v;
                    v.kind = ExprKind::Variable;
                    v.slot = i.slot;
                    op->outputs.push_back(std::move(v));
                } else {
                    op->outputs.push_back(compile(*i.src->expr, before));
                }
            }
            op->details = join(op->columns);
            push(std::move(op));
            scope_ = next;
            return;
        }
        scope_ = next;
        if (where) {
            std::vector<ExprPtr> conj;
            split_and(where, conj);
            add_filter(conj);
        }
    }

    const BoundQuery& q_;
    const GraphStore& store_;
    StoreStats stats_;
    std::unique_ptr<PlanOp> op_;
    VarMap scope_;
    std::set<int> row_keys_;
    std::map<int, std::string> node_labels_;
    std::vector<std::string> slots_;
    int arguments_ = 0;
};

void collect_ops(const PlanOp& op, std::vector<const PlanOp*>& out) {
    out.push_back(&op);
    for (const auto& c : op.children) collect_ops(*c, out);
}

void explain_op(const PlanOp& op, int depth, std::ostringstream& os) {
    os << std::string(depth, '|') << '+' << op_name(op.kind) << " #" << op.id;
    if (!op.details.empty()) os << "  " << op.details;
    os << "  (est " << std::llround(op.estimated_rows) << ")\n";
    for (std::size_t i = op.children.size(); i-- > 0;) {
        explain_op(*op.children[i], depth + (op.kind == OpKind::Apply && i == 1 ? 1 : 0), os);
    }
}

} // namespace

std::vector<const PlanOp*> Plan::operators() const {
    std::vector<const PlanOp*> out;
    collect_ops(*root, out);
    std::sort(out.begin(), out.end(), [](const PlanOp* a, const PlanOp* b) { return a->id < b->id; });
    return out;
}

std::vector<std::string> Plan::bottom_up() const {
    std::vector<std::string> out;
    const auto ops = operators();
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) out.emplace_back(op_name((*it)->kind));
    return out;
}

std::string Plan::explain() const {
    std::ostringstream os;
    explain_op(*root, 0, os);
    return os.str();
}

Plan plan(const BoundQuery& q, const GraphStore& store) {
    Planner p(q, store);
    return p.run();
}

} // namespace gtdb::query
