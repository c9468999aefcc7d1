#include "gtdb/query/executor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gtdb/common/memory.hpp"
#include "gtdb/common/rng.hpp"
#include "gtdb/query/errors.hpp"
#include "gtdb/query/parser.hpp"

namespace gtdb::query {

std::optional<PropertyValue> to_property_value(const Value& v) {
    if (v.is_string()) return PropertyValue(v.as_string());
    if (v.is_int()) return PropertyValue(v.as_int());
    if (v.is_float()) return PropertyValue(v.as_number());
    if (v.is_vector()) return PropertyValue(v.as_vector());
    return std::nullopt;
}

namespace {

struct OpStats {
    std::uint64_t rows = 0;
    std::uint64_t inclusive_hits = 0;
};

struct Context {
    const Plan& plan;
    ReadTxn& txn;
    Rng rng;
    MemoryMeter mem;
    std::vector<Row> arguments;
    std::vector<OpStats> stats;
};

[[noreturn]] void type_error(const std::string& what, const Value& got) {
    throw QueryError(QueryErrc::TypeMismatch, what + ", got " + got.type_name());
}

Value truth(const Value& v) {
    if (v.is_null() || v.is_bool()) return v;
    type_error("expected a boolean", v);
}

Value eval(const CExpr& e, Row& row, Context& ctx);

Value eval_property(const Value& obj, const std::string& key, Context& ctx) {
    if (obj.is_null()) return {};
    std::optional<PropertyValue> p;
    if (obj.is_node()) {
        p = ctx.txn.get_property(obj.as_node().id, key);
    } else if (obj.is_edge()) {
        p = ctx.txn.get_edge_property(obj.as_edge().id, key);
    } else {
        type_error("property access ." + key + " needs a node or relationship", obj);
    }
    return p ? Value::from_property(*p) : Value();
}

Value eval_call(const CExpr& e, Row& row, Context& ctx) {
    if (e.name == "rand") return Value(uniform01(ctx.rng));
    const Value a = eval(e.args[0], row, ctx);
    if (a.is_null()) return {};
    if (e.name == "labels") {
        if (!a.is_node()) type_error("labels() needs a node", a);
        List out;
        for (auto& l : ctx.txn.node_labels(a.as_node().id)) out.emplace_back(std::move(l));
        return Value(std::move(out));
    }
    if (e.name == "keys") {
        std::vector<std::string> keys;
        if (a.is_node()) {
            keys = ctx.txn.property_keys(a.as_node().id);
        } else if (a.is_edge()) {
            keys = ctx.txn.edge_property_keys(a.as_edge().id);
        } else {
            type_error("keys() needs a node or relationship", a);
        }
        std::sort(keys.begin(), keys.end());
        return Value(List(keys.begin(), keys.end()));
    }
    if (e.name == "type") {
        if (!a.is_edge()) type_error("type() needs a relationship", a);
        const auto ev = ctx.txn.edge(a.as_edge().id);
        return Value(ctx.txn.store().rel_types().name(ev.type));
    }
    if (e.name == "id") {
        if (a.is_edge()) return Value(static_cast<std::int64_t>(a.as_edge().id));
        return eval_property(a, std::string(GraphStore::kIdKey), ctx);
    }
    throw QueryError(QueryErrc::UnsupportedConstruct, e.name + "() outside a projection");
}

Value eval_in(const Value& x, const Value& list) {
    if (list.is_null()) return {};
    if (!list.is_list()) type_error("IN needs a list", list);
    const auto& items = list.as_list();
    if (items.empty()) return Value(false);
    if (x.is_null()) return {};
    bool saw_null = false;
    for (const auto& item : items) {
        const Value eq = equals(x, item);
        if (eq.is_null()) {
            saw_null = true;
        } else if (eq.as_bool()) {
            return Value(true);
        }
    }
    return saw_null ? Value() : Value(false);
}

Value eval_add(const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return {};
    if (a.is_list() || b.is_list()) {
        List out;
        if (a.is_list()) {
            out = a.as_list();
        } else {
            out.push_back(a);
        }
        if (b.is_list()) {
            const auto& bl = b.as_list();
            out.insert(out.end(), bl.begin(), bl.end());
        } else {
            out.push_back(b);
        }
        return Value(std::move(out));
    }
    if (a.is_int() && b.is_int()) return Value(a.as_int() + b.as_int());
    if (a.is_number() && b.is_number()) return Value(a.as_number() + b.as_number());
    if (a.is_string() && b.is_string()) return Value(a.as_string() + b.as_string());
    throw QueryError(QueryErrc::TypeMismatch,
                     std::string("cannot add ") + a.type_name() + " and " + b.type_name());
}

Value eval_subscript(const Value& c, const Value& idx) {
    if (c.is_null() || idx.is_null()) return {};
    if (!idx.is_int()) type_error("subscript needs an integer", idx);
    std::int64_t i = idx.as_int();
    auto pick = [&](std::size_t n) -> std::optional<std::size_t> {
        const auto sn = static_cast<std::int64_t>(n);
        if (i < 0) i += sn;
        if (i < 0 || i >= sn) return std::nullopt;
        return static_cast<std::size_t>(i);
    };
    if (c.is_list()) {
        auto p = pick(c.as_list().size());
        return p ? c.as_list()[*p] : Value();
    }
    if (c.is_vector()) {
        auto p = pick(c.as_vector().size());
        return p ? Value(static_cast<double>(c.as_vector()[*p])) : Value();
    }
    type_error("subscript needs a list", c);
}

Value eval(const CExpr& e, Row& row, Context& ctx) {
    switch (e.kind) {
        case ExprKind::Literal: return e.literal;
        case ExprKind::Param: return ctx.plan.params.at(e.name);
        case ExprKind::Variable: return row[static_cast<std::size_t>(e.slot)];
        case ExprKind::Property: return eval_property(eval(e.args[0], row, ctx), e.name, ctx);
        case ExprKind::Subscript: return eval_subscript(eval(e.args[0], row, ctx), eval(e.args[1], row, ctx));
        case ExprKind::ListLit: {
            List out;
            out.reserve(e.args.size());
            for (const auto& a : e.args) out.push_back(eval(a, row, ctx));
            return Value(std::move(out));
        }
        case ExprKind::Call: return eval_call(e, row, ctx);
        case ExprKind::Reduce: {
            Value acc = eval(e.args[0], row, ctx);
            const Value list = eval(e.args[1], row, ctx);
            if (list.is_null()) return {};
            if (!list.is_list()) type_error("reduce needs a list", list);
            for (const auto& item : list.as_list()) {
                row[static_cast<std::size_t>(e.slot)] = acc;
                row[static_cast<std::size_t>(e.iter_slot)] = item;
                acc = eval(e.args[2], row, ctx);
            }
            return acc;
        }
        case ExprKind::In: return eval_in(eval(e.args[0], row, ctx), eval(e.args[1], row, ctx));
        case ExprKind::Eq: return equals(eval(e.args[0], row, ctx), eval(e.args[1], row, ctx));
        case ExprKind::Neq: {
            const Value eq = equals(eval(e.args[0], row, ctx), eval(e.args[1], row, ctx));
            return eq.is_null() ? eq : Value(!eq.as_bool());
        }
        case ExprKind::Not: {
            const Value v = truth(eval(e.args[0], row, ctx));
            return v.is_null() ? v : Value(!v.as_bool());
        }
        case ExprKind::And: {
            const Value a = truth(eval(e.args[0], row, ctx));
            if (a.is_bool() && !a.as_bool()) return a;
            const Value b = truth(eval(e.args[1], row, ctx));
            if (b.is_bool() && !b.as_bool()) return b;
            return a.is_null() || b.is_null() ? Value() : Value(true);
        }
        case ExprKind::Add: return eval_add(eval(e.args[0], row, ctx), eval(e.args[1], row, ctx));
        case ExprKind::HasLabel: {
            const Value v = eval(e.args[0], row, ctx);
            if (v.is_null()) return v;
            if (!v.is_node()) type_error("label test needs a node", v);
            return Value(ctx.txn.has_label(v.as_node().id, e.name));
        }
    }
    return {};
}

bool passes(const CExpr& pred, Row& row, Context& ctx) {
    const Value v = truth(eval(pred, row, ctx));
    return v.is_bool() && v.as_bool();
}

// ------------------------------------------------------------------ cursors

class Cursor {
public:
    Cursor(const PlanOp& op, Context& ctx) : op_(op), ctx_(ctx) {}
    virtual ~Cursor() = default;

    bool pull(Row& row) {
        auto& st = ctx_.stats[static_cast<std::size_t>(op_.id)];
        const auto before = ctx_.txn.counters().db_hits;
        bool ok;
        try {
            ok = produce(row);
        } catch (const StoreError& e) {
            st.inclusive_hits += ctx_.txn.counters().db_hits - before;
            throw ExecutionError(op_.id, e.what(), e.code());
        }
        st.inclusive_hits += ctx_.txn.counters().db_hits - before;
        if (ok) ++st.rows;
        return ok;
    }

    /// Rewinds for the next Apply iteration.
    void reset() {
        reset_self();
        for (auto& c : children_) c->reset();
    }

    std::vector<std::unique_ptr<Cursor>> children_;

protected:
    virtual bool produce(Row& row) = 0;
    virtual void reset_self() {}

    Row fresh_row() const { return Row(static_cast<std::size_t>(ctx_.plan.slot_count)); }
    Cursor& child(std::size_t i = 0) { return *children_[i]; }

    const PlanOp& op_;
    Context& ctx_;
};

/// Memory held by one operator's buffered rows.
class Held {
public:
    explicit Held(MemoryMeter& m) : m_(m) {}
    ~Held() { release(); }
    void add(std::size_t n) {
        bytes_ += n;
        m_.add(static_cast<std::int64_t>(n));
    }
    void release() {
        m_.sub(static_cast<std::int64_t>(bytes_));
        bytes_ = 0;
    }

private:
    MemoryMeter& m_;
    std::size_t bytes_ = 0;
};

class SeekCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        if (!ready_) {
            ready_ = true;
            Row empty = fresh_row();
            const Value v = eval(op_.values, empty, ctx_);
            std::vector<PropertyValue> keys;
            auto add = [&](const Value& x) {
                if (auto p = to_property_value(x)) keys.push_back(std::move(*p));
            };
            if (v.is_list()) {
                for (const auto& x : v.as_list()) add(x);
            } else {
                add(v);
            }
            ids_ = ctx_.txn.node_index_seek(op_.label, op_.key, keys);
        }
        if (pos_ >= ids_.size()) return false;
        row = fresh_row();
        row[static_cast<std::size_t>(op_.slot)] = NodeRef{ids_[pos_++]};
        return true;
    }
    void reset_self() override {
        ready_ = false;
        pos_ = 0;
        ids_.clear();
    }

private:
    bool ready_ = false;
    std::size_t pos_ = 0;
    std::vector<NodeId> ids_;
};

class ScanCursor final : public Cursor {
public:
    ScanCursor(const PlanOp& op, Context& ctx) : Cursor(op, ctx) {
        if (op.kind == OpKind::NodeByLabelScan) label_ = ctx.txn.store().labels().find(op.label);
    }

protected:
    bool produce(Row& row) override {
        const auto n = ctx_.txn.node_count();
        while (next_ < n) {
            const NodeId id = next_++;
            bool keep = true;
            if (op_.kind == OpKind::NodeByLabelScan) {
                keep = label_ && ctx_.txn.has_label(id, *label_);
                if (!label_) ctx_.txn.charge(1);
            } else {
                ctx_.txn.node(id);
            }
            if (!keep) continue;
            row = fresh_row();
            row[static_cast<std::size_t>(op_.slot)] = NodeRef{id};
            return true;
        }
        return false;
    }
    void reset_self() override { next_ = 0; }

private:
    std::optional<std::uint32_t> label_;
    NodeId next_ = 0;
};

class ArgumentCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        if (done_) return false;
        done_ = true;
        row = op_.argument < 0 ? fresh_row() : ctx_.arguments[static_cast<std::size_t>(op_.argument)];
        return true;
    }
    void reset_self() override { done_ = false; }

private:
    bool done_ = false;
};

class ExpandOpCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        for (;;) {
            if (edges_) {
                EdgeView e;
                if (edges_->next(e)) {
                    row = input_;
                    row[static_cast<std::size_t>(op_.rel_slot)] = EdgeRef{e.id};
                    row[static_cast<std::size_t>(op_.to_slot)] = NodeRef{e.neighbour};
                    return true;
                }
                edges_.reset();
            }
            if (!child().pull(input_)) return false;
            const Value& from = input_[static_cast<std::size_t>(op_.from_slot)];
            if (from.is_null()) continue;
            if (!from.is_node()) type_error("expand needs a node", from);
            edges_.emplace(ctx_.txn.expand(from.as_node().id, op_.dir, op_.rel_type));
        }
    }
    void reset_self() override { edges_.reset(); }

private:
    Row input_;
    std::optional<ExpandCursor> edges_;
};

class FilterCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        while (child().pull(row)) {
            if (passes(op_.predicate, row, ctx_)) return true;
        }
        return false;
    }
};

class OptionalCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        if (done_) return false;
        if (child().pull(row)) {
            matched_ = true;
            return true;
        }
        done_ = true;
        if (matched_) return false;
        row = ctx_.arguments[static_cast<std::size_t>(op_.argument)];
        for (int s : op_.null_slots) row[static_cast<std::size_t>(s)] = Value();
        return true;
    }
    void reset_self() override {
        matched_ = false;
        done_ = false;
    }

private:
    bool matched_ = false;
    bool done_ = false;
};

class ApplyCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        for (;;) {
            if (!active_) {
                Row outer;
                if (!child(0).pull(outer)) return false;
                ctx_.arguments[static_cast<std::size_t>(op_.argument)] = std::move(outer);
                child(1).reset();
                active_ = true;
            }
            if (child(1).pull(row)) return true;
            active_ = false;
        }
    }
    void reset_self() override { active_ = false; }

private:
    bool active_ = false;
};

class ProjectionCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        if (!child().pull(row)) return false;
        for (const auto& [slot, expr] : op_.projections) row[static_cast<std::size_t>(slot)] = eval(expr, row, ctx_);
        return true;
    }
};

class UnwindCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        for (;;) {
            if (pos_ < items_.size()) {
                row = input_;
                row[static_cast<std::size_t>(op_.slot)] = items_[pos_++];
                return true;
            }
            if (!child().pull(input_)) return false;
            const Value v = eval(op_.values, input_, ctx_);
            items_.clear();
            pos_ = 0;
            if (v.is_list()) {
                items_ = v.as_list();
            } else if (!v.is_null()) {
                items_.push_back(v);
            }
        }
    }
    void reset_self() override {
        items_.clear();
        pos_ = 0;
    }

private:
    Row input_;
    List items_;
    std::size_t pos_ = 0;
};

class AggregateCursor final : public Cursor {
public:
    AggregateCursor(const PlanOp& op, Context& ctx) : Cursor(op, ctx), held_(ctx.mem) {}

protected:
    struct AggState {
        std::int64_t count = 0;
        List items;
        std::unordered_set<Value, ValueHash> seen;
    };
    struct Group {
        Row keys;
        std::vector<AggState> aggs;
    };

    bool produce(Row& row) override {
        if (!ready_) consume();
        if (pos_ >= groups_.size()) return false;
        const Group& g = groups_[pos_++];
        row = fresh_row();
        for (std::size_t i = 0; i < op_.projections.size(); ++i) {
            row[static_cast<std::size_t>(op_.projections[i].first)] = g.keys[i];
        }
        for (std::size_t i = 0; i < op_.aggregates.size(); ++i) {
            const auto& a = op_.aggregates[i];
            const auto& st = g.aggs[i];
            row[static_cast<std::size_t>(a.slot)] = a.fn == "count" ? Value(st.count) : Value(st.items);
        }
        return true;
    }
    void reset_self() override {
        ready_ = false;
        pos_ = 0;
        groups_.clear();
        index_.clear();
        held_.release();
    }

private:
    void consume() {
        ready_ = true;
        Row in;
        while (child().pull(in)) {
            Row keys;
            keys.reserve(op_.projections.size());
            for (const auto& [slot, expr] : op_.projections) keys.push_back(eval(expr, in, ctx_));
            auto it = index_.find(keys);
            std::size_t gi;
            if (it == index_.end()) {
                gi = groups_.size();
                held_.add(2 * row_footprint(keys));
                index_.emplace(keys, gi);
                groups_.push_back(Group{std::move(keys), std::vector<AggState>(op_.aggregates.size())});
            } else {
                gi = it->second;
            }
            for (std::size_t i = 0; i < op_.aggregates.size(); ++i) {
                const auto& a = op_.aggregates[i];
                auto& st = groups_[gi].aggs[i];
                Value v = eval(a.arg, in, ctx_);
                if (v.is_null()) continue;
                if (a.distinct) {
                    if (!st.seen.insert(v).second) continue;
                    held_.add(v.footprint());
                }
                if (a.fn == "count") {
                    ++st.count;
                } else {
                    held_.add(v.footprint());
                    st.items.push_back(std::move(v));
                }
            }
        }
        // without grouping keys an empty input still yields one row
        if (groups_.empty() && op_.projections.empty()) {
            groups_.push_back(Group{{}, std::vector<AggState>(op_.aggregates.size())});
        }
    }

    Held held_;
    bool ready_ = false;
    std::size_t pos_ = 0;
    std::vector<Group> groups_;
    std::unordered_map<Row, std::size_t, ValuesHash> index_;
};

class DistinctCursor final : public Cursor {
public:
    DistinctCursor(const PlanOp& op, Context& ctx) : Cursor(op, ctx), held_(ctx.mem) {}

protected:
    bool produce(Row& row) override {
        while (child().pull(row)) {
            Row key;
            key.reserve(op_.key_slots.size());
            for (int s : op_.key_slots) key.push_back(row[static_cast<std::size_t>(s)]);
            const auto fp = row_footprint(key);
            if (seen_.insert(std::move(key)).second) {
                held_.add(fp);
                return true;
            }
        }
        return false;
    }
    void reset_self() override {
        seen_.clear();
        held_.release();
    }

private:
    Held held_;
    std::unordered_set<Row, ValuesHash> seen_;
};

int compare_keys(const std::vector<SortKey>& keys, const Row& a, const Row& b) {
    for (const auto& k : keys) {
        const auto s = static_cast<std::size_t>(k.slot);
        int c = compare_for_sort(a[s], b[s]);
        if (k.descending) c = -c;
        if (c != 0) return c;
    }
    return 0;
}

class SortCursor final : public Cursor {
public:
    SortCursor(const PlanOp& op, Context& ctx) : Cursor(op, ctx), held_(ctx.mem) {}

protected:
    bool produce(Row& row) override {
        if (!ready_) {
            ready_ = true;
            Row in;
            while (child().pull(in)) {
                held_.add(row_footprint(in));
                rows_.push_back(std::move(in));
            }
            std::stable_sort(rows_.begin(), rows_.end(),
                             [&](const Row& a, const Row& b) { return compare_keys(op_.sort, a, b) < 0; });
        }
        if (pos_ >= rows_.size()) return false;
        row = std::move(rows_[pos_++]);
        return true;
    }
    void reset_self() override {
        ready_ = false;
        pos_ = 0;
        rows_.clear();
        held_.release();
    }

private:
    Held held_;
    bool ready_ = false;
    std::size_t pos_ = 0;
    std::vector<Row> rows_;
};

/// Keeps the `limit` smallest rows in a bounded max-heap; ties go to the
/// earlier row.
class TopCursor final : public Cursor {
public:
    TopCursor(const PlanOp& op, Context& ctx) : Cursor(op, ctx), held_(ctx.mem) {}

protected:
    struct Entry {
        Row row;
        std::uint64_t seq;
    };

    bool produce(Row& row) override {
        if (!ready_) fill();
        if (pos_ >= out_.size()) return false;
        row = std::move(out_[pos_++].row);
        return true;
    }
    void reset_self() override {
        ready_ = false;
        pos_ = 0;
        out_.clear();
        held_.release();
    }

private:
    bool less(const Entry& a, const Entry& b) const {
        const int c = compare_keys(op_.sort, a.row, b.row);
        return c != 0 ? c < 0 : a.seq < b.seq;
    }

    void fill() {
        ready_ = true;
        auto cmp = [this](const Entry& a, const Entry& b) { return less(a, b); };
        std::vector<Entry> heap;
        std::uint64_t seq = 0;
        Row in;
        while (child().pull(in)) {
            Entry e{std::move(in), seq++};
            if (heap.size() < op_.limit) {
                held_.add(row_footprint(e.row));
                heap.push_back(std::move(e));
                std::push_heap(heap.begin(), heap.end(), cmp);
            } else if (!heap.empty() && less(e, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), cmp);
                heap.back() = std::move(e);
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
            in = Row();
        }
        std::sort_heap(heap.begin(), heap.end(), cmp);
        out_ = std::move(heap);
    }

    Held held_;
    bool ready_ = false;
    std::size_t pos_ = 0;
    std::vector<Entry> out_;
};

class LimitCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        if (taken_ >= op_.limit) return false;
        if (!child().pull(row)) return false;
        ++taken_;
        return true;
    }
    void reset_self() override { taken_ = 0; }

private:
    std::uint64_t taken_ = 0;
};

class ProduceCursor final : public Cursor {
public:
    using Cursor::Cursor;

protected:
    bool produce(Row& row) override {
        if (!child().pull(in_)) return false;
        row.resize(op_.outputs.size());
        for (std::size_t i = 0; i < op_.outputs.size(); ++i) row[i] = eval(op_.outputs[i], in_, ctx_);
        return true;
    }

private:
    Row in_;
};

std::unique_ptr<Cursor> build(const PlanOp& op, Context& ctx) {
    std::unique_ptr<Cursor> c;
    switch (op.kind) {
        case OpKind::NodeIndexSeek: c = std::make_unique<SeekCursor>(op, ctx); break;
        case OpKind::AllNodesScan:
        case OpKind::NodeByLabelScan: c = std::make_unique<ScanCursor>(op, ctx); break;
        case OpKind::Argument: c = std::make_unique<ArgumentCursor>(op, ctx); break;
        case OpKind::Expand: c = std::make_unique<ExpandOpCursor>(op, ctx); break;
        case OpKind::Filter: c = std::make_unique<FilterCursor>(op, ctx); break;
        case OpKind::Optional: c = std::make_unique<OptionalCursor>(op, ctx); break;
        case OpKind::Apply: c = std::make_unique<ApplyCursor>(op, ctx); break;
        case OpKind::Projection: c = std::make_unique<ProjectionCursor>(op, ctx); break;
        case OpKind::Unwind: c = std::make_unique<UnwindCursor>(op, ctx); break;
        case OpKind::Aggregate: c = std::make_unique<AggregateCursor>(op, ctx); break;
        case OpKind::Distinct: c = std::make_unique<DistinctCursor>(op, ctx); break;
        case OpKind::Sort: c = std::make_unique<SortCursor>(op, ctx); break;
        case OpKind::Top: c = std::make_unique<TopCursor>(op, ctx); break;
        case OpKind::Limit: c = std::make_unique<LimitCursor>(op, ctx); break;
        case OpKind::ProduceResults: c = std::make_unique<ProduceCursor>(op, ctx); break;
    }
    for (const auto& ch : op.children) c->children_.push_back(build(*ch, ctx));
    return c;
}

void collect_depths(const PlanOp& op, int depth, std::vector<int>& out) {
    out[static_cast<std::size_t>(op.id)] = depth;
    for (std::size_t i = 0; i < op.children.size(); ++i) {
        collect_depths(*op.children[i], depth + (op.kind == OpKind::Apply && i == 1 ? 1 : 0), out);
    }
}

} // namespace

struct ResultStream::Impl {
    Impl(const Plan& p, ReadTxn& t, ExecOptions o)
        : ctx{p, t, make_rng(o.seed), {}, std::vector<Row>(static_cast<std::size_t>(p.argument_count)), {}},
          start(t.counters()) {
        const auto ops = p.operators();
        ctx.stats.resize(ops.size());
        root = build(*p.root, ctx);
    }

    Context ctx;
    AccessCounters start;
    std::unique_ptr<Cursor> root;
    bool done = false;
};

ResultStream::ResultStream(const Plan& plan, ReadTxn& txn, ExecOptions opts)
    : impl_(std::make_unique<Impl>(plan, txn, opts)) {}
ResultStream::~ResultStream() = default;
ResultStream::ResultStream(ResultStream&&) noexcept = default;

const std::vector<std::string>& ResultStream::columns() const { return impl_->ctx.plan.columns(); }

bool ResultStream::next(std::vector<Value>& out) {
    if (impl_->done) return false;
    if (!impl_->root->pull(out)) {
        impl_->done = true;
        return false;
    }
    return true;
}

Profile ResultStream::profile() const {
    const Plan& plan = impl_->ctx.plan;
    const auto ops = plan.operators();
    std::vector<int> depth(ops.size(), 0);
    collect_depths(*plan.root, 0, depth);
    Profile p;
    for (const PlanOp* op : ops) {
        const auto& st = impl_->ctx.stats[static_cast<std::size_t>(op->id)];
        std::uint64_t self = st.inclusive_hits;
        for (const auto& c : op->children) self -= impl_->ctx.stats[static_cast<std::size_t>(c->id)].inclusive_hits;
        p.operators.push_back(OperatorProfile{op->id, op_name(op->kind), op->details, op->estimated_rows, st.rows, self,
                                              depth[static_cast<std::size_t>(op->id)]});
    }
    const auto& now = impl_->ctx.txn.counters();
    p.total_db_hits = now.db_hits - impl_->start.db_hits;
    p.page_cache_hits = now.page_cache_hits - impl_->start.page_cache_hits;
    p.page_cache_misses = now.page_cache_misses - impl_->start.page_cache_misses;
    p.peak_allocated_bytes = static_cast<std::uint64_t>(std::max<std::int64_t>(0, impl_->ctx.mem.peak()));
    return p;
}

std::vector<const OperatorProfile*> Profile::bottom_up() const {
    std::vector<const OperatorProfile*> out;
    for (auto it = operators.rbegin(); it != operators.rend(); ++it) out.push_back(&*it);
    return out;
}

std::string Profile::render() const {
    std::vector<std::array<std::string, 6>> cells;
    cells.push_back({"Operator", "Id", "Details", "Estimated Rows", "Rows", "DB Hits"});
    for (const auto& op : operators) {
        cells.push_back({std::string(static_cast<std::size_t>(op.depth), '|') + "+" + op.name, std::to_string(op.id),
                         op.details, std::to_string(std::llround(op.estimated_rows)), std::to_string(op.rows),
                         std::to_string(op.db_hits)});
    }
    std::array<std::size_t, 6> width{};
    for (const auto& r : cells) {
        for (std::size_t i = 0; i < 6; ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream os;
    auto rule = [&] {
        os << '+';
        for (auto w : width) os << std::string(w + 2, '-') << '+';
        os << '\n';
    };
    rule();
    for (std::size_t r = 0; r < cells.size(); ++r) {
        os << '|';
        for (std::size_t i = 0; i < 6; ++i) {
            const auto& c = cells[r][i];
            const bool right = r > 0 && (i == 1 || i >= 3);
            const std::string pad(width[i] - c.size(), ' ');
            os << ' ' << (right ? pad + c : c + pad) << " |";
        }
        os << '\n';
        if (r == 0) rule();
    }
    rule();
    os << "Total database accesses: " << total_db_hits << ", allocated memory: " << peak_allocated_bytes
       << " bytes\n";
    return os.str();
}

QueryResult run(const Plan& plan, ReadTxn& txn, ExecOptions opts) {
    ResultStream s(plan, txn, opts);
    QueryResult r;
    r.columns = s.columns();
    std::vector<Value> row;
    while (s.next(row)) r.rows.push_back(row);
    r.profile = s.profile();
    return r;
}

QueryResult run_query(GraphStore& store, std::string_view text, const Params& params, ExecOptions opts) {
    const Plan p = query::plan(query::bind(parse(text), params), store);
    auto txn = store.begin_read();
    return run(p, txn, opts);
}

} // namespace gtdb::query
