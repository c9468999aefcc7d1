#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gtdb/query/binder.hpp"
#include "gtdb/storage/graph_store.hpp"

namespace gtdb::query {

enum class OpKind : std::uint8_t {
    NodeIndexSeek,
    AllNodesScan,
    NodeByLabelScan,
    Argument,
    Expand,
    Filter,
    Optional,
    Apply,
    Projection,
    Unwind,
    Aggregate,
    Distinct,
    Sort,
    Top,
    Limit,
    ProduceResults,
};

const char* op_name(OpKind k);

/// An expression with variables resolved to row slots.
struct CExpr {
    ExprKind kind = ExprKind::Literal;
    Value literal;
    std::string name;
    int slot = -1;      // Variable; Reduce accumulator
    int iter_slot = -1; // Reduce
    bool distinct = false;
    std::vector<CExpr> args;
};

struct SortKey {
    int slot = -1;
    bool descending = false;
};

struct AggSpec {
    std::string fn; // count | collect
    bool distinct = false;
    CExpr arg;
    int slot = -1;
};

struct PlanOp {
    OpKind kind = OpKind::ProduceResults;
    int id = -1;
    std::string details;
    double estimated_rows = 0;
    /// Unary operators use children[0]; Apply has {outer, inner}.
    std::vector<std::unique_ptr<PlanOp>> children;

    int slot = -1;          // scans, seek, Unwind target
    std::string label;      // NodeIndexSeek, NodeByLabelScan
    std::string key;        // NodeIndexSeek
    CExpr values;           // NodeIndexSeek value list, Unwind list
    int from_slot = -1;     // Expand
    int rel_slot = -1;
    int to_slot = -1;
    Direction dir = Direction::Out;
    std::optional<std::string> rel_type;
    CExpr predicate;                              // Filter
    std::vector<std::pair<int, CExpr>> projections; // Projection; Aggregate grouping keys
    std::vector<AggSpec> aggregates;              // Aggregate
    std::vector<int> key_slots;                   // Distinct
    std::vector<SortKey> sort;                    // Sort, Top
    std::uint64_t limit = 0;                      // Top, Limit
    std::vector<int> null_slots;                  // Optional
    int argument = -1;                            // Argument, Optional, Apply: shared argument register
    std::vector<std::string> columns;             // ProduceResults
    std::vector<CExpr> outputs;                   // ProduceResults
};

/// An immutable physical plan. Executions never mutate it, so one plan may be
/// run concurrently on many read transactions.
struct Plan {
    std::unique_ptr<PlanOp> root;
    int slot_count = 0;
    int argument_count = 0;
    std::vector<std::string> slot_names;
    Params params;

    const std::vector<std::string>& columns() const { return root->columns; }
    /// Operators ordered by id (root first).
    std::vector<const PlanOp*> operators() const;
    /// Operator names in execution order, leaves first, e.g.
    /// NodeIndexSeek, Argument, Expand(All), ..., ProduceResults.
    std::vector<std::string> bottom_up() const;
    /// Tree rendering with ids, details and estimates.
    std::string explain() const;
};

/// Compiles a bound query. Throws QueryError(UnsupportedConstruct) for
/// shapes outside the operator set, including any plan that would need a
/// cross product of pattern variables.
Plan plan(const BoundQuery& q, const GraphStore& store);

} // namespace gtdb::query
