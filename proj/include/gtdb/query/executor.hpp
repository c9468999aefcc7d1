#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gtdb/query/plan.hpp"

namespace gtdb::query {

struct ExecOptions {
    /// Seeds the query's rand() stream. Same seed, same store state: same rows
    /// in the same order.
    std::uint64_t seed = 0;
};

struct OperatorProfile {
    int id = -1;
    std::string name;
    std::string details;
    double estimated_rows = 0;
    std::uint64_t rows = 0;
    std::uint64_t db_hits = 0; // charged by this operator alone
    int depth = 0;             // Apply's inner branch is one level deeper

    friend bool operator==(const OperatorProfile&, const OperatorProfile&) = default;
};

struct Profile {
    std::vector<OperatorProfile> operators; // by id, root first
    std::uint64_t total_db_hits = 0;
    std::uint64_t peak_allocated_bytes = 0;
    std::uint64_t page_cache_hits = 0;
    std::uint64_t page_cache_misses = 0;

    const OperatorProfile& op(int id) const { return operators.at(static_cast<std::size_t>(id)); }
    /// Operators in execution order, leaves first.
    std::vector<const OperatorProfile*> bottom_up() const;
    /// Table with Operator, Id, Details, Estimated Rows, Rows, DB Hits and
    /// the totals footer.
    std::string render() const;

    /// Page-cache counters depend on what earlier queries left cached, so
    /// they take no part in comparing profiles.
    friend bool operator==(const Profile& a, const Profile& b) {
        return a.operators == b.operators && a.total_db_hits == b.total_db_hits &&
               a.peak_allocated_bytes == b.peak_allocated_bytes;
    }
};

/// Pull-based execution of a plan on one read transaction. Rows are produced
/// on demand; an abandoned stream simply stops pulling.
class ResultStream {
public:
    ResultStream(const Plan& plan, ReadTxn& txn, ExecOptions opts = {});
    ~ResultStream();
    ResultStream(ResultStream&&) noexcept;

    const std::vector<std::string>& columns() const;
    /// Fills `out` with the next result row; false once exhausted.
    /// Store failures surface as ExecutionError carrying the operator id.
    bool next(std::vector<Value>& out);
    /// Counters observed so far; complete once next() has returned false.
    Profile profile() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct QueryResult {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
    Profile profile;
};

/// Drains a plan.
QueryResult run(const Plan& plan, ReadTxn& txn, ExecOptions opts = {});

/// parse + bind + plan + run on a fresh read transaction.
QueryResult run_query(GraphStore& store, std::string_view text, const Params& params = {}, ExecOptions opts = {});

/// Stored form of a query value, when it has one (strings, integers, floats,
/// float vectors).
std::optional<PropertyValue> to_property_value(const Value& v);

} // namespace gtdb::query
