#pragma once

#include <optional>
#include <set>
#include <string>

#include "gtdb/common/error.hpp"

namespace gtdb::query {

enum class QueryErrc : std::uint8_t {
    Syntax,
    MissingParameter,
    TypeMismatch,
    UnboundVariable,
    UnsupportedConstruct,
    Runtime,
};

const char* to_string(QueryErrc code);

class QueryError : public Error {
public:
    QueryError(QueryErrc code, const std::string& msg)
        : Error(std::string(to_string(code)) + ": " + msg), code_(code) {}

    QueryErrc code() const noexcept { return code_; }

private:
    QueryErrc code_;
};

class SyntaxError : public QueryError {
public:
    SyntaxError(int line, int column, std::set<std::string> expected, const std::string& found);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::set<std::string>& expected() const noexcept { return expected_; }

private:
    int line_;
    int column_;
    std::set<std::string> expected_;
};

class MissingParameter : public QueryError {
public:
    explicit MissingParameter(std::string name)
        : QueryError(QueryErrc::MissingParameter, "$" + name), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// A failure while executing a plan; `operator_id` names the operator that
/// raised it. Store failures keep their code.
class ExecutionError : public QueryError {
public:
    ExecutionError(int operator_id, const std::string& msg, std::optional<StoreErrc> store_code = std::nullopt)
        : QueryError(QueryErrc::Runtime, "operator " + std::to_string(operator_id) + ": " + msg),
          operator_id_(operator_id), store_code_(store_code) {}

    int operator_id() const noexcept { return operator_id_; }
    std::optional<StoreErrc> store_code() const noexcept { return store_code_; }

private:
    int operator_id_;
    std::optional<StoreErrc> store_code_;
};

} // namespace gtdb::query
