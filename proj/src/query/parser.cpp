#include "gtdb/query/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>

#include "gtdb/query/errors.hpp"

namespace gtdb::query {

namespace {

enum class Tok : std::uint8_t {
    End,
    Ident,
    Int,
    Float,
    String,
    Param,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    Pipe,
    Eq,
    Neq,
    Plus,
    Minus,
    Arrow,  // ->
    LArrow, // <-
    Semicolon,
};

struct Token {
    Tok kind = Tok::End;
    std::string text; // identifier / string contents / param name / number text
    bool quoted = false;
    int line = 1;
    int col = 1;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::Float: return "float";
        case Tok::String: return "string";
        case Tok::Param: return "parameter";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Colon: return "':'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::Pipe: return "'|'";
        case Tok::Eq: return "'='";
        case Tok::Neq: return "'<>'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Arrow: return "'->'";
        case Tok::LArrow: return "'<-'";
        case Tok::Semicolon: return "';'";
    }
    return "?";
}

const std::set<std::string>& keywords() {
    static const std::set<std::string> k = {"MATCH", "OPTIONAL", "WHERE", "WITH",  "DISTINCT", "ORDER",
                                            "BY",    "ASC",      "ASCENDING", "DESC", "DESCENDING",
                                            "LIMIT", "UNWIND",   "AS",    "RETURN", "IN",  "NOT",
                                            "AND",   "NULL",     "TRUE",  "FALSE"};
    return k;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= s_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = s_[pos_];
            if (ident_start(c)) {
                const auto b = pos_;
                while (pos_ < s_.size() && ident_char(s_[pos_])) advance();
                t.kind = Tok::Ident;
                t.text = std::string(s_.substr(b, pos_ - b));
            } else if (c == '`') {
                advance();
                t.kind = Tok::Ident;
                t.quoted = true;
                for (;;) {
                    if (pos_ >= s_.size()) fail(t, "unterminated quoted identifier");
                    if (s_[pos_] == '`') {
                        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '`') {
                            t.text += '`';
                            advance();
                            advance();
                            continue;
                        }
                        advance();
                        break;
                    }
                    t.text += s_[pos_];
                    advance();
                }
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_number(t);
            } else if (c == '\'' || c == '"') {
                lex_string(t, c);
            } else if (c == '$') {
                advance();
                const auto b = pos_;
                while (pos_ < s_.size() && ident_char(s_[pos_])) advance();
                if (b == pos_) fail(t, "parameter name after '$'");
                t.kind = Tok::Param;
                t.text = std::string(s_.substr(b, pos_ - b));
            } else {
                lex_punct(t, c);
            }
            out.push_back(std::move(t));
        }
    }

private:
    [[noreturn]] void fail(const Token& t, const std::string& what) {
        throw SyntaxError(t.line, t.col, {what}, pos_ < s_.size() ? "'" + std::string(1, s_[pos_]) + "'" : "end of input");
    }

    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
            } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
                advance();
                advance();
                while (pos_ < s_.size() && !(s_[pos_] == '*' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/')) advance();
                if (pos_ < s_.size()) {
                    advance();
                    advance();
                }
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t) {
        const auto b = pos_;
        bool is_float = false;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
        if (pos_ + 1 < s_.size() && s_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
            is_float = true;
            advance();
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                is_float = true;
                while (pos_ < p) advance();
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
            }
        }
        t.kind = is_float ? Tok::Float : Tok::Int;
        t.text = std::string(s_.substr(b, pos_ - b));
    }

    void lex_string(Token& t, char quote) {
        advance();
        t.kind = Tok::String;
        for (;;) {
            if (pos_ >= s_.size()) fail(t, "closing quote");
            const char c = s_[pos_];
            if (c == quote) {
                advance();
                return;
            }
            if (c == '\\' && pos_ + 1 < s_.size()) {
                advance();
                const char e = s_[pos_];
                switch (e) {
                    case 'n': t.text += '\n'; break;
                    case 't': t.text += '\t'; break;
                    default: t.text += e; break;
                }
                advance();
                continue;
            }
            t.text += c;
            advance();
        }
    }

    void lex_punct(Token& t, char c) {
        const char n = pos_ + 1 < s_.size() ? s_[pos_ + 1] : '\0';
        auto one = [&](Tok k) {
            t.kind = k;
            advance();
        };
        auto two = [&](Tok k) {
            t.kind = k;
            advance();
            advance();
        };
        switch (c) {
            case '(': return one(Tok::LParen);
            case ')': return one(Tok::RParen);
            case '[': return one(Tok::LBracket);
            case ']': return one(Tok::RBracket);
            case ':': return one(Tok::Colon);
            case ',': return one(Tok::Comma);
            case '.': return one(Tok::Dot);
            case '|': return one(Tok::Pipe);
            case '=': return one(Tok::Eq);
            case '+': return one(Tok::Plus);
            case ';': return one(Tok::Semicolon);
            case '-': return n == '>' ? two(Tok::Arrow) : one(Tok::Minus);
            case '<':
                if (n == '>') return two(Tok::Neq);
                if (n == '-') return two(Tok::LArrow);
                break;
            default: break;
        }
        throw SyntaxError(t.line, t.col, {"token"}, "'" + std::string(1, c) + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct FnSpec {
    const char* name;
    std::size_t arity;
    bool allows_distinct;
};

constexpr FnSpec kFunctions[] = {
    {"rand", 0, false}, {"labels", 1, false}, {"keys", 1, false},  {"type", 1, false},
    {"count", 1, true}, {"collect", 1, true}, {"id", 1, false},
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    QueryAst query() {
        QueryAst q;
        do {
            q.clauses.push_back(clause());
        } while (!at_end_of_query());
        accept(Tok::Semicolon);
        expect(Tok::End);
        if (q.clauses.back().kind != ClauseKind::Return) {
            const auto& t = t_[i_ - 1];
            throw SyntaxError(t.line, t.col, {"RETURN"}, "end of query");
        }
        return q;
    }

private:
    const Token& cur() const { return t_[i_]; }

    void bump() {
        ++i_;
        expected_.clear();
    }

    bool check(Tok k) {
        if (cur().kind == k) return true;
        expected_.insert(tok_name(k));
        return false;
    }

    bool check_kw(const char* kw) {
        if (cur().kind == Tok::Ident && !cur().quoted && upper(cur().text) == kw) return true;
        expected_.insert(kw);
        return false;
    }

    bool accept(Tok k) {
        if (!check(k)) return false;
        bump();
        return true;
    }

    bool accept_kw(const char* kw) {
        if (!check_kw(kw)) return false;
        bump();
        return true;
    }

    [[noreturn]] void fail() {
        const auto& t = cur();
        std::string found;
        switch (t.kind) {
            case Tok::End: found = "end of input"; break;
            case Tok::Ident: found = "'" + t.text + "'"; break;
            case Tok::String: found = "string '" + t.text + "'"; break;
            case Tok::Param: found = "$" + t.text; break;
            case Tok::Int:
            case Tok::Float: found = t.text; break;
            default: found = tok_name(t.kind); break;
        }
        throw SyntaxError(t.line, t.col, expected_, found);
    }

    void expect(Tok k) {
        if (!accept(k)) fail();
    }

    void expect_kw(const char* kw) {
        if (!accept_kw(kw)) fail();
    }

    bool is_keyword_token() const {
        return cur().kind == Tok::Ident && !cur().quoted && keywords().count(upper(cur().text));
    }

    std::string identifier() {
        if (cur().kind == Tok::Ident && (cur().quoted || !keywords().count(upper(cur().text)))) {
            std::string s = cur().text;
            bump();
            return s;
        }
        expected_.insert("identifier");
        fail();
    }

    bool at_end_of_query() {
        // both probes record what may follow a clause for error messages
        const bool semi = check(Tok::Semicolon);
        const bool end = check(Tok::End);
        return semi || end;
    }

    Clause clause() {
        Clause c;
        if (accept_kw("OPTIONAL")) {
            expect_kw("MATCH");
            c.kind = ClauseKind::Match;
            c.optional = true;
            match_tail(c);
        } else if (accept_kw("MATCH")) {
            c.kind = ClauseKind::Match;
            match_tail(c);
        } else if (accept_kw("WITH")) {
            c.kind = ClauseKind::With;
            c.body = projection(true);
            if (accept_kw("WHERE")) c.where = expr();
        } else if (accept_kw("UNWIND")) {
            c.kind = ClauseKind::Unwind;
            c.unwind = expr();
            expect_kw("AS");
            c.alias = identifier();
        } else if (accept_kw("RETURN")) {
            c.kind = ClauseKind::Return;
            c.body = projection(false);
        } else {
            fail();
        }
        return c;
    }

    void match_tail(Clause& c) {
        c.pattern = pattern();
        if (accept_kw("WHERE")) c.where = expr();
    }

    Pattern pattern() {
        Pattern p;
        p.nodes.push_back(node_pattern());
        for (;;) {
            RelPattern r;
            bool left = false;
            if (accept(Tok::LArrow)) {
                left = true;
            } else if (!accept(Tok::Minus)) {
                break;
            }
            if (accept(Tok::LBracket)) {
                if (cur().kind == Tok::Ident && !is_keyword_token()) r.var = identifier();
                if (accept(Tok::Colon)) r.type = schema_ref();
                expect(Tok::RBracket);
            }
            bool right = false;
            if (accept(Tok::Arrow)) {
                right = true;
            } else {
                expect(Tok::Minus);
            }
            if (left && right) {
                const auto& t = t_[i_ - 1];
                throw SyntaxError(t.line, t.col, {"'-'"}, "'->'");
            }
            r.dir = left ? RelDir::Left : (right ? RelDir::Right : RelDir::Both);
            p.rels.push_back(std::move(r));
            p.nodes.push_back(node_pattern());
        }
        return p;
    }

    NodePattern node_pattern() {
        NodePattern n;
        expect(Tok::LParen);
        if (cur().kind == Tok::Ident && !is_keyword_token()) n.var = identifier();
        while (accept(Tok::Colon)) n.labels.push_back(schema_ref());
        expect(Tok::RParen);
        return n;
    }

    SchemaRef schema_ref() {
        if (check(Tok::Param)) {
            SchemaRef r{cur().text, true};
            bump();
            return r;
        }
        return SchemaRef{identifier(), false};
    }

    ProjectionBody projection(bool is_with) {
        ProjectionBody b;
        b.distinct = accept_kw("DISTINCT");
        do {
            ProjectionItem it;
            const Token start = cur();
            it.expr = expr();
            if (accept_kw("AS")) {
                it.alias = identifier();
            } else if (is_with && it.expr->kind != ExprKind::Variable) {
                throw SyntaxError(start.line, start.col, {"AS"}, "expression without alias in WITH");
            }
            b.items.push_back(std::move(it));
        } while (accept(Tok::Comma));
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            do {
                SortItem s;
                s.expr = expr();
                if (accept_kw("DESC") || accept_kw("DESCENDING")) {
                    s.descending = true;
                } else if (!accept_kw("ASC")) {
                    accept_kw("ASCENDING");
                }
                b.order_by.push_back(std::move(s));
            } while (accept(Tok::Comma));
        }
        if (accept_kw("LIMIT")) b.limit = expr();
        return b;
    }

    // and := not (AND not)*
    ExprPtr expr() {
        ExprPtr e = not_expr();
        while (accept_kw("AND")) e = make_binary(ExprKind::And, e, not_expr());
        return e;
    }

    ExprPtr not_expr() {
        if (accept_kw("NOT")) return make_unary(ExprKind::Not, not_expr());
        return comparison();
    }

    ExprPtr comparison() {
        ExprPtr e = additive();
        if (accept(Tok::Eq)) return make_binary(ExprKind::Eq, e, additive());
        if (accept(Tok::Neq)) return make_binary(ExprKind::Neq, e, additive());
        if (accept_kw("IN")) return make_binary(ExprKind::In, e, additive());
        return e;
    }

    ExprPtr additive() {
        ExprPtr e = postfix();
        while (accept(Tok::Plus)) e = make_binary(ExprKind::Add, e, postfix());
        return e;
    }

    ExprPtr postfix() {
        ExprPtr e = primary();
        for (;;) {
            if (accept(Tok::Dot)) {
                e = make_property(e, identifier());
            } else if (accept(Tok::LBracket)) {
                auto idx = expr();
                expect(Tok::RBracket);
                e = make_binary(ExprKind::Subscript, e, idx);
            } else if (e->kind == ExprKind::Variable && accept(Tok::Colon)) {
                e = make_has_label(e, identifier());
            } else {
                return e;
            }
        }
    }

    ExprPtr number(bool negate) {
        const Token t = cur();
        bump();
        if (t.kind == Tok::Int) {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc() || p != t.text.data() + t.text.size()) {
                throw SyntaxError(t.line, t.col, {"integer"}, "out-of-range literal " + t.text);
            }
            return make_literal(Value(negate ? -v : v));
        }
        const double d = std::stod(t.text);
        return make_literal(Value(negate ? -d : d));
    }

    ExprPtr primary() {
        if (check(Tok::Int) || check(Tok::Float)) return number(false);
        if (accept(Tok::Minus)) {
            if (check(Tok::Int) || check(Tok::Float)) return number(true);
            fail();
        }
        if (check(Tok::String)) {
            auto e = make_literal(Value(cur().text));
            bump();
            return e;
        }
        if (check(Tok::Param)) {
            auto e = make_param(cur().text);
            bump();
            return e;
        }
        if (accept(Tok::LBracket)) {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::ListLit;
            if (!accept(Tok::RBracket)) {
                do {
                    e->args.push_back(expr());
                } while (accept(Tok::Comma));
                expect(Tok::RBracket);
            }
            return e;
        }
        if (accept(Tok::LParen)) {
            auto e = expr();
            expect(Tok::RParen);
            return e;
        }
        if (accept_kw("NULL")) return make_literal(Value());
        if (accept_kw("TRUE")) return make_literal(Value(true));
        if (accept_kw("FALSE")) return make_literal(Value(false));
        if (check(Tok::Ident) && !is_keyword_token()) {
            const Token t = cur();
            std::string name = identifier();
            if (!t.quoted && check(Tok::LParen)) return call(t, name);
            return make_variable(std::move(name));
        }
        expected_.insert("expression");
        fail();
    }

    ExprPtr call(const Token& t, const std::string& raw) {
        const std::string fn = lower(raw);
        expect(Tok::LParen);
        if (fn == "reduce") {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Reduce;
            e->name = identifier();
            expect(Tok::Eq);
            e->args.push_back(expr());
            expect(Tok::Comma);
            e->iter = identifier();
            expect_kw("IN");
            e->args.push_back(expr());
            expect(Tok::Pipe);
            e->args.push_back(expr());
            expect(Tok::RParen);
            return e;
        }
        const FnSpec* spec = nullptr;
        for (const auto& f : kFunctions) {
            if (fn == f.name) spec = &f;
        }
        if (!spec) throw SyntaxError(t.line, t.col, {"function name"}, "unknown function '" + raw + "'");
        bool distinct = false;
        if (spec->allows_distinct) distinct = accept_kw("DISTINCT");
        std::vector<ExprPtr> args;
        if (!accept(Tok::RParen)) {
            do {
                args.push_back(expr());
            } while (accept(Tok::Comma));
            expect(Tok::RParen);
        }
        if (args.size() != spec->arity) {
            throw SyntaxError(t.line, t.col, {std::to_string(spec->arity) + " argument(s)"},
                              std::to_string(args.size()) + " argument(s) to " + fn + "()");
        }
        return make_call(fn, std::move(args), distinct);
    }

    std::vector<Token> t_;
    std::size_t i_ = 0;
    std::set<std::string> expected_;
};

// ----------------------------------------------------------------- printing

int precedence(const Expr& e) {
    switch (e.kind) {
        case ExprKind::And: return 1;
        case ExprKind::Not: return 2;
        case ExprKind::Eq:
        case ExprKind::Neq:
        case ExprKind::In: return 3;
        case ExprKind::Add: return 4;
        default: return 6;
    }
}

std::string print_literal(const Value& v) {
    if (v.is_null()) return "null";
    if (v.is_bool()) return v.as_bool() ? "true" : "false";
    if (v.is_int()) return std::to_string(v.as_int());
    if (v.is_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.as_number());
        std::string s = buf;
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        return s;
    }
    if (v.is_string()) {
        std::string s = "'";
        for (char c : v.as_string()) {
            if (c == '\'' || c == '\\') s += '\\';
            if (c == '\n') {
                s += "\\n";
                continue;
            }
            s += c;
        }
        return s + "'";
    }
    if (v.is_list()) {
        std::string s = "[";
        const auto& l = v.as_list();
        for (std::size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + print_literal(l[i]);
        return s + "]";
    }
    return v.to_string();
}

void print_expr(std::string& out, const Expr& e, int min_prec);

void print_child(std::string& out, const ExprPtr& e, int min_prec) { print_expr(out, *e, min_prec); }

void print_expr(std::string& out, const Expr& e, int min_prec) {
    const int p = precedence(e);
    const bool paren = p < min_prec;
    if (paren) out += '(';
    switch (e.kind) {
        case ExprKind::Literal: out += print_literal(e.literal); break;
        case ExprKind::Param: out += "$" + e.name; break;
        case ExprKind::Variable: out += quote_identifier(e.name); break;
        case ExprKind::Property:
            print_child(out, e.args[0], 6);
            out += "." + quote_identifier(e.name);
            break;
        case ExprKind::Subscript:
            print_child(out, e.args[0], 6);
            out += '[';
            print_child(out, e.args[1], 0);
            out += ']';
            break;
        case ExprKind::HasLabel:
            print_child(out, e.args[0], 6);
            out += ":" + quote_identifier(e.name);
            break;
        case ExprKind::ListLit:
            out += '[';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_child(out, e.args[i], 0);
            }
            out += ']';
            break;
        case ExprKind::Call:
            out += e.name + "(";
            if (e.distinct) out += "DISTINCT ";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_child(out, e.args[i], 0);
            }
            out += ')';
            break;
        case ExprKind::Reduce:
            out += "reduce(" + quote_identifier(e.name) + " = ";
            print_child(out, e.args[0], 0);
            out += ", " + quote_identifier(e.iter) + " IN ";
            print_child(out, e.args[1], 0);
            out += " | ";
            print_child(out, e.args[2], 0);
            out += ')';
            break;
        case ExprKind::Not:
            out += "NOT ";
            print_child(out, e.args[0], 2);
            break;
        case ExprKind::And:
            print_child(out, e.args[0], 1);
            out += " AND ";
            print_child(out, e.args[1], 2);
            break;
        case ExprKind::Add:
            print_child(out, e.args[0], 4);
            out += " + ";
            print_child(out, e.args[1], 5);
            break;
        case ExprKind::Eq:
        case ExprKind::Neq:
        case ExprKind::In:
            print_child(out, e.args[0], 4);
            out += e.kind == ExprKind::Eq ? " = " : e.kind == ExprKind::Neq ? " <> " : " IN ";
            print_child(out, e.args[1], 4);
            break;
    }
    if (paren) out += ')';
}

std::string print_schema(const SchemaRef& r) { return r.is_param ? "$" + r.name : quote_identifier(r.name); }

std::string print_body(const ProjectionBody& b) {
    std::string s;
    if (b.distinct) s += "DISTINCT ";
    for (std::size_t i = 0; i < b.items.size(); ++i) {
        if (i) s += ", ";
        s += print(*b.items[i].expr);
        if (b.items[i].alias) s += " AS " + quote_identifier(*b.items[i].alias);
    }
    if (!b.order_by.empty()) {
        s += " ORDER BY ";
        for (std::size_t i = 0; i < b.order_by.size(); ++i) {
            if (i) s += ", ";
            s += print(*b.order_by[i].expr);
            if (b.order_by[i].descending) s += " DESC";
        }
    }
    if (b.limit) s += " LIMIT " + print(*b.limit);
    return s;
}

} // namespace

QueryAst parse(std::string_view text) {
    Lexer lex(text);
    Parser p(lex.run());
    return p.query();
}

std::string quote_identifier(const std::string& name) {
    const bool plain = !name.empty() && ident_start(name[0]) &&
                       std::all_of(name.begin(), name.end(), ident_char) && !keywords().count(upper(name));
    if (plain) return name;
    std::string s = "`";
    for (char c : name) {
        s += c;
        if (c == '`') s += '`';
    }
    return s + "`";
}

std::string print(const Expr& e) {
    std::string out;
    print_expr(out, e, 0);
    return out;
}

std::string print(const Pattern& p) {
    auto node = [](const NodePattern& n) {
        std::string s = "(" + (n.var.empty() ? "" : quote_identifier(n.var));
        for (const auto& l : n.labels) s += ":" + print_schema(l);
        return s + ")";
    };
    std::string s = node(p.nodes[0]);
    for (std::size_t i = 0; i < p.rels.size(); ++i) {
        const auto& r = p.rels[i];
        s += r.dir == RelDir::Left ? "<-[" : "-[";
        if (!r.var.empty()) s += quote_identifier(r.var);
        if (r.type) s += ":" + print_schema(*r.type);
        s += r.dir == RelDir::Right ? "]->" : "]-";
        s += node(p.nodes[i + 1]);
    }
    return s;
}

std::string print(const QueryAst& q) {
    std::string s;
    for (const auto& c : q.clauses) {
        if (!s.empty()) s += ' ';
        switch (c.kind) {
            case ClauseKind::Match:
                if (c.optional) s += "OPTIONAL ";
                s += "MATCH " + print(c.pattern);
                if (c.where) s += " WHERE " + print(*c.where);
                break;
            case ClauseKind::With:
                s += "WITH " + print_body(c.body);
                if (c.where) s += " WHERE " + print(*c.where);
                break;
            case ClauseKind::Unwind:
                s += "UNWIND " + print(*c.unwind) + " AS " + quote_identifier(c.alias);
                break;
            case ClauseKind::Return: s += "RETURN " + print_body(c.body); break;
        }
    }
    return s;
}

} // namespace gtdb::query
