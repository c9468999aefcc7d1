#include <gtest/gtest.h>

#include "gtdb/common/rng.hpp"
#include "gtdb/query/binder.hpp"
#include "gtdb/query/errors.hpp"
#include "gtdb/query/parser.hpp"
#include "gtdb/sampler/templates.hpp"

using namespace gtdb;
using namespace gtdb::query;

namespace {

const std::vector<std::string_view> kCorpus{
    sampler::kTwoHopQuery,      sampler::kNodeMetadataQuery, sampler::kEdgeMetadataQuery,
    sampler::kOneHopQuery,      sampler::kChainedHopQuery,   sampler::kSeedLookupQuery,
    sampler::kCitedPapersQuery, sampler::kFeatureSampleQuery, sampler::kClassCountQuery,
    sampler::kNodeIdsQuery,
};

Params template_params() {
    return Params{{"SEED_NODES", Value(List{"a"})},
                  {"MAX_NEIGHBOURS", Value(5)},
                  {"NODE_TYPE", Value("PAPER")},
                  {"REL_TYPE", Value("CITES")}};
}

QueryErrc bind_error(std::string_view q, const Params& p) {
    try {
        query::bind(parse(q), p);
    } catch (const QueryError& e) {
        return e.code();
    }
    ADD_FAILURE() << "bound without error: " << q;
    return QueryErrc::Runtime;
}

// Random MATCH/RETURN queries over the supported pattern and projection shapes.
class QueryGen {
public:
    explicit QueryGen(std::uint64_t seed) : rng_(make_rng(seed)) {}

    std::string next(bool& uses_vars, std::vector<std::string>& vars) {
        vars.clear();
        std::string q = "MATCH " + node(vars);
        const auto hops = uniform_below(rng_, 3);
        for (std::uint64_t i = 0; i < hops; ++i) q += rel(vars) + node(vars);
        if (coin()) q += " WHERE " + pick(vars) + ".id IN [1, 'x', -2.5]";
        if (coin() && hops > 0) {
            q += " OPTIONAL MATCH (" + vars.front() + ")" + rel(vars) + node(vars);
        }
        q += coin() ? " RETURN DISTINCT " : " RETURN ";
        const auto items = 1 + uniform_below(rng_, 3);
        for (std::uint64_t i = 0; i < items; ++i) {
            if (i) q += ", ";
            switch (uniform_below(rng_, 4)) {
                case 0: q += pick(vars); break;
                case 1: q += pick(vars) + ".features AS f" + std::to_string(i); break;
                case 2: q += "labels(" + pick(vars) + ")[0] AS l" + std::to_string(i); break;
                default: q += "[" + pick(vars) + ".id] + 1 AS k" + std::to_string(i); break;
            }
        }
        if (coin()) q += " ORDER BY rand()";
        if (coin()) q += " LIMIT " + std::to_string(uniform_below(rng_, 50));
        uses_vars = true;
        return q;
    }

private:
    bool coin() { return uniform_below(rng_, 2) == 1; }
    std::string pick(const std::vector<std::string>& v) { return v[uniform_below(rng_, v.size())]; }
    std::string fresh() { return "v" + std::to_string(counter_++); }
    std::string node(std::vector<std::string>& vars) {
        const auto v = fresh();
        vars.push_back(v);
        std::string s = "(" + v;
        if (coin()) s += ":PAPER";
        if (uniform_below(rng_, 4) == 0) s += ":`Odd Label`";
        return s + ")";
    }
    std::string rel(std::vector<std::string>& vars) {
        std::string inner;
        if (coin()) {
            const auto v = fresh();
            vars.push_back(v);
            inner = v;
        }
        if (coin()) inner += ":CITES";
        switch (uniform_below(rng_, 3)) {
            case 0: return "-[" + inner + "]->";
            case 1: return "<-[" + inner + "]-";
            default: return "-[" + inner + "]-";
        }
    }

    Rng rng_;
    int counter_ = 0;
};

} // namespace

TEST(Parser, TwoHopTemplateShape) {
    const auto ast = parse(sampler::kTwoHopQuery);
    ASSERT_EQ(ast.clauses.size(), 4u);
    EXPECT_EQ(ast.clauses[0].kind, ClauseKind::Match);
    EXPECT_FALSE(ast.clauses[0].optional);
    ASSERT_TRUE(ast.clauses[0].where);
    EXPECT_EQ(ast.clauses[0].where->kind, ExprKind::In);
    EXPECT_TRUE(ast.clauses[1].optional);
    EXPECT_EQ(ast.clauses[1].pattern.rels.size(), 2u);
    EXPECT_EQ(ast.clauses[2].kind, ClauseKind::With);
    ASSERT_EQ(ast.clauses[2].body.order_by.size(), 1u);
    EXPECT_EQ(ast.clauses[2].body.order_by[0].expr->name, "rand");
    ASSERT_TRUE(ast.clauses[2].body.limit);
    EXPECT_EQ(ast.clauses[2].body.limit->kind, ExprKind::Param);
    EXPECT_EQ(ast.clauses[3].kind, ClauseKind::Return);
    EXPECT_EQ(ast.clauses[3].body.items.size(), 5u);
    EXPECT_EQ(ast.clauses[3].body.items[0].alias, "src_id");
}

TEST(Parser, AnonymousRelationshipAndDistinctReturn) {
    const auto ast = parse(sampler::kCitedPapersQuery);
    ASSERT_EQ(ast.clauses.size(), 2u);
    EXPECT_TRUE(ast.clauses[0].pattern.rels[0].var.empty());
    EXPECT_EQ(ast.clauses[0].pattern.rels[0].type->name, "CITES");
    EXPECT_TRUE(ast.clauses[1].body.distinct);
}

TEST(Parser, KeywordsAreCaseInsensitive) {
    EXPECT_EQ(parse("match (n:PAPER) return distinct n order by n.id desc limit 3"),
              parse("MATCH (n:PAPER) RETURN DISTINCT n ORDER BY n.id DESC LIMIT 3"));
    EXPECT_NE(parse("MATCH (n:PAPER) RETURN n"), parse("MATCH (n:paper) RETURN n"));
}

TEST(Parser, SyntaxErrorsReportPositionAndExpectedTokens) {
    try {
        parse("MATCH (n RETURN n");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 1);
        EXPECT_EQ(e.column(), 10);
        EXPECT_TRUE(e.expected().count("')'"));
    }
    try {
        parse("MATCH (n)\nRETURN n trailing");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.column(), 10);
    }
    EXPECT_THROW(parse("MATCH (n) RETURN rand(n)"), SyntaxError);
    EXPECT_THROW(parse("MATCH (n) RETURN n.id + "), SyntaxError);
    EXPECT_THROW(parse("MATCH (n)-[*..3]->(m) RETURN m"), SyntaxError);
    EXPECT_THROW(parse("CREATE (n) RETURN n"), SyntaxError);
    EXPECT_THROW(parse("MATCH (n)"), SyntaxError);
}

TEST(Parser, PrintReparseRoundTripOnCorpus) {
    for (auto q : kCorpus) {
        const auto ast = parse(q);
        EXPECT_EQ(parse(print(ast)), ast) << print(ast);
    }
}

TEST(Parser, PrintReparseRoundTripOnGeneratedQueries) {
    QueryGen gen(17);
    std::vector<std::string> vars;
    bool uses = false;
    for (int i = 0; i < 500; ++i) {
        const auto q = gen.next(uses, vars);
        const auto ast = parse(q);
        const auto printed = print(ast);
        ASSERT_EQ(parse(printed), ast) << q << "\n" << printed;
        EXPECT_EQ(print(parse(printed)), printed);
    }
}

TEST(Binder, SubstitutesSchemaParameters) {
    const auto b = query::bind(parse(sampler::kTwoHopQuery), template_params());
    EXPECT_EQ(b.ast.clauses[0].pattern.nodes[0].labels[0], (SchemaRef{"PAPER", false}));
    EXPECT_EQ(b.ast.clauses[1].pattern.rels[1].type->name, "CITES");
    EXPECT_EQ(b.ast.clauses[2].body.limit->literal, Value(5));
}

TEST(Binder, ParameterErrors) {
    auto p = template_params();
    p.erase("MAX_NEIGHBOURS");
    try {
        query::bind(parse(sampler::kTwoHopQuery), p);
        FAIL();
    } catch (const MissingParameter& e) {
        EXPECT_EQ(e.name(), "MAX_NEIGHBOURS");
    }
    p = template_params();
    p["MAX_NEIGHBOURS"] = Value(-1);
    EXPECT_EQ(bind_error(sampler::kTwoHopQuery, p), QueryErrc::TypeMismatch);
    p["MAX_NEIGHBOURS"] = Value(2.5);
    EXPECT_EQ(bind_error(sampler::kTwoHopQuery, p), QueryErrc::TypeMismatch);
    p = template_params();
    p["NODE_TYPE"] = Value(3);
    EXPECT_EQ(bind_error(sampler::kTwoHopQuery, p), QueryErrc::TypeMismatch);
}

TEST(Binder, AnonymousElementsGetFreshNames) {
    const auto b = query::bind(parse("MATCH (anon_0)-[]->()-[]->(m) RETURN m"), {});
    const auto& pat = b.ast.clauses[0].pattern;
    EXPECT_EQ(pat.rels[0].var, "anon_1");
    EXPECT_EQ(pat.nodes[1].var, "anon_2");
    EXPECT_EQ(pat.rels[1].var, "anon_3");
}

TEST(Binder, RejectsUnboundVariables) {
    EXPECT_EQ(bind_error("MATCH (n) RETURN m", {}), QueryErrc::UnboundVariable);
    EXPECT_EQ(bind_error("MATCH (n) WITH n.id AS x RETURN n", {}), QueryErrc::UnboundVariable);
    EXPECT_EQ(bind_error("MATCH (n) WITH DISTINCT n.id AS x RETURN x ORDER BY n.id", {}),
              QueryErrc::UnboundVariable);
    EXPECT_EQ(bind_error("MATCH (n) RETURN reduce(s = 0, k IN [1] | s + j)", {}), QueryErrc::UnboundVariable);
    EXPECT_NO_THROW(query::bind(parse("MATCH (n) RETURN n.id AS x ORDER BY n.id"), {}));
}

TEST(Binder, ScopeSoundnessOnMutatedQueries) {
    QueryGen gen(5);
    std::vector<std::string> vars;
    bool uses = false;
    for (int i = 0; i < 300; ++i) {
        const auto q = gen.next(uses, vars);
        EXPECT_NO_THROW(query::bind(parse(q), {})) << q;
        // prepend a projection of a name no clause binds
        auto at = q.find(" RETURN ") + 8;
        if (q.compare(at, 9, "DISTINCT ") == 0) at += 9;
        auto mutated = q;
        mutated.insert(at, "zz_unbound.id AS zz, ");
        EXPECT_EQ(bind_error(mutated, {}), QueryErrc::UnboundVariable) << mutated;
        // rename one bound variable inside the projection
        auto renamed = q;
        const auto pos = renamed.find(vars.back(), at);
        if (pos != std::string::npos) {
            renamed.replace(pos, vars.back().size(), "zz_" + vars.back());
            EXPECT_EQ(bind_error(renamed, {}), QueryErrc::UnboundVariable) << renamed;
        }
    }
}
