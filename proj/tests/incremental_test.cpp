#include "doctest.h"

#include <set>

#include "inctab/bench.hpp"
#include "inctab/engine.hpp"
#include "support/oracle.hpp"

using namespace inctab;

namespace {

using Answers = std::set<std::string>;

Answers run(Engine& e, const std::string& goal) {
    Answers out;
    for (const QueryAnswer& a : e.query(goal)) {
        std::string s;
        for (const auto& [n, v] : a.bindings) s += (s.empty() ? "" : ",") + n + "=" + to_string(v);
        out.insert(s + ":" + truth_name(a.truth));
    }
    return out;
}

std::vector<std::string> names(const std::vector<Term>& ts) {
    std::vector<std::string> out;
    for (const Term& t : ts) out.push_back(to_string(t));
    return out;
}

const ReevalOutcome* outcome_for(const Engine& e, const std::string& subgoal) {
    const ReevalOutcome* found = nullptr;
    for (const ReevalOutcome& o : e.reeval_log())
        if (to_string(o.subgoal) == subgoal) found = &o;
    return found;
}

const char* kPinc = ":- table t_1/1, t_2/1, t_4/1, t_5/1 as incremental.\n"
                    "t_1(X) :- t_4(X), tnot(t_2(X)).\n"
                    "t_4(X) :- t_5(X).\n"
                    "t_4(X) :- t_4(Y), t_5(X).\n"
                    "t_5(X) :- nt_1(X).\n"
                    "t_2(X) :- q(X).\n"
                    "nt_1(X) :- p(f(X)).\n"
                    "nt_1(X) :- p(g(X)).\n"
                    ":- dynamic p/1, q/1 as incremental.\n"
                    "p(f(1)).\n"
                    "q(1).\n";

} // namespace

TEST_CASE("P_inc: updates invalidate exactly the dependent tables") {
    Engine e;
    e.consult_text(kPinc);
    CHECK(run(e, "t_1(X)").empty());
    CHECK(e.idg().stats().table_nodes == 4);

    UpdateResult r = e.assert_text("p(g(2))");
    CHECK(names(r.invalidated) == std::vector<std::string>{"t_5(_0)", "t_4(_0)", "t_1(_0)"});
    for (const TableInfo& t : e.tables()) {
        std::string s = to_string(t.subgoal);
        CHECK(t.falsecount == (s == "t_2(1)" ? 0u : 1u));
    }
    CHECK(e.assert_text("q(g(2))").invalidated.empty());
    CHECK(run(e, "t_1(X)") == Answers{"X=2:true"});

    CHECK(names(e.assert_text("q(2)").invalidated) == std::vector<std::string>{"t_2(2)", "t_1(_0)"});
    CHECK(run(e, "t_1(X)").empty());
    e.retract_text("q(2)");
    e.retract_text("p(f(1))");
    CHECK(run(e, "t_1(X)") == Answers{"X=2:true"});
}

TEST_CASE("re-evaluation happens lazily, dependencies first") {
    Engine e;
    e.consult_text(kPinc);
    e.query("t_1(X)");
    std::uint64_t before = e.steps();
    e.assert_text("p(g(2))");
    e.assert_text("p(g(3))");
    CHECK(e.steps() == before);
    e.clear_reeval_log();
    e.query("t_1(X)");
    std::vector<std::string> order;
    for (const ReevalOutcome& o : e.reeval_log()) order.push_back(to_string(o.subgoal));
    // t_4 and t_5 form no SCC together; t_5 completes first.
    REQUIRE(order.size() == 3);
    CHECK(order.front() == "t_5(_0)");
    CHECK(order.back() == "t_1(_0)");
    CHECK(e.idg().stats().invalid_nodes == 0);
}

TEST_CASE("unchanged re-evaluation propagates validity") {
    Engine e;
    e.consult_text(":- table a/1, b/1 as incremental.\n"
                   "a(X) :- b(X).\n"
                   "b(X) :- d(X), d(X).\n"
                   "b(X) :- d(X).\n"
                   ":- dynamic d/1 as incremental.\nd(1).\n");
    CHECK(run(e, "a(X)") == Answers{"X=1:true"});
    // A duplicate fact leaves b's answers unchanged, so a is not recomputed.
    e.assert_text("d(1)");
    e.clear_reeval_log();
    e.query("a(X)");
    const ReevalOutcome* b = outcome_for(e, "b(_0)");
    REQUIRE(b);
    CHECK_FALSE(b->changed);
    CHECK(b->validity_propagated);
    CHECK(outcome_for(e, "a(_0)") == nullptr);
}

TEST_CASE("five informational cases") {
    const char* prog = ":- table t/1, s/1 as incremental.\n"
                       "t(X) :- c(X), undefined.\n"
                       "t(X) :- k(X), undefined.\n"
                       "t(X) :- u(X).\n"
                       "s(X) :- t(X).\n"
                       ":- dynamic c/1, k/1, u/1 as incremental.\n";

    SUBCASE("weakening 1: no answer becomes conditional") {
        Engine e;
        e.consult_text(prog);
        CHECK(run(e, "t(X)").empty());
        e.assert_text("c(1)");
        e.clear_reeval_log();
        CHECK(run(e, "t(X)") == Answers{"X=1:undefined"});
        const ReevalOutcome* o = outcome_for(e, "t(_0)");
        REQUIRE(o);
        CHECK(o->new_answer);
        CHECK_FALSE(o->simplification);
        CHECK_FALSE(o->validity_propagated);
    }
    SUBCASE("weakening 2: unconditional becomes conditional") {
        Engine e;
        e.consult_text(prog);
        e.assert_text("u(1)");
        e.assert_text("c(1)");
        CHECK(run(e, "t(X)") == Answers{"X=1:true"});
        e.retract_text("u(1)");
        e.clear_reeval_log();
        CHECK(run(e, "t(X)") == Answers{"X=1:undefined"});
        const ReevalOutcome* o = outcome_for(e, "t(_0)");
        REQUIRE(o);
        CHECK(o->weakened == 1);
        CHECK(o->new_answer);
        CHECK_FALSE(o->simplification);
        CHECK_FALSE(o->validity_propagated);
    }
    SUBCASE("no informational change: another conditional derivation") {
        Engine e;
        e.consult_text(prog);
        e.assert_text("c(1)");
        CHECK(run(e, "s(X)") == Answers{"X=1:undefined"});
        e.assert_text("k(1)");
        e.clear_reeval_log();
        CHECK(run(e, "s(X)") == Answers{"X=1:undefined"});
        const ReevalOutcome* o = outcome_for(e, "t(_0)");
        REQUIRE(o);
        CHECK_FALSE(o->new_answer);
        CHECK_FALSE(o->changed);
        CHECK_FALSE(o->simplification);
        CHECK(o->validity_propagated);
        // s was made valid again without recomputation.
        CHECK(outcome_for(e, "s(_0)") == nullptr);
    }
    SUBCASE("strengthening 1: conditional becomes true and simplifies dependents") {
        Engine e;
        e.consult_text(prog);
        e.assert_text("c(1)");
        CHECK(run(e, "s(X)") == Answers{"X=1:undefined"});
        e.assert_text("u(1)");
        e.clear_reeval_log();
        // Re-evaluate t alone; s is reached only through simplification.
        CHECK(run(e, "t(X)") == Answers{"X=1:true"});
        const ReevalOutcome* o = outcome_for(e, "t(_0)");
        REQUIRE(o);
        CHECK(o->strengthened == 1);
        CHECK_FALSE(o->new_answer);
        CHECK(o->simplification);
        CHECK(e.stats().simplified_answers >= 1);
        auto s = e.answers_of(parse_term("s(X)").term);
        REQUIRE(s.size() == 1);
        CHECK(s[0].second == TruthValue::True);
    }
    SUBCASE("strengthening 2: conditional becomes false and simplifies dependents") {
        Engine e;
        e.consult_text(prog);
        e.assert_text("c(1)");
        CHECK(run(e, "s(X)") == Answers{"X=1:undefined"});
        e.retract_text("c(1)");
        e.clear_reeval_log();
        CHECK(run(e, "t(X)").empty());
        const ReevalOutcome* o = outcome_for(e, "t(_0)");
        REQUIRE(o);
        CHECK(o->removed_conditional == 1);
        CHECK(o->simplification);
        CHECK(e.answers_of(parse_term("s(X)").term).empty());
        CHECK(run(e, "s(X)").empty());
    }
}

TEST_CASE("negative dependencies are simplified when the negated answer changes") {
    Engine e;
    e.consult_text(":- table w/1, v/1 as incremental.\n"
                   "w(X) :- c(X), tnot(v(X)).\n"
                   "v(X) :- c(X), undefined.\n"
                   "v(X) :- u(X).\n"
                   ":- dynamic c/1, u/1 as incremental.\nc(1).\n");
    CHECK(run(e, "w(X)") == Answers{"X=1:undefined"});
    e.assert_text("u(1)");
    CHECK(e.truth_of("v(1)") == TruthValue::True);
    CHECK(e.answers_of(parse_term("w(X)").term).empty());
    CHECK(run(e, "w(X)").empty());
}

TEST_CASE("view consistency: open cursors keep their answers across updates") {
    Engine e;
    e.consult_text(":- table r/1 as incremental.\nr(X) :- b(X).\n:- dynamic b/1 as incremental.\n"
                   "b(1). b(2). b(3). b(4).\n");
    Cursor c1 = e.open(parse_term("r(X)").term);
    auto first = c1.next();
    REQUIRE(first);
    CHECK(e.find_table(parse_term("r(X)").term)->occp_num == 1);
    e.retract_text("b(3)");
    e.assert_text("b(5)");
    Cursor c2 = e.open(parse_term("r(X)").term);
    CHECK(c1.preserved());
    std::vector<std::string> rest;
    while (auto a = c1.next()) rest.push_back(to_string(a->atom));
    CHECK(rest == std::vector<std::string>{"r(2)", "r(3)", "r(4)"});
    std::set<std::string> now;
    while (auto a = c2.next()) now.insert(to_string(a->atom));
    CHECK(now == std::set<std::string>{"r(1)", "r(2)", "r(4)", "r(5)"});
    CHECK(e.find_table(parse_term("r(X)").term)->occp_num == 0);
}

TEST_CASE("abolishing a table with an open cursor preserves the view") {
    Engine e;
    e.consult_text(":- table r/1.\nr(1). r(2).\n");
    Cursor c = e.open(parse_term("r(X)").term);
    c.next();
    e.abolish_all_tables();
    auto a = c.next();
    REQUIRE(a);
    CHECK(to_string(a->atom) == "r(2)");
    CHECK_FALSE(c.next());
}

TEST_CASE("occp_num equals the number of live cursors under random operations") {
    Prng rng(5);
    Engine e;
    e.consult_text(":- table r/1 as incremental.\nr(X) :- b(X).\n:- dynamic b/1 as incremental.\n");
    for (int i = 1; i <= 6; ++i) e.assert_text("b(" + std::to_string(i) + ")");
    std::vector<Cursor> cursors;
    for (int step = 0; step < 400; ++step) {
        switch (rng.below(5)) {
        case 0: cursors.push_back(e.open(parse_term("r(X)").term)); break;
        case 1:
            if (!cursors.empty()) cursors[rng.below(cursors.size())].next();
            break;
        case 2:
            if (!cursors.empty()) cursors.erase(cursors.begin() + rng.below(cursors.size()));
            break;
        case 3: e.assert_text("b(" + std::to_string(rng.below(10)) + ")"); break;
        default: e.retract_text("b(" + std::to_string(rng.below(10)) + ")"); break;
        }
        if (rng.below(7) == 0) e.query("r(X)");
        const Table* t = e.find_table(parse_term("r(X)").term);
        if (!t) continue;
        int live = 0;
        for (const Cursor& c : cursors)
            if (!c.exhausted() && !c.preserved() && c.table() == t->id) ++live;
        REQUIRE(t->occp_num == live);
    }
}

TEST_CASE("IDG abstraction collapses edge leaves") {
    auto leaves = [](const std::string& decl) {
        Engine e;
        e.consult_text(":- table reach/2 as incremental.\n"
                       "reach(X,Y) :- edge(X,Y).\n"
                       "reach(X,Y) :- reach(X,Z), edge(Z,Y).\n" +
                       decl);
        for (auto [a, b] : gen_graph({50, 80, 3}))
            e.assert_clause(Term::compound("edge", {Term::integer(a), Term::integer(b)}));
        e.query("reach(X,Y)");
        return e.idg().leaf_count({intern("edge"), 2});
    };
    CHECK(leaves(":- dynamic edge/2 as incremental.\n") > 10);
    CHECK(leaves(":- dynamic edge/2 as incremental, abstract(0).\n") == 1);
}

TEST_CASE("dependency rules for incremental tables") {
    Engine e;
    e.consult_text(":- table i/1 as incremental.\n:- table n/1.\n"
                   "i(X) :- d(X).\n"
                   "i2(X) :- n(X).\n"
                   "n(X) :- d(X).\n"
                   ":- table j/1 as incremental.\nj(X) :- n(X).\n"
                   ":- dynamic d/1.\nd(1).\n");
    try {
        e.query("i(X)");
        FAIL("expected a permission error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::Permission);
    }
    try {
        e.query("j(X)");
        FAIL("expected a permission error");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::Permission);
    }
    // A non-incremental table over a non-incremental dynamic predicate is fine.
    CHECK(run(e, "n(X)") == Answers{"X=1:true"});
}

TEST_CASE("asserting an unknown predicate declares it dynamic") {
    Engine e;
    e.assert_text("fresh(1)");
    CHECK(run(e, "fresh(X)") == Answers{"X=1:true"});
    CHECK(e.retract_text("fresh(1)").applied);
    CHECK_FALSE(e.retract_text("fresh(1)").applied);
    CHECK(run(e, "fresh(X)").empty());
}

TEST_CASE("abolish_table invalidates dependents") {
    Engine e;
    e.consult_text(kPinc);
    e.query("t_1(X)");
    e.abolish_table(parse_term("t_5(X)").term);
    const Table* t1 = e.find_table(parse_term("t_1(X)").term);
    REQUIRE(t1);
    CHECK(t1->node->falsecount > 0);
    e.assert_text("p(g(7))");
    CHECK(run(e, "t_1(X)") == Answers{"X=7:true"});
}

TEST_CASE("recompute_all clears every invalid table eagerly") {
    Engine e;
    e.consult_text(kPinc);
    e.query("t_1(X)");
    e.assert_text("p(g(2))");
    CHECK(e.idg().stats().invalid_nodes == 3);
    e.recompute_all();
    CHECK(e.idg().stats().invalid_nodes == 0);
    CHECK(e.answers_of(parse_term("t_1(X)").term).size() == 1);
}

TEST_CASE("falsecount conservation across engine updates") {
    Prng rng(17);
    Engine e;
    e.consult_text(kPinc);
    for (int i = 0; i < 200; ++i) {
        std::string f = (rng.below(2) ? "p(" : "q(") + std::string(rng.below(2) ? "f(" : "g(") +
                        std::to_string(rng.below(3)) + "))";
        if (f[0] == 'q') f = "q(" + std::to_string(rng.below(3)) + ")";
        if (rng.below(2)) e.assert_text(f);
        else e.retract_text(f);
        if (rng.below(3) == 0) e.query("t_1(X)");
        const FalsecountLedger& l = e.idg().ledger();
        REQUIRE(l.increments == l.decrements + l.resets + e.idg().residual_falsecount());
    }
}
