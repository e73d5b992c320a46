#include "doctest.h"
#include "oracles.hpp"

using namespace lmtest;

namespace {

const std::vector<std::string> kCorpus = {
    "corpus/max.lm",           "corpus/head.lm",         "corpus/head_client_unsafe.lm", "corpus/inclist.lm",
    "corpus/quicksort_weak_join.lm", "corpus/quicksort_strong_join.lm", "corpus/avl_insert_node_only.lm",
    "corpus/avl_insert_equil.lm"};

CGen gen(const Loaded& l) { return generate(l.prog, l.shapes, l.me); }

Solution trivial(const CGen& cg) {
    Solution s;
    for (const auto& [k, info] : cg.kvars) s.sets[k] = {};
    return s;
}

Query query_of(const Constraint& c) {
    Query q;
    q.consts = env_sorts(c.env, c.sort);
    q.hyp = Pred::conj(embed_env(c.env), c.lhs);
    q.goal = c.rhs;
    return q;
}

} // namespace

TEST_CASE("max yields one obligation per branch") {
    auto l = load_file("corpus/max.lm");
    auto cg = gen(l);
    REQUIRE(cg.constraints.size() == 2);
    CHECK(cg.kvars.empty());
    CHECK(render_constraint(cg.constraints[0]) ==
          "corpus/max.lm:4:26 ⊢ x:Int, y:Int, x >= y |- {v:Int | v = x} <: {v:Int | v >= x && v >= y}");
    CHECK(render_constraint(cg.constraints[1]) ==
          "corpus/max.lm:4:33 ⊢ x:Int, y:Int, not (x >= y) |- {v:Int | v = y} <: {v:Int | v >= x && v >= y}");
    BoxOracle box(6);
    for (const auto& c : cg.constraints) CHECK(box.check_one(query_of(c)).v == Validity::Valid);
}

TEST_CASE("the empty-list branch of head is unreachable") {
    auto l = load_file("corpus/head.lm");
    auto cg = gen(l);
    const Constraint* pe = nullptr;
    for (const auto& c : cg.constraints)
        if (c.rule.rfind("patError", 0) == 0) pe = &c;
    REQUIRE(pe);
    CHECK(pe->rhs.is_false());
    Pred hyp = embed_env(pe->env);
    // Both the binder refinement and the branch guard are present.
    std::string h = hyp.str();
    CHECK(h.find("notEmpty arg1") != std::string::npos);
    CHECK(h.find("false") != std::string::npos);
    auto smt = make_smt_oracle({}, measure_sigs(l.me));
    CHECK(smt->check_one(query_of(*pe)).v == Validity::Valid);
}

TEST_CASE("literals get singleton types") {
    auto l = load_source("{-@ five :: {v:Int | v > 3} @-}\nfive = 5\n");
    auto cg = gen(l);
    REQUIRE(cg.constraints.size() == 1);
    CHECK(cg.constraints[0].lhs == Pred::eq(Pred::vv(), Pred::lit(5)));
    CHECK(cg.constraints[0].rhs.str() == "v > 3");
}

TEST_CASE("fully covered matches raise no pattern obligations") {
    auto l = load_source("f [] = 0\nf (x:xs) = 1\n");
    for (const auto& c : gen(l).constraints) CHECK(c.rule.rfind("patError", 0) != 0);
}

TEST_CASE("splitting is reflexive") {
    Ident x = Ident::fresh("x");
    Pred pos = Pred::cmp(POp::Ge, Pred::vv(), Pred::lit(0));
    Pred gt = Pred::cmp(POp::Gt, Pred::vv(), Pred::var(x));
    std::vector<RTypePtr> ts = {rint(pos), rfun(x, rint(pos), rint(gt)),
                                rfun(Ident::fresh("f"), rfun(x, rint(pos), rint(gt)), rint(pos))};
    BoxOracle box(6);
    for (const auto& t : ts)
        for (const auto& c : split_subtype(Env(), t, t, Loc{"t.lm", 1, 1}))
            CHECK(box.check_one(query_of(c)).v == Validity::Valid);
}

TEST_CASE("function subtyping is contravariant") {
    Ident x = Ident::fresh("x"), y = Ident::fresh("y");
    auto ge = [](long long k) { return Pred::cmp(POp::Ge, Pred::vv(), Pred::lit(k)); };
    RTypePtr t1 = rfun(x, rint(ge(0)), rint(Pred::cmp(POp::Gt, Pred::vv(), Pred::var(x))));
    RTypePtr ok = rfun(y, rint(ge(1)), rint(Pred::cmp(POp::Ge, Pred::vv(), Pred::var(y))));
    RTypePtr bad = rfun(y, rint(ge(-1)), rint(Pred::cmp(POp::Ge, Pred::vv(), Pred::var(y))));
    BoxOracle box(6);

    auto cs = split_subtype(Env(), t1, ok, Loc{"t.lm", 1, 1});
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].lhs == ge(1));
    CHECK(cs[0].rhs == ge(0));
    // The range is checked with the supertype's binder in scope.
    CHECK(cs[1].env.lookup(y) != nullptr);
    for (const auto& c : cs) CHECK(box.check_one(query_of(c)).v == Validity::Valid);

    auto cs2 = split_subtype(Env(), t1, bad, Loc{"t.lm", 1, 1});
    CHECK(box.check_one(query_of(cs2[0])).v == Validity::Invalid);
}

TEST_CASE("templates place one kvar per base position") {
    std::map<int, KVarInfo> ks;
    Env env = Env().bind(Ident::fresh("n"), rint());
    auto shape = rfun(Ident::fresh("x"), rint(), rbase(BaseType::tycon("List", {rint()})));
    auto t = fresh_template(shape, env, ks, Loc{"t.lm", 1, 1});
    CHECK(ks.size() == 3);
    for (const auto& [k, info] : ks) CHECK(info.scope.size() >= 1);
    CHECK(t->dom->pred.is_kvar());
    CHECK(t->rng->pred.is_kvar());
}

TEST_CASE("corpus constraints are well formed") {
    for (const auto& f : kCorpus) {
        CAPTURE(f);
        auto l = load_file(f);
        auto cg = gen(l);
        auto sol = trivial(cg);
        auto ms = measure_sigs(l.me);
        for (const auto& c : cg.constraints) {
            CAPTURE(render_constraint(c));
            // After splitting, the rhs is a single kvar or has none.
            CHECK((c.rhs.is_kvar() || !has_kvars(c.rhs)));
            std::set<Ident> bound = {Ident::vv()};
            for (const auto& e : c.env.entries())
                if (!e.is_guard) bound.insert(e.x);
            for (const Pred& p : {embed_env(c.env), c.lhs, c.rhs}) {
                for (const auto& x : free_vars(p)) CHECK(bound.count(x) == 1);
                for (int k : kvars_of(p)) CHECK(cg.kvars.count(k) == 1);
            }
            Pred whole = sol.apply(Pred::imp(Pred::conj(embed_env(c.env), c.lhs), c.rhs));
            CHECK(well_sorted_formula(whole, env_sorts(c.env, c.sort), ms));
        }
        for (const auto& [k, info] : cg.kvars) {
            std::set<Ident> seen;
            for (const auto& [x, s] : info.scope) CHECK(seen.insert(x).second);
        }
    }
}

TEST_CASE("generation is deterministic") {
    for (const auto& f : kCorpus) {
        CAPTURE(f);
        auto a = gen(load_file(f));
        auto b = gen(load_file(f));
        REQUIRE(a.constraints.size() == b.constraints.size());
        for (size_t i = 0; i < a.constraints.size(); ++i)
            CHECK(render_constraint(a.constraints[i]) == render_constraint(b.constraints[i]));
    }
}
