#include <set>

#include "doctest.h"
#include "oracles.hpp"

using namespace lmtest;

namespace {

std::string scheme_of(const Loaded& l, const std::string& name) {
    for (const auto& [n, s] : l.shapes.top)
        if (n.name == name) return s.str();
    FAIL("no binding " << name);
    return "";
}


TermSubst to_term_subst(const std::map<std::string, RTypePtr>& m) {
    TermSubst out;
    for (const auto& [n, t] : m) out["'" + n] = to_term(t);
    return out;
}

// Tiny lambda terms for the principality check.
struct Lam {
    enum Kind { Var, Abs, App, IntLit, True } kind;
    std::string x;
    std::vector<Lam> kids;
    std::string src() const {
        switch (kind) {
        case Var: return x;
        case Abs: return "(\\" + x + " -> " + kids[0].src() + ")";
        case App: return "(" + kids[0].src() + " " + kids[1].src() + ")";
        case IntLit: return "0";
        case True: return "True";
        }
        return "";
    }
};
Lam v(std::string x) { return {Lam::Var, std::move(x), {}}; }
Lam abs(std::string x, Lam b) { return {Lam::Abs, std::move(x), {std::move(b)}}; }
Lam app(Lam f, Lam a) { return {Lam::App, "", {std::move(f), std::move(a)}}; }
Lam app(Lam f, Lam a, Lam b) { return app(app(std::move(f), std::move(a)), std::move(b)); }
Lam zero() { return {Lam::IntLit, "", {}}; }
Lam tt() { return {Lam::True, "", {}}; }

// All ground types over `atoms`, List and -> with at most `size` nodes.
std::vector<Term> universe(const std::vector<std::string>& atoms, int size) {
    std::vector<std::vector<Term>> by(static_cast<size_t>(size) + 1);
    for (const auto& a : atoms) by[1].push_back(Term{a, {}});
    for (int n = 2; n <= size; ++n) {
        for (const auto& t : by[static_cast<size_t>(n) - 1]) by[static_cast<size_t>(n)].push_back(Term{"List", {t}});
        for (int l = 1; l + 1 < n; ++l)
            for (const auto& a : by[static_cast<size_t>(l)])
                for (const auto& b : by[static_cast<size_t>(n - 1 - l)])
                    by[static_cast<size_t>(n)].push_back(Term{"->", {a, b}});
    }
    std::vector<Term> out;
    for (const auto& v : by) out.insert(out.end(), v.begin(), v.end());
    return out;
}

struct TermLess {
    bool operator()(const Term& a, const Term& b) const { return a.str() < b.str(); }
};
using TypeSet = std::set<Term, TermLess>;

// Every type the term has when each binder ranges over the universe.
TypeSet types_of(const Lam& e, std::map<std::string, Term>& env, const std::vector<Term>& u) {
    TypeSet out;
    switch (e.kind) {
    case Lam::Var: out.insert(env.at(e.x)); break;
    case Lam::IntLit: out.insert(Term{"Int", {}}); break;
    case Lam::True: out.insert(Term{"Bool", {}}); break;
    case Lam::Abs: {
        auto saved = env.find(e.x) != env.end() ? std::optional<Term>(env.at(e.x)) : std::nullopt;
        for (const auto& s : u) {
            env[e.x] = s;
            for (const auto& r : types_of(e.kids[0], env, u)) out.insert(Term{"->", {s, r}});
        }
        if (saved) env[e.x] = *saved;
        else env.erase(e.x);
        break;
    }
    case Lam::App: {
        TypeSet fs = types_of(e.kids[0], env, u);
        if (fs.empty()) break;
        TypeSet as = types_of(e.kids[1], env, u);
        for (const auto& f : fs)
            if (f.head == "->" && as.count(f.args[0])) out.insert(f.args[1]);
        break;
    }
    }
    return out;
}

Term skolemize(const Term& t) {
    if (t.is_var()) return Term{"Sk" + t.head.substr(1), {}};
    Term r{t.head, {}};
    for (const auto& a : t.args) r.args.push_back(skolemize(a));
    return r;
}

void subterms(const Term& t, TypeSet& out) {
    out.insert(t);
    for (const auto& a : t.args) subterms(a, out);
}

} // namespace

TEST_CASE("unification examples") {
    auto a = to_shape(Term{"->", {Term{"'a", {}}, Term{"List", {Term{"'b", {}}}}}});
    auto b = to_shape(Term{"->", {Term{"Int", {}}, Term{"'c", {}}}});
    auto s = unify_shapes(a, b);
    REQUIRE(s);
    CHECK(to_term(s->at("a")).str() == "Int");
    CHECK(to_term(s->at("c")).str() == "(List 'b)");
    CHECK(s->count("b") == 0);

    CHECK_FALSE(unify_shapes(rint(), rbool()));
    CHECK_FALSE(unify_shapes(to_shape(Term{"'a", {}}), to_shape(Term{"List", {Term{"'a", {}}}})));
    auto id = unify_shapes(to_shape(Term{"'a", {}}), to_shape(Term{"'a", {}}));
    REQUIRE(id);
    CHECK(id->empty());
}

TEST_CASE("unifier agrees with a textbook implementation") {
    Rng rng(7);
    std::vector<std::string> vars = {"a", "b", "c"};
    int unified = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        Term x = random_type(rng, 3, vars);
        Term y = random_type(rng, 3, vars);
        CAPTURE(x.str());
        CAPTURE(y.str());
        auto mine = unify_shapes(to_shape(x), to_shape(y));
        auto ref = robinson(x, y);
        REQUIRE(mine.has_value() == ref.has_value());
        if (!mine) continue;
        ++unified;
        TermSubst s = to_term_subst(*mine);
        Term ux = apply_subst(s, x);
        CHECK(ux == apply_subst(s, y));
        CHECK(apply_subst(s, ux) == ux);
        // Both are most general: each is an instance of the other.
        Term rx = apply_subst(*ref, x);
        CHECK(is_instance(ux, rx));
        CHECK(is_instance(rx, ux));
    }
    CHECK(unified > 200);
}

TEST_CASE("inferred schemes are principal") {
    std::vector<Lam> terms = {
        abs("x", v("x")),
        abs("x", abs("y", v("x"))),
        abs("f", abs("x", app(v("f"), v("x")))),
        abs("f", abs("x", app(v("f"), app(v("f"), v("x"))))),
        abs("f", abs("g", abs("x", app(v("f"), app(v("g"), v("x")))))),
        abs("f", app(v("f"), zero())),
        abs("f", abs("x", app(v("f"), v("x"), tt()))),
        abs("x", app(abs("y", v("y")), v("x"))),
        abs("f", abs("x", abs("y", app(v("f"), v("y"), v("x"))))),
        abs("x", abs("k", app(v("k"), v("x")))),
        abs("x", app(abs("y", zero()), v("x"))),
    };
    const auto ground = universe({"Int", "Bool"}, 5);
    for (const auto& t : terms) {
        CAPTURE(t.src());
        auto l = load_source("f = " + t.src() + "\n");
        Term principal = to_term(l.shapes.top.at(0).second.body);
        CAPTURE(principal.str());

        // Every ground typing found by enumeration is an instance.
        std::map<std::string, Term> env;
        TypeSet found = types_of(t, env, ground);
        CHECK(!found.empty());
        for (const auto& g : found) CHECK(is_instance(principal, g));

        // The scheme itself holds, with its variables as opaque types. Binders
        // range over its subterms, which suffices as a witness.
        TypeSet parts;
        subterms(skolemize(principal), parts);
        std::map<std::string, Term> env2;
        TypeSet opaque = types_of(t, env2, std::vector<Term>(parts.begin(), parts.end()));
        CHECK(opaque.count(skolemize(principal)) == 1);
    }
}

TEST_CASE("occurs check") {
    CHECK_THROWS_AS(load_source("f x = x x\n"), Error);
    CHECK_THROWS_AS(load_source("f = 1 + True\n"), Error);
}

TEST_CASE("corpus shapes") {
    CHECK(scheme_of(load_file("corpus/max.lm"), "max") == "Int -> Int -> Int");
    CHECK(scheme_of(load_file("corpus/inclist.lm"), "insert") == "forall a. a -> IncList a -> IncList a");
    CHECK(scheme_of(load_file("corpus/inclist.lm"), "split") == "forall a. [a] -> ([a], [a])");
    CHECK(scheme_of(load_file("corpus/avl_insert_equil.lm"), "isBal") == "forall a b. AVL a -> AVL b -> Int -> Bool");
}

TEST_CASE("signatures constrain but never widen") {
    CHECK(scheme_of(load_source("{-@ g :: Int -> Int @-}\ng x = x\n"), "g") == "Int -> Int");
    CHECK_THROWS_AS(load_source("{-@ g :: a -> b @-}\ng x = x\n"), Error);
}

TEST_CASE("let bindings generalize") {
    auto l = load_source("f y = let i = \\x -> x in (i 0, i True)\n");
    CHECK(scheme_of(l, "f") == "forall a. a -> (Int, Bool)");
}

TEST_CASE("inference is deterministic") {
    for (const char* f : {"corpus/inclist.lm", "corpus/avl_insert_equil.lm"}) {
        auto a = load_file(f);
        auto b = load_file(f);
        REQUIRE(a.shapes.top.size() == b.shapes.top.size());
        for (size_t i = 0; i < a.shapes.top.size(); ++i) CHECK(a.shapes.top[i].second.str() == b.shapes.top[i].second.str());
    }
}
