#include "lm/logic.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lm {

MeasureSigs measure_sigs(const MeasureEnv& me) {
    MeasureSigs out;
    for (const auto& m : me.measures) out[m.name] = {Sort::data(m.datatype), m.result};
    return out;
}

namespace {

bool is_formula_op(POp op) {
    switch (op) {
    case POp::True:
    case POp::False:
    case POp::Eq:
    case POp::Ne:
    case POp::Lt:
    case POp::Le:
    case POp::Gt:
    case POp::Ge:
    case POp::And:
    case POp::Or:
    case POp::Not:
    case POp::Imp:
    case POp::Iff: return true;
    default: return false;
    }
}

} // namespace

std::optional<Sort> sort_of(const Pred& p, const SortEnv& env, const MeasureSigs& ms) {
    auto rec = [&](const Pred& x) { return sort_of(x, env, ms); };
    const Sort I = Sort::integer(), B = Sort::boolean();
    switch (p.op()) {
    case POp::True:
    case POp::False: return B;
    case POp::Int: return I;
    case POp::Var: {
        auto it = env.find(p.ident());
        if (it == env.end()) return std::nullopt;
        return it->second;
    }
    case POp::KVar: return B;
    case POp::Add:
    case POp::Sub:
    case POp::Mul: {
        auto a = rec(p.kid(0)), b = rec(p.kid(1));
        if (a == I && b == I) return I;
        return std::nullopt;
    }
    case POp::Neg: return rec(p.kid(0)) == I ? std::optional<Sort>(I) : std::nullopt;
    case POp::Eq:
    case POp::Ne: {
        auto a = rec(p.kid(0)), b = rec(p.kid(1));
        if (a && b && *a == *b) return B;
        return std::nullopt;
    }
    case POp::Lt:
    case POp::Le:
    case POp::Gt:
    case POp::Ge: {
        auto a = rec(p.kid(0)), b = rec(p.kid(1));
        if (a && b && *a == *b && a->ordered()) return B;
        return std::nullopt;
    }
    case POp::And:
    case POp::Or:
    case POp::Not:
    case POp::Imp:
    case POp::Iff:
        for (const auto& k : p.kids())
            if (rec(k) != B) return std::nullopt;
        return B;
    case POp::Ite: {
        auto c = rec(p.kid(0)), a = rec(p.kid(1)), b = rec(p.kid(2));
        if (c == B && a && b && *a == *b) return a;
        return std::nullopt;
    }
    case POp::App: {
        auto it = ms.find(p.fn());
        if (it == ms.end() || p.kids().size() != 1) return std::nullopt;
        auto a = rec(p.kid(0));
        if (!a || a->kind != Sort::Kind::Data || a->name != it->second.arg.name) return std::nullopt;
        return it->second.result;
    }
    }
    return std::nullopt;
}

bool well_sorted_formula(const Pred& p, const SortEnv& env, const MeasureSigs& ms) {
    auto s = sort_of(p, env, ms);
    return s && *s == Sort::boolean();
}

Pred embed_env(const Env& env) {
    std::vector<Pred> ps;
    for (const auto& e : env.entries()) {
        if (e.is_guard) {
            ps.push_back(e.guard);
        } else if (e.t->is_base() && !e.t->pred.is_true()) {
            ps.push_back(subst(e.t->pred, {{Ident::vv(), Pred::var(e.x)}}));
        }
    }
    return Pred::conj(ps);
}

SortEnv env_sorts(const Env& env, const Sort& vv_sort) {
    SortEnv out;
    for (const auto& [x, s] : env.scope()) out[x] = s;
    out[Ident::vv()] = vv_sort;
    return out;
}

std::string smt_term(const Pred& p) {
    auto bin = [&](const char* op) { return std::string("(") + op + " " + smt_term(p.kid(0)) + " " + smt_term(p.kid(1)) + ")"; };
    auto nary = [&](const char* op) {
        std::string s = std::string("(") + op;
        for (const auto& k : p.kids()) s += " " + smt_term(k);
        return s + ")";
    };
    switch (p.op()) {
    case POp::True: return "true";
    case POp::False: return "false";
    case POp::Int: return p.int_val() < 0 ? "(- " + std::to_string(-p.int_val()) + ")" : std::to_string(p.int_val());
    case POp::Var: return p.ident().smt_name();
    case POp::KVar: fail(ErrorKind::Internal, {}, "refinement variable in an SMT query");
    case POp::Add: return bin("+");
    case POp::Sub: return bin("-");
    case POp::Mul: return bin("*");
    case POp::Neg: return "(- " + smt_term(p.kid(0)) + ")";
    case POp::Eq: return bin("=");
    case POp::Ne: return "(not " + bin("=") + ")";
    case POp::Lt: return bin("<");
    case POp::Le: return bin("<=");
    case POp::Gt: return bin(">");
    case POp::Ge: return bin(">=");
    case POp::And: return nary("and");
    case POp::Or: return nary("or");
    case POp::Not: return "(not " + smt_term(p.kid(0)) + ")";
    case POp::Imp: return bin("=>");
    case POp::Iff: return bin("=");
    case POp::Ite: return "(ite " + smt_term(p.kid(0)) + " " + smt_term(p.kid(1)) + " " + smt_term(p.kid(2)) + ")";
    case POp::App: {
        std::string s = "(m_" + p.fn();
        for (const auto& k : p.kids()) s += " " + smt_term(k);
        return s + ")";
    }
    }
    return "true";
}

namespace {

void collect_decls(const Pred& p, std::set<Ident>& vars, std::set<std::string>& fns) {
    for (const auto& x : free_vars(p)) vars.insert(x);
    std::vector<Pred> apps;
    collect_apps(p, apps);
    for (const auto& a : apps) fns.insert(a.fn());
}

} // namespace

std::string declarations(const SortEnv& consts, const std::vector<Pred>& ps, const MeasureSigs& ms) {
    std::set<Ident> vars;
    std::set<std::string> fns;
    for (const auto& p : ps) collect_decls(p, vars, fns);
    std::set<std::string> sorts;
    std::vector<std::string> lines;
    auto sort_of_var = [&](const Ident& x) {
        auto it = consts.find(x);
        return it != consts.end() ? it->second : Sort::integer();
    };
    for (const auto& x : vars) {
        Sort s = sort_of_var(x);
        if (s.kind == Sort::Kind::Data) sorts.insert(s.smt());
    }
    for (const auto& f : fns) {
        auto it = ms.find(f);
        if (it != ms.end()) sorts.insert(it->second.arg.smt());
    }
    std::ostringstream os;
    for (const auto& s : sorts) os << "(declare-sort " << s << " 0)\n";
    for (const auto& f : fns) {
        auto it = ms.find(f);
        if (it == ms.end()) fail(ErrorKind::Internal, {}, "undeclared measure '" + f + "' in a query");
        os << "(declare-fun m_" << f << " (" << it->second.arg.smt() << ") " << it->second.result.smt() << ")\n";
    }
    for (const auto& x : vars) os << "(declare-const " << x.smt_name() << " " << sort_of_var(x).smt() << ")\n";
    return os.str();
}

std::string emit_script(const Query& q, const MeasureSigs& ms) {
    std::ostringstream os;
    os << "(set-logic QF_UFLIA)\n";
    os << declarations(q.consts, {q.hyp, q.goal}, ms);
    os << "(assert " << smt_term(q.hyp) << ")\n";
    os << "(assert (not " << smt_term(q.goal) << "))\n";
    os << "(check-sat)\n";
    return os.str();
}

bool fast_valid(const Pred& hyp, const Pred& goal) {
    if (goal.is_true() || hyp.is_false()) return true;
    auto hs = conjuncts(hyp);
    if (std::find(hs.begin(), hs.end(), Pred::ff()) != hs.end()) return true;
    for (const auto& g : conjuncts(goal))
        if (!g.is_true() && std::find(hs.begin(), hs.end(), g) == hs.end()) return false;
    return true;
}

} // namespace lm
