#include "lm/measure.hpp"

#include <algorithm>
#include <set>

namespace lm {

const MeasureDecl* MeasureEnv::find(const std::string& name) const {
    for (const auto& m : measures)
        if (m.name == name) return &m;
    return nullptr;
}

std::vector<ConstructorAxiom> MeasureEnv::axioms(const core::DataDecl& d, const core::CtorDecl& c) const {
    std::vector<ConstructorAxiom> out;
    for (const auto& m : measures) {
        if (m.datatype != d.name) continue;
        for (const auto& eq : m.eqs) {
            if (eq.ctor != c.name) continue;
            Subst s;
            for (size_t i = 0; i < eq.vars.size() && i < c.fields.size(); ++i)
                s.emplace_back(eq.vars[i], Pred::var(c.fields[i].first));
            Pred lhs = Pred::app(m.name, {Pred::vv()});
            Pred rhs = subst(eq.rhs, s);
            Pred ax = m.result.kind == Sort::Kind::Bool ? Pred::iff(lhs, rhs) : Pred::eq(lhs, rhs);
            out.push_back({c.name, m.name, ax});
        }
    }
    return out;
}

Pred MeasureEnv::ctor_refinement(const core::DataDecl& d, const core::CtorDecl& c) const {
    std::vector<Pred> ps;
    for (const auto& a : axioms(d, c)) ps.push_back(a.axiom);
    return Pred::conj(ps);
}

Pred MeasureEnv::side_condition(const Pred& app) const {
    if (app.op() != POp::App || app.kids().size() != 1) return Pred::tt();
    const MeasureDecl* m = find(app.fn());
    if (!m || m->result_refinement.is_true()) return Pred::tt();
    return subst(m->result_refinement, {{Ident::vv(), app}, {m->arg, app.kid(0)}});
}

std::vector<Pred> MeasureEnv::side_conditions(const Pred& p) const { return side_conditions(std::vector<Pred>{p}); }

std::vector<Pred> MeasureEnv::side_conditions(const std::vector<Pred>& ps) const {
    std::vector<Pred> out;
    std::vector<Pred> seen;
    std::vector<Pred> todo;
    for (const auto& p : ps) collect_apps(p, todo);
    while (!todo.empty() && seen.size() < 256) {
        Pred a = todo.back();
        todo.pop_back();
        if (std::find(seen.begin(), seen.end(), a) != seen.end()) continue;
        seen.push_back(a);
        Pred sc = side_condition(a);
        if (sc.is_true()) continue;
        out.push_back(sc);
        collect_apps(sc, todo);
    }
    return out;
}

namespace {

[[noreturn]] void mfail(const Loc& loc, const std::string& msg) { fail(ErrorKind::Measure, loc, msg); }

// Measure right-hand side in the logic fragment.
Pred to_logic(const core::ExprPtr& e, const std::string& self, const std::set<int>& pattern_vars,
              const std::set<std::string>& measures, const std::map<std::string, const core::TopBind*>& tops) {
    using K = core::Expr::Kind;
    auto rec = [&](const core::ExprPtr& x) { return to_logic(x, self, pattern_vars, measures, tops); };
    switch (e->kind) {
    case K::Int: return Pred::lit(e->ival);
    case K::Bool: return Pred::boolean(e->bval);
    case K::Var:
        if (pattern_vars.count(e->var.id)) return Pred::var(e->var);
        mfail(e->loc, "'" + e->var.name + "' is not a pattern variable of the equation");
    case K::If: return Pred::ite(rec(e->kids[0]), rec(e->kids[1]), rec(e->kids[2]));
    case K::App: {
        const auto& f = e->kids[0];
        if (f->kind != K::Var) break;
        std::vector<Pred> args;
        for (size_t i = 1; i < e->kids.size(); ++i) args.push_back(rec(e->kids[i]));
        const std::string& n = f->var.name;
        if (!f->var.resolved()) {
            if (args.size() == 1 && n == "not") return Pred::lnot(args[0]);
            if (args.size() != 2) break;
            const Pred& a = args[0];
            const Pred& b = args[1];
            if (n == "+") return Pred::add(a, b);
            if (n == "-") return Pred::sub(a, b);
            if (n == "*") {
                if (a.op() != POp::Int && b.op() != POp::Int) mfail(e->loc, "nonlinear multiplication in measure");
                return Pred::mul(a, b);
            }
            if (n == "&&") return Pred::conj(a, b);
            if (n == "||") return Pred::disj(a, b);
            if (n == "max") return Pred::ite(Pred::cmp(POp::Ge, a, b), a, b);
            if (n == "min") return Pred::ite(Pred::cmp(POp::Le, a, b), a, b);
            static const std::map<std::string, POp> rel = {{"==", POp::Eq}, {"/=", POp::Ne}, {"<", POp::Lt},
                                                           {"<=", POp::Le}, {">", POp::Gt},  {">=", POp::Ge}};
            if (auto it = rel.find(n); it != rel.end()) return Pred::cmp(it->second, a, b);
            break;
        }
        if (measures.count(n) && args.size() == 1) {
            const auto& arg = e->kids[1];
            if (n == self && !(arg->kind == K::Var && pattern_vars.count(arg->var.id)))
                mfail(e->loc, "recursive call of measure '" + self + "' must be applied to a pattern variable");
            return Pred::app(n, std::move(args));
        }
        break;
    }
    default: break;
    }
    mfail(e->loc, "right-hand side of measure '" + self + "' is outside the logic");
}

} // namespace

MeasureDecl check_measure(const core::Program& prog, const std::vector<const syn::Decl*>& eqs,
                          const core::TopBind& bind, const ShapeInfo& shapes) {
    const std::string& name = bind.name.name;
    MeasureDecl m;
    m.name = name;
    m.loc = bind.loc;

    // Argument datatype and result sort.
    RTypePtr ty = bind.sig ? strip_foralls(bind.sig) : shapes.poly.at(bind.name.id).body;
    if (!ty->is_fun() || !ty->rng->is_base() || !ty->dom->is_base() || ty->dom->base.kind != BaseType::Kind::TyCon)
        mfail(bind.loc, "measure '" + name + "' must map a datatype to Int or Bool");
    m.datatype = ty->dom->base.name;
    m.arg = ty->binder.resolved() ? ty->binder : Ident::fresh("t");
    if (ty->rng->base.kind == BaseType::Kind::Int)
        m.result = Sort::integer();
    else if (ty->rng->base.kind == BaseType::Kind::Bool)
        m.result = Sort::boolean();
    else
        mfail(bind.loc, "measure '" + name + "' must return Int or Bool");
    m.result_refinement = ty->rng->pred;
    const core::DataDecl* d = prog.data(m.datatype);
    if (!d) mfail(bind.loc, "unknown datatype '" + m.datatype + "'");

    // Restriction 1: exactly one equation per constructor.
    std::map<std::string, const syn::Decl*> by_ctor;
    for (const auto* e : eqs) {
        if (e->pats.size() != 1) mfail(e->loc, "measure '" + name + "' must take exactly one argument");
        if (!e->rhs.guards.empty() || !e->rhs.where.empty())
            mfail(e->loc, "measure equations cannot use guards or where");
        auto p = e->pats[0];
        std::string c;
        std::vector<syn::PatPtr> args;
        if (p->kind == syn::Pattern::Kind::Con) {
            c = p->name;
            args = p->args;
        } else if (p->kind == syn::Pattern::Kind::List && p->args.empty()) {
            c = "[]";
        } else if (p->kind == syn::Pattern::Kind::Tuple) {
            c = "(,)";
            args = p->args;
        } else {
            mfail(e->loc, "measure equations must match a single constructor");
        }
        for (const auto& a : args)
            if (a->kind != syn::Pattern::Kind::Var && a->kind != syn::Pattern::Kind::Wild)
                mfail(a->loc, "measure patterns may only bind variables");
        auto ci = prog.ctor(c);
        if (!ci || ci->first != d) mfail(e->loc, "'" + c + "' is not a constructor of " + m.datatype);
        if (!by_ctor.emplace(c, e).second) mfail(e->loc, "duplicate equation for constructor '" + c + "'");
    }
    for (const auto& c : d->ctors)
        if (!by_ctor.count(c.name))
            mfail(bind.loc, "measure '" + name + "': missing equation for constructor '" + c.name + "'");

    // Right-hand sides from the desugared case, in declaration order.
    std::vector<Ident> params;
    core::ExprPtr body = core::lam_body(bind.body, &params);
    if (params.size() != 1 || body->kind != core::Expr::Kind::Case)
        mfail(bind.loc, "measure '" + name + "' must be defined by cases on its argument");
    std::set<std::string> measure_names;
    for (const auto& ms : prog.measures) measure_names.insert(ms.name);
    std::map<std::string, const core::TopBind*> tops;
    for (const auto& b : prog.binds) tops[b.name.name] = &b;
    for (const auto& alt : body->alts) {
        std::set<int> pv;
        for (const auto& f : alt.fields) pv.insert(f.id);
        MeasureEq eq;
        eq.ctor = alt.con;
        eq.vars = alt.fields;
        eq.rhs = to_logic(alt.body, name, pv, measure_names, tops);
        m.eqs.push_back(std::move(eq));
    }
    return m;
}

MeasureEnv compile_measures(const core::Program& prog, const syn::SourceFile& sf, const ShapeInfo& shapes) {
    MeasureEnv env;
    for (const auto& ms : prog.measures) {
        std::vector<const syn::Decl*> eqs;
        for (const auto& it : sf.items)
            if (it.kind == syn::Item::Kind::Decl && it.decl.name == ms.name) eqs.push_back(&it.decl);
        const core::TopBind* b = prog.bind(ms.name);
        if (!b) fail(ErrorKind::Measure, ms.loc, "measure '" + ms.name + "' has no equations");
        env.measures.push_back(check_measure(prog, eqs, *b, shapes));
    }
    return env;
}

} // namespace lm
