#include "lm/cgen.hpp"

#include <algorithm>
#include <sstream>

namespace lm {

Env Env::bind(const Ident& x, const RTypePtr& t) const {
    Env e;
    auto n = std::make_shared<Node>();
    n->parent = node_;
    n->e.x = x;
    n->e.t = t;
    n->depth = size() + 1;
    e.node_ = n;
    return e;
}

Env Env::guard(const Pred& p) const {
    if (p.is_true()) return *this;
    Env e;
    auto n = std::make_shared<Node>();
    n->parent = node_;
    n->e.is_guard = true;
    n->e.guard = p;
    n->depth = size() + 1;
    e.node_ = n;
    return e;
}

const RTypePtr* Env::lookup(const Ident& x) const {
    for (const Node* n = node_.get(); n; n = n->parent.get())
        if (!n->e.is_guard && n->e.x == x) return &n->e.t;
    return nullptr;
}

std::vector<Env::Entry> Env::entries() const {
    std::vector<Entry> out;
    for (const Node* n = node_.get(); n; n = n->parent.get()) out.push_back(n->e);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::pair<Ident, Sort>> Env::scope() const {
    std::vector<std::pair<Ident, Sort>> out;
    for (const auto& e : entries())
        if (!e.is_guard && e.t->is_base()) out.emplace_back(e.x, e.t->base.sort());
    return out;
}

namespace {

int next_kvar(const std::map<int, KVarInfo>& kvars) { return kvars.empty() ? 1 : kvars.rbegin()->first + 1; }

Pred self_pred(const Sort& s, const Pred& term) {
    return s.kind == Sort::Kind::Bool ? Pred::iff(Pred::vv(), term) : Pred::eq(Pred::vv(), term);
}

std::optional<Pred> prim_term(const std::string& n, const std::vector<Pred>& a) {
    if (n == "not" && a.size() == 1) return Pred::lnot(a[0]);
    if (a.size() != 2) return std::nullopt;
    if (n == "+") return Pred::add(a[0], a[1]);
    if (n == "-") return Pred::sub(a[0], a[1]);
    if (n == "*") {
        if (a[0].op() != POp::Int && a[1].op() != POp::Int) return std::nullopt;
        return Pred::mul(a[0], a[1]);
    }
    if (n == "&&") return Pred::conj(a[0], a[1]);
    if (n == "||") return Pred::disj(a[0], a[1]);
    if (n == "max") return Pred::ite(Pred::cmp(POp::Ge, a[0], a[1]), a[0], a[1]);
    if (n == "min") return Pred::ite(Pred::cmp(POp::Le, a[0], a[1]), a[0], a[1]);
    static const std::map<std::string, POp> rel = {{"==", POp::Eq}, {"/=", POp::Ne}, {"<", POp::Lt},
                                                   {"<=", POp::Le}, {">", POp::Gt},  {">=", POp::Ge}};
    if (auto it = rel.find(n); it != rel.end()) return Pred::cmp(it->second, a[0], a[1]);
    return std::nullopt;
}

// Attach binders to a function shape and refine its final result.
RTypePtr with_binders(const RTypePtr& shape, const std::vector<Ident>& xs, size_t i,
                      const std::function<Pred(const Sort&)>& result) {
    if (shape->is_fun() && i < xs.size())
        return rfun(xs[i], shape->dom, with_binders(shape->rng, xs, i + 1, result));
    if (shape->is_base()) return with_pred(shape, result(shape->base.sort()));
    return shape;
}

// Simultaneous instantiation of the leading foralls.
RTypePtr instantiate_with(const RTypePtr& poly, const std::map<std::string, RTypePtr>& args) {
    std::vector<std::string> vars;
    RTypePtr body = strip_foralls(poly, &vars);
    std::vector<std::pair<std::string, RTypePtr>> tmp;
    for (size_t i = 0; i < vars.size(); ++i) {
        std::string ph = "%" + std::to_string(i);
        body = subst_tyvar(body, vars[i], rbase(BaseType::tyvar(ph)));
        auto it = args.find(vars[i]);
        tmp.emplace_back(ph, it != args.end() ? it->second : rbase(BaseType::tyvar(vars[i])));
    }
    for (const auto& [ph, r] : tmp) body = subst_tyvar(body, ph, r);
    return body;
}

} // namespace

RTypePtr prim_rtype(const std::string& name) {
    auto s = prim_scheme(name);
    if (!s) return nullptr;
    std::vector<Ident> xs = {Ident::fresh("x"), Ident::fresh("y")};
    RTypePtr body = with_binders(s->body, xs, 0, [&](const Sort& rs) {
        std::vector<Pred> args;
        for (size_t i = 0; i < (name == "not" ? 1u : 2u); ++i) args.push_back(Pred::var(xs[i]));
        auto t = prim_term(name, args);
        return t ? self_pred(rs, *t) : Pred::tt();
    });
    for (auto it = s->vars.rbegin(); it != s->vars.rend(); ++it) body = rforall(*it, body);
    return body;
}

RTypePtr fresh_template(const RTypePtr& shape, const Env& env, std::map<int, KVarInfo>& kvars, const Loc& loc) {
    std::function<RTypePtr(const RTypePtr&, const std::vector<std::pair<Ident, Sort>>&)> go =
        [&](const RTypePtr& t, const std::vector<std::pair<Ident, Sort>>& scope) -> RTypePtr {
        switch (t->kind) {
        case RType::Kind::Base: {
            BaseType b = t->base;
            for (auto& a : b.args) a = go(a, scope);
            int k = next_kvar(kvars);
            kvars[k] = KVarInfo{k, t->base.sort(), scope, loc};
            return rbase(std::move(b), Pred::kvar(k));
        }
        case RType::Kind::Fun: {
            Ident x = Ident::fresh(t->binder.name.empty() ? "x" : t->binder.name);
            RTypePtr dom = go(t->dom, scope);
            auto inner = scope;
            if (dom->is_base()) inner.emplace_back(x, dom->base.sort());
            return rfun(x, dom, go(t->rng, inner));
        }
        case RType::Kind::Forall: return rforall(t->tyvar, go(t->body, scope));
        }
        return t;
    };
    return go(shape, env.scope());
}

std::vector<Constraint> split_subtype(const Env& env, const RTypePtr& t1, const RTypePtr& t2, const Loc& loc,
                                      const std::string& rule) {
    std::vector<Constraint> out;
    std::function<void(const Env&, const RTypePtr&, const RTypePtr&)> go = [&](const Env& g, const RTypePtr& a,
                                                                               const RTypePtr& b) {
        if (a->is_forall() || b->is_forall()) {
            std::vector<std::string> va, vb;
            RTypePtr ba = strip_foralls(a, &va), bb = strip_foralls(b, &vb);
            std::map<std::string, RTypePtr> ren;
            for (size_t i = 0; i < va.size() && i < vb.size(); ++i) ren[va[i]] = rbase(BaseType::tyvar(vb[i]));
            go(g, instantiate_with(a, ren), bb);
            return;
        }
        if (a->is_fun() && b->is_fun()) {
            go(g, b->dom, a->dom);
            Env g2 = b->dom->is_base() ? g.bind(b->binder, b->dom) : g;
            RTypePtr ar = a->binder == b->binder ? a->rng : subst_type(a->rng, {{a->binder, Pred::var(b->binder)}});
            go(g2, ar, b->rng);
            return;
        }
        if (!a->is_base() || !b->is_base() || a->base.args.size() != b->base.args.size())
            fail(ErrorKind::Internal, loc, "subtyping between different shapes: " + render(a) + " and " + render(b));
        for (size_t i = 0; i < a->base.args.size(); ++i) go(g, a->base.args[i], b->base.args[i]);
        Sort s = a->base.sort();
        std::vector<Pred> concrete;
        for (const auto& q : conjuncts(b->pred)) {
            if (q.is_true()) continue;
            if (q.is_kvar())
                out.push_back({0, g, a->pred, q, s, loc, rule});
            else
                concrete.push_back(q);
        }
        if (!concrete.empty()) out.push_back({0, g, a->pred, Pred::conj(concrete), s, loc, rule});
    };
    go(env, t1, t2);
    return out;
}

namespace {

using core::Expr;
using core::ExprPtr;
using K = Expr::Kind;

class Gen {
public:
    Gen(const core::Program& p, const ShapeInfo& s, const MeasureEnv& m) : prog_(p), sh_(s), me_(m) {}

    CGen run();

private:
    const core::Program& prog_;
    const ShapeInfo& sh_;
    const MeasureEnv& me_;
    CGen out_;
    std::map<int, std::string> top_kind_;  // ident id -> "measure"/"inline"

    void emit(std::vector<Constraint> cs) {
        for (auto& c : cs) {
            c.id = static_cast<int>(out_.constraints.size()) + 1;
            out_.constraints.push_back(std::move(c));
        }
    }
    void sub(const Env& g, const RTypePtr& a, const RTypePtr& b, const Loc& loc, const std::string& rule) {
        emit(split_subtype(g, a, b, loc, rule));
    }
    RTypePtr templ(const RTypePtr& shape, const Env& g, const Loc& loc) {
        return fresh_template(shape, g, out_.kvars, loc);
    }
    RTypePtr shape_of(const ExprPtr& e) {
        auto it = sh_.expr.find(e->id);
        if (it == sh_.expr.end()) fail(ErrorKind::Internal, e->loc, "expression without a shape");
        return it->second;
    }

    RTypePtr instantiate(const RTypePtr& poly, const ExprPtr& occ, const Env& g) {
        if (!poly->is_forall()) return poly;
        std::map<std::string, RTypePtr> args;
        if (auto it = sh_.inst.find(occ->id); it != sh_.inst.end())
            for (const auto& [n, s] : it->second) args[n] = templ(s, g, occ->loc);
        return instantiate_with(poly, args);
    }

    RTypePtr ctor_rtype(const std::string& c, const Loc& loc) {
        auto ci = prog_.ctor(c);
        if (!ci) fail(ErrorKind::Internal, loc, "unknown constructor " + c);
        const auto& d = *ci->first;
        const auto& cd = d.ctors[ci->second];
        return core::ctor_type(d, cd, me_.ctor_refinement(d, cd));
    }

    std::string callee_name(const ExprPtr& f) {
        if (f->kind == K::Var) return f->var.name;
        if (f->kind == K::Con) return f->con;
        return "function";
    }

    std::optional<Pred> pure(const Env& g, const ExprPtr& e);
    std::pair<Env, RTypePtr> synth(const Env& g, const ExprPtr& e);
    std::pair<Env, RTypePtr> synth_app(const Env& g, const ExprPtr& e);
    std::pair<Env, RTypePtr> synth_bind(const Env& g, const Ident& x, const ExprPtr& rhs);
    Env bind_letrec(const Env& g, const std::vector<core::Bind>& bs);
    void check(const Env& g, const ExprPtr& e, const RTypePtr& t);
    void check_case(const Env& g, const ExprPtr& e, const RTypePtr& t);
    Env unfold(const Env& g, const Pred& x, const RTypePtr& tx, const core::Alt& alt, const Loc& loc);
    void pat_error(const Env& g, const ExprPtr& e);
    std::pair<Env, Pred> guard_of(const Env& g, const ExprPtr& c);
};

std::optional<Pred> Gen::pure(const Env& g, const ExprPtr& e) {
    switch (e->kind) {
    case K::Int: return Pred::lit(e->ival);
    case K::Bool: return Pred::boolean(e->bval);
    case K::Var:
        if (!e->var.resolved()) return std::nullopt;
        if (const RTypePtr* t = g.lookup(e->var); t && (*t)->is_base()) return Pred::var(e->var);
        return std::nullopt;
    case K::App: {
        const auto& f = e->kids[0];
        if (f->kind != K::Var) return std::nullopt;
        std::vector<Pred> args;
        for (size_t i = 1; i < e->kids.size(); ++i) {
            auto a = pure(g, e->kids[i]);
            if (!a) return std::nullopt;
            args.push_back(*a);
        }
        if (!f->var.resolved()) return prim_term(f->var.name, args);
        auto k = top_kind_.find(f->var.id);
        if (k == top_kind_.end() || g.lookup(f->var) == nullptr) return std::nullopt;
        if (k->second == "measure" && args.size() == 1) return Pred::app(f->var.name, args);
        if (k->second == "inline") {
            const auto& fn = prog_.inlines.at(f->var.name);
            if (fn.params.size() != args.size()) return std::nullopt;
            return core::expand_inlines(Pred::app(fn.name, args), prog_.inlines);
        }
        return std::nullopt;
    }
    default: return std::nullopt;
    }
}

std::pair<Env, Pred> Gen::guard_of(const Env& g, const ExprPtr& c) {
    if (auto p = pure(g, c)) return {g, *p};
    auto [g1, s] = synth(g, c);
    Ident z = Ident::fresh("cond");
    return {g1.bind(z, s), Pred::var(z)};
}

void Gen::pat_error(const Env& g, const ExprPtr& e) {
    emit({{0, g, Pred::tt(), Pred::ff(), Sort::integer(), e->loc, "patError " + e->message}});
}

std::pair<Env, RTypePtr> Gen::synth(const Env& g, const ExprPtr& e) {
    switch (e->kind) {
    case K::Int:
    case K::Bool:
    case K::App:
        if (auto p = pure(g, e)) {
            RTypePtr s = shape_of(e);
            if (s->is_base()) return {g, with_pred(s, self_pred(s->base.sort(), *p))};
        }
        if (e->kind == K::App) return synth_app(g, e);
        fail(ErrorKind::Internal, e->loc, "literal without a logic term");
    case K::Var: {
        if (!e->var.resolved()) {
            RTypePtr p = prim_rtype(e->var.name);
            if (!p) fail(ErrorKind::Internal, e->loc, "unknown primitive " + e->var.name);
            return {g, instantiate(p, e, g)};
        }
        const RTypePtr* t = g.lookup(e->var);
        if (!t) fail(ErrorKind::Internal, e->loc, "unbound '" + e->var.name + "' during constraint generation");
        if ((*t)->is_base()) return {g, with_pred(*t, self_pred((*t)->base.sort(), Pred::var(e->var)))};
        return {g, instantiate(*t, e, g)};
    }
    case K::Con: return {g, instantiate(ctor_rtype(e->con, e->loc), e, g)};
    case K::Let: {
        auto [g1, t1] = synth_bind(g, e->var, e->kids[0]);
        return synth(g1.bind(e->var, t1), e->kids[1]);
    }
    case K::LetRec: return synth(bind_letrec(g, e->binds), e->kids[0]);
    case K::Lam:
    case K::If:
    case K::Case: {
        RTypePtr t = templ(shape_of(e), g, e->loc);
        check(g, e, t);
        return {g, t};
    }
    case K::PatError: {
        pat_error(g, e);
        RTypePtr s = shape_of(e);
        return {g, s->is_base() ? with_pred(s, Pred::ff()) : s};
    }
    }
    fail(ErrorKind::Internal, e->loc, "unhandled expression");
}

std::pair<Env, RTypePtr> Gen::synth_app(const Env& g0, const ExprPtr& e) {
    auto [g, ft] = synth(g0, e->kids[0]);
    std::string fname = callee_name(e->kids[0]);
    for (size_t i = 1; i < e->kids.size(); ++i) {
        const ExprPtr& a = e->kids[i];
        if (!ft->is_fun()) fail(ErrorKind::Internal, e->loc, "application of a non-function");
        std::string rule = "argument " + std::to_string(i) + " of '" + fname + "'";
        const RTypePtr& dom = ft->dom;
        if (!dom->is_base()) {
            check(g, a, dom);
            ft = ft->rng;
            continue;
        }
        if (auto p = pure(g, a)) {
            auto [g1, s] = synth(g, a);
            sub(g1, s, dom, e->loc, rule);
            ft = subst_type(ft->rng, {{ft->binder, *p}});
            continue;
        }
        Ident z = Ident::fresh("arg");
        if (a->kind == K::Lam || a->kind == K::If || a->kind == K::Case) {
            check(g, a, dom);
            g = g.bind(z, dom);
        } else {
            auto [g1, s] = synth(g, a);
            sub(g1, s, dom, e->loc, rule);
            g = g1.bind(z, s);
        }
        ft = subst_type(ft->rng, {{ft->binder, Pred::var(z)}});
    }
    return {g, ft};
}

std::pair<Env, RTypePtr> Gen::synth_bind(const Env& g, const Ident& x, const ExprPtr& rhs) {
    auto it = sh_.poly.find(x.id);
    if (it != sh_.poly.end() && !it->second.vars.empty()) {
        RTypePtr t = templ(it->second.body, g, rhs->loc);
        check(g, rhs, t);
        for (auto v = it->second.vars.rbegin(); v != it->second.vars.rend(); ++v) t = rforall(*v, t);
        return {g, t};
    }
    return synth(g, rhs);
}

Env Gen::bind_letrec(const Env& g, const std::vector<core::Bind>& bs) {
    std::vector<RTypePtr> ts;
    Env g1 = g;
    for (const auto& b : bs) {
        RTypePtr t;
        auto it = sh_.poly.find(b.name.id);
        if (it != sh_.poly.end()) {
            t = templ(it->second.body, g, b.loc);
            ts.push_back(t);
            for (auto v = it->second.vars.rbegin(); v != it->second.vars.rend(); ++v) t = rforall(*v, t);
        } else {
            auto bt = sh_.binder.find(b.name.id);
            if (bt == sh_.binder.end()) fail(ErrorKind::Internal, b.loc, "no shape for '" + b.name.name + "'");
            t = templ(bt->second, g, b.loc);
            ts.push_back(t);
        }
        g1 = g1.bind(b.name, t);
    }
    for (size_t i = 0; i < bs.size(); ++i) check(g1, bs[i].body, ts[i]);
    return g1;
}

void Gen::check(const Env& g, const ExprPtr& e, const RTypePtr& t) {
    if (t->is_forall()) return check(g, e, strip_foralls(t));
    switch (e->kind) {
    case K::Lam: {
        if (!t->is_fun()) fail(ErrorKind::Internal, e->loc, "lambda checked against " + render(t));
        Env g1 = g.bind(e->var, t->dom);
        RTypePtr rng = t->binder == e->var ? t->rng : subst_type(t->rng, {{t->binder, Pred::var(e->var)}});
        return check(g1, e->kids[0], rng);
    }
    case K::Let: {
        auto [g1, t1] = synth_bind(g, e->var, e->kids[0]);
        return check(g1.bind(e->var, t1), e->kids[1], t);
    }
    case K::LetRec: return check(bind_letrec(g, e->binds), e->kids[0], t);
    case K::If: {
        auto [g1, c] = guard_of(g, e->kids[0]);
        check(g1.guard(c), e->kids[1], t);
        check(g1.guard(Pred::lnot(c)), e->kids[2], t);
        return;
    }
    case K::Case: return check_case(g, e, t);
    case K::PatError: return pat_error(g, e);
    default: {
        auto [g1, s] = synth(g, e);
        sub(g1, s, t, e->loc, "subtype");
    }
    }
}

void Gen::check_case(const Env& g, const ExprPtr& e, const RTypePtr& t) {
    const ExprPtr& scrut = e->kids[0];
    Env g1 = g;
    Pred x;
    RTypePtr tx;
    const RTypePtr* bound = scrut->kind == K::Var && scrut->var.resolved() ? g.lookup(scrut->var) : nullptr;
    if (bound && (*bound)->is_base()) {
        x = Pred::var(scrut->var);
        tx = *bound;
    } else {
        auto [g2, s] = synth(g, scrut);
        Ident z = Ident::fresh("scrut");
        g1 = g2.bind(z, s);
        x = Pred::var(z);
        tx = s;
    }
    for (const auto& alt : e->alts) {
        if (alt.con.empty()) {
            check(g1, alt.body, t);
            continue;
        }
        check(unfold(g1, x, tx, alt, alt.loc), alt.body, t);
    }
}

Env Gen::unfold(const Env& g, const Pred& x, const RTypePtr& tx, const core::Alt& alt, const Loc& loc) {
    auto ci = prog_.ctor(alt.con);
    if (!ci || !tx->is_base() || tx->base.kind != BaseType::Kind::TyCon)
        fail(ErrorKind::Internal, loc, "case on a non-datatype");
    const auto& d = *ci->first;
    const auto& c = d.ctors[ci->second];
    std::map<std::string, RTypePtr> targs;
    for (size_t i = 0; i < d.params.size() && i < tx->base.args.size(); ++i) targs[d.params[i]] = tx->base.args[i];
    Subst fs;
    for (size_t i = 0; i < c.fields.size() && i < alt.fields.size(); ++i)
        fs.emplace_back(c.fields[i].first, Pred::var(alt.fields[i]));
    Env g1 = g;
    for (size_t i = 0; i < c.fields.size() && i < alt.fields.size(); ++i) {
        RTypePtr ft = c.fields[i].second;
        RTypePtr poly = ft;
        for (auto it = d.params.rbegin(); it != d.params.rend(); ++it) poly = rforall(*it, poly);
        ft = subst_type(instantiate_with(poly, targs), fs);
        g1 = g1.bind(alt.fields[i], ft);
    }
    Subst s = fs;
    s.emplace_back(Ident::vv(), x);
    return g1.guard(subst(me_.ctor_refinement(d, c), s));
}

CGen Gen::run() {
    for (const auto& b : prog_.binds) {
        if (b.is_measure) top_kind_[b.name.id] = "measure";
        else if (b.is_inline) top_kind_[b.name.id] = "inline";
    }
    Env top;
    std::vector<RTypePtr> checked;
    for (const auto& b : prog_.binds) {
        const Scheme& sc = sh_.poly.at(b.name.id);
        RTypePtr assumed, against;
        auto wrap = [&](RTypePtr t, const std::vector<std::string>& vars) {
            for (auto v = vars.rbegin(); v != vars.rend(); ++v) t = rforall(*v, t);
            return t;
        };
        if (b.is_measure) {
            std::vector<std::string> vars;
            RTypePtr body = b.sig ? strip_foralls(b.sig, &vars) : sc.body;
            if (!b.sig) vars = sc.vars;
            Ident t = body->binder.resolved() ? body->binder : Ident::fresh("t");
            RTypePtr rng = body->rng;
            Pred m = Pred::app(b.name.name, {Pred::var(t)});
            RTypePtr fn = rfun(t, body->dom, strengthen(rng, self_pred(rng->base.sort(), m)));
            assumed = wrap(fn, vars);
            against = b.sig ? b.sig : wrap(sc.body, vars);
        } else if (b.sig) {
            assumed = against = b.sig;
        } else if (b.is_inline) {
            const auto& fn = prog_.inlines.at(b.name.name);
            RTypePtr body = with_binders(sc.body, fn.params, 0, [&](const Sort& rs) { return self_pred(rs, core::expand_inlines(fn.body, prog_.inlines)); });
            assumed = against = wrap(body, sc.vars);
        } else {
            assumed = against = wrap(templ(sc.body, top, b.loc), sc.vars);
        }
        top = top.bind(b.name, assumed);
        checked.push_back(against);
        out_.top.emplace_back(b.name, assumed);
    }
    for (size_t i = 0; i < prog_.binds.size(); ++i) check(top, prog_.binds[i].body, checked[i]);
    return std::move(out_);
}

} // namespace

CGen generate(const core::Program& prog, const ShapeInfo& shapes, const MeasureEnv& measures) {
    Gen g(prog, shapes, measures);
    return g.run();
}

std::string render_constraint(const Constraint& c) {
    std::ostringstream os;
    os << c.loc.str() << " ⊢ ";
    bool first = true;
    for (const auto& e : c.env.entries()) {
        std::string item;
        if (e.is_guard) item = e.guard.str();
        else if (e.t->is_base()) item = e.x.name + ":" + render(e.t);
        else continue;
        os << (first ? "" : ", ") << item;
        first = false;
    }
    std::string b = c.sort.kind == Sort::Kind::Data || c.sort.kind == Sort::Kind::TyVar ? c.sort.name : c.sort.str();
    os << " |- {v:" << b << " | " << c.lhs.str() << "} <: {v:" << b << " | " << c.rhs.str() << "}";
    return os.str();
}

} // namespace lm
