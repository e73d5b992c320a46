#include "lm/desugar.hpp"

#include <algorithm>
#include <functional>

namespace lm {

using core::ExprPtr;

namespace {

const std::set<std::string> kPrims = {"+", "-", "*", "==", "/=", "<", "<=", ">", ">=", "&&", "||", "not", "max", "min"};

using Scope = std::map<std::string, Ident>;
// What is known about scrutinised variables on the current path.
using Knowledge = std::map<int, std::pair<std::string, std::vector<Ident>>>;
using FailK = std::function<ExprPtr(const Knowledge&)>;
using BodyK = std::function<ExprPtr(const Scope&, const Knowledge&, const FailK&)>;

struct Row {
    std::vector<syn::PatPtr> pats;
    Loc loc;
    BodyK body;
    int used = 0;
};

// Syntactic over-approximation of the names an expression mentions.
void uses_of(const syn::ExprPtr& e, std::set<std::string>& out);

void uses_of_rhs(const syn::Rhs& r, std::set<std::string>& out) {
    for (const auto& [g, b] : r.guards) {
        uses_of(g, out);
        uses_of(b, out);
    }
    if (r.plain) uses_of(r.plain, out);
    for (const auto& d : r.where) uses_of_rhs(d.rhs, out);
}

void uses_of(const syn::ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == syn::Expr::Kind::Var) out.insert(e->name);
    for (const auto& k : e->kids) uses_of(k, out);
    for (const auto& a : e->alts) uses_of_rhs(a.rhs, out);
    for (const auto& d : e->decls) uses_of_rhs(d.rhs, out);
    for (const auto& q : e->quals) uses_of(q.expr, out);
}

void pattern_vars(const syn::PatPtr& p, std::vector<std::string>& out) {
    if (p->kind == syn::Pattern::Kind::Var || p->kind == syn::Pattern::Kind::As) out.push_back(p->name);
    for (const auto& a : p->args) pattern_vars(a, out);
}

// A local definition group from `where` or `let`.
struct LocalDef {
    std::vector<std::string> names;
    std::set<std::string> uses;
    std::vector<const syn::Decl*> eqs;  // function/value equations
    const syn::Decl* patbind = nullptr;
    Loc loc;
};

std::vector<LocalDef> group_locals(const std::vector<syn::Decl>& decls) {
    std::vector<LocalDef> out;
    for (const auto& d : decls) {
        if (d.kind == syn::Decl::Kind::Sig) continue;
        if (d.kind == syn::Decl::Kind::PatBind) {
            LocalDef ld;
            pattern_vars(d.pats[0], ld.names);
            uses_of_rhs(d.rhs, ld.uses);
            ld.patbind = &d;
            ld.loc = d.loc;
            out.push_back(std::move(ld));
            continue;
        }
        auto it = std::find_if(out.begin(), out.end(), [&](const LocalDef& ld) {
            return !ld.patbind && ld.names[0] == d.name;
        });
        if (it == out.end()) {
            LocalDef ld;
            ld.names = {d.name};
            ld.loc = d.loc;
            out.push_back(std::move(ld));
            it = out.end() - 1;
        }
        it->eqs.push_back(&d);
        uses_of_rhs(d.rhs, it->uses);
        for (const auto& p : d.pats) {
            std::vector<std::string> vs;
            pattern_vars(p, vs);
            for (const auto& v : vs) it->uses.erase(v);
        }
    }
    return out;
}

class Desugarer {
public:
    Desugarer(core::Program& prog, const Scope& top) : prog_(prog), top_(top) {}

    ExprPtr function(const std::string& name, const std::vector<const syn::Decl*>& eqs, const Scope& sc,
                     const Knowledge& k) {
        size_t arity = eqs[0]->pats.size();
        for (const auto* d : eqs)
            if (d->pats.size() != arity)
                fail(ErrorKind::Parse, d->loc, "equations for '" + name + "' have different numbers of arguments");
        Loc loc = eqs[0]->loc;
        if (arity == 0) {
            if (eqs.size() > 1) fail(ErrorKind::Parse, eqs[1]->loc, "duplicate definition of '" + name + "'");
            return rhs(eqs[0]->rhs, sc, k, [&](const Knowledge&) { return core::mk_paterror(name, loc); });
        }
        std::vector<Ident> params;
        for (size_t i = 0; i < arity; ++i) {
            std::string pname;
            for (const auto* d : eqs) {
                const auto& p = d->pats[i];
                if (p->kind == syn::Pattern::Kind::Var || p->kind == syn::Pattern::Kind::As) {
                    pname = p->name;
                    break;
                }
            }
            params.push_back(Ident::fresh(pname.empty() ? "arg" + std::to_string(i + 1) : pname));
        }
        std::vector<Row> rows;
        for (const auto* d : eqs) {
            Row r;
            r.pats = d->pats;
            r.loc = d->loc;
            r.body = [this, d](const Scope& s, const Knowledge& kn, const FailK& f) { return rhs(d->rhs, s, kn, f); };
            rows.push_back(std::move(r));
        }
        ExprPtr body = match_rows(params, rows, 0, sc, k, [&](const Knowledge&) { return core::mk_paterror(name, loc); });
        warn_unused(rows);
        for (auto it = params.rbegin(); it != params.rend(); ++it) body = core::mk_lam(*it, body, loc);
        return body;
    }

    ExprPtr expr(const syn::ExprPtr& e, const Scope& sc, const Knowledge& k) {
        using K = syn::Expr::Kind;
        const Loc& loc = e->loc;
        switch (e->kind) {
        case K::Var: return var(e->name, sc, loc);
        case K::Con:
            if (!prog_.ctor(e->name)) fail(ErrorKind::Shape, loc, "unknown constructor '" + e->name + "'");
            return core::mk_con(e->name, loc);
        case K::Int: return core::mk_int(e->ival, loc);
        case K::Bool: return core::mk_bool(e->bval, loc);
        case K::App: {
            std::vector<ExprPtr> args;
            for (size_t i = 1; i < e->kids.size(); ++i) args.push_back(expr(e->kids[i], sc, k));
            return core::mk_app(expr(e->kids[0], sc, k), std::move(args), loc);
        }
        case K::BinOp: {
            ExprPtr l = expr(e->kids[0], sc, k);
            ExprPtr r = expr(e->kids[1], sc, k);
            if (e->name == "$") return core::mk_app(l, {r}, loc);
            ExprPtr f;
            if (e->name[0] == ':') {
                if (!prog_.ctor(e->name)) fail(ErrorKind::Shape, loc, "unknown constructor '" + e->name + "'");
                f = core::mk_con(e->name, loc);
            } else {
                f = var(e->name, sc, loc);
            }
            return core::mk_app(f, {l, r}, loc);
        }
        case K::Neg: {
            if (e->kids[0]->kind == K::Int) return core::mk_int(-e->kids[0]->ival, loc);
            return core::mk_app(var("-", {}, loc), {core::mk_int(0, loc), expr(e->kids[0], sc, k)}, loc);
        }
        case K::Lam: {
            std::vector<Ident> params;
            for (const auto& p : e->pats)
                params.push_back(Ident::fresh(p->kind == syn::Pattern::Kind::Var ? p->name : "lam"));
            std::vector<Row> rows(1);
            rows[0].pats = e->pats;
            rows[0].loc = loc;
            auto body_e = e->kids[0];
            rows[0].body = [this, body_e](const Scope& s, const Knowledge& kn, const FailK&) {
                return expr(body_e, s, kn);
            };
            ExprPtr body =
                match_rows(params, rows, 0, sc, k, [&](const Knowledge&) { return core::mk_paterror("lambda", loc); });
            for (auto it = params.rbegin(); it != params.rend(); ++it) body = core::mk_lam(*it, body, loc);
            return body;
        }
        case K::If:
            return core::mk_if(expr(e->kids[0], sc, k), expr(e->kids[1], sc, k), expr(e->kids[2], sc, k), loc);
        case K::Case: {
            ExprPtr scrut = expr(e->kids[0], sc, k);
            return bind_var(scrut, "scrut", [&](const Ident& x) {
                std::vector<Row> rows;
                for (const auto& a : e->alts) {
                    Row r;
                    r.pats = {a.pat};
                    r.loc = a.loc;
                    const syn::Alt* ap = &a;
                    r.body = [this, ap](const Scope& s, const Knowledge& kn, const FailK& f) {
                        return rhs(ap->rhs, s, kn, f);
                    };
                    rows.push_back(std::move(r));
                }
                ExprPtr out =
                    match_rows({x}, rows, 0, sc, k, [&](const Knowledge&) { return core::mk_paterror("case", loc); });
                warn_unused(rows);
                return out;
            });
        }
        case K::Let: {
            auto defs = group_locals(e->decls);
            std::vector<size_t> all;
            for (size_t i = 0; i < defs.size(); ++i) all.push_back(i);
            auto body_e = e->kids[0];
            return place(defs, order(defs, all), 0, sc, k, [&](const Scope& s, const Knowledge& kn) {
                return expr(body_e, s, kn);
            });
        }
        case K::Tuple:
            return core::mk_app(core::mk_con("(,)", loc), {expr(e->kids[0], sc, k), expr(e->kids[1], sc, k)}, loc);
        case K::List: {
            ExprPtr out = core::mk_con("[]", loc);
            for (auto it = e->kids.rbegin(); it != e->kids.rend(); ++it)
                out = core::mk_app(core::mk_con(":", loc), {expr(*it, sc, k), out}, loc);
            return out;
        }
        case K::ListComp: return comprehension(*e, 0, sc, k, [&](const Scope&) { return core::mk_con("[]", loc); });
        }
        fail(ErrorKind::Internal, loc, "bad expression");
    }

    ExprPtr rhs(const syn::Rhs& r, const Scope& sc, const Knowledge& k, const FailK& failk) {
        auto defs = group_locals(r.where);
        if (r.guards.empty()) {
            std::set<std::string> u;
            uses_of(r.plain, u);
            auto need = order(defs, closure(defs, u));
            return place(defs, need, 0, sc, k, [&](const Scope& s, const Knowledge& kn) { return expr(r.plain, s, kn); });
        }
        std::set<std::string> gu;
        for (const auto& g : r.guards) uses_of(g.first, gu);
        auto gneed = closure(defs, gu);
        return place(defs, order(defs, gneed), 0, sc, k, [&](const Scope& s, const Knowledge& kn) {
            return guards(r, 0, defs, gneed, s, kn, failk);
        });
    }

    std::vector<std::string> warnings;

private:
    ExprPtr var(const std::string& name, const Scope& sc, const Loc& loc) {
        if (auto it = sc.find(name); it != sc.end()) return core::mk_var(it->second, loc);
        if (auto it = top_.find(name); it != top_.end()) return core::mk_var(it->second, loc);
        if (kPrims.count(name)) return core::mk_var(Ident(name), loc);
        fail(ErrorKind::Shape, loc, "unbound variable '" + name + "'");
    }

    ExprPtr bind_var(const ExprPtr& e, const std::string& hint, const std::function<ExprPtr(const Ident&)>& k) {
        if (e->kind == core::Expr::Kind::Var && e->var.resolved()) return k(e->var);
        Ident x = Ident::fresh(hint);
        return core::mk_let(x, e, k(x), e->loc);
    }

    ExprPtr guards(const syn::Rhs& r, size_t i, const std::vector<LocalDef>& defs, const std::vector<size_t>& bound,
                   const Scope& sc, const Knowledge& k, const FailK& failk) {
        if (i == r.guards.size()) return failk(k);
        const auto& [g, b] = r.guards[i];
        std::set<std::string> bu;
        uses_of(b, bu);
        std::vector<size_t> need;
        for (size_t d : closure(defs, bu))
            if (std::find(bound.begin(), bound.end(), d) == bound.end()) need.push_back(d);
        ExprPtr cond = expr(g, sc, k);
        ExprPtr then_e = place(defs, order(defs, need), 0, sc, k,
                               [&](const Scope& s, const Knowledge& kn) { return expr(b, s, kn); });
        if (cond->kind == core::Expr::Kind::Bool && cond->bval) return then_e;
        ExprPtr else_e = guards(r, i + 1, defs, bound, sc, k, failk);
        return core::mk_if(cond, then_e, else_e, g->loc);
    }

    std::vector<size_t> closure(const std::vector<LocalDef>& defs, std::set<std::string> names) {
        std::vector<size_t> out;
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t i = 0; i < defs.size(); ++i) {
                if (std::find(out.begin(), out.end(), i) != out.end()) continue;
                bool hit = std::any_of(defs[i].names.begin(), defs[i].names.end(),
                                       [&](const std::string& n) { return names.count(n) > 0; });
                if (!hit) continue;
                out.push_back(i);
                names.insert(defs[i].uses.begin(), defs[i].uses.end());
                changed = true;
            }
        }
        return out;
    }

    // Dependency order, ties broken by source order.
    std::vector<size_t> order(const std::vector<LocalDef>& defs, std::vector<size_t> set) {
        std::sort(set.begin(), set.end());
        std::vector<size_t> out;
        while (!set.empty()) {
            bool progress = false;
            for (size_t j = 0; j < set.size(); ++j) {
                size_t i = set[j];
                bool ready = true;
                for (size_t o : set) {
                    if (o == i) continue;
                    for (const auto& n : defs[o].names)
                        if (defs[i].uses.count(n)) ready = false;
                }
                if (ready) {
                    out.push_back(i);
                    set.erase(set.begin() + j);
                    progress = true;
                    break;
                }
            }
            if (!progress) fail(ErrorKind::Parse, defs[set[0]].loc, "mutually recursive local definitions are not supported");
        }
        return out;
    }

    ExprPtr place(const std::vector<LocalDef>& defs, const std::vector<size_t>& idx, size_t i, const Scope& sc,
                  const Knowledge& k, const std::function<ExprPtr(const Scope&, const Knowledge&)>& inner) {
        if (i == idx.size()) return inner(sc, k);
        const LocalDef& d = defs[idx[i]];
        if (d.patbind) {
            ExprPtr rhs_e = rhs(d.patbind->rhs, sc, k, [&](const Knowledge&) {
                return core::mk_paterror("binding", d.loc);
            });
            return bind_var(rhs_e, "pat", [&](const Ident& x) {
                std::vector<Row> rows(1);
                rows[0].pats = {d.patbind->pats[0]};
                rows[0].loc = d.loc;
                rows[0].body = [&](const Scope& s, const Knowledge& kn, const FailK&) {
                    return place(defs, idx, i + 1, s, kn, inner);
                };
                return match_rows({x}, rows, 0, sc, k,
                                  [&](const Knowledge&) { return core::mk_paterror("irrefutable pattern", d.loc); });
            });
        }
        const std::string& name = d.names[0];
        Ident f = Ident::fresh(name);
        Scope inner_sc = sc;
        inner_sc[name] = f;
        if (d.uses.count(name)) {
            ExprPtr body = function(name, d.eqs, inner_sc, k);
            return core::mk_letrec({core::Bind{f, body, d.loc}}, place(defs, idx, i + 1, inner_sc, k, inner), d.loc);
        }
        ExprPtr body = function(name, d.eqs, sc, k);
        return core::mk_let(f, body, place(defs, idx, i + 1, inner_sc, k, inner), d.loc);
    }

    // [e | quals] appended in front of `tail`.
    ExprPtr comprehension(const syn::Expr& e, size_t qi, const Scope& sc, const Knowledge& k,
                          const std::function<ExprPtr(const Scope&)>& tail) {
        const Loc& loc = e.loc;
        if (qi == e.quals.size()) return core::mk_app(core::mk_con(":", loc), {expr(e.kids[0], sc, k), tail(sc)}, loc);
        const auto& q = e.quals[qi];
        if (!q.gen_pat) {
            return core::mk_if(expr(q.expr, sc, k), comprehension(e, qi + 1, sc, k, tail), tail(sc), q.expr->loc);
        }
        ExprPtr src = expr(q.expr, sc, k);
        Ident go = Ident::fresh("go");
        Ident xs = Ident::fresh("xs");
        Ident h = Ident::fresh("h");
        Ident t = Ident::fresh("t");
        auto rest = [&](const Scope&) { return core::mk_app(core::mk_var(go, loc), {core::mk_var(t, loc)}, loc); };
        std::vector<Row> rows(1);
        rows[0].pats = {q.gen_pat};
        rows[0].loc = loc;
        rows[0].body = [&](const Scope& s, const Knowledge& kn, const FailK&) {
            return comprehension(e, qi + 1, s, kn, rest);
        };
        ExprPtr cons_body = match_rows({h}, rows, 0, sc, k, [&](const Knowledge&) { return rest(sc); });
        std::vector<core::Alt> alts;
        alts.push_back(core::Alt{"[]", {}, tail(sc), loc});
        alts.push_back(core::Alt{":", {h, t}, cons_body, loc});
        ExprPtr go_body = core::mk_lam(xs, core::mk_case(core::mk_var(xs, loc), std::move(alts), loc), loc);
        return core::mk_letrec({core::Bind{go, go_body, loc}}, core::mk_app(core::mk_var(go, loc), {src}, loc), loc);
    }

    ExprPtr match_rows(const std::vector<Ident>& vars, std::vector<Row>& rows, size_t i, const Scope& sc,
                       const Knowledge& k, const FailK& failk) {
        if (i == rows.size()) return failk(k);
        FailK next = [&, i](const Knowledge& k2) { return match_rows(vars, rows, i + 1, sc, k2, failk); };
        std::vector<std::pair<syn::PatPtr, Ident>> work;
        for (size_t j = 0; j < vars.size(); ++j) work.emplace_back(rows[i].pats[j], vars[j]);
        std::set<std::string> seen;
        return match_pats(work, 0, rows[i], sc, seen, k, next);
    }

    syn::PatPtr list_pattern(const syn::Pattern& p, size_t from) {
        syn::Pattern out;
        out.kind = syn::Pattern::Kind::Con;
        out.loc = p.loc;
        if (from == p.args.size()) {
            out.name = "[]";
        } else {
            out.name = ":";
            out.args = {p.args[from], list_pattern(p, from + 1)};
        }
        return std::make_shared<const syn::Pattern>(std::move(out));
    }

    ExprPtr match_pats(std::vector<std::pair<syn::PatPtr, Ident>> work, size_t pos, Row& row, const Scope& sc,
                       std::set<std::string> seen, const Knowledge& k, const FailK& failk) {
        if (pos == work.size()) {
            ++row.used;
            return row.body(sc, k, failk);
        }
        auto [p, x] = work[pos];
        using PK = syn::Pattern::Kind;
        auto bind_name = [&](const std::string& n) {
            if (!seen.insert(n).second) fail(ErrorKind::Parse, p->loc, "variable '" + n + "' bound twice in pattern");
            Scope s = sc;
            s[n] = x;
            return s;
        };
        switch (p->kind) {
        case PK::Wild: return match_pats(work, pos + 1, row, sc, seen, k, failk);
        case PK::Var: {
            Scope s = bind_name(p->name);
            return match_pats(work, pos + 1, row, s, seen, k, failk);
        }
        case PK::As: {
            Scope s = bind_name(p->name);
            work[pos].first = p->args[0];
            return match_pats(work, pos, row, s, seen, k, failk);
        }
        case PK::List: work[pos].first = list_pattern(*p, 0); return match_pats(work, pos, row, sc, seen, k, failk);
        case PK::Tuple:
        case PK::Con: break;
        }
        std::string cname = p->kind == PK::Tuple ? "(,)" : p->name;
        if (cname == "True" || cname == "False")
            fail(ErrorKind::Parse, p->loc, "boolean patterns are not supported; use if");
        auto ci = prog_.ctor(cname);
        if (!ci) fail(ErrorKind::Shape, p->loc, "unknown constructor '" + cname + "'");
        const core::DataDecl& d = *ci->first;
        const core::CtorDecl& c = d.ctors[ci->second];
        if (c.fields.size() != p->args.size())
            fail(ErrorKind::Shape, p->loc,
                 "constructor '" + cname + "' expects " + std::to_string(c.fields.size()) + " argument(s)");
        auto expand = [&](const std::vector<Ident>& fs) {
            auto w = work;
            w.erase(w.begin() + pos);
            for (size_t j = 0; j < fs.size(); ++j) w.insert(w.begin() + pos + j, {p->args[j], fs[j]});
            return w;
        };
        if (auto it = k.find(x.id); it != k.end()) {
            if (it->second.first != cname) return failk(k);
            return match_pats(expand(it->second.second), pos, row, sc, seen, k, failk);
        }
        std::vector<core::Alt> alts;
        for (const auto& other : d.ctors) {
            std::vector<Ident> fs;
            for (size_t j = 0; j < other.fields.size(); ++j) {
                std::string n = other.fields[j].first.name;
                if (other.name == cname) {
                    const auto& ap = p->args[j];
                    if (ap->kind == PK::Var || ap->kind == PK::As) n = ap->name;
                }
                fs.push_back(Ident::fresh(n));
            }
            Knowledge k2 = k;
            k2[x.id] = {other.name, fs};
            ExprPtr body = other.name == cname ? match_pats(expand(fs), pos, row, sc, seen, k2, failk) : failk(k2);
            alts.push_back(core::Alt{other.name, fs, body, p->loc});
        }
        return core::mk_case(core::mk_var(x, p->loc), std::move(alts), p->loc);
    }

    void warn_unused(const std::vector<Row>& rows) {
        for (const auto& r : rows)
            if (r.used == 0) warnings.push_back(r.loc.str() + ": warning: unreachable clause");
    }

    core::Program& prog_;
    const Scope& top_;
};

// ---- inline logic functions -------------------------------------------------

std::optional<Pred> to_pred(const syn::ExprPtr& e, const std::map<std::string, Pred>& env,
                            const std::set<std::string>& fns);

std::optional<Pred> rhs_to_pred(const syn::Rhs& r, std::map<std::string, Pred> env, const std::set<std::string>& fns) {
    if (!r.guards.empty() || !r.plain) return std::nullopt;
    std::vector<const syn::Decl*> pending;
    for (const auto& d : r.where) {
        if (d.kind == syn::Decl::Kind::Sig) continue;
        if (d.kind != syn::Decl::Kind::Equation || !d.pats.empty() || !d.rhs.where.empty()) return std::nullopt;
        pending.push_back(&d);
    }
    while (!pending.empty()) {
        bool progress = false;
        for (size_t i = 0; i < pending.size(); ++i) {
            auto p = rhs_to_pred(pending[i]->rhs, env, fns);
            if (!p) continue;
            env[pending[i]->name] = *p;
            pending.erase(pending.begin() + i);
            progress = true;
            break;
        }
        if (!progress) return std::nullopt;
    }
    return to_pred(r.plain, env, fns);
}

std::optional<Pred> to_pred(const syn::ExprPtr& e, const std::map<std::string, Pred>& env,
                            const std::set<std::string>& fns) {
    using K = syn::Expr::Kind;
    auto sub = [&](size_t i) { return to_pred(e->kids[i], env, fns); };
    switch (e->kind) {
    case K::Var:
        if (auto it = env.find(e->name); it != env.end()) return it->second;
        return std::nullopt;
    case K::Int: return Pred::lit(e->ival);
    case K::Bool: return Pred::boolean(e->bval);
    case K::Neg: {
        auto a = sub(0);
        if (!a) return std::nullopt;
        return Pred::neg(*a);
    }
    case K::If: {
        auto c = sub(0), a = sub(1), b = sub(2);
        if (!c || !a || !b) return std::nullopt;
        return Pred::ite(*c, *a, *b);
    }
    case K::BinOp: {
        auto a = sub(0), b = sub(1);
        if (!a || !b) return std::nullopt;
        const std::string& op = e->name;
        if (op == "+") return Pred::add(*a, *b);
        if (op == "-") return Pred::sub(*a, *b);
        if (op == "*") {
            if (a->op() != POp::Int && b->op() != POp::Int) return std::nullopt;
            return Pred::mul(*a, *b);
        }
        if (op == "&&") return Pred::conj(*a, *b);
        if (op == "||") return Pred::disj(*a, *b);
        static const std::map<std::string, POp> rel = {{"==", POp::Eq}, {"/=", POp::Ne}, {"<", POp::Lt},
                                                       {"<=", POp::Le}, {">", POp::Gt},  {">=", POp::Ge}};
        if (auto it = rel.find(op); it != rel.end()) return Pred::cmp(it->second, *a, *b);
        return std::nullopt;
    }
    case K::App: {
        if (e->kids[0]->kind != K::Var) return std::nullopt;
        const std::string& f = e->kids[0]->name;
        if (env.count(f)) return std::nullopt;
        std::vector<Pred> args;
        for (size_t i = 1; i < e->kids.size(); ++i) {
            auto a = sub(i);
            if (!a) return std::nullopt;
            args.push_back(*a);
        }
        if (f == "not" && args.size() == 1) return Pred::lnot(args[0]);
        if ((f == "max" || f == "min") && args.size() == 2) return resolve_pred(Pred::app(f, args), {});
        if (fns.count(f)) return Pred::app(f, std::move(args));
        return std::nullopt;
    }
    default: return std::nullopt;
    }
}

bool references_cycle(const std::string& f, const std::map<std::string, core::InlineFn>& fns,
                      std::set<std::string>& stack) {
    if (!stack.insert(f).second) return true;
    std::vector<Pred> apps;
    collect_apps(fns.at(f).body, apps);
    for (const auto& a : apps)
        if (fns.count(a.fn()) && references_cycle(a.fn(), fns, stack)) return true;
    stack.erase(f);
    return false;
}

core::DataDecl builtin_list() {
    core::DataDecl d;
    d.name = "List";
    d.params = {"a"};
    d.ctors.push_back({"[]", {}, {}});
    auto a = rbase(BaseType::tyvar("a"));
    auto la = rbase(BaseType::tycon("List", {a}));
    d.ctors.push_back({":", {{Ident::fresh("hd"), a}, {Ident::fresh("tl"), la}}, {}});
    return d;
}

core::DataDecl builtin_tuple() {
    core::DataDecl d;
    d.name = "Tuple2";
    d.params = {"a", "b"};
    d.ctors.push_back(
        {"(,)", {{Ident::fresh("fst"), rbase(BaseType::tyvar("a"))}, {Ident::fresh("snd"), rbase(BaseType::tyvar("b"))}}, {}});
    return d;
}

} // namespace

core::Program desugar(const syn::SourceFile& sf, const std::vector<syn::QualifDef>& extra_qualifiers) {
    core::Program prog;
    prog.path = sf.path;
    prog.datas.push_back(builtin_list());
    prog.datas.push_back(builtin_tuple());

    std::map<std::string, syn::AliasDef> aliases;
    std::vector<std::string> data_order;
    std::map<std::string, const syn::DataDef*> plain_data, ann_data;
    std::map<std::string, const syn::Item*> ann_sigs, plain_sigs;
    std::vector<const syn::QualifDef*> qualifs;
    std::vector<std::string> bind_order;
    std::map<std::string, std::vector<const syn::Decl*>> eqs;
    std::set<std::string> measure_names;

    for (const auto& it : sf.items) {
        switch (it.kind) {
        case syn::Item::Kind::Alias:
            if (aliases.count(it.alias.name) || it.alias.name == "Int" || it.alias.name == "Bool")
                fail(ErrorKind::Shape, it.loc, "duplicate type name '" + it.alias.name + "'");
            aliases[it.alias.name] = it.alias;
            break;
        case syn::Item::Kind::Data: {
            auto& table = it.annotation ? ann_data : plain_data;
            const std::string& n = it.data.name;
            if (table.count(n) || n == "List" || n == "Tuple2" || n == "Int" || n == "Bool")
                fail(ErrorKind::Shape, it.loc, "duplicate data declaration '" + n + "'");
            table[n] = &it.data;
            if (std::find(data_order.begin(), data_order.end(), n) == data_order.end()) data_order.push_back(n);
            break;
        }
        case syn::Item::Kind::Measure:
            if (!measure_names.insert(it.measure).second)
                fail(ErrorKind::Measure, it.loc, "duplicate measure '" + it.measure + "'");
            prog.measures.push_back({it.measure, it.loc});
            break;
        case syn::Item::Kind::Qualif: qualifs.push_back(&it.qualif); break;
        case syn::Item::Kind::Sig: {
            auto& table = it.annotation ? ann_sigs : plain_sigs;
            if (table.count(it.decl.name)) fail(ErrorKind::Shape, it.loc, "duplicate signature for '" + it.decl.name + "'");
            table[it.decl.name] = &it;
            break;
        }
        case syn::Item::Kind::Decl:
            if (it.decl.kind != syn::Decl::Kind::Equation)
                fail(ErrorKind::Parse, it.loc, "top-level pattern bindings are not supported");
            if (!eqs.count(it.decl.name)) bind_order.push_back(it.decl.name);
            eqs[it.decl.name].push_back(&it.decl);
            break;
        }
    }
    for (const auto& [n, a] : aliases)
        if (plain_data.count(n) || ann_data.count(n)) fail(ErrorKind::Shape, a.loc, "'" + n + "' is both an alias and a datatype");

    // Register datatypes first so field types can refer to them.
    for (const auto& n : data_order) {
        const syn::DataDef* d = ann_data.count(n) ? ann_data[n] : plain_data[n];
        if (ann_data.count(n) && plain_data.count(n)) {
            const auto* p = plain_data[n];
            bool same = p->ctors.size() == d->ctors.size() && p->params.size() == d->params.size();
            for (size_t i = 0; same && i < p->ctors.size(); ++i)
                same = p->ctors[i].name == d->ctors[i].name && p->ctors[i].fields.size() == d->ctors[i].fields.size();
            if (!same) fail(ErrorKind::Shape, d->loc, "refined declaration of '" + n + "' does not match its data declaration");
        }
        core::DataDecl dd;
        dd.name = n;
        dd.params = d->params;
        dd.refined = ann_data.count(n) > 0;
        dd.loc = d->loc;
        for (const auto& c : d->ctors) {
            if (prog.ctor(c.name) || std::any_of(dd.ctors.begin(), dd.ctors.end(), [&](auto& x) { return x.name == c.name; }))
                fail(ErrorKind::Shape, c.loc, "duplicate constructor '" + c.name + "'");
            dd.ctors.push_back({c.name, {}, c.loc});
        }
        prog.datas.push_back(std::move(dd));
    }
    TypeResolver resolver(aliases, prog);
    for (const auto& n : data_order) {
        const syn::DataDef* d = ann_data.count(n) ? ann_data[n] : plain_data[n];
        std::set<std::string> tvs(d->params.begin(), d->params.end());
        std::vector<std::vector<std::pair<Ident, RTypePtr>>> all;
        for (const auto& c : d->ctors) all.push_back(resolver.fields(c, tvs));
        for (auto& dd : prog.datas)
            if (dd.name == n)
                for (size_t i = 0; i < all.size(); ++i) dd.ctors[i].fields = all[i];
    }

    for (const auto& [n, s] : ann_sigs)
        if (!eqs.count(n)) fail(ErrorKind::Shape, s->loc, "signature for '" + n + "' has no binding");
    for (const auto& [n, s] : plain_sigs)
        if (!eqs.count(n)) fail(ErrorKind::Shape, s->loc, "signature for '" + n + "' has no binding");
    for (const auto& m : prog.measures)
        if (!eqs.count(m.name)) fail(ErrorKind::Measure, m.loc, "measure '" + m.name + "' has no equations");

    // Inline logic functions: unsigned, single equation, variable parameters,
    // body inside the logic fragment.
    std::set<std::string> candidates;
    for (const auto& n : bind_order) {
        const auto& es = eqs[n];
        if (es.size() != 1 || ann_sigs.count(n) || measure_names.count(n) || es[0]->pats.empty()) continue;
        bool vars = std::all_of(es[0]->pats.begin(), es[0]->pats.end(),
                                [](const syn::PatPtr& p) { return p->kind == syn::Pattern::Kind::Var; });
        if (vars) candidates.insert(n);
    }
    std::set<std::string> logic_fns = candidates;
    logic_fns.insert(measure_names.begin(), measure_names.end());
    for (const auto& n : candidates) {
        const syn::Decl* d = eqs[n][0];
        core::InlineFn f;
        f.name = n;
        std::map<std::string, Pred> env;
        for (const auto& p : d->pats) {
            Ident x = Ident::fresh(p->name);
            f.params.push_back(x);
            env[p->name] = Pred::var(x);
        }
        if (auto body = rhs_to_pred(d->rhs, env, logic_fns)) {
            f.body = *body;
            prog.inlines[n] = f;
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = prog.inlines.begin(); it != prog.inlines.end(); ++it) {
            std::vector<Pred> apps;
            collect_apps(it->second.body, apps);
            bool bad = std::any_of(apps.begin(), apps.end(), [&](const Pred& a) {
                return !measure_names.count(a.fn()) && !prog.inlines.count(a.fn());
            });
            std::set<std::string> stack;
            if (bad || references_cycle(it->first, prog.inlines, stack)) {
                prog.inlines.erase(it);
                changed = true;
                break;
            }
        }
    }

    auto logic_check = [&](const Pred& p, const Loc& loc) {
        Pred q = core::expand_inlines(p, prog.inlines);
        std::vector<Pred> apps;
        collect_apps(q, apps);
        for (const auto& a : apps)
            if (!measure_names.count(a.fn()))
                fail(ErrorKind::Measure, loc, "'" + a.fn() + "' is not a measure or logic function");
        return q;
    };
    auto finish_type = [&](const RTypePtr& t, const Loc& loc) {
        return map_preds(t, [&](const Pred& p) { return logic_check(p, loc); });
    };
    for (auto& d : prog.datas)
        for (auto& c : d.ctors)
            for (auto& f : c.fields) f.second = finish_type(f.second, c.loc);

    Scope top;
    for (const auto& n : bind_order) {
        if (prog.ctor(n)) fail(ErrorKind::Shape, eqs[n][0]->loc, "'" + n + "' clashes with a constructor");
        top[n] = Ident::fresh(n);
    }
    Desugarer ds(prog, top);
    for (const auto& n : bind_order) {
        core::TopBind b;
        b.name = top[n];
        b.loc = eqs[n][0]->loc;
        const syn::Item* sig = ann_sigs.count(n) ? ann_sigs[n] : (plain_sigs.count(n) ? plain_sigs[n] : nullptr);
        if (sig) {
            b.sig = finish_type(resolver.signature(sig->decl.type), sig->loc);
            b.sig_loc = sig->loc;
        }
        b.is_measure = measure_names.count(n) > 0;
        b.is_inline = prog.inlines.count(n) > 0;
        b.body = ds.function(n, eqs[n], {}, {});
        prog.binds.push_back(std::move(b));
    }
    prog.warnings = ds.warnings;

    for (const auto* q : qualifs) {
        auto cq = resolver.qualifier(*q);
        cq.body = logic_check(cq.body, q->loc);
        prog.qualifiers.push_back(std::move(cq));
    }
    for (const auto& q : extra_qualifiers) {
        auto cq = resolver.qualifier(q);
        cq.body = logic_check(cq.body, q.loc);
        prog.qualifiers.push_back(std::move(cq));
    }
    for (const auto& [n, a] : aliases) {
        (void)n;
        prog.alias_bodies.push_back(finish_type(resolver.alias_body(a), a.loc));
    }
    return prog;
}

} // namespace lm
