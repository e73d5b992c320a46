#include "lm/desugar.hpp"

#include <algorithm>

namespace lm {

using syn::Type;

Pred resolve_pred(const Pred& p, const std::map<std::string, Pred>& vals) {
    Subst s;
    for (const auto& [name, val] : vals) s.emplace_back(Ident(name), val);
    Pred q = subst(p, s);
    return rewrite_apps(q, [](const Pred& app) -> std::optional<Pred> {
        if (app.kids().size() != 2) return std::nullopt;
        const Pred& a = app.kid(0);
        const Pred& b = app.kid(1);
        if (app.fn() == "max") return Pred::ite(Pred::cmp(POp::Ge, a, b), a, b);
        if (app.fn() == "min") return Pred::ite(Pred::cmp(POp::Le, a, b), a, b);
        return std::nullopt;
    });
}

RTypePtr map_preds(const RTypePtr& t, const std::function<Pred(const Pred&)>& f) {
    switch (t->kind) {
    case RType::Kind::Base: {
        BaseType b = t->base;
        for (auto& a : b.args) a = map_preds(a, f);
        return rbase(std::move(b), f(t->pred));
    }
    case RType::Kind::Fun: return rfun(t->binder, map_preds(t->dom, f), map_preds(t->rng, f));
    case RType::Kind::Forall: return rforall(t->tyvar, map_preds(t->body, f));
    }
    return t;
}

void for_each_pred(const RTypePtr& t, const std::function<void(const Pred&)>& f) {
    switch (t->kind) {
    case RType::Kind::Base:
        for (const auto& a : t->base.args) for_each_pred(a, f);
        f(t->pred);
        break;
    case RType::Kind::Fun:
        for_each_pred(t->dom, f);
        for_each_pred(t->rng, f);
        break;
    case RType::Kind::Forall: for_each_pred(t->body, f); break;
    }
}

namespace {

void collect_tyvars(const RTypePtr& t, std::vector<std::string>& out) {
    switch (t->kind) {
    case RType::Kind::Base:
        if (t->base.kind == BaseType::Kind::TyVar) {
            if (std::find(out.begin(), out.end(), t->base.name) == out.end()) out.push_back(t->base.name);
        }
        for (const auto& a : t->base.args) collect_tyvars(a, out);
        break;
    case RType::Kind::Fun:
        collect_tyvars(t->dom, out);
        collect_tyvars(t->rng, out);
        break;
    case RType::Kind::Forall: collect_tyvars(t->body, out); break;
    }
}

void check_bound(const RTypePtr& t, const Loc& loc) {
    for_each_pred(t, [&](const Pred& p) {
        for (const auto& x : free_vars(p))
            if (!x.resolved()) fail(ErrorKind::Shape, loc, "unbound name '" + x.name + "' in refinement");
    });
}

} // namespace

RTypePtr TypeResolver::convert(const syn::TypePtr& t, Scope& sc, int depth) const {
    if (depth > 64) fail(ErrorKind::Shape, t->loc, "type alias expansion does not terminate");
    switch (t->kind) {
    case Type::Kind::Fun: {
        const std::string& name = t->name;
        Ident b = Ident::fresh(name.empty() ? "arg" : name);
        RTypePtr dom;
        if (!name.empty()) {
            Scope dsc = sc;
            dsc.vals[name] = Pred::vv();
            dom = convert(t->args[0], dsc, depth);
        } else {
            dom = convert(t->args[0], sc, depth);
        }
        Scope rsc = sc;
        if (!name.empty()) rsc.vals[name] = Pred::var(b);
        return rfun(b, dom, convert(t->args[1], rsc, depth));
    }
    case Type::Kind::Refine: {
        RTypePtr base = convert(t->args[0], sc, depth);
        if (!base->is_base()) fail(ErrorKind::Shape, t->loc, "only base types can be refined");
        return strengthen(base, resolve_pred(t->pred, sc.vals));
    }
    case Type::Kind::Var: {
        if (auto it = sc.tyvars.find(t->name); it != sc.tyvars.end()) return it->second;
        return rbase(BaseType::tyvar(t->name));
    }
    case Type::Kind::Con: {
        const std::string& n = t->name;
        if (!n.empty() && std::islower(static_cast<unsigned char>(n[0])))
            fail(ErrorKind::Shape, t->loc, "value expression '" + n + "' used as a type");
        if (n == "Int" || n == "Bool") {
            if (!t->args.empty()) fail(ErrorKind::Shape, t->loc, "type '" + n + "' takes no arguments");
            return n == "Int" ? rint() : rbool();
        }
        if (const auto* d = prog_.data(n)) {
            if (d->params.size() != t->args.size())
                fail(ErrorKind::Shape, t->loc,
                     "type '" + n + "' expects " + std::to_string(d->params.size()) + " argument(s), got " +
                         std::to_string(t->args.size()));
            std::vector<RTypePtr> args;
            for (const auto& a : t->args) args.push_back(convert(a, sc, depth));
            return rbase(BaseType::tycon(n, std::move(args)));
        }
        if (auto it = aliases_.find(n); it != aliases_.end()) return expand(it->second, *t, sc, depth);
        fail(ErrorKind::Shape, t->loc, "unknown type '" + n + "'");
    }
    case Type::Kind::List: return rbase(BaseType::tycon("List", {convert(t->args[0], sc, depth)}));
    case Type::Kind::Tuple:
        return rbase(BaseType::tycon("Tuple2", {convert(t->args[0], sc, depth), convert(t->args[1], sc, depth)}));
    case Type::Kind::Value: fail(ErrorKind::Shape, t->loc, "value argument outside an alias application");
    }
    fail(ErrorKind::Internal, t->loc, "bad type node");
}

Pred TypeResolver::value_arg(const syn::TypePtr& t, const Scope& sc) const {
    switch (t->kind) {
    case Type::Kind::Var:
        if (t->args.empty()) {
            if (auto it = sc.vals.find(t->name); it != sc.vals.end()) return it->second;
            return Pred::var(Ident(t->name));
        }
        break;
    case Type::Kind::Con:
        if (t->args.empty()) {
            if (auto it = sc.vals.find(t->name); it != sc.vals.end()) return it->second;
            fail(ErrorKind::Shape, t->loc, "'" + t->name + "' is not a value");
        }
        if (std::islower(static_cast<unsigned char>(t->name[0]))) {
            std::vector<Pred> args;
            for (const auto& a : t->args) args.push_back(value_arg(a, sc));
            return resolve_pred(Pred::app(t->name, std::move(args)), {});
        }
        break;
    case Type::Kind::Value: return resolve_pred(t->pred, sc.vals);
    default: break;
    }
    fail(ErrorKind::Shape, t->loc, "expected a value argument");
}

RTypePtr TypeResolver::expand(const syn::AliasDef& a, const syn::Type& use, Scope& sc, int depth) const {
    size_t want = a.typarams.size() + a.valparams.size();
    if (use.args.size() != want)
        fail(ErrorKind::Shape, use.loc,
             "alias '" + a.name + "' expects " + std::to_string(want) + " argument(s), got " +
                 std::to_string(use.args.size()));
    Scope body;
    for (size_t i = 0; i < a.typarams.size(); ++i) body.tyvars[a.typarams[i]] = convert(use.args[i], sc, depth);
    for (size_t i = 0; i < a.valparams.size(); ++i)
        body.vals[a.valparams[i]] = value_arg(use.args[a.typarams.size() + i], sc);
    return convert(a.body, body, depth + 1);
}

RTypePtr TypeResolver::signature(const syn::TypePtr& t) const {
    Scope sc;
    RTypePtr r = convert(t, sc);
    check_bound(r, t->loc);
    std::vector<std::string> tvs;
    collect_tyvars(r, tvs);
    for (auto it = tvs.rbegin(); it != tvs.rend(); ++it) r = rforall(*it, r);
    return r;
}

RTypePtr TypeResolver::type(const syn::TypePtr& t) const {
    Scope sc;
    RTypePtr r = convert(t, sc);
    check_bound(r, t->loc);
    return r;
}

std::vector<std::pair<Ident, RTypePtr>> TypeResolver::fields(const syn::CtorDef& c,
                                                            const std::set<std::string>& tyvars) const {
    Scope sc;
    std::vector<std::pair<Ident, RTypePtr>> out;
    for (size_t i = 0; i < c.fields.size(); ++i) {
        const auto& [name, ty] = c.fields[i];
        Ident f = Ident::fresh(name.empty() ? "f" + std::to_string(i + 1) : name);
        RTypePtr rt = convert(ty, sc);
        check_bound(rt, ty->loc);
        std::vector<std::string> tvs;
        collect_tyvars(rt, tvs);
        for (const auto& tv : tvs)
            if (!tyvars.count(tv)) fail(ErrorKind::Shape, ty->loc, "type variable '" + tv + "' is not a parameter");
        if (!name.empty()) sc.vals[name] = Pred::var(f);
        out.emplace_back(f, rt);
    }
    return out;
}

RTypePtr TypeResolver::alias_body(const syn::AliasDef& a) const {
    Scope sc;
    for (const auto& vp : a.valparams) sc.vals[vp] = Pred::var(Ident::fresh(vp));
    return convert(a.body, sc);
}

core::Qualifier TypeResolver::qualifier(const syn::QualifDef& q) const {
    core::Qualifier out;
    out.loc = q.loc;
    out.name = q.name.empty() ? "Q" + std::to_string(q.loc.line) : q.name;
    auto sort_of = [&](const syn::TypePtr& t) {
        RTypePtr r = type(t);
        if (!r->is_base()) fail(ErrorKind::Shape, t->loc, "qualifier parameters must have base types");
        return r->base.sort();
    };
    out.vv_sort = sort_of(q.params[0].second);
    std::map<std::string, Pred> vals;
    for (size_t i = 1; i < q.params.size(); ++i) {
        Ident x = Ident::fresh(q.params[i].first);
        out.params.emplace_back(x, sort_of(q.params[i].second));
        vals[q.params[i].first] = Pred::var(x);
    }
    out.body = resolve_pred(q.body, vals);
    for (const auto& x : free_vars(out.body))
        if (!x.resolved()) fail(ErrorKind::Shape, q.loc, "unbound name '" + x.name + "' in qualifier");
    if (has_kvars(out.body)) fail(ErrorKind::Shape, q.loc, "qualifier contains a refinement variable");
    return out;
}

} // namespace lm
