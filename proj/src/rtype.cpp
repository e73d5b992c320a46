#include "lm/rtype.hpp"

#include <algorithm>
#include <sstream>

namespace lm {

Sort BaseType::sort() const {
    switch (kind) {
    case Kind::Int: return Sort::integer();
    case Kind::Bool: return Sort::boolean();
    case Kind::TyVar: return Sort::tyvar(name);
    case Kind::TyCon: return Sort::data(name);
    }
    return Sort::integer();
}

RTypePtr rbase(BaseType b, Pred p) {
    auto t = std::make_shared<RType>();
    t->kind = RType::Kind::Base;
    t->base = std::move(b);
    t->pred = std::move(p);
    return t;
}

RTypePtr rint(Pred p) { return rbase(BaseType::integer(), std::move(p)); }
RTypePtr rbool(Pred p) { return rbase(BaseType::boolean(), std::move(p)); }

RTypePtr rfun(Ident binder, RTypePtr dom, RTypePtr rng) {
    auto t = std::make_shared<RType>();
    t->kind = RType::Kind::Fun;
    t->binder = std::move(binder);
    t->dom = std::move(dom);
    t->rng = std::move(rng);
    return t;
}

RTypePtr rforall(std::string tyvar, RTypePtr body) {
    auto t = std::make_shared<RType>();
    t->kind = RType::Kind::Forall;
    t->tyvar = std::move(tyvar);
    t->body = std::move(body);
    return t;
}

RTypePtr strengthen(const RTypePtr& t, const Pred& p) {
    if (!t->is_base() || p.is_true()) return t;
    return rbase(t->base, Pred::conj(t->pred, p));
}

RTypePtr with_pred(const RTypePtr& t, const Pred& p) {
    if (!t->is_base()) return t;
    return rbase(t->base, p);
}

namespace {
BaseType map_args(const BaseType& b, const std::function<RTypePtr(const RTypePtr&)>& f) {
    BaseType out = b;
    for (auto& a : out.args) a = f(a);
    return out;
}
} // namespace

RTypePtr shape(const RTypePtr& t) {
    switch (t->kind) {
    case RType::Kind::Base: return rbase(map_args(t->base, shape), Pred::tt());
    case RType::Kind::Fun: return rfun(t->binder, shape(t->dom), shape(t->rng));
    case RType::Kind::Forall: return rforall(t->tyvar, shape(t->body));
    }
    return t;
}

RTypePtr subst_type(const RTypePtr& t, const Subst& s) {
    if (s.empty()) return t;
    switch (t->kind) {
    case RType::Kind::Base:
        return rbase(map_args(t->base, [&](const RTypePtr& a) { return subst_type(a, s); }), subst(t->pred, s));
    case RType::Kind::Fun: {
        Subst inner;
        for (const auto& e : s)
            if (!(e.first == t->binder)) inner.push_back(e);
        return rfun(t->binder, subst_type(t->dom, s), subst_type(t->rng, inner));
    }
    case RType::Kind::Forall: return rforall(t->tyvar, subst_type(t->body, s));
    }
    return t;
}

RTypePtr subst_tyvar(const RTypePtr& t, const std::string& a, const RTypePtr& r) {
    switch (t->kind) {
    case RType::Kind::Base: {
        if (t->base.kind == BaseType::Kind::TyVar && t->base.name == a) {
            if (!r->is_base()) return r;
            return strengthen(r, t->pred);
        }
        return rbase(map_args(t->base, [&](const RTypePtr& x) { return subst_tyvar(x, a, r); }), t->pred);
    }
    case RType::Kind::Fun: return rfun(t->binder, subst_tyvar(t->dom, a, r), subst_tyvar(t->rng, a, r));
    case RType::Kind::Forall:
        if (t->tyvar == a) return t;
        return rforall(t->tyvar, subst_tyvar(t->body, a, r));
    }
    return t;
}

RTypePtr strip_foralls(const RTypePtr& t, std::vector<std::string>* vars) {
    RTypePtr cur = t;
    while (cur->is_forall()) {
        if (vars) vars->push_back(cur->tyvar);
        cur = cur->body;
    }
    return cur;
}

bool same_shape(const RTypePtr& a, const RTypePtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case RType::Kind::Base:
        if (a->base.kind != b->base.kind || a->base.name != b->base.name) return false;
        if (a->base.args.size() != b->base.args.size()) return false;
        for (size_t i = 0; i < a->base.args.size(); ++i)
            if (!same_shape(a->base.args[i], b->base.args[i])) return false;
        return true;
    case RType::Kind::Fun: return same_shape(a->dom, b->dom) && same_shape(a->rng, b->rng);
    case RType::Kind::Forall: return a->tyvar == b->tyvar && same_shape(a->body, b->body);
    }
    return false;
}

void type_kvars(const RTypePtr& t, std::vector<int>& out) {
    auto add = [&](const Pred& p) {
        for (int k : kvars_of(p))
            if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    };
    switch (t->kind) {
    case RType::Kind::Base:
        add(t->pred);
        for (const auto& a : t->base.args) type_kvars(a, out);
        break;
    case RType::Kind::Fun:
        type_kvars(t->dom, out);
        type_kvars(t->rng, out);
        break;
    case RType::Kind::Forall: type_kvars(t->body, out); break;
    }
}

bool type_has_kvars(const RTypePtr& t) {
    std::vector<int> ks;
    type_kvars(t, ks);
    return !ks.empty();
}

namespace {

std::string render_arg(const RTypePtr& t) {
    std::string s = render(t);
    if (t->is_base() && t->pred.is_true() && (t->base.args.empty() || t->base.name == "List" || t->base.name == "Tuple2"))
        return s;
    if (t->is_base() && !t->pred.is_true()) return s;  // braces already
    return "(" + s + ")";
}

} // namespace

std::string render(const BaseType& b) {
    if (b.kind != BaseType::Kind::TyCon) return b.name;
    if (b.name == "List" && b.args.size() == 1) return "[" + render(b.args[0]) + "]";
    if (b.name == "Tuple2" && b.args.size() == 2) return "(" + render(b.args[0]) + ", " + render(b.args[1]) + ")";
    std::string s = b.name;
    for (const auto& a : b.args) s += " " + render_arg(a);
    return s;
}

std::string render(const RTypePtr& t) {
    switch (t->kind) {
    case RType::Kind::Base:
        if (t->pred.is_true()) return render(t->base);
        return "{v:" + render(t->base) + " | " + t->pred.str() + "}";
    case RType::Kind::Fun: {
        std::string d = render(t->dom);
        if (t->dom->is_fun()) d = "(" + d + ")";
        else if (t->dom->is_base() && !t->binder.name.empty()) d = t->binder.name + ":" + d;
        return d + " -> " + render(t->rng);
    }
    case RType::Kind::Forall: return "forall " + t->tyvar + ". " + render(t->body);
    }
    return "?";
}

} // namespace lm
