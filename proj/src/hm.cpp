#include "lm/hm.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

namespace lm {

std::string Scheme::str() const {
    std::string s;
    if (!vars.empty()) {
        s = "forall";
        for (const auto& v : vars) s += " " + v;
        s += ". ";
    }
    return s + render(body);
}

std::optional<Scheme> prim_scheme(const std::string& name) {
    auto fn = [](RTypePtr a, RTypePtr b, RTypePtr c) { return rfun(Ident(), a, rfun(Ident(), b, c)); };
    if (name == "+" || name == "-" || name == "*" || name == "max" || name == "min")
        return Scheme{{}, fn(rint(), rint(), rint())};
    if (name == "&&" || name == "||") return Scheme{{}, fn(rbool(), rbool(), rbool())};
    if (name == "not") return Scheme{{}, rfun(Ident(), rbool(), rbool())};
    if (name == "==" || name == "/=" || name == "<" || name == "<=" || name == ">" || name == ">=") {
        auto a = rbase(BaseType::tyvar("a"));
        return Scheme{{"a"}, fn(a, a, rbool())};
    }
    return std::nullopt;
}

namespace {

struct TNode {
    enum class K { Var, Con, Fun, Named };
    K k = K::Var;
    TNode* link = nullptr;
    int level = 0;
    int id = 0;
    std::string name;
    std::vector<TNode*> args;
};
using T = TNode*;

struct IScheme {
    std::vector<T> gens;  // Named nodes
    T body = nullptr;
};

class Infer {
public:
    explicit Infer(const core::Program* prog) : prog_(prog) {}

    T fresh() {
        T t = make(TNode::K::Var);
        t->level = level_;
        return t;
    }
    T con(const std::string& n, std::vector<T> args = {}) {
        T t = make(TNode::K::Con);
        t->name = n;
        t->args = std::move(args);
        return t;
    }
    T fun(T a, T b) {
        T t = make(TNode::K::Fun);
        t->args = {a, b};
        return t;
    }
    T named(const std::string& n) {
        T t = make(TNode::K::Named);
        t->name = n;
        return t;
    }

    static T repr(T t) {
        while (t->k == TNode::K::Var && t->link) t = t->link;
        return t;
    }

    T from_rtype(const RTypePtr& r, std::map<std::string, T>& tyvars) {
        switch (r->kind) {
        case RType::Kind::Base:
            switch (r->base.kind) {
            case BaseType::Kind::Int: return con("Int");
            case BaseType::Kind::Bool: return con("Bool");
            case BaseType::Kind::TyVar: {
                auto it = tyvars.find(r->base.name);
                if (it != tyvars.end()) return it->second;
                T v = fresh();
                tyvars[r->base.name] = v;
                return v;
            }
            case BaseType::Kind::TyCon: {
                std::vector<T> args;
                for (const auto& a : r->base.args) args.push_back(from_rtype(a, tyvars));
                return con(r->base.name, std::move(args));
            }
            }
            break;
        case RType::Kind::Fun: return fun(from_rtype(r->dom, tyvars), from_rtype(r->rng, tyvars));
        case RType::Kind::Forall: return from_rtype(r->body, tyvars);
        }
        return fresh();
    }

    IScheme scheme_of(const RTypePtr& r) {
        std::vector<std::string> vars;
        RTypePtr body = strip_foralls(r, &vars);
        IScheme s;
        std::map<std::string, T> tv;
        for (const auto& v : vars) {
            T n = named(v);
            tv[v] = n;
            s.gens.push_back(n);
        }
        s.body = from_rtype(body, tv);
        return s;
    }

    RTypePtr zonk(T t) {
        t = repr(t);
        switch (t->k) {
        case TNode::K::Var: {
            auto it = var_names_.find(t->id);
            return rbase(BaseType::tyvar(it != var_names_.end() ? it->second : "_t" + std::to_string(t->id)));
        }
        case TNode::K::Named: return rbase(BaseType::tyvar(t->name));
        case TNode::K::Fun: return rfun(Ident(), zonk(t->args[0]), zonk(t->args[1]));
        case TNode::K::Con:
            if (t->name == "Int") return rint();
            if (t->name == "Bool") return rbool();
            {
                std::vector<RTypePtr> args;
                for (auto* a : t->args) args.push_back(zonk(a));
                return rbase(BaseType::tycon(t->name, std::move(args)));
            }
        }
        return rint();
    }

    std::string show(T t) { return render(zonk(t)); }

    bool unify(T a, T b) {
        a = repr(a);
        b = repr(b);
        if (a == b) return true;
        if (a->k == TNode::K::Var) return bind(a, b);
        if (b->k == TNode::K::Var) return bind(b, a);
        if (a->k != b->k) return false;
        if (a->k == TNode::K::Named) return false;
        if (a->k == TNode::K::Con && (a->name != b->name || a->args.size() != b->args.size())) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
            if (!unify(a->args[i], b->args[i])) return false;
        return true;
    }

    void unify_or_fail(T a, T b, const Loc& loc, const std::string& what) {
        occurs_failed_ = false;
        std::string sa = show(a), sb = show(b);
        if (unify(a, b)) return;
        if (occurs_failed_)
            fail(ErrorKind::Shape, loc, "occurs check: cannot construct an infinite type (" + what + ")");
        fail(ErrorKind::Shape, loc, "cannot match '" + sa + "' with '" + sb + "' (" + what + ")");
    }

    T instantiate(const IScheme& s, std::vector<std::pair<std::string, T>>* record) {
        if (s.gens.empty()) return s.body;
        std::map<T, T> sub;
        for (T g : s.gens) {
            T v = fresh();
            sub[g] = v;
            if (record) record->emplace_back(g->name, v);
        }
        std::function<T(T)> copy = [&](T t) -> T {
            t = repr(t);
            if (auto it = sub.find(t); it != sub.end()) return it->second;
            if (t->k == TNode::K::Var || t->k == TNode::K::Named || t->args.empty()) return t;
            std::vector<T> args;
            for (T a : t->args) args.push_back(copy(a));
            if (t->k == TNode::K::Fun) return fun(args[0], args[1]);
            return con(t->name, std::move(args));
        };
        return copy(s.body);
    }

    // Quantify variables deeper than the current level.
    IScheme generalize(T t, bool top) {
        IScheme s;
        s.body = t;
        int counter = 0;
        std::function<void(T)> walk = [&](T x) {
            x = repr(x);
            if (x->k == TNode::K::Var) {
                if (x->level > level_) {
                    std::string n;
                    if (top) {
                        n = counter < 26 ? std::string(1, char('a' + counter)) : "t" + std::to_string(counter);
                        ++counter;
                    } else {
                        n = "t" + std::to_string(++local_counter_);
                    }
                    T g = named(n);
                    x->link = g;
                    s.gens.push_back(g);
                }
                return;
            }
            for (T a : x->args) walk(a);
        };
        walk(t);
        return s;
    }

    T infer(const core::ExprPtr& e) {
        T t = infer_inner(e);
        expr_[e->id] = t;
        return t;
    }

    void run(ShapeInfo& out);

    const core::Program* prog_;
    std::unordered_map<int, IScheme> env_;
    std::unordered_map<int, T> expr_;
    std::unordered_map<int, std::vector<std::pair<std::string, T>>> inst_;
    std::unordered_map<int, T> binder_;
    std::unordered_map<int, IScheme> poly_;
    std::unordered_map<int, std::string> var_names_;
    int level_ = 0;

private:
    T make(TNode::K k) {
        arena_.emplace_back();
        T t = &arena_.back();
        t->k = k;
        t->id = next_id_++;
        return t;
    }

    bool occurs_adjust(T v, T t) {
        t = repr(t);
        if (t == v) return true;
        if (t->k == TNode::K::Var) {
            t->level = std::min(t->level, v->level);
            return false;
        }
        for (T a : t->args)
            if (occurs_adjust(v, a)) return true;
        return false;
    }

    bool bind(T v, T t) {
        if (occurs_adjust(v, t)) {
            occurs_failed_ = true;
            return false;
        }
        v->link = t;
        return true;
    }

    T mono(T t, int id) {
        env_[id] = IScheme{{}, t};
        binder_[id] = t;
        return t;
    }

    IScheme ctor_scheme(const std::string& name, const Loc& loc) {
        auto ci = prog_->ctor(name);
        if (!ci) fail(ErrorKind::Shape, loc, "unknown constructor '" + name + "'");
        return scheme_of(core::ctor_type(*ci->first, ci->first->ctors[ci->second]));
    }

    T infer_inner(const core::ExprPtr& e) {
        using K = core::Expr::Kind;
        switch (e->kind) {
        case K::Var: {
            if (!e->var.resolved()) {
                auto ps = prim_scheme(e->var.name);
                if (!ps) fail(ErrorKind::Shape, e->loc, "unbound variable '" + e->var.name + "'");
                return instantiate(scheme_of_prim(*ps), &inst_[e->id]);
            }
            auto it = env_.find(e->var.id);
            if (it == env_.end()) fail(ErrorKind::Internal, e->loc, "no shape for '" + e->var.name + "'");
            return instantiate(it->second, &inst_[e->id]);
        }
        case K::Con: return instantiate(ctor_scheme(e->con, e->loc), &inst_[e->id]);
        case K::Int: return con("Int");
        case K::Bool: return con("Bool");
        case K::App: {
            T f = infer(e->kids[0]);
            for (size_t i = 1; i < e->kids.size(); ++i) {
                T a = infer(e->kids[i]);
                T r = fresh();
                unify_or_fail(f, fun(a, r), e->kids[i]->loc, "argument " + std::to_string(i) + " of application");
                f = r;
            }
            return f;
        }
        case K::Lam: {
            T p = mono(fresh(), e->var.id);
            return fun(p, infer(e->kids[0]));
        }
        case K::Let: {
            ++level_;
            T r = infer(e->kids[0]);
            --level_;
            IScheme s = generalize(r, false);
            env_[e->var.id] = s;
            poly_[e->var.id] = s;
            if (s.gens.empty()) binder_[e->var.id] = r;
            return infer(e->kids[1]);
        }
        case K::LetRec: {
            ++level_;
            std::vector<T> vs;
            for (const auto& b : e->binds) vs.push_back(mono(fresh(), b.name.id));
            for (size_t i = 0; i < e->binds.size(); ++i)
                unify_or_fail(vs[i], infer(e->binds[i].body), e->binds[i].loc, "recursive binding");
            --level_;
            for (size_t i = 0; i < e->binds.size(); ++i) {
                IScheme s = generalize(vs[i], false);
                env_[e->binds[i].name.id] = s;
                poly_[e->binds[i].name.id] = s;
                if (!s.gens.empty()) binder_.erase(e->binds[i].name.id);
            }
            return infer(e->kids[0]);
        }
        case K::If: {
            unify_or_fail(infer(e->kids[0]), con("Bool"), e->kids[0]->loc, "condition");
            T t = infer(e->kids[1]);
            unify_or_fail(t, infer(e->kids[2]), e->kids[2]->loc, "branches of if");
            return t;
        }
        case K::Case: {
            T s = infer(e->kids[0]);
            T res = fresh();
            for (const auto& a : e->alts) {
                if (!a.con.empty()) {
                    auto ci = prog_->ctor(a.con);
                    if (!ci) fail(ErrorKind::Shape, a.loc, "unknown constructor '" + a.con + "'");
                    const auto& d = *ci->first;
                    const auto& c = d.ctors[ci->second];
                    std::map<std::string, T> tv;
                    std::vector<T> params;
                    for (const auto& p : d.params) {
                        T v = fresh();
                        tv[p] = v;
                        params.push_back(v);
                    }
                    unify_or_fail(s, con(d.name, params), a.loc, "case scrutinee");
                    if (c.fields.size() != a.fields.size())
                        fail(ErrorKind::Shape, a.loc, "wrong number of fields for '" + a.con + "'");
                    for (size_t i = 0; i < c.fields.size(); ++i) mono(from_rtype(c.fields[i].second, tv), a.fields[i].id);
                }
                unify_or_fail(res, infer(a.body), a.loc, "alternatives of case");
            }
            return res;
        }
        case K::PatError: return fresh();
        }
        return fresh();
    }

    IScheme scheme_of_prim(const Scheme& s) {
        IScheme out;
        std::map<std::string, T> tv;
        for (const auto& v : s.vars) {
            T n = named(v);
            tv[v] = n;
            out.gens.push_back(n);
        }
        out.body = from_rtype(s.body, tv);
        return out;
    }

    std::deque<TNode> arena_;
    int next_id_ = 0;
    int local_counter_ = 0;
    bool occurs_failed_ = false;
};

void free_top_refs(const core::ExprPtr& e, const std::set<int>& tops, std::set<int>& out) {
    if (e->kind == core::Expr::Kind::Var && tops.count(e->var.id)) out.insert(e->var.id);
    for (const auto& k : e->kids) free_top_refs(k, tops, out);
    for (const auto& b : e->binds) free_top_refs(b.body, tops, out);
    for (const auto& a : e->alts) free_top_refs(a.body, tops, out);
}

void Infer::run(ShapeInfo& out) {
    const auto& binds = prog_->binds;
    std::set<int> unsigned_ids;
    for (const auto& b : binds) {
        if (b.sig)
            env_[b.name.id] = scheme_of(b.sig);
        else
            unsigned_ids.insert(b.name.id);
    }
    // Strongly connected components of unsigned bindings (Tarjan), visited in
    // source order so the result is deterministic.
    std::map<int, size_t> index_of;
    for (size_t i = 0; i < binds.size(); ++i) index_of[binds[i].name.id] = i;
    std::vector<std::set<int>> deps(binds.size());
    for (size_t i = 0; i < binds.size(); ++i)
        if (!binds[i].sig) free_top_refs(binds[i].body, unsigned_ids, deps[i]);
    std::vector<int> idx(binds.size(), -1), low(binds.size(), 0);
    std::vector<bool> on(binds.size(), false);
    std::vector<size_t> stack;
    std::vector<std::vector<size_t>> sccs;
    int counter = 0;
    std::function<void(size_t)> strong = [&](size_t v) {
        idx[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = true;
        for (int d : deps[v]) {
            size_t w = index_of[d];
            if (idx[w] < 0) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], idx[w]);
            }
        }
        if (low[v] == idx[v]) {
            std::vector<size_t> comp;
            size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = false;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            sccs.push_back(comp);
        }
    };
    for (size_t i = 0; i < binds.size(); ++i)
        if (!binds[i].sig && idx[i] < 0) strong(i);

    std::map<int, IScheme> top_schemes;
    for (const auto& comp : sccs) {
        level_ = 1;
        std::vector<T> vs;
        for (size_t i : comp) {
            T v = fresh();
            env_[binds[i].name.id] = IScheme{{}, v};
            vs.push_back(v);
        }
        for (size_t j = 0; j < comp.size(); ++j) {
            const auto& b = binds[comp[j]];
            unify_or_fail(vs[j], infer(b.body), b.loc, "definition of '" + b.name.name + "'");
        }
        level_ = 0;
        for (size_t j = 0; j < comp.size(); ++j) {
            IScheme s = generalize(vs[j], true);
            env_[binds[comp[j]].name.id] = s;
            top_schemes[binds[comp[j]].name.id] = s;
        }
    }
    for (const auto& b : binds) {
        if (!b.sig) continue;
        level_ = 1;
        IScheme s = env_[b.name.id];
        T t = infer(b.body);
        level_ = 0;
        unify_or_fail(t, s.body, b.loc, "signature of '" + b.name.name + "'");
        top_schemes[b.name.id] = s;
    }

    auto export_scheme = [&](const IScheme& s) {
        Scheme out;
        for (T g : s.gens) out.vars.push_back(g->name);
        out.body = zonk(s.body);
        return out;
    };
    for (const auto& b : binds) {
        Scheme s = export_scheme(top_schemes[b.name.id]);
        out.poly[b.name.id] = s;
        out.top.emplace_back(b.name, s);
    }
    for (const auto& [id, t] : expr_) out.expr[id] = zonk(t);
    for (const auto& [id, v] : inst_) {
        auto& dst = out.inst[id];
        for (const auto& [n, t] : v) dst.emplace_back(n, zonk(t));
    }
    for (const auto& [id, t] : binder_) out.binder[id] = zonk(t);
    for (const auto& [id, s] : poly_) out.poly[id] = export_scheme(s);
}

} // namespace

ShapeInfo infer_hm(const core::Program& prog) {
    Infer inf(&prog);
    ShapeInfo out;
    inf.run(out);
    return out;
}

std::optional<std::map<std::string, RTypePtr>> unify_shapes(const RTypePtr& a, const RTypePtr& b) {
    Infer inf(nullptr);
    std::map<std::string, T> tv;
    T ta = inf.from_rtype(a, tv);
    T tb = inf.from_rtype(b, tv);
    for (const auto& [n, v] : tv) inf.var_names_[v->id] = n;
    if (!inf.unify(ta, tb)) return std::nullopt;
    std::map<std::string, RTypePtr> out;
    for (const auto& [n, v] : tv) {
        T r = Infer::repr(v);
        if (r == v) continue;
        out[n] = inf.zonk(r);
    }
    return out;
}

} // namespace lm
