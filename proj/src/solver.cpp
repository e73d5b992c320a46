#include "lm/solver.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "lm/desugar.hpp"

namespace lm {

bool is_sort_pattern(const Sort& s) { return s.kind == Sort::Kind::TyVar && !s.name.empty() && s.name[0] == '\''; }

namespace {

void atoms(const Pred& p, std::vector<Pred>& out) {
    switch (p.op()) {
    case POp::True:
    case POp::False:
    case POp::KVar: return;
    case POp::And:
        for (const auto& k : p.kids()) atoms(k, out);
        return;
    case POp::Or:
    case POp::Imp:
    case POp::Iff:
    case POp::Not:
        out.push_back(p);
        for (const auto& k : p.kids()) atoms(k, out);
        return;
    default: out.push_back(p);
    }
}

Sort generalize_sort(const Sort& s) { return s.kind == Sort::Kind::TyVar && !is_sort_pattern(s) ? Sort::tyvar("'" + s.name) : s; }

bool match_sort(const Sort& pat, const Sort& actual, std::map<std::string, Sort>& theta) {
    if (!is_sort_pattern(pat)) return pat == actual;
    if (pat.name.rfind("'?", 0) == 0) return true;
    auto it = theta.find(pat.name);
    if (it != theta.end()) return it->second == actual;
    theta[pat.name] = actual;
    return true;
}

std::string qualifier_key(const core::Qualifier& q) {
    std::string k = q.vv_sort.name + "|" + q.body.str();
    for (const auto& [x, s] : q.params) k += "|" + s.name;
    return k;
}

} // namespace

std::vector<core::Qualifier> qualifiers_from(const Pred& p, const Sort& vv_sort, const SortEnv& sorts) {
    std::vector<Pred> as;
    atoms(p, as);
    std::vector<core::Qualifier> out;
    for (const auto& a : as) {
        if (has_kvars(a)) continue;
        core::Qualifier q;
        q.name = "harvested";
        q.vv_sort = generalize_sort(vv_sort);
        Subst s;
        // Wildcards numbered by first occurrence for a canonical body.
        std::vector<Ident> order;
        std::function<void(const Pred&)> walk = [&](const Pred& x) {
            if (x.op() == POp::Var && !x.ident().is_vv() &&
                std::find(order.begin(), order.end(), x.ident()) == order.end())
                order.push_back(x.ident());
            for (const auto& k : x.kids()) walk(k);
        };
        walk(a);
        int unknown = 0;
        for (size_t i = 0; i < order.size(); ++i) {
            Ident w("*" + std::to_string(i + 1));
            auto it = sorts.find(order[i]);
            Sort srt = it != sorts.end() ? generalize_sort(it->second) : Sort::tyvar("'?" + std::to_string(++unknown));
            q.params.emplace_back(w, srt);
            s.emplace_back(order[i], Pred::var(w));
        }
        q.body = subst(a, s);
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<core::Qualifier> harvest_qualifiers(const core::Program& prog, const MeasureSigs& ms) {
    (void)ms;
    std::vector<core::Qualifier> out;
    std::set<std::string> seen;
    auto add = [&](std::vector<core::Qualifier> qs) {
        for (auto& q : qs)
            if (seen.insert(qualifier_key(q)).second) out.push_back(std::move(q));
    };
    std::function<void(const RTypePtr&, SortEnv)> from_type = [&](const RTypePtr& t, SortEnv env) {
        switch (t->kind) {
        case RType::Kind::Base:
            for (const auto& a : t->base.args) from_type(a, env);
            add(qualifiers_from(t->pred, t->base.sort(), env));
            break;
        case RType::Kind::Fun:
            from_type(t->dom, env);
            if (t->dom->is_base()) env[t->binder] = t->dom->base.sort();
            from_type(t->rng, env);
            break;
        case RType::Kind::Forall: from_type(t->body, env); break;
        }
    };
    for (const auto& b : prog.binds)
        if (b.sig) from_type(b.sig, {});
    for (const auto& d : prog.datas) {
        for (const auto& c : d.ctors) {
            SortEnv env;
            for (const auto& [f, t] : c.fields) {
                from_type(t, env);
                if (t->is_base()) env[f] = t->base.sort();
            }
        }
    }
    for (const auto& t : prog.alias_bodies) from_type(t, {});
    for (const auto& q : prog.qualifiers) {
        core::Qualifier g = q;
        g.vv_sort = generalize_sort(q.vv_sort);
        for (auto& [x, s] : g.params) s = generalize_sort(s);
        if (seen.insert(qualifier_key(g)).second) out.push_back(std::move(g));
    }
    return out;
}

std::vector<Pred> instantiate_qualifiers(const std::vector<core::Qualifier>& pool, const Sort& vv_sort,
                                         const std::vector<std::pair<Ident, Sort>>& scope, const MeasureSigs& ms) {
    std::vector<Pred> out;
    std::set<Pred> seen;
    SortEnv env;
    for (const auto& [x, s] : scope) env[x] = s;
    env[Ident::vv()] = vv_sort;
    for (const auto& q : pool) {
        std::map<std::string, Sort> theta;
        if (!match_sort(q.vv_sort, vv_sort, theta)) continue;
        Subst s;
        std::vector<bool> used(scope.size(), false);
        std::function<void(size_t, std::map<std::string, Sort>&)> go = [&](size_t i, std::map<std::string, Sort>& th) {
            if (i == q.params.size()) {
                Pred inst = subst(q.body, s);
                if (!mentions(inst, Ident::vv()) && q.params.empty()) return;
                if (!well_sorted_formula(inst, env, ms)) return;
                if (seen.insert(inst).second) out.push_back(inst);
                return;
            }
            for (size_t j = 0; j < scope.size(); ++j) {
                if (used[j]) continue;
                auto th2 = th;
                if (!match_sort(q.params[i].second, scope[j].second, th2)) continue;
                used[j] = true;
                s.emplace_back(q.params[i].first, Pred::var(scope[j].first));
                go(i + 1, th2);
                s.pop_back();
                used[j] = false;
            }
        };
        go(0, theta);
    }
    return out;
}

Pred Solution::apply(const Pred& p) const {
    return map_kvars(p, [&](const Pred& k) {
        auto it = sets.find(k.kvar_id());
        if (it == sets.end()) fail(ErrorKind::Internal, {}, "no solution for $k" + std::to_string(k.kvar_id()));
        return subst(Pred::conj(it->second), k.pending());
    });
}

namespace {

Pred with_side_conditions(const Pred& hyp, const std::vector<Pred>& goals, const MeasureEnv& me) {
    std::vector<Pred> all = {hyp};
    all.insert(all.end(), goals.begin(), goals.end());
    auto sc = me.side_conditions(all);
    if (sc.empty()) return hyp;
    sc.insert(sc.begin(), hyp);
    return Pred::conj(sc);
}

} // namespace

Query constraint_query(const Constraint& c, const Solution& s, const MeasureEnv& me) {
    Query q;
    q.consts = env_sorts(c.env, c.sort);
    Pred hyp = s.apply(Pred::conj(embed_env(c.env), c.lhs));
    q.goal = s.apply(c.rhs);
    q.hyp = with_side_conditions(hyp, {q.goal}, me);
    q.loc = c.loc;
    return q;
}

SolveResult solve(const std::vector<Constraint>& cs, const std::map<int, KVarInfo>& kvars,
                  const std::map<int, std::vector<Pred>>& candidates, Oracle& oracle, const MeasureEnv& me) {
    SolveResult res;
    Solution& sol = res.solution;
    for (const auto& [k, info] : kvars) {
        (void)info;
        auto it = candidates.find(k);
        sol.sets[k] = it != candidates.end() ? it->second : std::vector<Pred>{};
    }
    // Fixed worklist order: location, then the rhs kvar, then emission order.
    std::vector<size_t> order(cs.size());
    for (size_t i = 0; i < cs.size(); ++i) order[i] = i;
    auto rhs_k = [&](size_t i) { return cs[i].rhs.is_kvar() ? cs[i].rhs.kvar_id() : 0; };
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (!(cs[a].loc == cs[b].loc)) return cs[a].loc < cs[b].loc;
        return rhs_k(a) < rhs_k(b);
    });
    std::vector<size_t> rank(cs.size());
    for (size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    std::map<int, std::vector<size_t>> readers;
    for (size_t i = 0; i < cs.size(); ++i) {
        std::set<int> ks;
        for (int k : kvars_of(embed_env(cs[i].env))) ks.insert(k);
        for (int k : kvars_of(cs[i].lhs)) ks.insert(k);
        for (int k : ks) readers[k].push_back(i);
    }
    std::set<size_t> work;  // ranks
    for (size_t i = 0; i < cs.size(); ++i)
        if (cs[i].rhs.is_kvar()) work.insert(rank[i]);

    while (!work.empty()) {
        size_t i = order[*work.begin()];
        work.erase(work.begin());
        const Constraint& c = cs[i];
        int k = c.rhs.kvar_id();
        auto& cur = sol.sets[k];
        if (cur.empty()) continue;
        ++res.iterations;
        std::vector<Pred> goals;
        for (const auto& q : cur) goals.push_back(subst(q, c.rhs.pending()));
        Pred hyp = sol.apply(Pred::conj(embed_env(c.env), c.lhs));
        hyp = with_side_conditions(hyp, goals, me);
        auto rs = oracle.check(env_sorts(c.env, c.sort), hyp, goals, false);
        std::vector<Pred> keep;
        for (size_t j = 0; j < cur.size(); ++j)
            if (rs[j].v == Validity::Valid) keep.push_back(cur[j]);
        if (keep.size() == cur.size()) continue;
        cur = std::move(keep);
        for (size_t r : readers[k])
            if (cs[r].rhs.is_kvar()) work.insert(rank[r]);
    }

    for (size_t r = 0; r < order.size(); ++r) {
        size_t i = order[r];
        if (cs[i].rhs.is_kvar()) continue;
        Query q = constraint_query(cs[i], sol, me);
        OracleResult o = oracle.check_one(q, true);
        if (o.v != Validity::Valid) res.failures.push_back({static_cast<int>(i), q.hyp, q.goal, o});
    }
    // Soundness re-check of the inferred refinements.
    for (size_t r = 0; r < order.size(); ++r) {
        size_t i = order[r];
        if (!cs[i].rhs.is_kvar()) continue;
        Query q = constraint_query(cs[i], sol, me);
        OracleResult o = oracle.check_one(q, true);
        if (o.v != Validity::Valid) res.failures.push_back({static_cast<int>(i), q.hyp, q.goal, o});
    }
    return res;
}

} // namespace lm
