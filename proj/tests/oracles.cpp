#include "oracles.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <variant>
#include <sstream>

namespace lmtest {

std::string repo_path(const std::string& rel) { return std::string(LM_SOURCE_DIR) + "/" + rel; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& tag) {
    namespace fs = std::filesystem;
    static int counter = 0;
    fs::path p = fs::temp_directory_path() / ("lm-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

CliResult run_cli(const std::string& args, const std::string& env) {
    std::string dir = temp_dir("cli");
    std::string out = dir + "/out", err = dir + "/err";
    std::string cmd = "cd '" + std::string(LM_SOURCE_DIR) + "' && " + env + (env.empty() ? "" : " ") + "'" +
                      std::string(LM_CLI) + "' " + args + " >'" + out + "' 2>'" + err + "'";
    int st = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = read_text(out);
    r.err = read_text(err);
    std::filesystem::remove_all(dir);
    return r;
}

std::vector<ManifestRow> read_manifest() {
    std::stringstream ss(read_text(repo_path("corpus/manifest.tsv")));
    std::vector<ManifestRow> rows;
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        ManifestRow r;
        std::string loc;
        std::getline(ls, r.path, '\t');
        std::getline(ls, r.verdict, '\t');
        std::getline(ls, loc, '\t');
        std::getline(ls, r.section, '\t');
        r.line = loc == "-" ? 0 : std::stoi(loc);
        rows.push_back(r);
    }
    return rows;
}

Loaded load_source(const std::string& text, const std::string& path) {
    Loaded l;
    reset_fresh_counter(1);
    l.sf = parse_source(text, path);
    l.prog = desugar(l.sf);
    l.shapes = infer_hm(l.prog);
    l.me = compile_measures(l.prog, l.sf, l.shapes);
    return l;
}

Loaded load_file(const std::string& rel) { return load_source(read_text(repo_path(rel)), rel); }

// ---- evaluation ---------------------------------------------------------------

std::optional<long long> eval(const Pred& p, const std::map<Ident, long long>& env, const AppEval& app) {
    auto ev = [&](size_t i) { return eval(p.kid(i), env, app); };
    switch (p.op()) {
    case POp::True: return 1;
    case POp::False: return 0;
    case POp::Int: return p.int_val();
    case POp::Var: {
        auto it = env.find(p.ident());
        if (it == env.end()) return std::nullopt;
        return it->second;
    }
    case POp::KVar: return std::nullopt;
    case POp::App:
        if (!app) return std::nullopt;
        return app(p.fn(), p.kids());
    case POp::Neg: {
        auto a = ev(0);
        if (!a) return std::nullopt;
        return -*a;
    }
    case POp::Not: {
        auto a = ev(0);
        if (!a) return std::nullopt;
        return *a ? 0 : 1;
    }
    case POp::And:
    case POp::Or: {
        bool conj = p.op() == POp::And;
        for (const auto& k : p.kids()) {
            auto a = eval(k, env, app);
            if (!a) return std::nullopt;
            if ((*a != 0) != conj) return conj ? 0 : 1;
        }
        return conj ? 1 : 0;
    }
    case POp::Ite: {
        auto c = ev(0);
        if (!c) return std::nullopt;
        return *c ? ev(1) : ev(2);
    }
    default: break;
    }
    auto a = ev(0), b = ev(1);
    if (!a || !b) return std::nullopt;
    switch (p.op()) {
    case POp::Add: return *a + *b;
    case POp::Sub: return *a - *b;
    case POp::Mul: return *a * *b;
    case POp::Eq: return *a == *b;
    case POp::Ne: return *a != *b;
    case POp::Lt: return *a < *b;
    case POp::Le: return *a <= *b;
    case POp::Gt: return *a > *b;
    case POp::Ge: return *a >= *b;
    case POp::Imp: return !*a || *b;
    case POp::Iff: return (*a != 0) == (*b != 0);
    default: return std::nullopt;
    }
}

std::vector<std::optional<std::map<Ident, long long>>> box_countermodels(const SortEnv& consts, const Pred& hyp,
                                                                        const std::vector<Pred>& goals, long long bound) {
    std::vector<std::pair<Ident, Sort>> vars;
    std::set<Ident> used = free_vars(hyp);
    for (const auto& g : goals)
        for (const auto& x : free_vars(g)) used.insert(x);
    for (const auto& [x, s] : consts)
        if (used.count(x)) vars.emplace_back(x, s);
    std::vector<std::optional<std::map<Ident, long long>>> out(goals.size());
    size_t open = goals.size();
    std::map<Ident, long long> env;
    std::function<void(size_t)> go = [&](size_t i) {
        if (open == 0) return;
        if (i == vars.size()) {
            auto h = eval(hyp, env);
            if (!h) throw std::runtime_error("box evaluator: cannot evaluate " + hyp.str());
            if (!*h) return;
            for (size_t j = 0; j < goals.size(); ++j) {
                if (out[j]) continue;
                auto g = eval(goals[j], env);
                if (!g) throw std::runtime_error("box evaluator: cannot evaluate " + goals[j].str());
                if (!*g) {
                    out[j] = env;
                    --open;
                }
            }
            return;
        }
        bool is_bool = vars[i].second.kind == Sort::Kind::Bool;
        long long lo = is_bool ? 0 : -bound, hi = is_bool ? 1 : bound;
        for (long long v = lo; v <= hi; ++v) {
            env[vars[i].first] = v;
            go(i + 1);
        }
        env.erase(vars[i].first);
    };
    go(0);
    return out;
}

std::optional<std::map<Ident, long long>> box_countermodel(const SortEnv& consts, const Pred& hyp, const Pred& goal,
                                                            long long bound) {
    return box_countermodels(consts, hyp, {goal}, bound).at(0);
}

std::vector<OracleResult> BoxOracle::check(const SortEnv& consts, const Pred& hyp, const std::vector<Pred>& goals,
                                           bool want_model) {
    queries += goals.size();
    std::vector<OracleResult> out;
    for (auto& cm : box_countermodels(consts, hyp, goals, bound_)) {
        OracleResult r;
        r.v = cm ? Validity::Invalid : Validity::Valid;
        if (cm && want_model)
            for (const auto& [x, v] : *cm) r.model.emplace_back(x.smt_name(), std::to_string(v));
        out.push_back(std::move(r));
    }
    return out;
}

// ---- random formulas ----------------------------------------------------------

Pred random_atom(Rng& rng, const std::vector<Pred>& vars, long long kmax) {
    static const std::vector<POp> ops = {POp::Eq, POp::Ne, POp::Lt, POp::Le, POp::Gt, POp::Ge};
    POp op = rng.pick(ops);
    Pred x = rng.pick(vars);
    Pred k = Pred::lit(rng.range(-kmax, kmax));
    if (vars.size() > 1 && rng.coin(0.6)) {
        Pred y = rng.pick(vars);
        while (y == x) y = rng.pick(vars);
        Pred rhs = rng.coin() ? y : Pred::add(y, k);
        return Pred::cmp(op, x, rhs);
    }
    return Pred::cmp(op, x, k);
}

Pred random_formula(Rng& rng, const std::vector<Pred>& vars, int depth, long long kmax) {
    if (depth <= 0 || rng.coin(0.35)) return random_atom(rng, vars, kmax);
    switch (rng.range(0, 4)) {
    case 0: return Pred::conj(random_formula(rng, vars, depth - 1, kmax), random_formula(rng, vars, depth - 1, kmax));
    case 1: return Pred::disj(random_formula(rng, vars, depth - 1, kmax), random_formula(rng, vars, depth - 1, kmax));
    case 2: return Pred::lnot(random_formula(rng, vars, depth - 1, kmax));
    case 3: return Pred::imp(random_formula(rng, vars, depth - 1, kmax), random_formula(rng, vars, depth - 1, kmax));
    default: return Pred::iff(random_formula(rng, vars, depth - 1, kmax), random_formula(rng, vars, depth - 1, kmax));
    }
}

Pred random_term(Rng& rng, const std::vector<Pred>& vars, int depth, long long kmax) {
    if (depth <= 0 || rng.coin(0.4)) return rng.coin(0.7) ? rng.pick(vars) : Pred::lit(rng.range(-kmax, kmax));
    switch (rng.range(0, 3)) {
    case 0: return Pred::add(random_term(rng, vars, depth - 1, kmax), random_term(rng, vars, depth - 1, kmax));
    case 1: return Pred::sub(random_term(rng, vars, depth - 1, kmax), random_term(rng, vars, depth - 1, kmax));
    case 2: return Pred::mul(Pred::lit(rng.range(-3, 3)), random_term(rng, vars, depth - 1, kmax));
    default: return Pred::neg(random_term(rng, vars, depth - 1, kmax));
    }
}

Query random_query(Rng& rng, int nvars, long long bound) {
    Query q;
    std::vector<Pred> vars;
    std::vector<Pred> hyp;
    for (int i = 0; i < nvars; ++i) {
        Ident x = Ident::fresh(std::string(1, static_cast<char>('a' + i)));
        q.consts[x] = Sort::integer();
        vars.push_back(Pred::var(x));
        hyp.push_back(Pred::cmp(POp::Le, Pred::lit(-bound), vars.back()));
        hyp.push_back(Pred::cmp(POp::Le, vars.back(), Pred::lit(bound)));
    }
    auto atom = [&] {
        if (rng.coin(0.5)) return random_atom(rng, vars, 3);
        static const std::vector<POp> ops = {POp::Eq, POp::Ne, POp::Lt, POp::Le, POp::Gt, POp::Ge};
        return Pred::cmp(rng.pick(ops), random_term(rng, vars, 2, 3), random_term(rng, vars, 2, 3));
    };
    std::function<Pred(int)> formula = [&](int depth) -> Pred {
        if (depth <= 0 || rng.coin(0.35)) return atom();
        switch (rng.range(0, 4)) {
        case 0: return Pred::conj(formula(depth - 1), formula(depth - 1));
        case 1: return Pred::disj(formula(depth - 1), formula(depth - 1));
        case 2: return Pred::lnot(formula(depth - 1));
        case 3: return Pred::imp(formula(depth - 1), formula(depth - 1));
        default: return Pred::iff(formula(depth - 1), formula(depth - 1));
        }
    };
    int nh = static_cast<int>(rng.range(0, 3));
    for (int i = 0; i < nh; ++i) hyp.push_back(formula(2));
    q.hyp = Pred::conj(hyp);
    q.goal = formula(2);
    return q;
}

std::optional<std::map<Ident, long long>> model_env(const SortEnv& consts,
                                                    const std::vector<std::pair<std::string, std::string>>& model) {
    std::map<std::string, std::string> by;
    for (const auto& [n, v] : model) by[n] = v;
    std::map<Ident, long long> env;
    for (const auto& [x, s] : consts) {
        auto it = by.find(x.smt_name());
        if (it == by.end()) {
            env[x] = 0;  // unconstrained
            continue;
        }
        std::string v = it->second;
        if (v == "true" || v == "false") {
            env[x] = v == "true";
            continue;
        }
        std::string digits;
        bool neg = false;
        for (char c : v) {
            if (c == '-') neg = true;
            if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
        }
        if (digits.empty()) return std::nullopt;
        env[x] = (neg ? -1 : 1) * std::stoll(digits);
    }
    return env;
}

// ---- unification ----------------------------------------------------------------

std::string Term::str() const {
    if (args.empty()) return head;
    if (head == "->") return "(" + args[0].str() + " -> " + args[1].str() + ")";
    std::string s = "(" + head;
    for (const auto& a : args) s += " " + a.str();
    return s + ")";
}

Term apply_subst(const TermSubst& s, const Term& t) {
    if (t.is_var()) {
        auto it = s.find(t.head);
        return it == s.end() ? t : apply_subst(s, it->second);
    }
    Term r{t.head, {}};
    for (const auto& a : t.args) r.args.push_back(apply_subst(s, a));
    return r;
}

namespace {

bool occurs(const std::string& v, const Term& t) {
    if (t.is_var()) return t.head == v;
    for (const auto& a : t.args)
        if (occurs(v, a)) return true;
    return false;
}

bool match(const Term& g, const Term& s, TermSubst& th) {
    if (g.is_var()) {
        auto it = th.find(g.head);
        if (it != th.end()) return it->second == s;
        th[g.head] = s;
        return true;
    }
    if (g.head != s.head || g.args.size() != s.args.size()) return false;
    for (size_t i = 0; i < g.args.size(); ++i)
        if (!match(g.args[i], s.args[i], th)) return false;
    return true;
}

} // namespace

// Worklist Robinson unification; the result is fully resolved.
std::optional<TermSubst> robinson(const Term& a, const Term& b) {
    TermSubst s;
    std::vector<std::pair<Term, Term>> work;
    work.emplace_back(a, b);
    while (!work.empty()) {
        auto [x, y] = work.back();
        work.pop_back();
        x = apply_subst(s, x);
        y = apply_subst(s, y);
        if (x == y) continue;
        if (!x.is_var() && y.is_var()) std::swap(x, y);
        if (x.is_var()) {
            if (occurs(x.head, y)) return std::nullopt;
            s[x.head] = y;
            continue;
        }
        if (x.head != y.head || x.args.size() != y.args.size()) return std::nullopt;
        for (size_t i = 0; i < x.args.size(); ++i) work.emplace_back(x.args[i], y.args[i]);
    }
    TermSubst out;
    for (const auto& [v, t] : s) out[v] = apply_subst(s, t);
    return out;
}

bool is_instance(const Term& general, const Term& specific) {
    TermSubst th;
    return match(general, specific, th);
}

Term to_term(const RTypePtr& t) {
    switch (t->kind) {
    case RType::Kind::Forall: return to_term(t->body);
    case RType::Kind::Fun: return Term{"->", {to_term(t->dom), to_term(t->rng)}};
    case RType::Kind::Base: break;
    }
    const BaseType& b = t->base;
    switch (b.kind) {
    case BaseType::Kind::Int: return Term{"Int", {}};
    case BaseType::Kind::Bool: return Term{"Bool", {}};
    case BaseType::Kind::TyVar: return Term{"'" + b.name, {}};
    case BaseType::Kind::TyCon: break;
    }
    Term r{b.name, {}};
    for (const auto& a : b.args) r.args.push_back(to_term(a));
    return r;
}

RTypePtr to_shape(const Term& t) {
    if (t.is_var()) return rbase(BaseType::tyvar(t.head.substr(1)));
    if (t.head == "Int") return rint();
    if (t.head == "Bool") return rbool();
    if (t.head == "->") return rfun(Ident::fresh("x"), to_shape(t.args[0]), to_shape(t.args[1]));
    std::vector<RTypePtr> as;
    for (const auto& a : t.args) as.push_back(to_shape(a));
    return rbase(BaseType::tycon(t.head, as));
}

Term random_type(Rng& rng, int depth, const std::vector<std::string>& vars) {
    int choice = static_cast<int>(rng.range(0, depth <= 0 ? 2 : 5));
    switch (choice) {
    case 0: return Term{"'" + rng.pick(vars), {}};
    case 1: return Term{"Int", {}};
    case 2: return rng.coin() ? Term{"Bool", {}} : Term{"'" + rng.pick(vars), {}};
    case 3: return Term{"List", {random_type(rng, depth - 1, vars)}};
    case 4: return Term{"IncList", {random_type(rng, depth - 1, vars)}};
    default: return Term{"->", {random_type(rng, depth - 1, vars), random_type(rng, depth - 1, vars)}};
    }
}

// ---- strongest solutions ----------------------------------------------------------


namespace {

// Truth tables of one kvar-rhs constraint over every box point.
struct Table {
    std::vector<int> reads;                   // kvar of each occurrence in the hypothesis
    std::vector<std::vector<uint32_t>> occ;   // [point][occurrence] candidates true there
    std::vector<uint32_t> goal;               // [point] rhs candidates true there
};

Table tabulate(const Constraint& c, const std::map<int, std::vector<Pred>>& cands, long long bound) {
    Table t;
    std::vector<Pred> base, kv;
    std::function<void(const Pred&)> split = [&](const Pred& p) {
        if (p.op() == POp::And) {
            for (const auto& k : p.kids()) split(k);
        } else if (p.is_kvar()) {
            kv.push_back(p);
        } else if (has_kvars(p)) {
            throw std::runtime_error("kvar below a connective: " + p.str());
        } else {
            base.push_back(p);
        }
    };
    split(Pred::conj(embed_env(c.env), c.lhs));
    for (const auto& k : kv) t.reads.push_back(k.kvar_id());
    Pred hyp = Pred::conj(base);
    SortEnv sorts = env_sorts(c.env, c.sort);
    std::vector<std::pair<Ident, Sort>> vars(sorts.begin(), sorts.end());
    std::map<Ident, long long> env;
    auto bits = [&](const std::vector<Pred>& qs, const Subst& pending) {
        uint32_t b = 0;
        for (size_t j = 0; j < qs.size(); ++j) {
            auto v = eval(subst(qs[j], pending), env);
            if (!v) throw std::runtime_error("cannot evaluate " + qs[j].str());
            if (*v) b |= 1u << j;
        }
        return b;
    };
    std::function<void(size_t)> go = [&](size_t i) {
        if (i == vars.size()) {
            auto h = eval(hyp, env);
            if (!h) throw std::runtime_error("cannot evaluate " + hyp.str());
            if (!*h) return;
            std::vector<uint32_t> row;
            for (const auto& k : kv) row.push_back(bits(cands.at(k.kvar_id()), k.pending()));
            t.occ.push_back(std::move(row));
            t.goal.push_back(bits(cands.at(c.rhs.kvar_id()), c.rhs.pending()));
            return;
        }
        bool is_bool = vars[i].second.kind == Sort::Kind::Bool;
        for (long long v = is_bool ? 0 : -bound; v <= (is_bool ? 1 : bound); ++v) {
            env[vars[i].first] = v;
            go(i + 1);
        }
    };
    go(0);
    return t;
}

} // namespace

std::map<int, std::vector<Pred>> brute_strongest(const std::vector<Constraint>& cs,
                                                 const std::map<int, std::vector<Pred>>& cands, long long bound) {
    std::vector<int> ks;
    for (const auto& [k, qs] : cands) ks.push_back(k);
    std::vector<size_t> idx;
    std::vector<Table> tables;
    for (size_t i = 0; i < cs.size(); ++i)
        if (cs[i].rhs.is_kvar()) {
            idx.push_back(i);
            tables.push_back(tabulate(cs[i], cands, bound));
        }
    std::map<int, uint32_t> mask, best;
    for (int k : ks) best[k] = 0;
    // Valid rhs candidates per assignment of the kvars a constraint reads.
    std::vector<std::map<std::vector<uint32_t>, uint32_t>> memo(tables.size());
    auto holds = [&](const Constraint& c, size_t j) {
        const Table& t = tables[j];
        std::vector<uint32_t> key;
        for (int k : t.reads) key.push_back(mask.at(k));
        auto it = memo[j].find(key);
        if (it == memo[j].end()) {
            uint32_t bad = 0;
            for (size_t p = 0; p < t.goal.size(); ++p) {
                bool hyp = true;
                for (size_t o = 0; o < key.size() && hyp; ++o) hyp = (t.occ[p][o] & key[o]) == key[o];
                if (hyp) bad |= ~t.goal[p];
            }
            it = memo[j].emplace(std::move(key), ~bad).first;
        }
        uint32_t want = mask.at(c.rhs.kvar_id());
        return (want & ~it->second) == 0;
    };
    std::function<void(size_t)> go = [&](size_t i) {
        if (i == ks.size()) {
            for (size_t j = 0; j < idx.size(); ++j)
                if (!holds(cs[idx[j]], j)) return;
            for (int k : ks) best[k] |= mask[k];
            return;
        }
        int k = ks[i];
        for (uint32_t m = 0; m < (1u << cands.at(k).size()); ++m) {
            mask[k] = m;
            go(i + 1);
        }
    };
    go(0);
    std::map<int, std::vector<Pred>> out;
    for (int k : ks) {
        out[k];
        for (size_t j = 0; j < cands.at(k).size(); ++j)
            if (best[k] >> j & 1u) out[k].push_back(cands.at(k)[j]);
    }
    mask = best;
    for (size_t j = 0; j < idx.size(); ++j)
        if (!holds(cs[idx[j]], j)) throw std::runtime_error("union of solutions is not a solution");
    return out;
}

// ---- random constraint systems ------------------------------------------------------

RandomSystem random_system(Rng& rng, const SystemShape& shape) {
    RandomSystem sys;
    std::vector<Ident> xs;
    for (int i = 0; i < shape.vars; ++i) xs.push_back(Ident::fresh(std::string(1, static_cast<char>('x' + i))));
    std::vector<Pred> with_vv = {Pred::vv()}, plain;
    for (const auto& x : xs) {
        with_vv.push_back(Pred::var(x));
        plain.push_back(Pred::var(x));
    }
    std::vector<std::pair<Ident, Sort>> scope;
    for (const auto& x : xs) scope.emplace_back(x, Sort::integer());

    int nk = static_cast<int>(rng.range(1, shape.kvars));
    int budget = shape.max_candidates;
    std::vector<int> ids;
    for (int i = 0; i < nk; ++i) {
        int id = 1000 + i;
        ids.push_back(id);
        sys.kvars[id] = KVarInfo{id, Sort::integer(), scope, Loc{"r.lm", 1, 1}};
        int want = static_cast<int>(rng.range(1, std::max(1, budget - (nk - i - 1))));
        want = std::min(want, budget / (nk - i));
        want = std::max(want, 1);
        budget -= want;
        std::vector<Pred> qs;
        std::set<Pred> seen;
        for (int tries = 0; static_cast<int>(qs.size()) < want && tries < 100; ++tries) {
            Pred a = random_atom(rng, with_vv, shape.kmax);
            if (!mentions(a, Ident::vv()) || !seen.insert(a).second) continue;
            qs.push_back(a);
        }
        sys.cands[id] = qs;
    }

    int nc = static_cast<int>(rng.range(2, shape.constraints));
    for (int i = 0; i < nc; ++i) {
        Constraint c;
        c.id = i;
        c.sort = Sort::integer();
        c.loc = Loc{"r.lm", 1, 1};
        c.rule = "random";
        Env env;
        for (const auto& x : xs) {
            Pred r = Pred::tt();
            int pick = static_cast<int>(rng.range(0, 3));
            if (pick == 1) r = random_atom(rng, {Pred::vv()}, shape.kmax);
            if (pick == 2) r = Pred::kvar(rng.pick(ids));
            env = env.bind(x, rint(r));
        }
        if (rng.coin(0.5)) env = env.guard(random_formula(rng, plain, 1, shape.kmax));
        std::vector<Pred> lhs;
        if (rng.coin(0.6)) lhs.push_back(Pred::kvar(rng.pick(ids)));
        if (rng.coin(0.7)) lhs.push_back(random_atom(rng, with_vv, shape.kmax));
        c.lhs = Pred::conj(lhs);
        c.env = env;
        if (rng.coin(0.75)) c.rhs = Pred::kvar(rng.pick(ids));
        else c.rhs = random_atom(rng, with_vv, shape.kmax);
        sys.cs.push_back(std::move(c));
    }
    return sys;
}

// ---- measures over concrete values ------------------------------------------------

namespace {

const core::CtorDecl& ctor_of(const core::Program& prog, const std::string& name, const core::DataDecl** dd) {
    for (const auto& d : prog.datas)
        for (const auto& c : d.ctors)
            if (c.name == name) {
                *dd = &d;
                return c;
            }
    throw std::runtime_error("unknown constructor " + name);
}

} // namespace

std::optional<long long> unfold_measure(const Loaded& l, const std::string& m, const interp::Data& d) {
    if (d.kind != interp::Data::Kind::Con) return std::nullopt;
    const core::DataDecl* dd = nullptr;
    const core::CtorDecl& c = ctor_of(l.prog, d.con, &dd);
    std::vector<Pred> ax;
    for (const auto& a : l.me.axioms(*dd, c))
        if (a.measure == m) ax.push_back(a.axiom);
    if (ax.empty()) return std::nullopt;
    std::map<Ident, long long> env;
    std::map<Ident, const interp::Data*> kids;
    for (size_t i = 0; i < c.fields.size(); ++i) {
        const auto& f = d.args.at(i);
        if (f.kind == interp::Data::Kind::Con) kids[c.fields[i].first] = &f;
        else env[c.fields[i].first] = f.kind == interp::Data::Kind::Bool ? f.b : f.i;
    }
    std::map<std::pair<std::string, Ident>, std::optional<long long>> memo;
    std::optional<long long> found;
    const MeasureDecl* md = l.me.find(m);
    bool is_bool = md && md->result.kind == Sort::Kind::Bool;
    for (long long guess = is_bool ? 0 : -64; guess <= (is_bool ? 1 : 64); ++guess) {
        AppEval app = [&](const std::string& fn, const std::vector<Pred>& args) -> std::optional<long long> {
            if (args.size() != 1 || args[0].op() != POp::Var) return std::nullopt;
            const Ident& x = args[0].ident();
            if (x.is_vv()) return fn == m ? std::optional<long long>(guess) : std::nullopt;
            auto it = kids.find(x);
            if (it == kids.end()) return std::nullopt;
            auto key = std::make_pair(fn, x);
            auto mit = memo.find(key);
            if (mit == memo.end()) mit = memo.emplace(key, unfold_measure(l, fn, *it->second)).first;
            return mit->second;
        };
        auto v = eval(Pred::conj(ax), env, app);
        if (!v) return std::nullopt;
        if (*v) {
            if (found) return std::nullopt;
            found = guess;
        }
    }
    return found;
}

Query measure_query(const Loaded& l, const std::string& m, const interp::Data& d, long long expected) {
    Query q;
    std::vector<Pred> hyp;
    int counter = 0;
    std::function<Pred(const interp::Data&)> node = [&](const interp::Data& x) -> Pred {
        if (x.kind == interp::Data::Kind::Int) return Pred::lit(x.i);
        if (x.kind == interp::Data::Kind::Bool) return Pred::boolean(x.b);
        const core::DataDecl* dd = nullptr;
        const core::CtorDecl& c = ctor_of(l.prog, x.con, &dd);
        Ident me = Ident::fresh("n" + std::to_string(counter++));
        q.consts[me] = Sort::data(dd->name);
        Subst s;
        s.emplace_back(Ident::vv(), Pred::var(me));
        for (size_t i = 0; i < c.fields.size(); ++i) s.emplace_back(c.fields[i].first, node(x.args.at(i)));
        for (const auto& a : l.me.axioms(*dd, c)) hyp.push_back(subst(a.axiom, s));
        return Pred::var(me);
    };
    Pred root = node(d);
    Pred app = Pred::app(m, {root});
    q.hyp = Pred::conj(hyp);
    const MeasureDecl* md = l.me.find(m);
    q.goal = Pred::eq(app, md && md->result.kind == Sort::Kind::Bool ? Pred::boolean(expected != 0) : Pred::lit(expected));
    return q;
}

std::vector<interp::Data> all_lists(int n, const std::vector<long long>& vals) {
    std::vector<interp::Data> out;
    std::vector<long long> cur;
    std::function<void()> go = [&] {
        out.push_back(interp::list(cur));
        if (static_cast<int>(cur.size()) == n) return;
        for (long long v : vals) {
            cur.push_back(v);
            go();
            cur.pop_back();
        }
    };
    go();
    return out;
}

std::vector<interp::Data> all_trees(int n, const std::string& leaf, const std::string& node, const Fill& fill) {
    // Shapes first, then numbered in order so `fill` can place keys in order.
    struct Shape {
        std::shared_ptr<Shape> l, r;
    };
    using S = std::shared_ptr<Shape>;
    std::vector<std::vector<S>> by(static_cast<size_t>(n) + 1);
    by[0].push_back(nullptr);
    for (int k = 1; k <= n; ++k)
        for (int i = 0; i < k; ++i)
            for (const auto& a : by[static_cast<size_t>(i)])
                for (const auto& b : by[static_cast<size_t>(k - 1 - i)]) by[static_cast<size_t>(k)].push_back(std::make_shared<Shape>(Shape{a, b}));
    std::vector<interp::Data> out;
    for (const auto& level : by)
        for (const auto& s : level) {
            int index = 0;
            std::function<interp::Data(const S&)> build = [&](const S& t) -> interp::Data {
                if (!t) return interp::Data::ctor(leaf);
                interp::Data l = build(t->l);
                int here = index++;
                interp::Data r = build(t->r);
                std::vector<interp::Data> args;
                auto scalars = fill(here, l, r);
                // Scalars first, then subtrees, then the remaining scalars.
                args.push_back(scalars.at(0));
                args.push_back(l);
                args.push_back(r);
                for (size_t i = 1; i < scalars.size(); ++i) args.push_back(scalars[i]);
                return interp::Data::ctor(node, args);
            };
            out.push_back(build(s));
        }
    return out;
}

long long tree_height(const interp::Data& t) {
    long long h = 0;
    for (const auto& a : t.args)
        if (a.kind == interp::Data::Kind::Con) h = std::max(h, tree_height(a));
    return t.args.empty() ? 0 : 1 + h;
}

// ---- dynamic cross-check --------------------------------------------------------------

namespace {

using interp::Data;

std::vector<long long> random_list(Rng& rng, int max_len) {
    std::vector<long long> xs(static_cast<size_t>(rng.range(0, max_len)));
    for (auto& x : xs) x = rng.range(-5, 5);
    return xs;
}

std::optional<std::vector<long long>> inc_ints(const Data& d) {
    std::vector<long long> out;
    const Data* p = &d;
    while (p->kind == Data::Kind::Con && p->con == ":<") {
        out.push_back(p->args.at(0).i);
        p = &p->args.at(1);
    }
    if (p->kind != Data::Kind::Con || p->con != "Emp") return std::nullopt;
    return out;
}

Data to_inc(const std::vector<long long>& xs) {
    Data d = Data::ctor("Emp");
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) d = Data::ctor(":<", {Data::num(*it), d});
    return d;
}

std::string show(const std::vector<long long>& xs) {
    std::string s = "[";
    for (size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
    return s + "]";
}

std::optional<std::string> check_sorted_perm(const std::vector<long long>& in, const Data& out) {
    auto got = inc_ints(out);
    if (!got) return "not an IncList: " + out.str();
    auto want = in;
    std::sort(want.begin(), want.end());
    if (*got != want) return "sorting " + show(in) + " gave " + show(*got);
    return std::nullopt;
}

// Height, or a description of the violated invariant. Keys lie in (lo, hi).
std::variant<long long, std::string> avl_ok(const Data& t, std::optional<long long> lo, std::optional<long long> hi) {
    if (t.con == "Leaf") return 0LL;
    long long k = t.args.at(0).i;
    if ((lo && k <= *lo) || (hi && k >= *hi)) return "key " + std::to_string(k) + " out of order";
    auto l = avl_ok(t.args.at(1), lo, k);
    if (auto* e = std::get_if<std::string>(&l)) return *e;
    auto r = avl_ok(t.args.at(2), k, hi);
    if (auto* e = std::get_if<std::string>(&r)) return *e;
    long long hl = std::get<long long>(l), hr = std::get<long long>(r);
    if (hl - hr > 1 || hr - hl > 1) return "unbalanced at key " + std::to_string(k);
    long long h = 1 + std::max(hl, hr);
    if (t.args.at(3).i != h) return "cached height " + std::to_string(t.args.at(3).i) + " != " + std::to_string(h);
    return h;
}

} // namespace

DynReport dynamic_check(const std::string& rel, Rng& rng, int trials) {
    Loaded l = load_file(rel);
    interp::Interpreter in(l.prog);
    DynReport rep;
    std::string name = std::filesystem::path(rel).stem().string();
    auto problem = [&](const std::string& what) { rep.problems.push_back(rel + ": " + what); };
    auto run = [&](const std::string& label, const std::function<std::optional<std::string>()>& body) {
        ++rep.trials;
        try {
            if (auto p = body()) problem(label + ": " + *p);
        } catch (const interp::PatternFailure& e) {
            problem(label + ": pattern-match failure at " + e.loc.str());
        } catch (const interp::EvalError& e) {
            problem(label + ": " + e.what());
        }
    };
    for (int t = 0; t < trials; ++t) {
        if (name == "max") {
            long long x = rng.range(-20, 20), y = rng.range(-20, 20);
            run("max", [&]() -> std::optional<std::string> {
                long long m = in.call("max", {Data::num(x), Data::num(y)}).i;
                if (m < x || m < y || (m != x && m != y)) return "max gave " + std::to_string(m);
                return std::nullopt;
            });
        } else if (name == "head") {
            auto xs = random_list(rng, 6);
            long long d = rng.range(-5, 5);
            run("firstOr " + show(xs), [&]() -> std::optional<std::string> {
                long long r = in.call("firstOr", {Data::num(d), interp::list(xs)}).i;
                if (r != (xs.empty() ? d : xs[0])) return "wrong result";
                if (!xs.empty() && in.call("head", {interp::list(xs)}).i != xs[0]) return "head is not the first element";
                return std::nullopt;
            });
        } else if (name == "head_client_unsafe") {
            auto xs = random_list(rng, 6);
            run("second " + show(xs), [&]() -> std::optional<std::string> {
                long long r = in.call("second", {interp::list(xs)}).i;
                if (r != xs.at(1)) return "wrong result";
                return std::nullopt;
            });
        } else if (name == "inclist") {
            auto xs = random_list(rng, 6);
            run("insertSort " + show(xs), [&] { return check_sorted_perm(xs, in.call("insertSort", {interp::list(xs)})); });
            run("mergeSort " + show(xs), [&] { return check_sorted_perm(xs, in.call("mergeSort", {interp::list(xs)})); });
            auto ys = random_list(rng, 3), zs = random_list(rng, 3);
            std::sort(ys.begin(), ys.end());
            std::sort(zs.begin(), zs.end());
            auto both = ys;
            both.insert(both.end(), zs.begin(), zs.end());
            run("merge " + show(ys) + " " + show(zs),
                [&] { return check_sorted_perm(both, in.call("merge", {to_inc(ys), to_inc(zs)})); });
            long long y = rng.range(-5, 5);
            auto with = zs;
            with.push_back(y);
            run("insert", [&] { return check_sorted_perm(with, in.call("insert", {Data::num(y), to_inc(zs)})); });
        } else if (name == "quicksort_strong_join" || name == "quicksort_weak_join") {
            auto xs = random_list(rng, 6);
            run("quickSort " + show(xs), [&] { return check_sorted_perm(xs, in.call("quickSort", {interp::list(xs)})); });
        } else if (name == "avl_insert_equil" || name == "avl_insert_node_only") {
            auto keys = random_list(rng, 6);
            run("insert " + show(keys), [&]() -> std::optional<std::string> {
                Data t = Data::ctor("Leaf");
                std::set<long long> seen;
                for (long long k : keys) {
                    t = in.call("insert", {Data::num(k), t});
                    seen.insert(k);
                    auto ok = avl_ok(t, std::nullopt, std::nullopt);
                    if (auto* e = std::get_if<std::string>(&ok)) return *e + " in " + t.str();
                    if (in.call("height", {t}).i != std::get<long long>(ok)) return "height measure disagrees";
                }
                std::vector<long long> inorder;
                std::function<void(const Data&)> walk = [&](const Data& n) {
                    if (n.con == "Leaf") return;
                    walk(n.args.at(1));
                    inorder.push_back(n.args.at(0).i);
                    walk(n.args.at(2));
                };
                walk(t);
                if (inorder != std::vector<long long>(seen.begin(), seen.end())) return "keys lost or duplicated";
                return std::nullopt;
            });
        } else {
            throw std::runtime_error("no dynamic check for " + rel);
        }
    }
    return rep;
}

} // namespace lmtest
