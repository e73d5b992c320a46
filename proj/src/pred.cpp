#include "lm/pred.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace lm {

Pred Pred::make(PredNode node) { return Pred(std::make_shared<const PredNode>(std::move(node))); }

Pred::Pred() : Pred(tt()) {}

Pred Pred::tt() {
    static const Pred p = make(PredNode{POp::True});
    return p;
}

Pred Pred::ff() {
    static const Pred p = make(PredNode{POp::False});
    return p;
}

Pred Pred::lit(long long v) {
    PredNode n{POp::Int};
    n.ival = v;
    return make(std::move(n));
}

Pred Pred::var(const Ident& x) {
    PredNode n{POp::Var};
    n.var = x;
    return make(std::move(n));
}

Pred Pred::vv() { return var(Ident::vv()); }

Pred Pred::kvar(int id, Subst pending) {
    PredNode n{POp::KVar};
    n.kvar = id;
    n.pending = std::move(pending);
    return make(std::move(n));
}

Pred Pred::app(std::string fn, std::vector<Pred> args) {
    PredNode n{POp::App};
    n.fn = std::move(fn);
    n.kids = std::move(args);
    return make(std::move(n));
}

Pred Pred::add(Pred a, Pred b) {
    if (a.op() == POp::Int && b.op() == POp::Int) return lit(a.int_val() + b.int_val());
    if (b.op() == POp::Int && b.int_val() == 0) return a;
    PredNode n{POp::Add};
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Pred Pred::sub(Pred a, Pred b) {
    if (a.op() == POp::Int && b.op() == POp::Int) return lit(a.int_val() - b.int_val());
    PredNode n{POp::Sub};
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Pred Pred::mul(Pred a, Pred b) {
    if (a.op() != POp::Int && b.op() != POp::Int)
        throw std::invalid_argument("non-linear multiplication: " + a.str() + " * " + b.str());
    if (a.op() == POp::Int && b.op() == POp::Int) return lit(a.int_val() * b.int_val());
    PredNode n{POp::Mul};
    // literal first
    if (a.op() == POp::Int) n.kids = {std::move(a), std::move(b)};
    else n.kids = {std::move(b), std::move(a)};
    return make(std::move(n));
}

Pred Pred::neg(Pred a) {
    if (a.op() == POp::Int) return lit(-a.int_val());
    PredNode n{POp::Neg};
    n.kids = {std::move(a)};
    return make(std::move(n));
}

Pred Pred::cmp(POp op, Pred a, Pred b) {
    PredNode n{op};
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Pred Pred::conj(std::vector<Pred> ps) {
    std::vector<Pred> out;
    for (auto& p : ps) {
        if (p.is_true()) continue;
        if (p.is_false()) return ff();
        if (p.op() == POp::And) {
            for (auto& k : p.kids())
                if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
        } else if (std::find(out.begin(), out.end(), p) == out.end()) {
            out.push_back(p);
        }
    }
    if (out.empty()) return tt();
    if (out.size() == 1) return out[0];
    PredNode n{POp::And};
    n.kids = std::move(out);
    return make(std::move(n));
}

Pred Pred::disj(std::vector<Pred> ps) {
    std::vector<Pred> out;
    for (auto& p : ps) {
        if (p.is_false()) continue;
        if (p.is_true()) return tt();
        if (p.op() == POp::Or) {
            for (auto& k : p.kids()) out.push_back(k);
        } else {
            out.push_back(p);
        }
    }
    if (out.empty()) return ff();
    if (out.size() == 1) return out[0];
    PredNode n{POp::Or};
    n.kids = std::move(out);
    return make(std::move(n));
}

Pred Pred::lnot(Pred a) {
    if (a.is_true()) return ff();
    if (a.is_false()) return tt();
    if (a.op() == POp::Not) return a.kid(0);
    PredNode n{POp::Not};
    n.kids = {std::move(a)};
    return make(std::move(n));
}

Pred Pred::imp(Pred a, Pred b) {
    if (a.is_true()) return b;
    if (a.is_false() || b.is_true()) return tt();
    PredNode n{POp::Imp};
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Pred Pred::iff(Pred a, Pred b) {
    PredNode n{POp::Iff};
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Pred Pred::ite(Pred c, Pred a, Pred b) {
    if (c.is_true()) return a;
    if (c.is_false()) return b;
    PredNode n{POp::Ite};
    n.kids = {std::move(c), std::move(a), std::move(b)};
    return make(std::move(n));
}

POp Pred::op() const { return n_->op; }
long long Pred::int_val() const { return n_->ival; }
const Ident& Pred::ident() const { return n_->var; }
int Pred::kvar_id() const { return n_->kvar; }
const Subst& Pred::pending() const { return n_->pending; }
const std::string& Pred::fn() const { return n_->fn; }
const std::vector<Pred>& Pred::kids() const { return n_->kids; }

namespace {

int compare(const Pred& a, const Pred& b);

int compare_subst(const Subst& a, const Subst& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].first != b[i].first) return a[i].first < b[i].first ? -1 : 1;
        if (int c = compare(a[i].second, b[i].second)) return c;
    }
    return 0;
}

int compare(const Pred& a, const Pred& b) {
    if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
    switch (a.op()) {
    case POp::True:
    case POp::False: return 0;
    case POp::Int: return a.int_val() == b.int_val() ? 0 : (a.int_val() < b.int_val() ? -1 : 1);
    case POp::Var:
        if (a.ident() == b.ident()) return 0;
        return a.ident() < b.ident() ? -1 : 1;
    case POp::KVar:
        if (a.kvar_id() != b.kvar_id()) return a.kvar_id() < b.kvar_id() ? -1 : 1;
        return compare_subst(a.pending(), b.pending());
    case POp::App:
        if (a.fn() != b.fn()) return a.fn() < b.fn() ? -1 : 1;
        break;
    default: break;
    }
    const auto& ka = a.kids();
    const auto& kb = b.kids();
    if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
    for (size_t i = 0; i < ka.size(); ++i)
        if (int c = compare(ka[i], kb[i])) return c;
    return 0;
}

} // namespace

bool operator==(const Pred& a, const Pred& b) { return a.n_ == b.n_ || compare(a, b) == 0; }
bool operator<(const Pred& a, const Pred& b) { return compare(a, b) < 0; }

std::string op_symbol(POp op) {
    switch (op) {
    case POp::Add: return "+";
    case POp::Sub: return "-";
    case POp::Mul: return "*";
    case POp::Eq: return "=";
    case POp::Ne: return "/=";
    case POp::Lt: return "<";
    case POp::Le: return "<=";
    case POp::Gt: return ">";
    case POp::Ge: return ">=";
    case POp::And: return "&&";
    case POp::Or: return "||";
    case POp::Imp: return "=>";
    case POp::Iff: return "<=>";
    default: return "?";
    }
}

namespace {

int prec(POp op) {
    switch (op) {
    case POp::Imp:
    case POp::Iff: return 1;
    case POp::Or: return 2;
    case POp::And: return 3;
    case POp::Not: return 4;
    case POp::Eq:
    case POp::Ne:
    case POp::Lt:
    case POp::Le:
    case POp::Gt:
    case POp::Ge: return 5;
    case POp::Add:
    case POp::Sub: return 6;
    case POp::Mul: return 7;
    case POp::Neg: return 8;
    case POp::App: return 9;
    default: return 10;
    }
}

void print(std::ostream& os, const Pred& p, int ctx);

void print_kid(std::ostream& os, const Pred& k, int level) {
    if (prec(k.op()) < level) {
        os << '(';
        print(os, k, 0);
        os << ')';
    } else {
        print(os, k, level);
    }
}

void print(std::ostream& os, const Pred& p, int) {
    switch (p.op()) {
    case POp::True: os << "true"; return;
    case POp::False: os << "false"; return;
    case POp::Int:
        if (p.int_val() < 0) os << '(' << p.int_val() << ')';
        else os << p.int_val();
        return;
    case POp::Var: os << p.ident().name; return;
    case POp::KVar:
        os << "$k" << p.kvar_id();
        for (const auto& [x, t] : p.pending()) os << '[' << x.name << ":=" << t.str() << ']';
        return;
    case POp::App:
        os << p.fn();
        for (const auto& a : p.kids()) {
            os << ' ';
            print_kid(os, a, 10);
        }
        return;
    case POp::Neg:
        os << '-';
        print_kid(os, p.kid(0), 9);
        return;
    case POp::Not:
        os << "not ";
        print_kid(os, p.kid(0), 6);
        return;
    case POp::Ite:
        os << "(if ";
        print(os, p.kid(0), 0);
        os << " then ";
        print(os, p.kid(1), 0);
        os << " else ";
        print(os, p.kid(2), 0);
        os << ')';
        return;
    case POp::And:
    case POp::Or: {
        int l = prec(p.op());
        for (size_t i = 0; i < p.kids().size(); ++i) {
            if (i) os << ' ' << op_symbol(p.op()) << ' ';
            print_kid(os, p.kids()[i], l + 1);
        }
        return;
    }
    case POp::Imp:
    case POp::Iff:
        print_kid(os, p.kid(0), 2);
        os << ' ' << op_symbol(p.op()) << ' ';
        print_kid(os, p.kid(1), 1);
        return;
    default: {
        int l = prec(p.op());
        bool cmp = l == 5;
        print_kid(os, p.kid(0), cmp ? 6 : l);
        os << ' ' << op_symbol(p.op()) << ' ';
        print_kid(os, p.kid(1), cmp ? 6 : l + 1);
        return;
    }
    }
}

} // namespace

std::string Pred::str() const {
    std::ostringstream os;
    print(os, *this, 0);
    return os.str();
}

namespace {

Pred rebuild(const Pred& p, std::vector<Pred> kids) {
    switch (p.op()) {
    case POp::Add: return Pred::add(kids[0], kids[1]);
    case POp::Sub: return Pred::sub(kids[0], kids[1]);
    case POp::Mul: return Pred::mul(kids[0], kids[1]);
    case POp::Neg: return Pred::neg(kids[0]);
    case POp::Eq:
    case POp::Ne:
    case POp::Lt:
    case POp::Le:
    case POp::Gt:
    case POp::Ge: return Pred::cmp(p.op(), kids[0], kids[1]);
    case POp::And: return Pred::conj(std::move(kids));
    case POp::Or: return Pred::disj(std::move(kids));
    case POp::Not: return Pred::lnot(kids[0]);
    case POp::Imp: return Pred::imp(kids[0], kids[1]);
    case POp::Iff: return Pred::iff(kids[0], kids[1]);
    case POp::Ite: return Pred::ite(kids[0], kids[1], kids[2]);
    case POp::App: return Pred::app(p.fn(), std::move(kids));
    default: return p;
    }
}

} // namespace

Pred map_kvars(const Pred& p, const std::function<Pred(const Pred&)>& f) {
    switch (p.op()) {
    case POp::True:
    case POp::False:
    case POp::Int:
    case POp::Var: return p;
    case POp::KVar: return f(p);
    default: {
        std::vector<Pred> kids;
        kids.reserve(p.kids().size());
        for (const auto& k : p.kids()) kids.push_back(map_kvars(k, f));
        return rebuild(p, std::move(kids));
    }
    }
}

Pred subst(const Pred& p, const Subst& s) {
    if (s.empty()) return p;
    switch (p.op()) {
    case POp::True:
    case POp::False:
    case POp::Int: return p;
    case POp::Var:
        for (const auto& [x, t] : s)
            if (x == p.ident()) return t;
        return p;
    case POp::KVar: {
        // compose: pending ; s
        Subst out;
        for (const auto& [x, t] : p.pending()) out.emplace_back(x, subst(t, s));
        for (const auto& [x, t] : s) {
            bool shadowed = std::any_of(p.pending().begin(), p.pending().end(),
                                        [&](const auto& e) { return e.first == x; });
            if (!shadowed) out.emplace_back(x, t);
        }
        return Pred::kvar(p.kvar_id(), std::move(out));
    }
    default: {
        std::vector<Pred> kids;
        kids.reserve(p.kids().size());
        for (const auto& k : p.kids()) kids.push_back(subst(k, s));
        return rebuild(p, std::move(kids));
    }
    }
}

Pred subst1(const Pred& p, const Ident& x, const Pred& t) { return subst(p, Subst{{x, t}}); }

namespace {
void fv(const Pred& p, std::set<Ident>& out) {
    if (p.op() == POp::Var) {
        out.insert(p.ident());
        return;
    }
    if (p.op() == POp::KVar) {
        for (const auto& [x, t] : p.pending()) fv(t, out);
        return;
    }
    for (const auto& k : p.kids()) fv(k, out);
}
} // namespace

std::set<Ident> free_vars(const Pred& p) {
    std::set<Ident> out;
    fv(p, out);
    return out;
}

bool mentions(const Pred& p, const Ident& x) { return free_vars(p).count(x) > 0; }

bool has_kvars(const Pred& p) {
    if (p.op() == POp::KVar) return true;
    return std::any_of(p.kids().begin(), p.kids().end(), [](const Pred& k) { return has_kvars(k); });
}

namespace {
void kv(const Pred& p, std::vector<int>& out) {
    if (p.op() == POp::KVar) {
        if (std::find(out.begin(), out.end(), p.kvar_id()) == out.end()) out.push_back(p.kvar_id());
        return;
    }
    for (const auto& k : p.kids()) kv(k, out);
}
} // namespace

std::vector<int> kvars_of(const Pred& p) {
    std::vector<int> out;
    kv(p, out);
    return out;
}

std::vector<Pred> conjuncts(const Pred& p) {
    if (p.is_true()) return {};
    if (p.op() == POp::And) return p.kids();
    return {p};
}

void collect_apps(const Pred& p, std::vector<Pred>& out) {
    for (const auto& k : p.kids()) collect_apps(k, out);
    if (p.op() == POp::App && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
}

Pred rewrite_apps(const Pred& p, const std::function<std::optional<Pred>(const Pred&)>& f) {
    if (p.kids().empty()) {
        if (p.op() == POp::App) {
            if (auto r = f(p)) return *r;
        }
        return p;
    }
    std::vector<Pred> kids;
    for (const auto& k : p.kids()) kids.push_back(rewrite_apps(k, f));
    Pred q = rebuild(p, std::move(kids));
    if (q.op() == POp::App) {
        if (auto r = f(q)) return *r;
    }
    return q;
}

} // namespace lm
