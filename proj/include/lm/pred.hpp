#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lm/ident.hpp"

namespace lm {

class Pred;
using Subst = std::vector<std::pair<Ident, Pred>>;

enum class POp {
    True, False, Int, Var, KVar,
    Add, Sub, Mul, Neg,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Not, Imp, Iff, Ite,
    App,  // uninterpreted (measure) application, or unresolved call before resolution
};

struct PredNode;

// Immutable formula/term over linear integer arithmetic, booleans and
// measure applications. Terms and formulas share one AST; sorts are checked
// separately.
class Pred {
public:
    Pred();  // true

    static Pred tt();
    static Pred ff();
    static Pred lit(long long v);
    static Pred boolean(bool b) { return b ? tt() : ff(); }
    static Pred var(const Ident& x);
    static Pred vv();
    static Pred kvar(int id, Subst pending = {});
    static Pred app(std::string fn, std::vector<Pred> args);

    static Pred add(Pred a, Pred b);
    static Pred sub(Pred a, Pred b);
    // At least one operand must be an integer literal.
    static Pred mul(Pred a, Pred b);
    static Pred neg(Pred a);
    static Pred cmp(POp op, Pred a, Pred b);
    static Pred eq(Pred a, Pred b) { return cmp(POp::Eq, std::move(a), std::move(b)); }
    static Pred conj(std::vector<Pred> ps);
    static Pred disj(std::vector<Pred> ps);
    static Pred conj(Pred a, Pred b) { return conj(std::vector<Pred>{std::move(a), std::move(b)}); }
    static Pred disj(Pred a, Pred b) { return disj(std::vector<Pred>{std::move(a), std::move(b)}); }
    static Pred lnot(Pred a);
    static Pred imp(Pred a, Pred b);
    static Pred iff(Pred a, Pred b);
    static Pred ite(Pred c, Pred a, Pred b);

    POp op() const;
    long long int_val() const;
    const Ident& ident() const;
    int kvar_id() const;
    const Subst& pending() const;
    const std::string& fn() const;
    const std::vector<Pred>& kids() const;
    const Pred& kid(size_t i) const { return kids().at(i); }

    bool is_true() const { return op() == POp::True; }
    bool is_false() const { return op() == POp::False; }
    bool is_kvar() const { return op() == POp::KVar; }

    std::string str() const;

    friend bool operator==(const Pred& a, const Pred& b);
    friend bool operator<(const Pred& a, const Pred& b);

private:
    explicit Pred(std::shared_ptr<const PredNode> n) : n_(std::move(n)) {}
    static Pred make(PredNode node);
    std::shared_ptr<const PredNode> n_;
};

struct PredNode {
    POp op = POp::True;
    long long ival = 0;
    Ident var;
    int kvar = -1;
    Subst pending;
    std::string fn;
    std::vector<Pred> kids;
};

// Simultaneous, capture-free substitution (the logic has no binders; kvars
// accumulate the substitution as pending).
Pred subst(const Pred& p, const Subst& s);
Pred subst1(const Pred& p, const Ident& x, const Pred& t);

std::set<Ident> free_vars(const Pred& p);  // includes vv, excludes kvar pending
bool mentions(const Pred& p, const Ident& x);
bool has_kvars(const Pred& p);
std::vector<int> kvars_of(const Pred& p);
std::vector<Pred> conjuncts(const Pred& p);

// Collect every App node (measure application) in p.
void collect_apps(const Pred& p, std::vector<Pred>& out);

// Rewrite App nodes bottom-up with f; f returns nullopt to keep a node.
Pred rewrite_apps(const Pred& p, const std::function<std::optional<Pred>(const Pred&)>& f);

// Replace every kvar node with f(node); f sees the pending substitution.
Pred map_kvars(const Pred& p, const std::function<Pred(const Pred&)>& f);

std::string op_symbol(POp op);

} // namespace lm
