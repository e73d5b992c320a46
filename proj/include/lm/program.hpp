#pragma once

// Core program: desugared expressions plus resolved declarations.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lm/ident.hpp"
#include "lm/loc.hpp"
#include "lm/pred.hpp"
#include "lm/rtype.hpp"
#include "lm/sort.hpp"

namespace lm::core {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Bind {
    Ident name;
    ExprPtr body;
    Loc loc;
};

struct Alt {
    std::string con;            // empty for the default alternative
    std::vector<Ident> fields;
    ExprPtr body;
    Loc loc;
};

struct Expr {
    enum class Kind { Var, Con, Int, Bool, App, Lam, Let, LetRec, If, Case, PatError };
    Kind kind = Kind::Var;
    int id = 0;                 // unique per node; keys the shape tables
    Ident var;                  // Var, Lam parameter, Let binder
    std::string con;            // Con name
    long long ival = 0;
    bool bval = false;
    std::vector<ExprPtr> kids;  // App: f,args...; Lam: body; Let: rhs,body; LetRec: body; If: c,t,e; Case: scrutinee
    std::vector<Bind> binds;    // LetRec
    std::vector<Alt> alts;      // Case
    std::string message;        // PatError
    Loc loc;
};

ExprPtr mk_var(const Ident& x, const Loc& loc);
ExprPtr mk_con(const std::string& c, const Loc& loc);
ExprPtr mk_int(long long v, const Loc& loc);
ExprPtr mk_bool(bool b, const Loc& loc);
ExprPtr mk_app(ExprPtr f, std::vector<ExprPtr> args, const Loc& loc);
ExprPtr mk_lam(const Ident& x, ExprPtr body, const Loc& loc);
ExprPtr mk_let(const Ident& x, ExprPtr rhs, ExprPtr body, const Loc& loc);
ExprPtr mk_letrec(std::vector<Bind> binds, ExprPtr body, const Loc& loc);
ExprPtr mk_if(ExprPtr c, ExprPtr t, ExprPtr e, const Loc& loc);
ExprPtr mk_case(ExprPtr scrut, std::vector<Alt> alts, const Loc& loc);
ExprPtr mk_paterror(const std::string& msg, const Loc& loc);

// Strip leading lambdas.
ExprPtr lam_body(const ExprPtr& e, std::vector<Ident>* params = nullptr);

std::string show(const ExprPtr& e);

struct CtorDecl {
    std::string name;
    std::vector<std::pair<Ident, RTypePtr>> fields;  // later refinements may mention earlier fields
    Loc loc;
};

struct DataDecl {
    std::string name;
    std::vector<std::string> params;
    std::vector<CtorDecl> ctors;
    bool refined = false;  // came from an annotation
    Loc loc;
};

struct TypeAlias {
    std::string name;
    std::vector<std::string> typarams;
    std::vector<std::string> valparams;
    Loc loc;
};

// Atomic predicate template: ν plus sorted wildcard slots. Tyvar sorts act
// as pattern variables when matched against a scope.
struct Qualifier {
    std::string name;
    Sort vv_sort;
    std::vector<std::pair<Ident, Sort>> params;
    Pred body;
    Loc loc;
};

struct InlineFn {
    std::string name;
    std::vector<Ident> params;
    Pred body;
};

struct TopBind {
    Ident name;
    ExprPtr body;
    RTypePtr sig;        // refined signature, or null
    Loc sig_loc;
    Loc loc;
    bool is_measure = false;
    bool is_inline = false;
};

struct MeasureSrc {
    std::string name;
    Loc loc;
};

struct Program {
    std::string path;
    std::vector<DataDecl> datas;      // builtins first
    std::vector<TopBind> binds;       // source order
    std::vector<MeasureSrc> measures;
    std::map<std::string, InlineFn> inlines;
    std::vector<Qualifier> qualifiers;    // explicit ones only
    std::vector<RTypePtr> alias_bodies;   // value parameters as free identifiers
    std::vector<std::string> warnings;

    const DataDecl* data(const std::string& name) const;
    // Constructor lookup: (datatype, ctor index).
    std::optional<std::pair<const DataDecl*, size_t>> ctor(const std::string& name) const;
    const TopBind* bind(const std::string& name) const;
};

// Polymorphic constructor type: forall params. f1:T1 -> ... -> D params.
RTypePtr ctor_type(const DataDecl& d, const CtorDecl& c, const Pred& result_refinement = Pred::tt());

// Expand calls to inline logic functions inside p.
Pred expand_inlines(const Pred& p, const std::map<std::string, InlineFn>& inlines);

} // namespace lm::core
