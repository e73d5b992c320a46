#pragma once

// Surface AST produced by the parser, before alias expansion and desugaring.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lm/loc.hpp"
#include "lm/pred.hpp"

namespace lm::syn {

struct Type;
using TypePtr = std::shared_ptr<const Type>;

// Types as written. Lower-case heads with arguments, literals and `{e}`
// blocks only make sense as value arguments of aliases; resolution decides.
struct Type {
    enum class Kind { Con, Var, Fun, Refine, List, Tuple, Value };
    Kind kind = Kind::Con;
    std::string name;            // Con/Var name, Refine value variable, Fun binder (may be empty)
    std::vector<TypePtr> args;   // Con args, List elem, Tuple elems, Fun {dom, rng}, Refine {base}
    Pred pred;                   // Refine predicate, Value expression
    Loc loc;
};

struct Pattern;
using PatPtr = std::shared_ptr<const Pattern>;

struct Pattern {
    enum class Kind { Var, Wild, Con, Tuple, List, As };
    Kind kind = Kind::Wild;
    std::string name;            // Var name, Con name, As name
    std::vector<PatPtr> args;
    Loc loc;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
struct Decl;

struct Rhs {
    std::vector<std::pair<ExprPtr, ExprPtr>> guards;  // empty => plain
    ExprPtr plain;
    std::vector<Decl> where;
};

struct Alt {
    PatPtr pat;
    Rhs rhs;
    Loc loc;
};

struct CompQual {
    PatPtr gen_pat;   // non-null for a generator `p <- e`
    ExprPtr expr;     // generator source or guard
};

struct Expr {
    enum class Kind { Var, Con, Int, Bool, App, BinOp, Neg, Lam, If, Case, Let, Tuple, List, ListComp };
    Kind kind = Kind::Var;
    std::string name;            // Var/Con name, BinOp operator
    long long ival = 0;
    bool bval = false;
    std::vector<ExprPtr> kids;   // App: f,args...; BinOp: l,r; Neg; If: c,t,e; Case: scrut; Let: body; Tuple/List elems; ListComp: head; Lam: body
    std::vector<PatPtr> pats;    // Lam params
    std::vector<Alt> alts;       // Case
    std::vector<Decl> decls;     // Let
    std::vector<CompQual> quals; // ListComp
    Loc loc;
};

struct Decl {
    enum class Kind { Equation, PatBind, Sig };
    Kind kind = Kind::Equation;
    std::string name;
    std::vector<PatPtr> pats;    // Equation params; PatBind {pattern}
    Rhs rhs;
    TypePtr type;                // Sig
    std::vector<std::pair<std::string, std::string>> context;  // (class, tyvar)
    Loc loc;
};

struct CtorDef {
    std::string name;
    std::vector<std::pair<std::string, TypePtr>> fields;  // unnamed fields get empty names
    Loc loc;
};

struct DataDef {
    std::string name;
    std::vector<std::string> params;
    std::vector<CtorDef> ctors;
    Loc loc;
};

struct AliasDef {
    std::string name;
    std::vector<std::string> typarams;
    std::vector<std::string> valparams;
    TypePtr body;
    Loc loc;
};

struct QualifDef {
    std::string name;
    std::vector<std::pair<std::string, TypePtr>> params;  // first is the value variable
    Pred body;
    Loc loc;
};

struct Item {
    enum class Kind { Alias, Data, Measure, Sig, Qualif, Decl };
    Kind kind = Kind::Decl;
    bool annotation = false;  // came from a {-@ @-} block
    AliasDef alias;
    DataDef data;
    std::string measure;
    QualifDef qualif;
    Decl decl;                // Sig items and plain declarations
    Loc loc;
};

struct SourceFile {
    std::string path;
    std::string text;
    std::vector<Item> items;
};

} // namespace lm::syn
