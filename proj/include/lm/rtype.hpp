#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lm/ident.hpp"
#include "lm/pred.hpp"
#include "lm/sort.hpp"

namespace lm {

struct RType;
using RTypePtr = std::shared_ptr<const RType>;

struct BaseType {
    enum class Kind { Int, Bool, TyVar, TyCon };
    Kind kind = Kind::Int;
    std::string name;            // tyvar or type constructor name
    std::vector<RTypePtr> args;  // TyCon arguments (refined, covariant)

    static BaseType integer() { return {Kind::Int, "Int", {}}; }
    static BaseType boolean() { return {Kind::Bool, "Bool", {}}; }
    static BaseType tyvar(std::string n) { return {Kind::TyVar, std::move(n), {}}; }
    static BaseType tycon(std::string n, std::vector<RTypePtr> as) { return {Kind::TyCon, std::move(n), std::move(as)}; }

    Sort sort() const;
};

// Refinement type: {v:B | p}, dependent function x:T -> U, or forall a. T.
struct RType {
    enum class Kind { Base, Fun, Forall };
    Kind kind = Kind::Base;

    BaseType base;
    Ident vv = Ident::vv();
    Pred pred;

    Ident binder;
    RTypePtr dom;
    RTypePtr rng;

    std::string tyvar;
    RTypePtr body;

    bool is_base() const { return kind == Kind::Base; }
    bool is_fun() const { return kind == Kind::Fun; }
    bool is_forall() const { return kind == Kind::Forall; }
};

RTypePtr rbase(BaseType b, Pred p = Pred::tt());
RTypePtr rint(Pred p = Pred::tt());
RTypePtr rbool(Pred p = Pred::tt());
RTypePtr rfun(Ident binder, RTypePtr dom, RTypePtr rng);
RTypePtr rforall(std::string tyvar, RTypePtr body);

// Conjoin p onto the top-level refinement (base types only).
RTypePtr strengthen(const RTypePtr& t, const Pred& p);
RTypePtr with_pred(const RTypePtr& t, const Pred& p);

// Refinement erasure: every predicate becomes true.
RTypePtr shape(const RTypePtr& t);

// Substitute inside every predicate; binders are unique so no capture.
RTypePtr subst_type(const RTypePtr& t, const Subst& s);

// Replace type variable `a` by refined type r. A refined occurrence
// {v:a | p} becomes r strengthened with p.
RTypePtr subst_tyvar(const RTypePtr& t, const std::string& a, const RTypePtr& r);

// Strip leading foralls, returning the bound variable names.
RTypePtr strip_foralls(const RTypePtr& t, std::vector<std::string>* vars = nullptr);

bool same_shape(const RTypePtr& a, const RTypePtr& b);
bool type_has_kvars(const RTypePtr& t);
void type_kvars(const RTypePtr& t, std::vector<int>& out);

std::string render(const RTypePtr& t);
std::string render(const BaseType& b);

} // namespace lm
