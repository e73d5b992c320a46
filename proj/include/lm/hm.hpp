#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lm/program.hpp"

namespace lm {

// Shapes are RTypes whose predicates are all true.
struct Scheme {
    std::vector<std::string> vars;
    RTypePtr body;
    std::string str() const;
};

struct ShapeInfo {
    std::unordered_map<int, RTypePtr> expr;    // Expr id
    std::unordered_map<int, std::vector<std::pair<std::string, RTypePtr>>> inst;  // Var/Con occurrence id
    std::unordered_map<int, RTypePtr> binder;  // Ident id, monomorphic binders
    std::unordered_map<int, Scheme> poly;      // Ident id, let/letrec/top-level bindings
    std::vector<std::pair<Ident, Scheme>> top; // source order
};

// Errors: unification failure, occurs check, signature mismatch.
ShapeInfo infer_hm(const core::Program& prog);

// Most general unifier of two skeletons, treating every type variable as a
// unification variable. Returns the idempotent substitution or nullopt.
std::optional<std::map<std::string, RTypePtr>> unify_shapes(const RTypePtr& a, const RTypePtr& b);

// Scheme of a primitive operator, by name.
std::optional<Scheme> prim_scheme(const std::string& name);

} // namespace lm
