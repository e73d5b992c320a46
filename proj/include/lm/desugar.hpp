#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lm/program.hpp"
#include "lm/syntax.hpp"

namespace lm {

// Turns written types into refinement types: expands aliases, resolves
// binders and field names, checks datatype arities.
class TypeResolver {
public:
    TypeResolver(const std::map<std::string, syn::AliasDef>& aliases, const core::Program& prog)
        : aliases_(aliases), prog_(prog) {}

    // Free type variables become foralls in order of first occurrence.
    RTypePtr signature(const syn::TypePtr& t) const;
    RTypePtr type(const syn::TypePtr& t) const;
    // Constructor fields; later fields may mention earlier ones.
    std::vector<std::pair<Ident, RTypePtr>> fields(const syn::CtorDef& c, const std::set<std::string>& tyvars) const;
    // Alias body with value parameters as fresh identifiers.
    RTypePtr alias_body(const syn::AliasDef& a) const;
    core::Qualifier qualifier(const syn::QualifDef& q) const;

    struct Scope {
        std::map<std::string, RTypePtr> tyvars;
        std::map<std::string, Pred> vals;
    };
    RTypePtr convert(const syn::TypePtr& t, Scope& sc, int depth = 0) const;
    Pred value_arg(const syn::TypePtr& t, const Scope& sc) const;

private:
    RTypePtr expand(const syn::AliasDef& a, const syn::Type& use, Scope& sc, int depth) const;

    const std::map<std::string, syn::AliasDef>& aliases_;
    const core::Program& prog_;
};

// Substitute scope values for unresolved names; `max`/`min` become ite.
Pred resolve_pred(const Pred& p, const std::map<std::string, Pred>& vals);

// Walk every predicate in a type.
RTypePtr map_preds(const RTypePtr& t, const std::function<Pred(const Pred&)>& f);
void for_each_pred(const RTypePtr& t, const std::function<void(const Pred&)>& f);

// Parse-tree to core program: resolves names and types, compiles pattern
// matching (incomplete matches call patError), guards to nested if,
// where-bindings to lets placed where needed.
core::Program desugar(const syn::SourceFile& sf, const std::vector<syn::QualifDef>& extra_qualifiers = {});

} // namespace lm
