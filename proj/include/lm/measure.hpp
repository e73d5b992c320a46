#pragma once

#include <map>
#include <string>
#include <vector>

#include "lm/hm.hpp"
#include "lm/program.hpp"
#include "lm/syntax.hpp"

namespace lm {

struct MeasureEq {
    std::string ctor;
    std::vector<Ident> vars;  // pattern variables, one per field
    Pred rhs;
};

struct MeasureDecl {
    std::string name;
    std::string datatype;
    Sort result;
    Ident arg;                // binder of the declared argument
    Pred result_refinement;   // over ν and arg, e.g. 0 <= ν
    std::vector<MeasureEq> eqs;  // constructor declaration order
    Loc loc;
};

struct ConstructorAxiom {
    std::string ctor;
    std::string measure;
    Pred axiom;  // over ν and the constructor's field identifiers
};

class MeasureEnv {
public:
    std::vector<MeasureDecl> measures;

    const MeasureDecl* find(const std::string& name) const;
    std::vector<ConstructorAxiom> axioms(const core::DataDecl& d, const core::CtorDecl& c) const;
    // Conjunction of every measure equation for this constructor, ν the result.
    Pred ctor_refinement(const core::DataDecl& d, const core::CtorDecl& c) const;
    // Facts implied by a measure application's declared result type.
    Pred side_condition(const Pred& app) const;
    // Side conditions for every measure application in p, closed under the
    // applications they introduce.
    std::vector<Pred> side_conditions(const Pred& p) const;
    std::vector<Pred> side_conditions(const std::vector<Pred>& ps) const;
};

// Checks the measure restrictions (one equation per constructor, recursion
// only on pattern variables, right-hand sides in the logic) and compiles each
// measure. Errors carry ErrorKind::Measure.
MeasureEnv compile_measures(const core::Program& prog, const syn::SourceFile& sf, const ShapeInfo& shapes);

// Check a single measure: the restrictions above, by equation.
MeasureDecl check_measure(const core::Program& prog, const std::vector<const syn::Decl*>& eqs,
                          const core::TopBind& bind, const ShapeInfo& shapes);

} // namespace lm
