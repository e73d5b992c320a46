#pragma once

#include <map>
#include <string>
#include <vector>

#include "lm/cgen.hpp"
#include "lm/logic.hpp"

namespace lm {

// Sorts named with a leading '\'' are pattern variables when a qualifier is
// matched against a kvar's scope; "'?N" wildcards match anything and are
// filtered by sort checking afterwards.
bool is_sort_pattern(const Sort& s);

// Atomic predicates of signatures, constructor fields and alias bodies, each
// free non-ν variable generalized to a sorted wildcard; explicit qualifiers
// are appended. Duplicates (up to wildcard renaming) are dropped.
std::vector<core::Qualifier> harvest_qualifiers(const core::Program& prog, const MeasureSigs& ms);

// Qualifiers generalized from one predicate; `sorts` gives what is known.
std::vector<core::Qualifier> qualifiers_from(const Pred& p, const Sort& vv_sort, const SortEnv& sorts);

// ℚ*: wildcards replaced by distinct in-scope variables, ill-sorted
// instances removed.
std::vector<Pred> instantiate_qualifiers(const std::vector<core::Qualifier>& pool, const Sort& vv_sort,
                                         const std::vector<std::pair<Ident, Sort>>& scope, const MeasureSigs& ms);

struct Solution {
    std::map<int, std::vector<Pred>> sets;
    // Every kvar replaced by its conjunction, pending substitution applied.
    Pred apply(const Pred& p) const;
};

struct Failure {
    int constraint = 0;  // index into the constraint list
    Pred hyp;
    Pred goal;
    OracleResult result;
};

struct SolveResult {
    Solution solution;
    std::vector<Failure> failures;  // concrete obligations that do not hold
    int iterations = 0;
};

// Hypothesis and goal of a constraint under a solution, with measure side
// conditions added to the hypothesis.
Query constraint_query(const Constraint& c, const Solution& s, const MeasureEnv& me);

// Iterative weakening from the strongest assignment, then the concrete
// checks, then a final pass re-verifying the kvar constraints.
SolveResult solve(const std::vector<Constraint>& cs, const std::map<int, KVarInfo>& kvars,
                  const std::map<int, std::vector<Pred>>& candidates, Oracle& oracle, const MeasureEnv& me);

} // namespace lm
