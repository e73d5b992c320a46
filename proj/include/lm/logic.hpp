#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lm/cgen.hpp"
#include "lm/measure.hpp"
#include "lm/pred.hpp"
#include "lm/sort.hpp"

namespace lm {

using SortEnv = std::map<Ident, Sort>;

struct MeasureSig {
    Sort arg;
    Sort result;
};
using MeasureSigs = std::map<std::string, MeasureSig>;

MeasureSigs measure_sigs(const MeasureEnv& me);

// Sort of a term or formula; nullopt when ill-sorted or a variable is
// unknown. Type-variable sorts only compare with themselves.
std::optional<Sort> sort_of(const Pred& p, const SortEnv& env, const MeasureSigs& ms);
bool well_sorted_formula(const Pred& p, const SortEnv& env, const MeasureSigs& ms);

// ⟦Γ⟧: binder refinements with the binder for ν, and guards, in order.
Pred embed_env(const Env& env);
// Sorts of Γ's base binders plus ν.
SortEnv env_sorts(const Env& env, const Sort& vv_sort);

struct Query {
    SortEnv consts;
    Pred hyp;
    Pred goal;
    Loc loc;
};

enum class Validity { Valid, Invalid, Unknown };

struct OracleResult {
    Validity v = Validity::Unknown;
    std::vector<std::pair<std::string, std::string>> model;  // SMT constant name -> value
    std::string reason;
};

std::string smt_term(const Pred& p);

// declare-sort/declare-fun/declare-const lines for everything ps mention.
std::string declarations(const SortEnv& consts, const std::vector<Pred>& ps, const MeasureSigs& ms);

// Deterministic SMT-LIB2 script for one validity query.
std::string emit_script(const Query& q, const MeasureSigs& ms);

// Answers obviously valid queries without a solver.
bool fast_valid(const Pred& hyp, const Pred& goal);

class Oracle {
public:
    virtual ~Oracle() = default;
    // Validity of hyp ⇒ goal for each goal, sharing the hypothesis.
    virtual std::vector<OracleResult> check(const SortEnv& consts, const Pred& hyp, const std::vector<Pred>& goals,
                                            bool want_model) = 0;
    OracleResult check_one(const Query& q, bool want_model = true) {
        return check(q.consts, q.hyp, {q.goal}, want_model).at(0);
    }
    size_t queries = 0;
};

struct SolverConfig {
    std::string path;        // empty: search PATH
    bool incremental = true;
    double timeout = 10.0;   // seconds per query
    std::string dump_dir;    // write each query script here
    std::string dump_prefix; // file name prefix inside dump_dir
};

// Resolves the solver executable: explicit path, LIQUID_MINI_SOLVER, then the
// first of z3, cvc4, cvc5 on PATH. Empty when none is found.
std::string find_solver(const std::string& explicit_path);

std::unique_ptr<Oracle> make_smt_oracle(const SolverConfig& cfg, const MeasureSigs& ms);

} // namespace lm
