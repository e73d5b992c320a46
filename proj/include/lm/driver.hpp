#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lm/cgen.hpp"
#include "lm/logic.hpp"
#include "lm/solver.hpp"

namespace lm {

struct RunConfig {
    std::vector<std::string> files;
    SolverConfig solver;
    std::string qualifier_file;
    bool dump_constraints = false;
    bool dump_solution = false;
    bool dump_shapes = false;
    bool dump_measures = false;
    int jobs = 1;
};

enum class VerdictKind { Safe, Unsafe, Error };

struct Diagnostic {
    Loc loc;
    std::string text;  // fully rendered, several lines
};

struct FileResult {
    std::string path;
    VerdictKind kind = VerdictKind::Safe;
    std::vector<Diagnostic> diags;
    std::string dumps;     // requested dump output
    std::string error;     // rendered tool/front-end error
    std::vector<std::string> warnings;
    size_t constraints = 0;
    size_t kvars = 0;
    size_t queries = 0;
};

int exit_code(VerdictKind k);

// Full pipeline for one file. Never throws; errors land in the result.
FileResult check_file(const std::string& path, const RunConfig& cfg);
FileResult check_source(const std::string& text, const std::string& path, const RunConfig& cfg);

std::string render_diagnostic(const Constraint& c, const Failure& f, const Solution& sol);

// Checks every file (concurrently up to cfg.jobs), prints dumps, diagnostics
// and the verdict in file order, returns the exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace lm
