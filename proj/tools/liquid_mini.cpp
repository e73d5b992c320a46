#include <iostream>

#include "CLI11.hpp"
#include "lm/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"liquid-mini: refinement type checker"};
    lm::RunConfig cfg;
    app.add_option("--solver", cfg.solver.path, "SMT solver executable");
    app.add_option("--qualifiers", cfg.qualifier_file, "extra qualifiers, one per line");
    app.add_flag("--dump-constraints", cfg.dump_constraints, "print the generated constraints");
    app.add_flag("--dump-solution", cfg.dump_solution, "print the inferred kvar assignment");
    app.add_option("--dump-smt", cfg.solver.dump_dir, "write each query script into DIR");
    app.add_flag("--dump-shapes", cfg.dump_shapes, "print inferred Hindley-Milner schemes");
    app.add_flag("--dump-measures", cfg.dump_measures, "print measure symbols and constructor axioms");
    bool no_inc = false;
    app.add_flag("--no-incremental", no_inc, "one solver process per query");
    app.add_option("--timeout", cfg.solver.timeout, "seconds per query")->check(CLI::PositiveNumber);
    app.add_option("--jobs", cfg.jobs, "files checked concurrently")->check(CLI::PositiveNumber);
    app.add_option("files", cfg.files, "input .lm files")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    cfg.solver.incremental = !no_inc;
    return lm::run(cfg, std::cout, std::cerr);
}
