#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lm/driver.hpp"
#include "oracles.hpp"

using namespace lmtest;

namespace {

std::string write_file(const std::string& dir, const std::string& name, const std::string& text) {
    std::string p = dir + "/" + name;
    std::ofstream(p) << text;
    return p;
}

std::string last_line(const std::string& s) {
    std::string t = s;
    while (!t.empty() && t.back() == '\n') t.pop_back();
    auto nl = t.rfind('\n');
    return nl == std::string::npos ? t : t.substr(nl + 1);
}

std::string stub_solver(const std::string& dir, const std::string& body) {
    std::string p = write_file(dir, "solver.sh", "#!/bin/sh\n" + body + "\n");
    std::filesystem::permissions(p, std::filesystem::perms::owner_all);
    return p;
}

} // namespace

TEST_CASE("exit codes follow the verdict") {
    CHECK(exit_code(VerdictKind::Safe) == 0);
    CHECK(exit_code(VerdictKind::Unsafe) == 1);
    CHECK(exit_code(VerdictKind::Error) == 2);
}

TEST_CASE("a safe file prints only SAFE") {
    auto r = run_cli("corpus/max.lm");
    CHECK(r.code == 0);
    CHECK(r.out == "SAFE\n");
    CHECK(r.err.empty());
}

TEST_CASE("an unsafe file prints located diagnostics") {
    auto r = run_cli("corpus/head_client_unsafe.lm");
    CHECK(r.code == 1);
    CHECK(r.out.rfind("corpus/head_client_unsafe.lm:14:13: error: argument 1 of 'head' does not satisfy its refinement\n", 0) == 0);
    CHECK(r.out.find("    expected: {v:[_] | notEmpty v}\n") != std::string::npos);
    CHECK(last_line(r.out) == "UNSAFE");
}

TEST_CASE("errors exit 2") {
    auto missing = run_cli("corpus/nope.lm");
    CHECK(missing.code == 2);
    CHECK(missing.err == "corpus/nope.lm: error: cannot read file\n");
    CHECK(missing.out.empty());

    std::string dir = temp_dir("drv");
    auto parse = run_cli(write_file(dir, "p.lm", "f x = (x\n"));
    CHECK(parse.code == 2);
    CHECK(parse.err.find("p.lm:2:1: error:") != std::string::npos);

    auto shape = run_cli(write_file(dir, "s.lm", "f x = x x\n"));
    CHECK(shape.code == 2);
    CHECK(shape.err.find("s.lm:1:") != std::string::npos);

    auto measure = run_cli(write_file(dir, "m.lm", "{-@ measure len @-}\nlen :: [a] -> Int\nlen [] = 0\n"));
    CHECK(measure.code == 2);
    CHECK(measure.err.find("missing equation for constructor") != std::string::npos);

    CHECK(run_cli("--no-such-flag corpus/max.lm").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("--help").code == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("the worst verdict wins across files") {
    CHECK(run_cli("corpus/max.lm corpus/head.lm").code == 0);
    CHECK(run_cli("corpus/max.lm corpus/head_client_unsafe.lm").code == 1);
    CHECK(run_cli("corpus/head_client_unsafe.lm corpus/nope.lm").code == 2);
}

TEST_CASE("parallel runs print the same output") {
    std::string files = "corpus/max.lm corpus/quicksort_weak_join.lm corpus/inclist.lm corpus/head_client_unsafe.lm";
    auto seq = run_cli("--dump-solution " + files);
    auto par = run_cli("--jobs 4 --dump-solution " + files);
    CHECK(seq.code == 1);
    CHECK(par.code == seq.code);
    CHECK(par.out == seq.out);
    CHECK(par.err == seq.err);
    CHECK(seq.out.find("-- corpus/inclist.lm\n") != std::string::npos);
}

TEST_CASE("runs are deterministic") {
    auto a = run_cli("--dump-constraints --dump-solution corpus/avl_insert_node_only.lm");
    auto b = run_cli("--dump-constraints --dump-solution corpus/avl_insert_node_only.lm");
    CHECK(a.code == 1);
    CHECK(a.out == b.out);
}

TEST_CASE("dumps") {
    auto sol = run_cli("--dump-solution corpus/quicksort_strong_join.lm");
    CHECK(sol.code == 0);
    CHECK(sol.out.find("$k") != std::string::npos);
    CHECK(sol.out.find(" := ") != std::string::npos);

    auto shapes = run_cli("--dump-shapes corpus/max.lm");
    CHECK(shapes.out == "max :: Int -> Int -> Int\nSAFE\n");

    auto ms = run_cli("--dump-measures corpus/head.lm");
    CHECK(ms.out.find("(declare-fun m_notEmpty (D_List) Bool)") != std::string::npos);

    std::string dir = temp_dir("smt");
    auto smt = run_cli("--dump-smt '" + dir + "' corpus/max.lm");
    CHECK(smt.code == 0);
    CHECK(std::filesystem::exists(dir + "/max-00001.smt2"));
    CHECK(read_text(dir + "/max-00001.smt2").rfind("(set-logic QF_UFLIA)", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("one-shot solving agrees with incremental") {
    for (const char* f : {"corpus/max.lm", "corpus/quicksort_weak_join.lm", "corpus/inclist.lm"}) {
        auto a = run_cli(f);
        auto b = run_cli(std::string("--no-incremental ") + f);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("solver selection") {
    std::string z3 = find_solver("");
    REQUIRE(!z3.empty());
    CHECK(run_cli("corpus/max.lm", "LIQUID_MINI_SOLVER=/nonexistent/z3").code == 2);
    CHECK(run_cli("--solver '" + z3 + "' corpus/max.lm", "LIQUID_MINI_SOLVER=/nonexistent/z3").code == 0);
    CHECK(run_cli("corpus/max.lm", "LIQUID_MINI_SOLVER='" + z3 + "'").code == 0);
    auto bad = run_cli("--solver /nonexistent/z3 corpus/max.lm");
    CHECK(bad.err == "corpus/max.lm: error: cannot execute solver '/nonexistent/z3': No such file or directory\n");
}

TEST_CASE("unknown answers reject conservatively") {
    std::string dir = temp_dir("stub");
    std::string unknown = stub_solver(dir, "while read l; do case \"$l\" in *check-sat*) echo unknown;; esac; done");
    auto r = run_cli("--solver '" + unknown + "' corpus/max.lm");
    CHECK(r.code == 1);
    CHECK(r.out.find("corpus/max.lm:4:26: error:") != std::string::npos);
    CHECK(r.out.find("    solver: solver returned unknown\n") != std::string::npos);

    std::string hang = stub_solver(dir, "sleep 30");
    auto t = run_cli("--timeout 0.05 --solver '" + hang + "' corpus/max.lm");
    CHECK(t.code == 1);
    CHECK(t.out.find("    solver: solver timed out\n") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("diagnostics render the failing query") {
    Ident x = Ident::fresh("x");
    Constraint c;
    c.env = Env().bind(x, rint(parse_pred_text("v >= 0")));
    c.lhs = Pred::eq(Pred::vv(), Pred::var(x));
    c.rhs = Pred::cmp(POp::Gt, Pred::vv(), Pred::var(x));
    c.sort = Sort::integer();
    c.loc = Loc{"t.lm", 3, 7};
    c.rule = "subtype";
    Failure f;
    f.constraint = 0;
    f.hyp = Pred::conj(embed_env(c.env), c.lhs);
    f.goal = c.rhs;
    f.result.v = Validity::Invalid;
    f.result.model = {{"VV", "0"}, {x.smt_name(), "0"}, {"unrelated", "5"}};
    Solution sol;
    CHECK(render_diagnostic(c, f, sol) ==
          "t.lm:3:7: error: inferred type does not satisfy the expected refinement\n"
          "    inferred: {v:Int | v = x}\n"
          "    expected: {v:Int | v > x}\n"
          "    violated: x >= 0 && v = x ==> v > x\n"
          "    counterexample: v = 0, x = 0\n");
    f.result.model = {{x.smt_name(), "(- 4)"}};
    CHECK(render_diagnostic(c, f, sol).find("counterexample: x = -4\n") != std::string::npos);
}

TEST_CASE("in-process checks match the command line") {
    RunConfig cfg;
    auto r = check_file(repo_path("corpus/quicksort_weak_join.lm"), cfg);
    CHECK(r.kind == VerdictKind::Unsafe);
    REQUIRE(r.diags.size() == 2);
    CHECK(r.diags[0].loc.line == 16);
    CHECK(r.diags[1].loc.line == 17);
    CHECK(r.constraints > 0);
    CHECK(r.kvars > 0);
    auto bad = check_source("f = \n", "x.lm", cfg);
    CHECK(bad.kind == VerdictKind::Error);
    CHECK(bad.error.rfind("x.lm:", 0) == 0);
}
