#include "lm/driver.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>

#include "lm/desugar.hpp"
#include "lm/hm.hpp"
#include "lm/measure.hpp"
#include "lm/parser.hpp"

namespace lm {

int exit_code(VerdictKind k) {
    switch (k) {
    case VerdictKind::Safe: return 0;
    case VerdictKind::Unsafe: return 1;
    case VerdictKind::Error: return 2;
    }
    return 2;
}

namespace {

std::string sort_label(const Sort& s) {
    if (s.kind == Sort::Kind::Data && s.name == "List") return "[_]";
    if (s.kind == Sort::Kind::Data && s.name == "Tuple2") return "(_, _)";
    return s.name;
}

std::string headline(const Constraint& c) {
    if (c.rule.rfind("patError", 0) == 0) {
        std::string fn = c.rule.size() > 9 ? c.rule.substr(9) : "";
        return "possible pattern-match failure" + (fn.empty() ? "" : " in '" + fn + "'");
    }
    if (c.rule.rfind("argument", 0) == 0) return c.rule + " does not satisfy its refinement";
    return "inferred type does not satisfy the expected refinement";
}

// SMT-LIB writes negative literals as (- 3).
std::string model_value(const std::string& v) {
    if (v.size() > 4 && v.rfind("(- ", 0) == 0 && v.back() == ')') return "-" + v.substr(3, v.size() - 4);
    return v;
}

std::string model_text(const Failure& f, const SortEnv& consts) {
    std::map<std::string, std::string> names;
    for (const auto& [x, s] : consts) {
        if (s.kind == Sort::Kind::Data) continue;
        names[x.smt_name()] = x.is_vv() ? "v" : x.name;
    }
    // Fixed order, whatever order the solver listed: v first, then by name.
    std::vector<std::pair<std::string, std::string>> vals;
    for (const auto& [n, val] : f.result.model) {
        auto it = names.find(n);
        if (it != names.end()) vals.emplace_back(it->second, model_value(val));
    }
    std::stable_sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) {
        return std::make_pair(a.first != "v", a.first) < std::make_pair(b.first != "v", b.first);
    });
    std::vector<std::string> parts;
    for (const auto& [n, val] : vals) parts.push_back(n + " = " + val);
    std::string s;
    for (size_t i = 0; i < parts.size(); ++i) s += (i ? ", " : "") + parts[i];
    return s;
}

std::string dump_measures(const MeasureEnv& me, const core::Program& prog) {
    std::ostringstream os;
    for (const auto& m : me.measures) {
        os << "(declare-fun m_" << m.name << " (" << Sort::data(m.datatype).smt() << ") " << m.result.smt() << ")\n";
        const auto* d = prog.data(m.datatype);
        for (const auto& c : d->ctors)
            for (const auto& a : me.axioms(*d, c))
                if (a.measure == m.name) os << "; " << c.name << ": " << smt_term(a.axiom) << "\n";
        if (!m.result_refinement.is_true()) {
            Pred app = Pred::app(m.name, {Pred::var(m.arg)});
            os << "; result: " << smt_term(me.side_condition(app)) << "\n";
        }
    }
    return os.str();
}

std::string dump_solution(const Solution& s) {
    std::ostringstream os;
    for (const auto& [k, qs] : s.sets) os << "$k" << k << " := " << Pred::conj(qs).str() << "\n";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Tool, {path, 0, 0}, "cannot read file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string render_error(const Error& e, const std::string& path) {
    Loc l = e.loc();
    if (l.file.empty()) l.file = path;
    std::string where = l.valid() ? l.str() : l.file;
    return where + ": error: " + e.message();
}

} // namespace

std::string render_diagnostic(const Constraint& c, const Failure& f, const Solution& sol) {
    std::ostringstream os;
    os << c.loc.str() << ": error: " << headline(c) << "\n";
    std::string b = sort_label(c.sort);
    if (c.rule.rfind("patError", 0) != 0) {
        os << "    inferred: {v:" << b << " | " << sol.apply(c.lhs).str() << "}\n";
        os << "    expected: {v:" << b << " | " << sol.apply(c.rhs).str() << "}\n";
    }
    os << "    violated: " << f.hyp.str() << " ==> " << f.goal.str() << "\n";
    if (f.result.v == Validity::Unknown)
        os << "    solver: " << (f.result.reason.empty() ? "unknown" : f.result.reason) << "\n";
    std::string m = model_text(f, env_sorts(c.env, c.sort));
    if (!m.empty()) os << "    counterexample: " << m << "\n";
    return os.str();
}

FileResult check_source(const std::string& text, const std::string& path, const RunConfig& cfg) {
    FileResult r;
    r.path = path;
    reset_fresh_counter(1);
    try {
        std::vector<syn::QualifDef> extra;
        if (!cfg.qualifier_file.empty())
            extra = parse_qualifier_file(read_file(cfg.qualifier_file), cfg.qualifier_file);
        syn::SourceFile sf = parse_source(text, path);
        core::Program prog = desugar(sf, extra);
        r.warnings = prog.warnings;
        ShapeInfo shapes = infer_hm(prog);
        MeasureEnv me = compile_measures(prog, sf, shapes);
        std::ostringstream dumps;
        if (cfg.dump_shapes)
            for (const auto& [n, s] : shapes.top) dumps << n.name << " :: " << s.str() << "\n";
        if (cfg.dump_measures) dumps << dump_measures(me, prog);
        CGen cg = generate(prog, shapes, me);
        r.constraints = cg.constraints.size();
        r.kvars = cg.kvars.size();
        if (cfg.dump_constraints)
            for (const auto& c : cg.constraints) dumps << render_constraint(c) << "\n";

        MeasureSigs ms = measure_sigs(me);
        auto pool = harvest_qualifiers(prog, ms);
        std::map<int, std::vector<Pred>> cands;
        for (const auto& [k, info] : cg.kvars) cands[k] = instantiate_qualifiers(pool, info.sort, info.scope, ms);
        SolverConfig sc = cfg.solver;
        if (!sc.dump_dir.empty()) {
            std::string stem = std::filesystem::path(path).stem().string();
            sc.dump_prefix = stem + "-";
        }
        auto oracle = make_smt_oracle(sc, ms);
        SolveResult res = solve(cg.constraints, cg.kvars, cands, *oracle, me);
        r.queries = oracle->queries;
        if (cfg.dump_solution) dumps << dump_solution(res.solution);
        r.dumps = dumps.str();

        std::set<std::pair<Loc, std::string>> seen;
        for (const auto& f : res.failures) {
            const Constraint& c = cg.constraints[static_cast<size_t>(f.constraint)];
            if (!seen.insert({c.loc, c.rule}).second) continue;
            r.diags.push_back({c.loc, render_diagnostic(c, f, res.solution)});
        }
        std::stable_sort(r.diags.begin(), r.diags.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.loc < b.loc; });
        r.kind = r.diags.empty() ? VerdictKind::Safe : VerdictKind::Unsafe;
    } catch (const Error& e) {
        r.kind = VerdictKind::Error;
        r.error = render_error(e, path);
    } catch (const std::exception& e) {
        r.kind = VerdictKind::Error;
        r.error = path + ": error: " + e.what();
    }
    return r;
}

FileResult check_file(const std::string& path, const RunConfig& cfg) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        FileResult r;
        r.path = path;
        r.kind = VerdictKind::Error;
        r.error = render_error(e, path);
        return r;
    }
    return check_source(text, path, cfg);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<FileResult> results(cfg.files.size());
    size_t jobs = static_cast<size_t>(std::max(1, cfg.jobs));
    for (size_t start = 0; start < cfg.files.size(); start += jobs) {
        std::vector<std::future<FileResult>> fs;
        for (size_t i = start; i < std::min(cfg.files.size(), start + jobs); ++i)
            fs.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                    [&cfg, i] { return check_file(cfg.files[i], cfg); }));
        for (size_t i = 0; i < fs.size(); ++i) results[start + i] = fs[i].get();
    }
    VerdictKind worst = VerdictKind::Safe;
    bool many = cfg.files.size() > 1;
    for (const auto& r : results) {
        for (const auto& w : r.warnings) err << w << "\n";
        if (!r.dumps.empty()) {
            if (many) out << "-- " << r.path << "\n";
            out << r.dumps;
        }
        if (r.kind == VerdictKind::Error) {
            err << r.error << "\n";
        } else {
            for (const auto& d : r.diags) out << d.text;
        }
        if (exit_code(r.kind) > exit_code(worst)) worst = r.kind;
    }
    if (worst == VerdictKind::Safe) out << "SAFE\n";
    else if (worst == VerdictKind::Unsafe) out << "UNSAFE\n";
    return exit_code(worst);
}

} // namespace lm
