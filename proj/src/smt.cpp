#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lm/logic.hpp"

namespace lm {

namespace fs = std::filesystem;

std::string find_solver(const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (const char* env = std::getenv("LIQUID_MINI_SOLVER"); env && *env) return env;
    const char* path = std::getenv("PATH");
    if (!path) return "";
    for (const char* name : {"z3", "cvc4", "cvc5"}) {
        std::stringstream ss(path);
        std::string dir;
        while (std::getline(ss, dir, ':')) {
            if (dir.empty()) continue;
            fs::path cand = fs::path(dir) / name;
            if (::access(cand.c_str(), X_OK) == 0) return cand.string();
        }
    }
    return "";
}

namespace {

bool is_cvc(const std::string& path) { return fs::path(path).filename().string().find("cvc") != std::string::npos; }

class Process {
public:
    ~Process() { stop(); }

    void start(const std::string& path, const std::vector<std::string>& args) {
        int in[2], out[2], status[2];
        if (::pipe(in) != 0 || ::pipe(out) != 0 || ::pipe2(status, O_CLOEXEC) != 0)
            fail(ErrorKind::Tool, {}, "cannot create pipes for the solver");
        pid_ = ::fork();
        if (pid_ < 0) fail(ErrorKind::Tool, {}, "cannot fork the solver");
        if (pid_ == 0) {
            ::dup2(in[0], 0);
            ::dup2(out[1], 1);
            ::dup2(out[1], 2);
            ::close(in[0]);
            ::close(in[1]);
            ::close(out[0]);
            ::close(out[1]);
            ::close(status[0]);
            std::vector<char*> argv;
            argv.push_back(const_cast<char*>(path.c_str()));
            for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
            argv.push_back(nullptr);
            ::execvp(path.c_str(), argv.data());
            // Only reached on failure; the status pipe closes on a successful exec.
            int err = errno;
            [[maybe_unused]] ssize_t n = ::write(status[1], &err, sizeof err);
            ::_exit(127);
        }
        ::close(in[0]);
        ::close(out[1]);
        ::close(status[1]);
        to_ = in[1];
        from_ = out[0];
        buf_.clear();
        int err = 0;
        ssize_t n;
        while ((n = ::read(status[0], &err, sizeof err)) < 0 && errno == EINTR) {
        }
        ::close(status[0]);
        if (n > 0) {
            stop();
            fail(ErrorKind::Tool, {}, "cannot execute solver '" + path + "': " + std::strerror(err));
        }
    }

    bool running() const { return pid_ > 0; }

    void send(const std::string& s) {
        size_t off = 0;
        while (off < s.size()) {
            ssize_t n = ::write(to_, s.data() + off, s.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail(ErrorKind::Tool, {}, "solver closed its input");
            }
            off += static_cast<size_t>(n);
        }
    }

    void close_input() {
        if (to_ >= 0) ::close(to_);
        to_ = -1;
    }

    // One line of output; nullopt on timeout or end of stream.
    std::optional<std::string> line(double seconds) {
        auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
        for (;;) {
            if (auto nl = buf_.find('\n'); nl != std::string::npos) {
                std::string l = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                if (!l.empty() && l.back() == '\r') l.pop_back();
                return l;
            }
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) return std::nullopt;
            pollfd pfd{from_, POLLIN, 0};
            int r = ::poll(&pfd, 1, static_cast<int>(left.count()));
            if (r < 0 && errno == EINTR) continue;
            if (r <= 0) return std::nullopt;
            char tmp[4096];
            ssize_t n = ::read(from_, tmp, sizeof tmp);
            if (n <= 0) {
                if (!buf_.empty()) {
                    std::string l = buf_;
                    buf_.clear();
                    return l;
                }
                return std::nullopt;
            }
            buf_.append(tmp, static_cast<size_t>(n));
        }
    }

    // A balanced s-expression spanning one or more lines.
    std::optional<std::string> sexp(double seconds) {
        std::string acc;
        int depth = 0;
        bool started = false;
        while (auto l = line(seconds)) {
            acc += *l + "\n";
            for (char c : *l) {
                if (c == '(') ++depth, started = true;
                else if (c == ')') --depth;
            }
            if (started && depth <= 0) return acc;
        }
        return std::nullopt;
    }

    void stop() {
        close_input();
        if (from_ >= 0) ::close(from_);
        from_ = -1;
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
        pid_ = -1;
    }

private:
    pid_t pid_ = -1;
    int to_ = -1;
    int from_ = -1;
    std::string buf_;
};

// Zero-arity define-fun entries of a model.
std::vector<std::pair<std::string, std::string>> parse_model(const std::string& text) {
    std::vector<std::string> toks;
    for (size_t i = 0; i < text.size();) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            toks.emplace_back(1, c);
            ++i;
        } else if (c == '|') {
            size_t j = text.find('|', i + 1);
            if (j == std::string::npos) j = text.size() - 1;
            toks.push_back(text.substr(i + 1, j - i - 1));
            i = j + 1;
        } else {
            size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' && text[j] != ')')
                ++j;
            toks.push_back(text.substr(i, j - i));
            i = j;
        }
    }
    // Render the expression starting at toks[i], advancing i.
    std::function<std::string(size_t&)> expr = [&](size_t& i) -> std::string {
        if (i >= toks.size()) return "";
        if (toks[i] != "(") return toks[i++];
        ++i;
        std::vector<std::string> parts;
        while (i < toks.size() && toks[i] != ")") parts.push_back(expr(i));
        ++i;
        if (parts.size() == 2 && parts[0] == "-") return "-" + parts[1];
        std::string s = "(";
        for (size_t k = 0; k < parts.size(); ++k) s += (k ? " " : "") + parts[k];
        return s + ")";
    };
    std::vector<std::pair<std::string, std::string>> out;
    for (size_t i = 0; i + 4 < toks.size(); ++i) {
        if (toks[i] != "(" || toks[i + 1] != "define-fun") continue;
        std::string name = toks[i + 2];
        if (toks[i + 3] != "(" || toks[i + 4] != ")") continue;
        size_t j = i + 5;
        expr(j);  // sort
        std::string val = expr(j);
        out.emplace_back(name, val);
        i = j - 1;
    }
    return out;
}

class SmtOracle : public Oracle {
public:
    SmtOracle(SolverConfig cfg, MeasureSigs ms) : cfg_(std::move(cfg)), ms_(std::move(ms)) {
        cfg_.path = find_solver(cfg_.path);
        if (cfg_.path.empty()) fail(ErrorKind::Tool, {}, "no SMT solver found (tried z3, cvc4, cvc5; set --solver)");
        if (!cfg_.dump_dir.empty()) fs::create_directories(cfg_.dump_dir);
    }

    std::vector<OracleResult> check(const SortEnv& consts, const Pred& hyp, const std::vector<Pred>& goals,
                                    bool want_model) override {
        std::vector<OracleResult> res(goals.size());
        std::vector<size_t> todo;
        for (size_t i = 0; i < goals.size(); ++i) {
            if (fast_valid(hyp, goals[i])) res[i].v = Validity::Valid;
            else todo.push_back(i);
        }
        if (todo.empty()) return res;
        for (size_t i : todo) dump(Query{consts, hyp, goals[i], {}});
        queries += todo.size();
        if (cfg_.incremental) {
            incremental(consts, hyp, goals, todo, want_model, res);
        } else {
            for (size_t i : todo) res[i] = one_shot(Query{consts, hyp, goals[i], {}}, want_model);
        }
        return res;
    }

private:
    SolverConfig cfg_;
    MeasureSigs ms_;
    Process proc_;
    int dumped_ = 0;

    std::vector<std::string> args() const {
        if (is_cvc(cfg_.path)) return {"--lang=smt2", "--incremental", "--produce-models"};
        return {"-in", "-smt2"};
    }

    std::string preamble() const {
        std::ostringstream os;
        os << "(set-option :produce-models true)\n";
        if (!is_cvc(cfg_.path)) os << "(set-option :timeout " << std::max(1L, static_cast<long>(cfg_.timeout * 1000)) << ")\n";
        os << "(set-logic QF_UFLIA)\n";
        return os.str();
    }

    void dump(const Query& q) {
        if (cfg_.dump_dir.empty()) return;
        char name[32];
        std::snprintf(name, sizeof name, "%05d.smt2", ++dumped_);
        std::ofstream f(fs::path(cfg_.dump_dir) / (cfg_.dump_prefix + name));
        f << emit_script(q, ms_);
    }

    [[noreturn]] void protocol_error(const std::string& got) {
        proc_.stop();
        fail(ErrorKind::Tool, {}, "solver error: " + got);
    }

    Validity answer(const std::optional<std::string>& l) {
        if (!l) return Validity::Unknown;
        if (*l == "unsat") return Validity::Valid;
        if (*l == "sat") return Validity::Invalid;
        if (*l == "unknown" || *l == "timeout") return Validity::Unknown;
        protocol_error(*l);
    }

    void incremental(const SortEnv& consts, const Pred& hyp, const std::vector<Pred>& goals,
                     const std::vector<size_t>& todo, bool want_model, std::vector<OracleResult>& res) {
        if (!proc_.running()) {
            proc_.start(cfg_.path, args());
            proc_.send(preamble());
        }
        std::vector<Pred> all = {hyp};
        for (size_t i : todo) all.push_back(goals[i]);
        std::ostringstream os;
        os << "(push 1)\n" << declarations(consts, all, ms_) << "(assert " << smt_term(hyp) << ")\n";
        proc_.send(os.str());
        double wait = cfg_.timeout + 5.0;
        for (size_t i : todo) {
            proc_.send("(push 1)\n(assert (not " + smt_term(goals[i]) + "))\n(check-sat)\n");
            auto l = proc_.line(wait);
            if (!l) {
                // Hung past its own timeout: restart and give up on the rest.
                proc_.stop();
                for (size_t j : todo)
                    if (res[j].v == Validity::Unknown && res[j].reason.empty()) res[j].reason = "solver timed out";
                return;
            }
            res[i].v = answer(l);
            if (res[i].v == Validity::Unknown) res[i].reason = "solver returned unknown";
            if (res[i].v == Validity::Invalid && want_model) {
                proc_.send("(get-model)\n");
                if (auto m = proc_.sexp(wait)) res[i].model = parse_model(*m);
            }
            proc_.send("(pop 1)\n");
        }
        proc_.send("(pop 1)\n");
    }

    OracleResult one_shot(const Query& q, bool want_model) {
        Process p;
        p.start(cfg_.path, args());
        std::string script = preamble() + emit_script(q, ms_).substr(std::string("(set-logic QF_UFLIA)\n").size());
        if (want_model) script += "(get-model)\n";
        p.send(script);
        p.close_input();
        OracleResult r;
        auto l = p.line(cfg_.timeout + 5.0);
        r.v = answer(l);
        if (!l) r.reason = "solver timed out";
        if (r.v == Validity::Invalid && want_model)
            if (auto m = p.sexp(cfg_.timeout + 5.0)) r.model = parse_model(*m);
        return r;
    }
};

} // namespace

std::unique_ptr<Oracle> make_smt_oracle(const SolverConfig& cfg, const MeasureSigs& ms) {
    static bool once = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)once;
    return std::make_unique<SmtOracle>(cfg, ms);
}

} // namespace lm
