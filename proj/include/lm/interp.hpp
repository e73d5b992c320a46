#pragma once

// Lazy reference interpreter over the core language. Used to cross-check
// static verdicts dynamically; not part of the checking pipeline.

#include <stdexcept>
#include <string>
#include <vector>

#include "lm/program.hpp"

namespace lm::interp {

// First-order data crossing the interpreter boundary.
struct Data {
    enum class Kind { Int, Bool, Con };
    Kind kind = Kind::Int;
    long long i = 0;
    bool b = false;
    std::string con;
    std::vector<Data> args;

    static Data num(long long v);
    static Data boolean(bool v);
    static Data ctor(std::string c, std::vector<Data> args = {});
    bool operator==(const Data& o) const;
    std::string str() const;
};

Data list(const std::vector<long long>& xs);
std::vector<long long> ints(const Data& list);

struct PatternFailure : std::runtime_error {
    Loc loc;
    PatternFailure(const std::string& msg, Loc l) : std::runtime_error(msg), loc(std::move(l)) {}
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Interpreter {
public:
    explicit Interpreter(const core::Program& prog, long long fuel = 5'000'000);
    ~Interpreter();
    Interpreter(const Interpreter&) = delete;
    Interpreter& operator=(const Interpreter&) = delete;

    // Applies a top-level binding and forces the result completely.
    Data call(const std::string& fn, const std::vector<Data>& args);

private:
    struct Impl;
    Impl* impl_;
};

} // namespace lm::interp
