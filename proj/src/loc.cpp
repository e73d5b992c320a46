#include "lm/loc.hpp"
#include "lm/ident.hpp"
#include "lm/sort.hpp"

#include <atomic>
#include <cctype>

namespace lm {

std::string Loc::str() const {
    if (!valid()) return file.empty() ? "<unknown>" : file;
    return file + ":" + std::to_string(line) + ":" + std::to_string(col);
}

Error::Error(ErrorKind kind, Loc loc, const std::string& msg)
    : std::runtime_error(loc.str() + ": " + msg), kind_(kind), loc_(std::move(loc)), msg_(msg) {}

void fail(ErrorKind kind, const Loc& loc, const std::string& msg) { throw Error(kind, loc, msg); }

namespace {
thread_local int g_next_id{1};
}

Ident Ident::fresh(const std::string& name) { return Ident(name, g_next_id++); }

const Ident& Ident::vv() {
    static const Ident v("v", 0);
    return v;
}

std::string Ident::smt_name() const {
    std::string out;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        out += ok ? c : '_';
    }
    if (is_vv()) return "VV";
    return out + "_" + std::to_string(id < 0 ? 0 : id);
}

void reset_fresh_counter(int next) { g_next_id = next; }

std::string Sort::smt() const {
    switch (kind) {
    case Kind::Int:
    case Kind::TyVar: return "Int";
    case Kind::Bool: return "Bool";
    case Kind::Data: {
        std::string out = "D_";
        for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
        return out;
    }
    }
    return "Int";
}

} // namespace lm
