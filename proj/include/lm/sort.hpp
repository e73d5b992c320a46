#pragma once

#include <string>

namespace lm {

// Logic sort of a refinement term. Type variables stay distinct for
// qualifier matching but are encoded as Int in SMT.
struct Sort {
    enum class Kind { Int, Bool, Data, TyVar };
    Kind kind = Kind::Int;
    std::string name;

    static Sort integer() { return {Kind::Int, "Int"}; }
    static Sort boolean() { return {Kind::Bool, "Bool"}; }
    static Sort data(std::string n) { return {Kind::Data, std::move(n)}; }
    static Sort tyvar(std::string n) { return {Kind::TyVar, std::move(n)}; }

    bool ordered() const { return kind == Kind::Int || kind == Kind::TyVar; }
    std::string str() const { return name; }
    std::string smt() const;

    friend bool operator==(const Sort&, const Sort&) = default;
    friend auto operator<=>(const Sort&, const Sort&) = default;
};

} // namespace lm
