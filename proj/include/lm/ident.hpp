#pragma once

#include <compare>
#include <functional>
#include <string>

namespace lm {

// A program variable. Surface names start unresolved (id < 0) and compare by
// name; resolved identifiers compare by their unique id only.
struct Ident {
    std::string name;
    int id = -1;

    Ident() = default;
    Ident(std::string n, int i = -1) : name(std::move(n)), id(i) {}

    static Ident fresh(const std::string& name);
    // The value variable shared by every refinement (`v` in surface syntax).
    static const Ident& vv();

    bool resolved() const { return id >= 0; }
    bool is_vv() const { return id == 0; }
    std::string smt_name() const;

    friend bool operator==(const Ident& a, const Ident& b) {
        if (a.id != b.id) return false;
        return a.id >= 0 || a.name == b.name;
    }
    friend std::strong_ordering operator<=>(const Ident& a, const Ident& b) {
        if (auto c = a.id <=> b.id; c != 0) return c;
        if (a.id >= 0) return std::strong_ordering::equal;
        return a.name <=> b.name;
    }
};

void reset_fresh_counter(int next = 1);

} // namespace lm

template <> struct std::hash<lm::Ident> {
    size_t operator()(const lm::Ident& i) const noexcept {
        return i.id >= 0 ? std::hash<int>{}(i.id) : std::hash<std::string>{}(i.name);
    }
};
