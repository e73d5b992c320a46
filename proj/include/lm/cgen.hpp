#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lm/hm.hpp"
#include "lm/measure.hpp"
#include "lm/program.hpp"

namespace lm {

// Γ: bindings interleaved with path guards, shared tails.
class Env {
public:
    struct Entry {
        bool is_guard = false;
        Ident x;
        RTypePtr t;
        Pred guard;
    };

    Env bind(const Ident& x, const RTypePtr& t) const;
    Env guard(const Pred& p) const;
    const RTypePtr* lookup(const Ident& x) const;
    // Oldest first.
    std::vector<Entry> entries() const;
    // Base-typed binders in scope with their sorts, oldest first.
    std::vector<std::pair<Ident, Sort>> scope() const;
    bool empty() const { return !node_; }
    size_t size() const { return node_ ? node_->depth : 0; }

private:
    struct Node {
        std::shared_ptr<const Node> parent;
        Entry e;
        size_t depth = 1;
    };
    std::shared_ptr<const Node> node_;
};

struct KVarInfo {
    int id = 0;
    Sort sort;
    std::vector<std::pair<Ident, Sort>> scope;
    Loc loc;
};

// ⟦Γ⟧ ∧ lhs ⇒ rhs, ν of sort `sort`. After splitting the rhs is a single
// kvar or kvar-free.
struct Constraint {
    int id = 0;
    Env env;
    Pred lhs;
    Pred rhs;
    Sort sort;
    Loc loc;
    std::string rule;
};

struct CGen {
    std::vector<Constraint> constraints;
    std::map<int, KVarInfo> kvars;
    std::vector<std::pair<Ident, RTypePtr>> top;  // assumed types of top-level bindings
};

// Refinement for a primitive operator, instantiated at the given shapes.
RTypePtr prim_rtype(const std::string& name);

// Generates constraints for the whole program.
CGen generate(const core::Program& prog, const ShapeInfo& shapes, const MeasureEnv& measures);

// Structural subtyping split, for tests. New kvars are not created.
std::vector<Constraint> split_subtype(const Env& env, const RTypePtr& t1, const RTypePtr& t2, const Loc& loc,
                                      const std::string& rule = "subtype");

// Fresh template of a shape: a kvar at every base position.
RTypePtr fresh_template(const RTypePtr& shape, const Env& env, std::map<int, KVarInfo>& kvars, const Loc& loc);

std::string render_constraint(const Constraint& c);

} // namespace lm
