#pragma once

// Surface syntax printer. Output is layout-free (explicit braces and
// semicolons, one item per line) and parses back to the same tree.

#include <string>

#include "lm/syntax.hpp"

namespace lm::syn {

std::string print(const SourceFile& sf);
std::string print(const Type& t);
std::string print(const Pattern& p);
std::string print(const Expr& e);

} // namespace lm::syn
