#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lm/lexer.hpp"
#include "lm/syntax.hpp"

namespace lm {

syn::SourceFile parse_program(const std::vector<Token>& tokens, const std::string& path, std::string text = {});
syn::SourceFile parse_source(std::string_view text, const std::string& path);

// A single refinement predicate in surface syntax; `v` names the value variable.
Pred parse_pred_text(std::string_view text, const std::string& vv_name = "v");
syn::TypePtr parse_type_text(std::string_view text);

// Qualifier lines as accepted by --qualifiers.
std::vector<syn::QualifDef> parse_qualifier_file(std::string_view text, const std::string& path);

} // namespace lm
