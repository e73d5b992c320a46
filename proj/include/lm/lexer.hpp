#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lm/loc.hpp"

namespace lm {

enum class Tok {
    Ident,    // lower-case identifier or `_`
    ConId,    // upper-case identifier
    Int,
    Op,       // symbolic operator, including reserved ones (= | :: -> <- => \ @)
    Special,  // ( ) [ ] , ; { } `
    Keyword,
    AnnOpen,  // {-@
    AnnClose, // @-}
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    long long ival = 0;
    Loc loc;
    bool bol = false;  // first token on its line

    bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
    bool is_op(std::string_view t) const { return is(Tok::Op, t); }
    bool is_sp(std::string_view t) const { return is(Tok::Special, t); }
    bool is_kw(std::string_view t) const { return is(Tok::Keyword, t); }
};

std::string tok_name(Tok k);

// Tokenizes source text. `--` and `{- -}` comments are skipped; `{-@ ... @-}`
// blocks become AnnOpen ... AnnClose groups. Throws Error(Parse) on illegal
// characters and unterminated comments or annotations.
std::vector<Token> lex(std::string_view text, const std::string& file = "");

} // namespace lm
