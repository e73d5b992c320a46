#include "lm/lexer.hpp"

#include <array>
#include <cctype>

namespace lm {

std::string tok_name(Tok k) {
    switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::ConId: return "constructor";
    case Tok::Int: return "integer";
    case Tok::Op: return "operator";
    case Tok::Special: return "punctuation";
    case Tok::Keyword: return "keyword";
    case Tok::AnnOpen: return "'{-@'";
    case Tok::AnnClose: return "'@-}'";
    case Tok::Eof: return "end of file";
    }
    return "?";
}

namespace {

constexpr std::array kKeywords = {"case", "of",   "if",      "then",   "else",     "let",  "in",
                                  "where", "data", "type", "measure", "qualif", "otherwise"};

bool is_symbol(char c) {
    switch (c) {
    case '!': case '#': case '$': case '%': case '&': case '*': case '+': case '.': case '/':
    case '<': case '=': case '>': case '?': case '@': case '\\': case '^': case '|': case '-':
    case '~': case ':':
        return true;
    default: return false;
    }
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

class Lexer {
public:
    Lexer(std::string_view text, std::string file) : s_(text), file_(std::move(file)) {}

    std::vector<Token> run() {
        while (true) {
            skip_space_and_comments();
            if (pos_ >= s_.size()) break;
            lex_one();
        }
        if (in_ann_)
            fail(ErrorKind::Parse, here(), "unterminated annotation block opened at " + ann_start_.str());
        Token eof;
        eof.kind = Tok::Eof;
        eof.loc = here();
        eof.bol = true;
        out_.push_back(eof);
        return std::move(out_);
    }

private:
    Loc here() const { return Loc{file_, line_, col_}; }

    char peek(size_t k = 0) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }

    void advance(size_t n = 1) {
        for (size_t i = 0; i < n && pos_ < s_.size(); ++i) {
            if (s_[pos_] == '\n') {
                ++line_;
                col_ = 1;
                line_has_tok_ = false;
            } else if (s_[pos_] == '\t') {
                col_ = ((col_ - 1) / 8 + 1) * 8 + 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_space_and_comments() {
        while (pos_ < s_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '-' && peek(1) == '-') {
                size_t k = 0;
                while (peek(k) == '-') ++k;
                if (is_symbol(peek(k))) return;  // an operator such as -->
                while (pos_ < s_.size() && peek() != '\n') advance();
            } else if (c == '{' && peek(1) == '-' && peek(2) != '@') {
                Loc start = here();
                advance(2);
                int depth = 1;
                while (depth > 0) {
                    if (pos_ >= s_.size()) fail(ErrorKind::Parse, start, "unterminated block comment");
                    if (peek() == '{' && peek(1) == '-') {
                        ++depth;
                        advance(2);
                    } else if (peek() == '-' && peek(1) == '}') {
                        --depth;
                        advance(2);
                    } else {
                        advance();
                    }
                }
            } else {
                return;
            }
        }
    }

    void emit(Tok kind, std::string text, Loc loc, long long ival = 0) {
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        t.ival = ival;
        t.loc = std::move(loc);
        t.bol = !line_has_tok_;
        line_has_tok_ = true;
        out_.push_back(std::move(t));
    }

    void lex_one() {
        Loc loc = here();
        char c = peek();
        if (c == '{' && peek(1) == '-' && peek(2) == '@') {
            if (in_ann_) fail(ErrorKind::Parse, loc, "nested annotation block");
            advance(3);
            in_ann_ = true;
            ann_start_ = loc;
            emit(Tok::AnnOpen, "{-@", loc);
            return;
        }
        if (c == '@' && peek(1) == '-' && peek(2) == '}') {
            if (!in_ann_) fail(ErrorKind::Parse, loc, "'@-}' outside an annotation block");
            advance(3);
            in_ann_ = false;
            emit(Tok::AnnClose, "@-}", loc);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
            std::string txt(s_.substr(start, pos_ - start));
            emit(Tok::Int, txt, loc, std::stoll(txt));
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (is_ident_char(peek())) advance();
            std::string txt(s_.substr(start, pos_ - start));
            for (const char* kw : kKeywords)
                if (txt == kw) {
                    emit(Tok::Keyword, txt, loc);
                    return;
                }
            emit(std::isupper(static_cast<unsigned char>(txt[0])) ? Tok::ConId : Tok::Ident, txt, loc);
            return;
        }
        if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == ';' || c == '{' || c == '}' ||
            c == '`') {
            advance();
            emit(Tok::Special, std::string(1, c), loc);
            return;
        }
        if (is_symbol(c)) {
            size_t start = pos_;
            while (is_symbol(peek())) {
                // stop before an annotation terminator glued to an operator
                if (in_ann_ && peek() == '@' && peek(1) == '-' && peek(2) == '}' && pos_ > start) break;
                advance();
            }
            emit(Tok::Op, std::string(s_.substr(start, pos_ - start)), loc);
            return;
        }
        fail(ErrorKind::Parse, loc, std::string("illegal character '") + c + "'");
    }

    std::string_view s_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    bool line_has_tok_ = false;
    bool in_ann_ = false;
    Loc ann_start_;
    std::vector<Token> out_;
};

} // namespace

std::vector<Token> lex(std::string_view text, const std::string& file) {
    Lexer lx(text, file);
    auto toks = lx.run();
    return toks;
}

} // namespace lm
