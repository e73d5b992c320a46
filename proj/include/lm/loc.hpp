#pragma once

#include <stdexcept>
#include <string>

namespace lm {

struct Loc {
    std::string file;
    int line = 0;
    int col = 0;

    std::string str() const;
    bool valid() const { return line > 0; }
    friend bool operator<(const Loc& a, const Loc& b) {
        if (a.file != b.file) return a.file < b.file;
        if (a.line != b.line) return a.line < b.line;
        return a.col < b.col;
    }
    friend bool operator==(const Loc&, const Loc&) = default;
};

enum class ErrorKind { Parse, Shape, Measure, Sort, Tool, Internal };

// All front-end and tool failures surface as this; the driver maps kinds to
// exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, Loc loc, const std::string& msg);

    ErrorKind kind() const { return kind_; }
    const Loc& loc() const { return loc_; }
    const std::string& message() const { return msg_; }

private:
    ErrorKind kind_;
    Loc loc_;
    std::string msg_;
};

[[noreturn]] void fail(ErrorKind kind, const Loc& loc, const std::string& msg);

} // namespace lm
