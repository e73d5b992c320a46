#include "lm/parser.hpp"

#include <cstdint>
#include <functional>
#include <map>

namespace lm {

using namespace syn;

namespace {

struct OpInfo {
    int prec;
    enum Assoc { Left, Right, None } assoc;
};

bool binop_info(const std::string& op, OpInfo& out) {
    static const std::map<std::string, OpInfo> table = {
        {"$", {0, OpInfo::Right}},  {"||", {2, OpInfo::Right}}, {"&&", {3, OpInfo::Right}},
        {"==", {4, OpInfo::None}},  {"/=", {4, OpInfo::None}},  {"<", {4, OpInfo::None}},
        {"<=", {4, OpInfo::None}},  {">", {4, OpInfo::None}},   {">=", {4, OpInfo::None}},
        {"++", {5, OpInfo::Right}}, {"+", {6, OpInfo::Left}},   {"-", {6, OpInfo::Left}},
        {"*", {7, OpInfo::Left}},
    };
    if (auto it = table.find(op); it != table.end()) {
        out = it->second;
        return true;
    }
    if (!op.empty() && op[0] == ':' && op != "::") {
        out = {5, OpInfo::Right};  // constructor operators
        return true;
    }
    return false;
}

class Parser {
public:
    Parser(const std::vector<Token>& toks, std::string path) : toks_(toks), path_(std::move(path)) {}

    SourceFile program() {
        SourceFile sf;
        sf.path = path_;
        if (cur().kind == Tok::Eof) return sf;
        layout_.push_back(cur().loc.col);
        while (cur().kind != Tok::Eof) {
            if (cur().is_sp(";")) {
                next();
                continue;
            }
            if (cur().kind == Tok::AnnOpen) {
                annotation_block(sf.items);
                continue;
            }
            item_start_ = pos_;
            sf.items.push_back(top_decl());
            if (!(cur().kind == Tok::Eof || cur().kind == Tok::AnnOpen || cur().is_sp(";") || cur().bol))
                error("expected end of declaration");
        }
        layout_.pop_back();
        return sf;
    }

    Pred standalone_pred(const std::string& vv) {
        Pred p = pred(vv);
        expect_eof();
        return p;
    }

    TypePtr standalone_type() {
        auto t = type();
        expect_eof();
        return t;
    }

    std::vector<QualifDef> qualifier_lines() {
        std::vector<QualifDef> out;
        in_ann_ = true;
        line_items_ = true;
        while (cur().kind != Tok::Eof) {
            item_start_ = pos_;
            if (cur().is_kw("qualif")) next();
            out.push_back(qualif_body());
        }
        return out;
    }

private:
    // ---- token plumbing -------------------------------------------------

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    void next() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    [[noreturn]] void error(const std::string& msg) const {
        const Token& t = cur();
        std::string got = t.kind == Tok::Eof ? "end of file" : "'" + t.text + "'";
        fail(ErrorKind::Parse, t.loc, msg + " (found " + got + ")");
    }

    void expect_eof() {
        if (cur().kind != Tok::Eof) error("unexpected trailing input");
    }

    // A token that ends the current layout item.
    bool boundary() const {
        const Token& t = cur();
        if (t.kind == Tok::Eof || t.kind == Tok::AnnClose) return true;
        if (pos_ == item_start_) return false;
        if (line_items_) return t.bol;
        if (in_ann_) return t.bol && ann_item_start();
        if (t.kind == Tok::AnnOpen) return true;
        return t.bol && !layout_.empty() && t.loc.col <= layout_.back();
    }

    bool ann_item_start() const {
        const Token& t = cur();
        if (t.kind == Tok::Keyword && (t.text == "type" || t.text == "data" || t.text == "measure" || t.text == "qualif"))
            return true;
        return t.kind == Tok::Ident && peek().is_op("::");
    }

    void expect_op(const std::string& op) {
        if (boundary() || !cur().is_op(op)) error("expected '" + op + "'");
        next();
    }
    void expect_sp(const std::string& s) {
        if (!cur().is_sp(s)) error("expected '" + s + "'");
        next();
    }
    void expect_kw(const std::string& s) {
        if (!cur().is_kw(s)) error("expected '" + s + "'");
        next();
    }
    std::string expect_ident() {
        if (boundary() || cur().kind != Tok::Ident) error("expected identifier");
        std::string s = cur().text;
        next();
        return s;
    }
    std::string expect_conid() {
        if (boundary() || cur().kind != Tok::ConId) error("expected constructor or type name");
        std::string s = cur().text;
        next();
        return s;
    }

    // Parses `item` repeatedly as a block opened after where/of/let.
    void block(const std::function<void()>& item) {
        if (cur().is_sp("{")) {
            next();
            layout_.push_back(0);
            while (!cur().is_sp("}")) {
                if (cur().is_sp(";")) {
                    next();
                    continue;
                }
                item_start_ = pos_;
                item();
                if (!cur().is_sp(";") && !cur().is_sp("}")) error("expected ';' or '}'");
            }
            next();
            layout_.pop_back();
            return;
        }
        if (boundary() && cur().loc.col <= (layout_.empty() ? 0 : layout_.back())) error("empty block");
        int col = cur().loc.col;
        layout_.push_back(col);
        while (true) {
            item_start_ = pos_;
            item();
            if (cur().is_sp(";")) {
                next();
                if (!boundary()) continue;
            }
            const Token& t = cur();
            if (t.bol && t.loc.col == col && t.kind != Tok::Eof && t.kind != Tok::AnnOpen && t.kind != Tok::AnnClose)
                continue;
            break;
        }
        layout_.pop_back();
    }

    // ---- annotations ------------------------------------------------------

    void annotation_block(std::vector<Item>& items) {
        next();  // {-@
        in_ann_ = true;
        while (cur().kind != Tok::AnnClose) {
            if (cur().kind == Tok::Eof) error("unterminated annotation block");
            if (cur().is_sp(";")) {
                next();
                continue;
            }
            item_start_ = pos_;
            items.push_back(annotation_item());
        }
        in_ann_ = false;
        next();  // @-}
    }

    Item annotation_item() {
        Item it;
        it.annotation = true;
        it.loc = cur().loc;
        if (cur().is_kw("type")) {
            it.kind = Item::Kind::Alias;
            it.alias = alias_def();
        } else if (cur().is_kw("data")) {
            it.kind = Item::Kind::Data;
            it.data = data_def();
        } else if (cur().is_kw("measure")) {
            next();
            it.kind = Item::Kind::Measure;
            it.measure = expect_ident();
        } else if (cur().is_kw("qualif")) {
            next();
            it.kind = Item::Kind::Qualif;
            it.qualif = qualif_body();
        } else if (cur().kind == Tok::Ident && peek().is_op("::")) {
            it.kind = Item::Kind::Sig;
            it.decl = signature();
        } else {
            error("expected an annotation (type, data, measure, qualif or a signature)");
        }
        if (!boundary()) error("unexpected token in annotation");
        return it;
    }

    QualifDef qualif_body() {
        QualifDef q;
        q.loc = cur().loc;
        if (cur().kind == Tok::ConId || cur().kind == Tok::Ident) {
            q.name = cur().text;
            next();
        }
        expect_sp("(");
        while (true) {
            std::string n = expect_ident();
            expect_op(":");
            auto t = btype();
            q.params.emplace_back(n, t);
            if (cur().is_sp(",")) {
                next();
                continue;
            }
            break;
        }
        expect_sp(")");
        expect_op(":");
        if (q.params.empty()) error("qualifier needs a value variable");
        q.body = pred(q.params[0].first);
        return q;
    }

    AliasDef alias_def() {
        AliasDef a;
        a.loc = cur().loc;
        expect_kw("type");
        a.name = expect_conid();
        while (!boundary() && !cur().is_op("=")) {
            if (cur().kind == Tok::Ident) a.typarams.push_back(cur().text);
            else if (cur().kind == Tok::ConId) a.valparams.push_back(cur().text);
            else error("expected alias parameter");
            next();
        }
        expect_op("=");
        a.body = type();
        return a;
    }

    DataDef data_def() {
        DataDef d;
        d.loc = cur().loc;
        expect_kw("data");
        d.name = expect_conid();
        while (!boundary() && cur().kind == Tok::Ident) {
            d.params.push_back(cur().text);
            next();
        }
        expect_op("=");
        while (true) {
            d.ctors.push_back(ctor_def());
            if (!boundary() && cur().is_op("|")) {
                next();
                continue;
            }
            break;
        }
        return d;
    }

    CtorDef ctor_def() {
        CtorDef c;
        c.loc = cur().loc;
        if (cur().is_sp("(") && peek().kind == Tok::Op && peek(2).is_sp(")")) {
            c.name = peek().text;
            next();
            next();
            next();
        } else {
            c.name = expect_conid();
        }
        if (!boundary() && cur().is_sp("{")) {
            next();
            while (true) {
                std::string f = expect_ident();
                expect_op("::");
                auto t = type();
                c.fields.emplace_back(f, t);
                if (cur().is_sp(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect_sp("}");
        } else {
            while (!boundary() && atype_start()) c.fields.emplace_back("", atype());
        }
        return c;
    }

    Decl signature() {
        Decl d;
        d.kind = Decl::Kind::Sig;
        d.loc = cur().loc;
        d.name = expect_ident();
        expect_op("::");
        d.context = context();
        d.type = type();
        return d;
    }

    // Optional `(Ord a, Eq b) =>` or `Ord a =>`.
    std::vector<std::pair<std::string, std::string>> context() {
        size_t k = pos_;
        int depth = 0;
        bool found = false;
        for (; k < toks_.size(); ++k) {
            const Token& t = toks_[k];
            if (t.kind == Tok::Eof || t.kind == Tok::AnnClose) break;
            if (k != pos_ && t.bol && in_ann_) {
                bool start = (t.kind == Tok::Keyword) || (t.kind == Tok::Ident && toks_[k + 1].is_op("::"));
                if (start) break;
            }
            if (t.is_sp("(") || t.is_sp("[") || t.is_sp("{")) ++depth;
            else if (t.is_sp(")") || t.is_sp("]") || t.is_sp("}")) --depth;
            else if (depth == 0 && (t.is_op("->") || t.is_op("="))) break;
            else if (depth == 0 && t.is_op("=>")) {
                found = true;
                break;
            }
        }
        std::vector<std::pair<std::string, std::string>> out;
        if (!found) return out;
        bool paren = cur().is_sp("(");
        if (paren) next();
        while (true) {
            std::string cls = expect_conid();
            std::string tv = expect_ident();
            out.emplace_back(cls, tv);
            if (paren && cur().is_sp(",")) {
                next();
                continue;
            }
            break;
        }
        if (paren) expect_sp(")");
        expect_op("=>");
        return out;
    }

    // ---- types ------------------------------------------------------------

    TypePtr mk_type(Type t) { return std::make_shared<const Type>(std::move(t)); }

    TypePtr type() {
        Loc loc = cur().loc;
        std::string binder;
        if (!boundary() && cur().kind == Tok::Ident && peek().is_op(":")) {
            binder = cur().text;
            next();
            next();
        }
        auto dom = btype();
        if (!boundary() && cur().is_op("->")) {
            next();
            auto rng = type();
            Type f;
            f.kind = Type::Kind::Fun;
            f.name = binder;
            f.args = {dom, rng};
            f.loc = loc;
            return mk_type(std::move(f));
        }
        if (!binder.empty()) error("dependent binder must be followed by '->'");
        return dom;
    }

    bool atype_start() const {
        const Token& t = cur();
        return t.kind == Tok::ConId || t.kind == Tok::Ident || t.kind == Tok::Int || t.is_sp("(") || t.is_sp("[") ||
               t.is_sp("{");
    }

    TypePtr btype() {
        Loc loc = cur().loc;
        if (!boundary() && (cur().kind == Tok::ConId || cur().kind == Tok::Ident)) {
            Type t;
            t.kind = cur().kind == Tok::ConId ? Type::Kind::Con : Type::Kind::Var;
            t.name = cur().text;
            t.loc = loc;
            next();
            while (!boundary() && atype_start() && !(cur().kind == Tok::Ident && peek().is_op(":")))
                t.args.push_back(atype());
            if (t.kind == Type::Kind::Var && !t.args.empty()) t.kind = Type::Kind::Con;  // value application
            return mk_type(std::move(t));
        }
        return atype();
    }

    TypePtr atype() {
        Loc loc = cur().loc;
        if (boundary()) error("expected a type");
        const Token& t = cur();
        if (t.kind == Tok::ConId || t.kind == Tok::Ident) {
            Type ty;
            ty.kind = t.kind == Tok::ConId ? Type::Kind::Con : Type::Kind::Var;
            ty.name = t.text;
            ty.loc = loc;
            next();
            return mk_type(std::move(ty));
        }
        if (t.kind == Tok::Int) {
            Type ty;
            ty.kind = Type::Kind::Value;
            ty.pred = Pred::lit(t.ival);
            ty.loc = loc;
            next();
            return mk_type(std::move(ty));
        }
        if (t.is_sp("(")) {
            next();
            auto a = type();
            if (cur().is_sp(",")) {
                next();
                auto b = type();
                expect_sp(")");
                Type ty;
                ty.kind = Type::Kind::Tuple;
                ty.args = {a, b};
                ty.loc = loc;
                return mk_type(std::move(ty));
            }
            expect_sp(")");
            return a;
        }
        if (t.is_sp("[")) {
            next();
            auto a = type();
            expect_sp("]");
            Type ty;
            ty.kind = Type::Kind::List;
            ty.args = {a};
            ty.loc = loc;
            return mk_type(std::move(ty));
        }
        if (t.is_sp("{")) {
            next();
            if (cur().kind == Tok::Ident && peek().is_op(":")) {
                std::string vv = cur().text;
                next();
                next();
                auto base = type();
                Pred p = Pred::tt();
                if (cur().is_op("|")) {
                    next();
                    p = pred(vv);
                }
                expect_sp("}");
                Type ty;
                ty.kind = Type::Kind::Refine;
                ty.name = vv;
                ty.args = {base};
                ty.pred = p;
                ty.loc = loc;
                return mk_type(std::move(ty));
            }
            Type ty;
            ty.kind = Type::Kind::Value;
            ty.pred = pred("");
            ty.loc = loc;
            expect_sp("}");
            return mk_type(std::move(ty));
        }
        error("expected a type");
    }

    // ---- predicates -------------------------------------------------------

    Pred pred(const std::string& vv) { return pimp(vv); }

    Pred pimp(const std::string& vv) {
        Pred a = por(vv);
        if (cur().is_op("=>") || cur().is_op("==>")) {
            next();
            return Pred::imp(a, pimp(vv));
        }
        if (cur().is_op("<=>")) {
            next();
            return Pred::iff(a, pimp(vv));
        }
        return a;
    }

    Pred por(const std::string& vv) {
        Pred a = pand(vv);
        while (cur().is_op("||")) {
            next();
            a = Pred::disj(a, pand(vv));
        }
        return a;
    }

    Pred pand(const std::string& vv) {
        Pred a = pnot(vv);
        while (cur().is_op("&&")) {
            next();
            a = Pred::conj(a, pnot(vv));
        }
        return a;
    }

    Pred pnot(const std::string& vv) {
        if (cur().is(Tok::Ident, "not")) {
            next();
            return Pred::lnot(pnot(vv));
        }
        return pcmp(vv);
    }

    Pred pcmp(const std::string& vv) {
        Pred a = parith(vv);
        static const std::map<std::string, POp> rel = {{"=", POp::Eq},  {"==", POp::Eq}, {"/=", POp::Ne},
                                                       {"!=", POp::Ne}, {"<", POp::Lt},  {"<=", POp::Le},
                                                       {">", POp::Gt},  {">=", POp::Ge}};
        if (cur().kind == Tok::Op) {
            if (auto it = rel.find(cur().text); it != rel.end()) {
                next();
                return Pred::cmp(it->second, a, parith(vv));
            }
        }
        return a;
    }

    Pred parith(const std::string& vv) {
        Pred a = pterm(vv);
        while (cur().is_op("+") || cur().is_op("-")) {
            bool plus = cur().is_op("+");
            next();
            Pred b = pterm(vv);
            a = plus ? Pred::add(a, b) : Pred::sub(a, b);
        }
        return a;
    }

    Pred pterm(const std::string& vv) {
        Pred a = punary(vv);
        while (cur().is_op("*")) {
            Loc loc = cur().loc;
            next();
            Pred b = punary(vv);
            if (a.op() != POp::Int && b.op() != POp::Int)
                fail(ErrorKind::Parse, loc, "multiplication needs a literal operand (linear arithmetic only)");
            a = Pred::mul(a, b);
        }
        return a;
    }

    Pred punary(const std::string& vv) {
        if (cur().is_op("-")) {
            next();
            return Pred::neg(punary(vv));
        }
        return papp(vv);
    }

    bool patom_start() const {
        const Token& t = cur();
        if (boundary()) return false;
        return t.kind == Tok::Int || (t.kind == Tok::Ident && t.text != "not") || t.is_sp("(") || t.kind == Tok::ConId;
    }

    Pred papp(const std::string& vv) {
        if (cur().kind == Tok::Ident && cur().text != "not" && cur().text != vv) {
            std::string fn = cur().text;
            const Token& nx = peek();
            bool has_args = nx.kind == Tok::Int || (nx.kind == Tok::Ident && nx.text != "not") || nx.is_sp("(") ||
                            nx.kind == Tok::ConId;
            bool next_item = nx.bol && (line_items_ || (in_ann_ && nx.kind == Tok::Ident && peek(2).is_op("::")));
            if (has_args && !next_item) {
                next();
                std::vector<Pred> args;
                while (patom_start()) args.push_back(patom(vv));
                return Pred::app(fn, std::move(args));
            }
        }
        return patom(vv);
    }

    Pred patom(const std::string& vv) {
        const Token& t = cur();
        if (t.kind == Tok::Int) {
            next();
            return Pred::lit(t.ival);
        }
        if (t.kind == Tok::Ident) {
            std::string n = t.text;
            next();
            if (!vv.empty() && n == vv) return Pred::vv();
            if (n == "true" || n == "false") return Pred::boolean(n == "true");
            return Pred::var(Ident(n));
        }
        if (t.kind == Tok::ConId) {
            std::string n = t.text;
            next();
            if (n == "True" || n == "False") return Pred::boolean(n == "True");
            return Pred::var(Ident(n));  // alias value parameter
        }
        if (t.is_kw("if")) {
            next();
            Pred c = pred(vv);
            expect_kw("then");
            Pred a = pred(vv);
            expect_kw("else");
            Pred b = pred(vv);
            return Pred::ite(c, a, b);
        }
        if (t.is_sp("(")) {
            next();
            Pred p = pred(vv);
            expect_sp(")");
            return p;
        }
        error("expected a predicate term");
    }

    // ---- declarations -----------------------------------------------------

    Item top_decl() {
        Item it;
        it.loc = cur().loc;
        if (cur().is_kw("data")) {
            it.kind = Item::Kind::Data;
            it.data = data_def();
            return it;
        }
        if (cur().is_kw("type")) {
            it.kind = Item::Kind::Alias;
            it.alias = alias_def();
            return it;
        }
        it.kind = Item::Kind::Decl;
        it.decl = decl();
        if (it.decl.kind == Decl::Kind::Sig) it.kind = Item::Kind::Sig;
        return it;
    }

    Decl decl() {
        if (cur().kind == Tok::Ident && peek().is_op("::")) return signature();
        Decl d;
        d.loc = cur().loc;
        if (cur().kind == Tok::Ident && !peek().is_op("@") && !(peek().kind == Tok::Op && peek().text[0] == ':')) {
            d.kind = Decl::Kind::Equation;
            d.name = cur().text;
            next();
            while (!boundary() && !cur().is_op("=") && !cur().is_op("|")) d.pats.push_back(apat());
            d.rhs = rhs("=");
            return d;
        }
        d.kind = Decl::Kind::PatBind;
        d.pats.push_back(pattern());
        d.rhs = rhs("=");
        return d;
    }

    Rhs rhs(const std::string& eq) {
        Rhs r;
        if (!boundary() && cur().is_op("|")) {
            while (!boundary() && cur().is_op("|")) {
                next();
                auto g = expr();
                expect_op(eq);
                auto b = expr();
                r.guards.emplace_back(g, b);
            }
        } else {
            expect_op(eq);
            r.plain = expr();
        }
        if (!boundary() && cur().is_kw("where")) {
            next();
            block([&] { r.where.push_back(decl()); });
        }
        return r;
    }

    // ---- patterns -----------------------------------------------------------

    PatPtr mk_pat(Pattern p) { return std::make_shared<const Pattern>(std::move(p)); }

    PatPtr pattern() {
        Loc loc = cur().loc;
        PatPtr left;
        if (!boundary() && cur().kind == Tok::ConId) {
            Pattern p;
            p.kind = Pattern::Kind::Con;
            p.name = cur().text;
            p.loc = loc;
            next();
            while (!boundary() && apat_start()) p.args.push_back(apat());
            left = mk_pat(std::move(p));
        } else {
            left = apat();
        }
        if (!boundary() && cur().kind == Tok::Op && cur().text[0] == ':' && cur().text != "::") {
            Pattern p;
            p.kind = Pattern::Kind::Con;
            p.name = cur().text;
            p.loc = cur().loc;
            next();
            p.args = {left, pattern()};
            return mk_pat(std::move(p));
        }
        return left;
    }

    bool apat_start() const {
        const Token& t = cur();
        return t.kind == Tok::Ident || t.kind == Tok::ConId || t.is_sp("(") || t.is_sp("[");
    }

    PatPtr apat() {
        Loc loc = cur().loc;
        if (boundary()) error("expected a pattern");
        const Token& t = cur();
        Pattern p;
        p.loc = loc;
        if (t.kind == Tok::Ident) {
            std::string n = t.text;
            next();
            if (n == "_") {
                p.kind = Pattern::Kind::Wild;
                return mk_pat(std::move(p));
            }
            if (!boundary() && cur().is_op("@")) {
                next();
                p.kind = Pattern::Kind::As;
                p.name = n;
                p.args = {apat()};
                return mk_pat(std::move(p));
            }
            p.kind = Pattern::Kind::Var;
            p.name = n;
            return mk_pat(std::move(p));
        }
        if (t.kind == Tok::ConId) {
            p.kind = Pattern::Kind::Con;
            p.name = t.text;
            next();
            return mk_pat(std::move(p));
        }
        if (t.is_sp("(")) {
            next();
            if (cur().kind == Tok::Op && peek().is_sp(")")) {
                p.kind = Pattern::Kind::Con;
                p.name = cur().text;
                next();
                next();
                while (!boundary() && apat_start()) p.args.push_back(apat());
                return mk_pat(std::move(p));
            }
            auto a = pattern();
            if (cur().is_sp(",")) {
                next();
                auto b = pattern();
                expect_sp(")");
                p.kind = Pattern::Kind::Tuple;
                p.args = {a, b};
                return mk_pat(std::move(p));
            }
            expect_sp(")");
            return a;
        }
        if (t.is_sp("[")) {
            next();
            p.kind = Pattern::Kind::List;
            if (!cur().is_sp("]")) {
                while (true) {
                    p.args.push_back(pattern());
                    if (cur().is_sp(",")) {
                        next();
                        continue;
                    }
                    break;
                }
            }
            expect_sp("]");
            return mk_pat(std::move(p));
        }
        error("expected a pattern");
    }

    // ---- expressions --------------------------------------------------------

    ExprPtr mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

    ExprPtr expr() {
        Loc loc = cur().loc;
        if (boundary()) error("expected an expression");
        if (cur().is_op("\\")) {
            next();
            Expr e;
            e.kind = Expr::Kind::Lam;
            e.loc = loc;
            while (!cur().is_op("->")) e.pats.push_back(apat());
            expect_op("->");
            e.kids = {expr()};
            return mk(std::move(e));
        }
        if (cur().is_kw("if")) {
            next();
            auto c = expr();
            expect_kw("then");
            auto a = expr();
            expect_kw("else");
            auto b = expr();
            Expr e;
            e.kind = Expr::Kind::If;
            e.loc = loc;
            e.kids = {c, a, b};
            return mk(std::move(e));
        }
        if (cur().is_kw("case")) {
            next();
            auto s = expr();
            expect_kw("of");
            Expr e;
            e.kind = Expr::Kind::Case;
            e.loc = loc;
            e.kids = {s};
            block([&] {
                Alt a;
                a.loc = cur().loc;
                a.pat = pattern();
                a.rhs = rhs("->");
                e.alts.push_back(std::move(a));
            });
            return mk(std::move(e));
        }
        if (cur().is_kw("let")) {
            next();
            Expr e;
            e.kind = Expr::Kind::Let;
            e.loc = loc;
            block([&] { e.decls.push_back(decl()); });
            expect_kw("in");
            e.kids = {expr()};
            return mk(std::move(e));
        }
        return opexpr(0);
    }

    ExprPtr operand() {
        Loc loc = cur().loc;
        if (cur().is_op("\\") || cur().is_kw("if") || cur().is_kw("case") || cur().is_kw("let")) return expr();
        if (cur().is_op("-")) {
            next();
            Expr e;
            e.kind = Expr::Kind::Neg;
            e.loc = loc;
            e.kids = {fexp()};
            return mk(std::move(e));
        }
        return fexp();
    }

    ExprPtr opexpr(int min_prec) {
        ExprPtr lhs = operand();
        while (!boundary() && cur().kind == Tok::Op) {
            OpInfo info;
            if (!binop_info(cur().text, info) || info.prec < min_prec) break;
            std::string op = cur().text;
            Loc loc = cur().loc;
            next();
            int next_min = info.assoc == OpInfo::Right ? info.prec : info.prec + 1;
            ExprPtr rhs = opexpr(next_min);
            Expr e;
            e.kind = Expr::Kind::BinOp;
            e.name = op;
            e.loc = loc;
            e.kids = {lhs, rhs};
            lhs = mk(std::move(e));
            if (info.assoc == OpInfo::None) {
                OpInfo again;
                if (!boundary() && cur().kind == Tok::Op && binop_info(cur().text, again) && again.prec == info.prec)
                    error("non-associative operator used twice");
            }
        }
        return lhs;
    }

    bool aexp_start() const {
        const Token& t = cur();
        return t.kind == Tok::Ident || t.kind == Tok::ConId || t.kind == Tok::Int || t.is_sp("(") ||
               t.is_sp("[") || t.is_kw("otherwise");
    }

    ExprPtr fexp() {
        Loc loc = cur().loc;
        ExprPtr f = aexp();
        std::vector<ExprPtr> args;
        while (!boundary() && aexp_start()) args.push_back(aexp());
        if (args.empty()) return f;
        Expr e;
        e.kind = Expr::Kind::App;
        e.loc = loc;
        e.kids.push_back(f);
        for (auto& a : args) e.kids.push_back(a);
        return mk(std::move(e));
    }

    ExprPtr aexp() {
        Loc loc = cur().loc;
        if (boundary()) error("expected an expression");
        const Token& t = cur();
        Expr e;
        e.loc = loc;
        if (t.kind == Tok::Ident) {
            e.kind = Expr::Kind::Var;
            e.name = t.text;
            next();
            return mk(std::move(e));
        }
        if (t.is_kw("otherwise")) {
            e.kind = Expr::Kind::Bool;
            e.bval = true;
            next();
            return mk(std::move(e));
        }
        if (t.kind == Tok::ConId) {
            if (t.text == "True" || t.text == "False") {
                e.kind = Expr::Kind::Bool;
                e.bval = t.text == "True";
            } else {
                e.kind = Expr::Kind::Con;
                e.name = t.text;
            }
            next();
            return mk(std::move(e));
        }
        if (t.kind == Tok::Int) {
            e.kind = Expr::Kind::Int;
            e.ival = t.ival;
            next();
            return mk(std::move(e));
        }
        if (t.is_sp("(")) {
            next();
            if (cur().kind == Tok::Op && peek().is_sp(")")) {
                std::string op = cur().text;
                next();
                next();
                e.kind = op[0] == ':' ? Expr::Kind::Con : Expr::Kind::Var;
                e.name = op;
                return mk(std::move(e));
            }
            auto a = expr();
            if (cur().is_sp(",")) {
                next();
                auto b = expr();
                expect_sp(")");
                e.kind = Expr::Kind::Tuple;
                e.kids = {a, b};
                return mk(std::move(e));
            }
            expect_sp(")");
            return a;
        }
        if (t.is_sp("[")) {
            next();
            e.kind = Expr::Kind::List;
            if (cur().is_sp("]")) {
                next();
                return mk(std::move(e));
            }
            auto first = expr();
            if (cur().is_op("|")) {
                next();
                e.kind = Expr::Kind::ListComp;
                e.kids = {first};
                while (true) {
                    CompQual q;
                    if (is_generator()) {
                        q.gen_pat = pattern();
                        expect_op("<-");
                    }
                    q.expr = expr();
                    e.quals.push_back(std::move(q));
                    if (cur().is_sp(",")) {
                        next();
                        continue;
                    }
                    break;
                }
                expect_sp("]");
                return mk(std::move(e));
            }
            e.kids.push_back(first);
            while (cur().is_sp(",")) {
                next();
                e.kids.push_back(expr());
            }
            expect_sp("]");
            return mk(std::move(e));
        }
        error("expected an expression");
    }

    // Scan ahead for `<-` before the next `,` or `]` at depth 0.
    bool is_generator() const {
        int depth = 0;
        for (size_t k = pos_; k < toks_.size(); ++k) {
            const Token& t = toks_[k];
            if (t.kind == Tok::Eof) return false;
            if (t.is_sp("(") || t.is_sp("[")) ++depth;
            else if (t.is_sp(")") || t.is_sp("]")) {
                if (depth == 0) return false;
                --depth;
            } else if (depth == 0 && t.is_sp(",")) return false;
            else if (depth == 0 && t.is_op("<-")) return true;
        }
        return false;
    }

    const std::vector<Token>& toks_;
    std::string path_;
    size_t pos_ = 0;
    std::vector<int> layout_;
    bool in_ann_ = false;
    bool line_items_ = false;
    size_t item_start_ = SIZE_MAX;
};

} // namespace

SourceFile parse_program(const std::vector<Token>& tokens, const std::string& path, std::string text) {
    Parser p(tokens, path);
    SourceFile sf = p.program();
    sf.text = std::move(text);
    return sf;
}

SourceFile parse_source(std::string_view text, const std::string& path) {
    auto toks = lex(text, path);
    return parse_program(toks, path, std::string(text));
}

Pred parse_pred_text(std::string_view text, const std::string& vv_name) {
    auto toks = lex(text, "<pred>");
    Parser p(toks, "<pred>");
    return p.standalone_pred(vv_name);
}

TypePtr parse_type_text(std::string_view text) {
    auto toks = lex(text, "<type>");
    Parser p(toks, "<type>");
    return p.standalone_type();
}

std::vector<QualifDef> parse_qualifier_file(std::string_view text, const std::string& path) {
    auto toks = lex(text, path);
    Parser p(toks, path);
    return p.qualifier_lines();
}

} // namespace lm
