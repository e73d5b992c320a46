#include "lm/program.hpp"

#include <atomic>
#include <sstream>

namespace lm::core {

namespace {

std::atomic<int> node_counter{1};

std::shared_ptr<Expr> node(Expr::Kind k, const Loc& loc) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->id = node_counter++;
    e->loc = loc;
    return e;
}

} // namespace

ExprPtr mk_var(const Ident& x, const Loc& loc) {
    auto e = node(Expr::Kind::Var, loc);
    e->var = x;
    return e;
}

ExprPtr mk_con(const std::string& c, const Loc& loc) {
    auto e = node(Expr::Kind::Con, loc);
    e->con = c;
    return e;
}

ExprPtr mk_int(long long v, const Loc& loc) {
    auto e = node(Expr::Kind::Int, loc);
    e->ival = v;
    return e;
}

ExprPtr mk_bool(bool b, const Loc& loc) {
    auto e = node(Expr::Kind::Bool, loc);
    e->bval = b;
    return e;
}

ExprPtr mk_app(ExprPtr f, std::vector<ExprPtr> args, const Loc& loc) {
    if (args.empty()) return f;
    if (f->kind == Expr::Kind::App) {  // flatten nested applications
        std::vector<ExprPtr> all(f->kids.begin() + 1, f->kids.end());
        all.insert(all.end(), args.begin(), args.end());
        return mk_app(f->kids[0], std::move(all), loc);
    }
    auto e = node(Expr::Kind::App, loc);
    e->kids.push_back(std::move(f));
    for (auto& a : args) e->kids.push_back(std::move(a));
    return e;
}

ExprPtr mk_lam(const Ident& x, ExprPtr body, const Loc& loc) {
    auto e = node(Expr::Kind::Lam, loc);
    e->var = x;
    e->kids = {std::move(body)};
    return e;
}

ExprPtr mk_let(const Ident& x, ExprPtr rhs, ExprPtr body, const Loc& loc) {
    auto e = node(Expr::Kind::Let, loc);
    e->var = x;
    e->kids = {std::move(rhs), std::move(body)};
    return e;
}

ExprPtr mk_letrec(std::vector<Bind> binds, ExprPtr body, const Loc& loc) {
    auto e = node(Expr::Kind::LetRec, loc);
    e->binds = std::move(binds);
    e->kids = {std::move(body)};
    return e;
}

ExprPtr mk_if(ExprPtr c, ExprPtr t, ExprPtr f, const Loc& loc) {
    auto e = node(Expr::Kind::If, loc);
    e->kids = {std::move(c), std::move(t), std::move(f)};
    return e;
}

ExprPtr mk_case(ExprPtr scrut, std::vector<Alt> alts, const Loc& loc) {
    auto e = node(Expr::Kind::Case, loc);
    e->kids = {std::move(scrut)};
    e->alts = std::move(alts);
    return e;
}

ExprPtr mk_paterror(const std::string& msg, const Loc& loc) {
    auto e = node(Expr::Kind::PatError, loc);
    e->message = msg;
    return e;
}

ExprPtr lam_body(const ExprPtr& e, std::vector<Ident>* params) {
    ExprPtr cur = e;
    while (cur->kind == Expr::Kind::Lam) {
        if (params) params->push_back(cur->var);
        cur = cur->kids[0];
    }
    return cur;
}

namespace {

std::string ident_str(const Ident& x) { return x.resolved() ? x.name + "_" + std::to_string(x.id) : x.name; }

void show_to(std::ostringstream& os, const ExprPtr& e, int indent) {
    std::string pad(indent, ' ');
    switch (e->kind) {
    case Expr::Kind::Var: os << ident_str(e->var); break;
    case Expr::Kind::Con: os << e->con; break;
    case Expr::Kind::Int: os << e->ival; break;
    case Expr::Kind::Bool: os << (e->bval ? "True" : "False"); break;
    case Expr::Kind::App:
        os << "(";
        for (size_t i = 0; i < e->kids.size(); ++i) {
            if (i) os << " ";
            show_to(os, e->kids[i], indent);
        }
        os << ")";
        break;
    case Expr::Kind::Lam:
        os << "(\\" << ident_str(e->var) << " -> ";
        show_to(os, e->kids[0], indent);
        os << ")";
        break;
    case Expr::Kind::Let:
        os << "let " << ident_str(e->var) << " = ";
        show_to(os, e->kids[0], indent + 2);
        os << "\n" << pad << "in ";
        show_to(os, e->kids[1], indent);
        break;
    case Expr::Kind::LetRec:
        os << "letrec";
        for (const auto& b : e->binds) {
            os << "\n" << pad << "  " << ident_str(b.name) << " = ";
            show_to(os, b.body, indent + 4);
        }
        os << "\n" << pad << "in ";
        show_to(os, e->kids[0], indent);
        break;
    case Expr::Kind::If:
        os << "if ";
        show_to(os, e->kids[0], indent);
        os << "\n" << pad << "  then ";
        show_to(os, e->kids[1], indent + 2);
        os << "\n" << pad << "  else ";
        show_to(os, e->kids[2], indent + 2);
        break;
    case Expr::Kind::Case:
        os << "case ";
        show_to(os, e->kids[0], indent);
        os << " of";
        for (const auto& a : e->alts) {
            os << "\n" << pad << "  " << (a.con.empty() ? "_" : a.con);
            for (const auto& f : a.fields) os << " " << ident_str(f);
            os << " -> ";
            show_to(os, a.body, indent + 4);
        }
        break;
    case Expr::Kind::PatError: os << "patError \"" << e->message << "\""; break;
    }
}

} // namespace

std::string show(const ExprPtr& e) {
    std::ostringstream os;
    show_to(os, e, 0);
    return os.str();
}

const DataDecl* Program::data(const std::string& name) const {
    for (const auto& d : datas)
        if (d.name == name) return &d;
    return nullptr;
}

std::optional<std::pair<const DataDecl*, size_t>> Program::ctor(const std::string& name) const {
    for (const auto& d : datas)
        for (size_t i = 0; i < d.ctors.size(); ++i)
            if (d.ctors[i].name == name) return std::make_pair(&d, i);
    return std::nullopt;
}

const TopBind* Program::bind(const std::string& name) const {
    for (const auto& b : binds)
        if (b.name.name == name) return &b;
    return nullptr;
}

RTypePtr ctor_type(const DataDecl& d, const CtorDecl& c, const Pred& result_refinement) {
    std::vector<RTypePtr> args;
    for (const auto& p : d.params) args.push_back(rbase(BaseType::tyvar(p)));
    RTypePtr t = rbase(BaseType::tycon(d.name, args), result_refinement);
    for (auto it = c.fields.rbegin(); it != c.fields.rend(); ++it) t = rfun(it->first, it->second, t);
    for (auto it = d.params.rbegin(); it != d.params.rend(); ++it) t = rforall(*it, t);
    return t;
}

Pred expand_inlines(const Pred& p, const std::map<std::string, InlineFn>& inlines) {
    if (inlines.empty()) return p;
    return rewrite_apps(p, [&](const Pred& app) -> std::optional<Pred> {
        auto it = inlines.find(app.fn());
        if (it == inlines.end()) return std::nullopt;
        const InlineFn& f = it->second;
        if (f.params.size() != app.kids().size()) return std::nullopt;
        Subst s;
        for (size_t i = 0; i < f.params.size(); ++i) s.emplace_back(f.params[i], app.kid(i));
        return expand_inlines(subst(f.body, s), inlines);
    });
}

} // namespace lm::core
