#include "lm/pretty.hpp"

#include <sstream>

namespace lm::syn {

namespace {

bool is_op_name(const std::string& n) { return !n.empty() && !std::isalnum(static_cast<unsigned char>(n[0])) && n[0] != '_'; }

std::string name_ref(const std::string& n) { return is_op_name(n) ? "(" + n + ")" : n; }

std::string type_str(const Type& t, int level);

// level 0: full type, 1: btype (no arrows), 2: atype
std::string type_str(const TypePtr& t, int level) { return type_str(*t, level); }

std::string type_str(const Type& t, int level) {
    std::string s;
    switch (t.kind) {
    case Type::Kind::Var:
    case Type::Kind::Con:
        s = t.name;
        for (const auto& a : t.args) s += " " + type_str(a, 2);
        return level >= 2 && !t.args.empty() ? "(" + s + ")" : s;
    case Type::Kind::Fun:
        s = (t.name.empty() ? "" : t.name + ":") + type_str(t.args[0], 1) + " -> " + type_str(t.args[1], 0);
        return level >= 1 ? "(" + s + ")" : s;
    case Type::Kind::Refine: {
        std::string p = t.pred.is_true() ? "" : " | " + t.pred.str();
        return "{v:" + type_str(t.args[0], 0) + p + "}";
    }
    case Type::Kind::List: return "[" + type_str(t.args[0], 0) + "]";
    case Type::Kind::Tuple: return "(" + type_str(t.args[0], 0) + ", " + type_str(t.args[1], 0) + ")";
    case Type::Kind::Value:
        if (t.pred.op() == POp::Int && t.pred.int_val() >= 0) return t.pred.str();
        return "{" + t.pred.str() + "}";
    }
    return s;
}

std::string pat_str(const Pattern& p, bool atomic);
std::string pat_str(const PatPtr& p, bool atomic) { return pat_str(*p, atomic); }

std::string pat_str(const Pattern& p, bool atomic) {
    std::string s;
    switch (p.kind) {
    case Pattern::Kind::Var: return p.name;
    case Pattern::Kind::Wild: return "_";
    case Pattern::Kind::As: return p.name + "@" + pat_str(p.args[0], true);
    case Pattern::Kind::Tuple: return "(" + pat_str(p.args[0], false) + ", " + pat_str(p.args[1], false) + ")";
    case Pattern::Kind::List:
        s = "[";
        for (size_t i = 0; i < p.args.size(); ++i) s += (i ? ", " : "") + pat_str(p.args[i], false);
        return s + "]";
    case Pattern::Kind::Con: break;
    }
    if (p.args.empty()) return name_ref(p.name);
    if (is_op_name(p.name) && p.args.size() == 2) {
        s = pat_str(p.args[0], true) + " " + p.name + " " + pat_str(p.args[1], !(p.args[1]->kind == Pattern::Kind::Con &&
                                                                                  is_op_name(p.args[1]->name) &&
                                                                                  p.args[1]->args.size() == 2));
    } else {
        s = name_ref(p.name);
        for (const auto& a : p.args) s += " " + pat_str(a, true);
        if (is_op_name(p.name)) return "(" + s + ")";
    }
    return atomic ? "(" + s + ")" : s;
}

std::string expr_str(const Expr& e, int level);
std::string expr_str(const ExprPtr& e, int level) { return expr_str(*e, level); }
std::string decl_str(const Decl& d);

std::string rhs_str(const Rhs& r, const std::string& eq) {
    std::string s;
    if (r.guards.empty()) {
        s = " " + eq + " " + expr_str(r.plain, 0);
    } else {
        for (const auto& [g, b] : r.guards) s += " | " + expr_str(g, 0) + " " + eq + " " + expr_str(b, 0);
    }
    if (!r.where.empty()) {
        s += " where { ";
        for (size_t i = 0; i < r.where.size(); ++i) s += (i ? "; " : "") + decl_str(r.where[i]);
        s += " }";
    }
    return s;
}

// level 0: any expression, 1: operand of a binary operator, 2: argument
std::string expr_str(const Expr& e, int level) {
    std::string s;
    auto wrap = [&](int need) { return level >= need ? "(" + s + ")" : s; };
    switch (e.kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Con: return name_ref(e.name);
    case Expr::Kind::Int: return e.ival < 0 ? "(" + std::to_string(e.ival) + ")" : std::to_string(e.ival);
    case Expr::Kind::Bool: return e.bval ? "True" : "False";
    case Expr::Kind::App:
        s = expr_str(e.kids[0], 2);
        for (size_t i = 1; i < e.kids.size(); ++i) s += " " + expr_str(e.kids[i], 2);
        return wrap(2);
    case Expr::Kind::BinOp:
        s = expr_str(e.kids[0], 1) + " " + e.name + " " + expr_str(e.kids[1], 1);
        return wrap(1);
    case Expr::Kind::Neg: {
        const Expr& k = *e.kids[0];
        bool simple = k.kind == Expr::Kind::App || k.kind == Expr::Kind::Var || k.kind == Expr::Kind::Con ||
                      (k.kind == Expr::Kind::Int && k.ival >= 0) || k.kind == Expr::Kind::Bool ||
                      k.kind == Expr::Kind::Tuple || k.kind == Expr::Kind::List || k.kind == Expr::Kind::ListComp;
        return "(-" + (simple ? expr_str(k, 1) : "(" + expr_str(k, 0) + ")") + ")";
    }
    case Expr::Kind::Lam:
        s = "\\";
        for (const auto& p : e.pats) s += pat_str(p, true) + " ";
        s += "-> " + expr_str(e.kids[0], 0);
        return wrap(1);
    case Expr::Kind::If:
        s = "if " + expr_str(e.kids[0], 0) + " then " + expr_str(e.kids[1], 0) + " else " + expr_str(e.kids[2], 0);
        return wrap(1);
    case Expr::Kind::Case:
        s = "case " + expr_str(e.kids[0], 0) + " of { ";
        for (size_t i = 0; i < e.alts.size(); ++i)
            s += (i ? "; " : "") + pat_str(e.alts[i].pat, false) + rhs_str(e.alts[i].rhs, "->");
        s += " }";
        return wrap(1);
    case Expr::Kind::Let:
        s = "let { ";
        for (size_t i = 0; i < e.decls.size(); ++i) s += (i ? "; " : "") + decl_str(e.decls[i]);
        s += " } in " + expr_str(e.kids[0], 0);
        return wrap(1);
    case Expr::Kind::Tuple: return "(" + expr_str(e.kids[0], 0) + ", " + expr_str(e.kids[1], 0) + ")";
    case Expr::Kind::List:
        s = "[";
        for (size_t i = 0; i < e.kids.size(); ++i) s += (i ? ", " : "") + expr_str(e.kids[i], 0);
        return s + "]";
    case Expr::Kind::ListComp:
        s = "[" + expr_str(e.kids[0], 0) + " | ";
        for (size_t i = 0; i < e.quals.size(); ++i) {
            if (i) s += ", ";
            if (e.quals[i].gen_pat) s += pat_str(e.quals[i].gen_pat, false) + " <- ";
            s += expr_str(e.quals[i].expr, 0);
        }
        return s + "]";
    }
    return s;
}

std::string context_str(const std::vector<std::pair<std::string, std::string>>& ctx) {
    if (ctx.empty()) return "";
    std::string s = "(";
    for (size_t i = 0; i < ctx.size(); ++i) s += (i ? ", " : "") + ctx[i].first + " " + ctx[i].second;
    return s + ") => ";
}

std::string decl_str(const Decl& d) {
    switch (d.kind) {
    case Decl::Kind::Sig: return d.name + " :: " + context_str(d.context) + type_str(d.type, 0);
    case Decl::Kind::PatBind: return pat_str(d.pats[0], false) + rhs_str(d.rhs, "=");
    case Decl::Kind::Equation: break;
    }
    std::string s = d.name;
    for (const auto& p : d.pats) s += " " + pat_str(p, true);
    return s + rhs_str(d.rhs, "=");
}

std::string data_str(const DataDef& d) {
    std::string s = "data " + d.name;
    for (const auto& p : d.params) s += " " + p;
    s += " =";
    for (size_t i = 0; i < d.ctors.size(); ++i) {
        const auto& c = d.ctors[i];
        s += (i ? " | " : " ") + name_ref(c.name);
        bool named = !c.fields.empty() && !c.fields[0].first.empty();
        if (named) {
            s += " { ";
            for (size_t j = 0; j < c.fields.size(); ++j)
                s += (j ? ", " : "") + c.fields[j].first + " :: " + type_str(c.fields[j].second, 0);
            s += " }";
        } else {
            for (const auto& f : c.fields) s += " " + type_str(f.second, 2);
        }
    }
    return s;
}

std::string alias_str(const AliasDef& a) {
    std::string s = "type " + a.name;
    for (const auto& p : a.typarams) s += " " + p;
    for (const auto& p : a.valparams) s += " " + p;
    return s + " = " + type_str(a.body, 0);
}

std::string qualif_str(const QualifDef& q) {
    std::string s = "qualif " + q.name + "(";
    for (size_t i = 0; i < q.params.size(); ++i)
        s += (i ? ", " : "") + (i ? q.params[i].first : std::string("v")) + ":" + type_str(q.params[i].second, 1);
    return s + "): " + q.body.str();
}

} // namespace

std::string print(const Type& t) { return type_str(t, 0); }
std::string print(const Pattern& p) { return pat_str(p, false); }
std::string print(const Expr& e) { return expr_str(e, 0); }

std::string print(const SourceFile& sf) {
    std::ostringstream os;
    for (const auto& it : sf.items) {
        std::string body;
        switch (it.kind) {
        case Item::Kind::Alias: body = alias_str(it.alias); break;
        case Item::Kind::Data: body = data_str(it.data); break;
        case Item::Kind::Measure: body = "measure " + it.measure; break;
        case Item::Kind::Qualif: body = qualif_str(it.qualif); break;
        case Item::Kind::Sig:
        case Item::Kind::Decl: body = decl_str(it.decl); break;
        }
        if (it.annotation) os << "{-@ " << body << " @-}\n";
        else os << body << "\n";
    }
    return os.str();
}

} // namespace lm::syn
