#include "lm/interp.hpp"

#include <functional>
#include <memory>
#include <sstream>

namespace lm::interp {

Data Data::num(long long v) {
    Data d;
    d.i = v;
    return d;
}

Data Data::boolean(bool v) {
    Data d;
    d.kind = Kind::Bool;
    d.b = v;
    return d;
}

Data Data::ctor(std::string c, std::vector<Data> args) {
    Data d;
    d.kind = Kind::Con;
    d.con = std::move(c);
    d.args = std::move(args);
    return d;
}

bool Data::operator==(const Data& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case Kind::Int: return i == o.i;
    case Kind::Bool: return b == o.b;
    case Kind::Con: return con == o.con && args == o.args;
    }
    return false;
}

std::string Data::str() const {
    switch (kind) {
    case Kind::Int: return std::to_string(i);
    case Kind::Bool: return b ? "True" : "False";
    case Kind::Con: break;
    }
    if (args.empty()) return con;
    std::string s = "(" + con;
    for (const auto& a : args) s += " " + a.str();
    return s + ")";
}

Data list(const std::vector<long long>& xs) {
    Data d = Data::ctor("[]");
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) d = Data::ctor(":", {Data::num(*it), d});
    return d;
}

std::vector<long long> ints(const Data& l) {
    std::vector<long long> out;
    const Data* d = &l;
    while (d->kind == Data::Kind::Con && d->con == ":") {
        out.push_back(d->args.at(0).i);
        d = &d->args.at(1);
    }
    return out;
}

namespace {

struct Value;
struct Thunk;
struct EnvNode;
using ValuePtr = std::shared_ptr<const Value>;
using ThunkPtr = std::shared_ptr<Thunk>;
using EnvPtr = std::shared_ptr<const EnvNode>;

struct Value {
    enum class Kind { Int, Bool, Con, Closure, Partial };
    Kind kind = Kind::Int;
    long long i = 0;
    bool b = false;
    std::string name;              // constructor or primitive
    std::vector<ThunkPtr> args;    // constructor fields or collected arguments
    size_t arity = 0;              // Partial
    bool is_prim = false;          // Partial: primitive rather than constructor
    Ident param;                   // Closure
    core::ExprPtr body;
    EnvPtr env;
};

struct Thunk {
    core::ExprPtr expr;
    EnvPtr env;
    ValuePtr value;
    bool forcing = false;
};

struct EnvNode {
    int id;
    ThunkPtr val;
    EnvPtr next;
};

ThunkPtr ready(ValuePtr v) {
    auto t = std::make_shared<Thunk>();
    t->value = std::move(v);
    return t;
}

ValuePtr int_value(long long v) {
    auto r = std::make_shared<Value>();
    r->i = v;
    return r;
}

ValuePtr bool_value(bool v) {
    auto r = std::make_shared<Value>();
    r->kind = Value::Kind::Bool;
    r->b = v;
    return r;
}

size_t prim_arity(const std::string& p) { return p == "not" ? 1 : 2; }

} // namespace

struct Interpreter::Impl {
    const core::Program& prog;
    long long budget;
    long long fuel;
    std::map<std::string, ThunkPtr> globals;
    EnvPtr genv;

    Impl(const core::Program& p, long long f) : prog(p), budget(f), fuel(f) {
        for (const auto& b : prog.binds) {
            auto t = std::make_shared<Thunk>();
            t->expr = b.body;
            genv = std::make_shared<EnvNode>(EnvNode{b.name.id, t, genv});
            globals[b.name.name] = t;
        }
        for (auto& [n, t] : globals) t->env = genv;
    }

    ~Impl() {
        // Break the cycles between global thunks and their environment.
        for (auto& [n, t] : globals) {
            t->env.reset();
            t->value.reset();
        }
    }

    void tick() {
        if (--fuel < 0) throw EvalError("evaluation ran out of fuel");
    }

    ThunkPtr lookup(const EnvPtr& env, const Ident& x) {
        for (const EnvNode* n = env.get(); n; n = n->next.get())
            if (n->id == x.id) return n->val;
        throw EvalError("unbound variable '" + x.name + "'");
    }

    ThunkPtr delay(const core::ExprPtr& e, const EnvPtr& env) {
        using K = core::Expr::Kind;
        if (e->kind == K::Var && e->var.resolved()) return lookup(env, e->var);
        if (e->kind == K::Int) return ready(int_value(e->ival));
        auto t = std::make_shared<Thunk>();
        t->expr = e;
        t->env = env;
        return t;
    }

    ValuePtr force(const ThunkPtr& t) {
        if (t->value) return t->value;
        if (t->forcing) throw EvalError("infinite loop: value depends on itself");
        t->forcing = true;
        ValuePtr v = eval(t->expr, t->env);
        t->forcing = false;
        t->value = v;
        t->expr.reset();
        t->env.reset();
        return v;
    }

    ValuePtr partial(const std::string& name, size_t arity, bool prim) {
        auto r = std::make_shared<Value>();
        r->kind = Value::Kind::Partial;
        r->name = name;
        r->arity = arity;
        r->is_prim = prim;
        return r;
    }

    ValuePtr saturate(const std::string& name, bool prim, std::vector<ThunkPtr> args) {
        if (!prim) {
            auto r = std::make_shared<Value>();
            r->kind = Value::Kind::Con;
            r->name = name;
            r->args = std::move(args);
            return r;
        }
        auto num = [&](size_t i) {
            ValuePtr v = force(args[i]);
            if (v->kind != Value::Kind::Int) throw EvalError("'" + name + "' applied to a non-integer");
            return v->i;
        };
        auto truth = [&](size_t i) {
            ValuePtr v = force(args[i]);
            if (v->kind != Value::Kind::Bool) throw EvalError("'" + name + "' applied to a non-boolean");
            return v->b;
        };
        if (name == "+") return int_value(num(0) + num(1));
        if (name == "-") return int_value(num(0) - num(1));
        if (name == "*") return int_value(num(0) * num(1));
        if (name == "max") return int_value(std::max(num(0), num(1)));
        if (name == "min") return int_value(std::min(num(0), num(1)));
        if (name == "<") return bool_value(num(0) < num(1));
        if (name == "<=") return bool_value(num(0) <= num(1));
        if (name == ">") return bool_value(num(0) > num(1));
        if (name == ">=") return bool_value(num(0) >= num(1));
        if (name == "&&") return bool_value(truth(0) && truth(1));
        if (name == "||") return bool_value(truth(0) || truth(1));
        if (name == "not") return bool_value(!truth(0));
        if (name == "==" || name == "/=") {
            bool eq = equal(force(args[0]), force(args[1]));
            return bool_value(name == "==" ? eq : !eq);
        }
        throw EvalError("unknown primitive '" + name + "'");
    }

    bool equal(const ValuePtr& a, const ValuePtr& b) {
        if (a->kind != b->kind) throw EvalError("comparison of values of different kinds");
        switch (a->kind) {
        case Value::Kind::Int: return a->i == b->i;
        case Value::Kind::Bool: return a->b == b->b;
        case Value::Kind::Con:
            if (a->name != b->name) return false;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (!equal(force(a->args[i]), force(b->args[i]))) return false;
            return true;
        default: throw EvalError("comparison of functions");
        }
    }

    ValuePtr apply(ValuePtr f, const ThunkPtr& arg) {
        tick();
        if (f->kind == Value::Kind::Closure) {
            EnvPtr env = std::make_shared<EnvNode>(EnvNode{f->param.id, arg, f->env});
            return eval(f->body, env);
        }
        if (f->kind != Value::Kind::Partial) throw EvalError("application of a non-function");
        std::vector<ThunkPtr> args = f->args;
        args.push_back(arg);
        if (args.size() == f->arity) return saturate(f->name, f->is_prim, std::move(args));
        auto r = std::make_shared<Value>(*f);
        r->args = std::move(args);
        return r;
    }

    ValuePtr eval(const core::ExprPtr& e, const EnvPtr& env) {
        using K = core::Expr::Kind;
        tick();
        switch (e->kind) {
        case K::Int: return int_value(e->ival);
        case K::Bool: return bool_value(e->bval);
        case K::Var:
            if (!e->var.resolved()) return partial(e->var.name, prim_arity(e->var.name), true);
            return force(lookup(env, e->var));
        case K::Con: {
            auto ci = prog.ctor(e->con);
            if (!ci) throw EvalError("unknown constructor '" + e->con + "'");
            size_t n = ci->first->ctors[ci->second].fields.size();
            if (n == 0) return saturate(e->con, false, {});
            return partial(e->con, n, false);
        }
        case K::App: {
            ValuePtr f = eval(e->kids[0], env);
            for (size_t i = 1; i < e->kids.size(); ++i) f = apply(f, delay(e->kids[i], env));
            return f;
        }
        case K::Lam: {
            auto r = std::make_shared<Value>();
            r->kind = Value::Kind::Closure;
            r->param = e->var;
            r->body = e->kids[0];
            r->env = env;
            return r;
        }
        case K::Let: {
            EnvPtr inner = std::make_shared<EnvNode>(EnvNode{e->var.id, delay(e->kids[0], env), env});
            return eval(e->kids[1], inner);
        }
        case K::LetRec: {
            std::vector<ThunkPtr> ts;
            EnvPtr inner = env;
            for (const auto& b : e->binds) {
                auto t = std::make_shared<Thunk>();
                t->expr = b.body;
                ts.push_back(t);
                inner = std::make_shared<EnvNode>(EnvNode{b.name.id, t, inner});
            }
            // The thunks hold their own environment: a cycle, cleared once forced.
            for (auto& t : ts) t->env = inner;
            ValuePtr r = eval(e->kids[0], inner);
            for (auto& t : ts)
                if (!t->value) t->env.reset(), t->expr.reset();
            return r;
        }
        case K::If: {
            ValuePtr c = eval(e->kids[0], env);
            if (c->kind != Value::Kind::Bool) throw EvalError("if on a non-boolean");
            return eval(e->kids[c->b ? 1 : 2], env);
        }
        case K::Case: {
            ValuePtr s = eval(e->kids[0], env);
            if (s->kind != Value::Kind::Con) throw EvalError("case on a non-constructor value");
            for (const auto& a : e->alts) {
                if (!a.con.empty() && a.con != s->name) continue;
                EnvPtr inner = env;
                if (!a.con.empty())
                    for (size_t i = 0; i < a.fields.size(); ++i)
                        inner = std::make_shared<EnvNode>(EnvNode{a.fields[i].id, s->args[i], inner});
                return eval(a.body, inner);
            }
            throw EvalError("no alternative for constructor '" + s->name + "'");
        }
        case K::PatError: throw PatternFailure(e->message, e->loc);
        }
        throw EvalError("unknown expression");
    }

    ThunkPtr inject(const Data& d) {
        switch (d.kind) {
        case Data::Kind::Int: return ready(int_value(d.i));
        case Data::Kind::Bool: return ready(bool_value(d.b));
        case Data::Kind::Con: break;
        }
        std::vector<ThunkPtr> args;
        for (const auto& a : d.args) args.push_back(inject(a));
        return ready(saturate(d.con, false, std::move(args)));
    }

    Data project(const ValuePtr& v) {
        switch (v->kind) {
        case Value::Kind::Int: return Data::num(v->i);
        case Value::Kind::Bool: return Data::boolean(v->b);
        case Value::Kind::Con: {
            std::vector<Data> args;
            for (const auto& a : v->args) args.push_back(project(force(a)));
            return Data::ctor(v->name, std::move(args));
        }
        default: throw EvalError("result is a function");
        }
    }
};

Interpreter::Interpreter(const core::Program& prog, long long fuel) : impl_(new Impl(prog, fuel)) {}
Interpreter::~Interpreter() { delete impl_; }

Data Interpreter::call(const std::string& fn, const std::vector<Data>& args) {
    auto it = impl_->globals.find(fn);
    if (it == impl_->globals.end()) throw EvalError("no top-level binding '" + fn + "'");
    impl_->fuel = impl_->budget;
    ValuePtr f = impl_->force(it->second);
    for (const auto& a : args) f = impl_->apply(f, impl_->inject(a));
    return impl_->project(f);
}

} // namespace lm::interp
