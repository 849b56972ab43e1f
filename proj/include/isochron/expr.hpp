#pragma once

// Small scalar expression trees for exponents, radical definitions and scale
// constants: rationals, the imaginary unit I, named symbols, + - * /, integer
// powers (negative allowed) and sqrt(...). Unlike the polynomial grammar,
// division is general here. Three evaluators: complex floating point, exact
// Gaussian rational (sqrt must hit an exact square), and rational-function
// (symbols become ring variables; sqrt must collapse to an exact constant).

#include <map>
#include <memory>
#include <string>

#include "isochron/arith.hpp"
#include "isochron/errors.hpp"
#include "isochron/poly.hpp"
#include "isochron/ratfn.hpp"

namespace isochron {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Number, Imaginary, Symbol, Add, Sub, Mul, Div, Neg, Pow, Sqrt };
    Kind kind;
    BigRational number;
    std::string symbol;
    long exponent = 0;
    ExprPtr a, b;

    static ExprPtr make_number(BigRational q) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Number;
        e->number = std::move(q);
        return e;
    }
    static ExprPtr make_imaginary() {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Imaginary;
        return e;
    }
    static ExprPtr make_symbol(std::string name) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Symbol;
        e->symbol = std::move(name);
        return e;
    }
    static ExprPtr make_unary(Kind k, ExprPtr x) {
        auto e = std::make_shared<Expr>();
        e->kind = k;
        e->a = std::move(x);
        return e;
    }
    static ExprPtr make_binary(Kind k, ExprPtr x, ExprPtr y) {
        auto e = std::make_shared<Expr>();
        e->kind = k;
        e->a = std::move(x);
        e->b = std::move(y);
        return e;
    }
    static ExprPtr make_pow(ExprPtr x, long n) {
        auto e = std::make_shared<Expr>();
        e->kind = Kind::Pow;
        e->a = std::move(x);
        e->exponent = n;
        return e;
    }
};

namespace detail {

class ExprParser {
  public:
    explicit ExprParser(std::string_view text) : lex_(text) { bump(); }

    ExprPtr parse() {
        ExprPtr e = expr();
        if (tok_.kind != Token::Kind::End)
            fail("unexpected token '" + tok_.text + "'");
        return e;
    }

  private:
    void bump() { tok_ = lex_.next(); }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, tok_.line, tok_.col); }

    ExprPtr expr() {
        bool neg = false;
        if (tok_.kind == Token::Kind::Plus) bump();
        else if (tok_.kind == Token::Kind::Minus) { neg = true; bump(); }
        ExprPtr acc = term();
        if (neg) acc = Expr::make_unary(Expr::Kind::Neg, acc);
        while (tok_.kind == Token::Kind::Plus || tok_.kind == Token::Kind::Minus) {
            auto k = tok_.kind == Token::Kind::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
            bump();
            acc = Expr::make_binary(k, acc, term());
        }
        return acc;
    }

    ExprPtr term() {
        ExprPtr acc = factor();
        while (tok_.kind == Token::Kind::Star || tok_.kind == Token::Kind::Slash) {
            auto k = tok_.kind == Token::Kind::Star ? Expr::Kind::Mul : Expr::Kind::Div;
            bump();
            acc = Expr::make_binary(k, acc, factor());
        }
        return acc;
    }

    ExprPtr factor() {
        ExprPtr b = base();
        if (tok_.kind == Token::Kind::Caret) {
            bump();
            bool neg = false;
            if (tok_.kind == Token::Kind::Minus) { neg = true; bump(); }
            if (tok_.kind != Token::Kind::Int) fail("expected integer exponent");
            long e = std::stol(tok_.text);
            bump();
            return Expr::make_pow(b, neg ? -e : e);
        }
        return b;
    }

    ExprPtr base() {
        if (tok_.kind == Token::Kind::Int) {
            BigRational q = BigRational::from_string(tok_.text);
            bump();
            return Expr::make_number(std::move(q));
        }
        if (tok_.kind == Token::Kind::Ident) {
            std::string name = tok_.text;
            bump();
            if (name == "I") return Expr::make_imaginary();
            if (name == "sqrt") {
                if (tok_.kind != Token::Kind::LParen) fail("expected '(' after sqrt");
                bump();
                ExprPtr arg = expr();
                if (tok_.kind != Token::Kind::RParen) fail("expected ')'");
                bump();
                return Expr::make_unary(Expr::Kind::Sqrt, arg);
            }
            return Expr::make_symbol(std::move(name));
        }
        if (tok_.kind == Token::Kind::LParen) {
            bump();
            ExprPtr e = expr();
            if (tok_.kind != Token::Kind::RParen) fail("expected ')'");
            bump();
            return e;
        }
        fail("unexpected token '" + tok_.text + "'");
    }

    Lexer lex_;
    Token tok_;
};

}  // namespace detail

inline ExprPtr parse_expr(std::string_view text) {
    detail::ExprParser p(text);
    return p.parse();
}

inline ComplexApprox expr_eval(const ExprPtr& e,
                               const std::map<std::string, ComplexApprox>& env) {
    switch (e->kind) {
        case Expr::Kind::Number: return {e->number.to_double(), 0.0};
        case Expr::Kind::Imaginary: return {0.0, 1.0};
        case Expr::Kind::Symbol: {
            auto it = env.find(e->symbol);
            if (it == env.end()) throw Error("unbound symbol '" + e->symbol + "'");
            return it->second;
        }
        case Expr::Kind::Add: return expr_eval(e->a, env) + expr_eval(e->b, env);
        case Expr::Kind::Sub: return expr_eval(e->a, env) - expr_eval(e->b, env);
        case Expr::Kind::Mul: return expr_eval(e->a, env) * expr_eval(e->b, env);
        case Expr::Kind::Div: {
            ComplexApprox d = expr_eval(e->b, env);
            if (d == ComplexApprox{0.0, 0.0}) throw DivisionByZeroError();
            return expr_eval(e->a, env) / d;
        }
        case Expr::Kind::Neg: return -expr_eval(e->a, env);
        case Expr::Kind::Pow: {
            ComplexApprox b = expr_eval(e->a, env);
            long n = e->exponent;
            if (n < 0) {
                if (b == ComplexApprox{0.0, 0.0}) throw DivisionByZeroError();
                b = 1.0 / b;
                n = -n;
            }
            ComplexApprox r{1.0, 0.0};
            for (long k = 0; k < n; ++k) r *= b;
            return r;
        }
        case Expr::Kind::Sqrt: return std::sqrt(expr_eval(e->a, env));
    }
    throw Error("bad expression node");
}

inline GaussianRational expr_eval_exact(const ExprPtr& e,
                                        const std::map<std::string, GaussianRational>& env) {
    switch (e->kind) {
        case Expr::Kind::Number: return GaussianRational(e->number);
        case Expr::Kind::Imaginary: return GaussianRational::i();
        case Expr::Kind::Symbol: {
            auto it = env.find(e->symbol);
            if (it == env.end()) throw Error("unbound symbol '" + e->symbol + "'");
            return it->second;
        }
        case Expr::Kind::Add: return expr_eval_exact(e->a, env) + expr_eval_exact(e->b, env);
        case Expr::Kind::Sub: return expr_eval_exact(e->a, env) - expr_eval_exact(e->b, env);
        case Expr::Kind::Mul: return expr_eval_exact(e->a, env) * expr_eval_exact(e->b, env);
        case Expr::Kind::Div: return expr_eval_exact(e->a, env) / expr_eval_exact(e->b, env);
        case Expr::Kind::Neg: return -expr_eval_exact(e->a, env);
        case Expr::Kind::Pow: return expr_eval_exact(e->a, env).pow(e->exponent);
        case Expr::Kind::Sqrt: {
            GaussianRational arg = expr_eval_exact(e->a, env);
            auto r = exact_sqrt(arg);
            if (!r) throw NotExactError("sqrt(" + arg.str() + ") is not Gaussian rational");
            return *r;
        }
    }
    throw Error("bad expression node");
}

// Symbols resolve to variables of `ring`; sqrt is allowed only when its
// argument collapses to an exact-square constant.
inline RatFn<GaussianRational> expr_eval_ratfn(const ExprPtr& e, const RingPtr& ring) {
    using R = RatFn<GaussianRational>;
    switch (e->kind) {
        case Expr::Kind::Number:
            return R::constant(ring, GaussianRational(e->number));
        case Expr::Kind::Imaginary: return R::constant(ring, GaussianRational::i());
        case Expr::Kind::Symbol: {
            int idx = ring->index_of(e->symbol);
            if (idx < 0) throw Error("unbound symbol '" + e->symbol + "'");
            return R(PolyQi::variable(ring, static_cast<std::size_t>(idx)));
        }
        case Expr::Kind::Add: return expr_eval_ratfn(e->a, ring) + expr_eval_ratfn(e->b, ring);
        case Expr::Kind::Sub: return expr_eval_ratfn(e->a, ring) - expr_eval_ratfn(e->b, ring);
        case Expr::Kind::Mul: return expr_eval_ratfn(e->a, ring) * expr_eval_ratfn(e->b, ring);
        case Expr::Kind::Div: return expr_eval_ratfn(e->a, ring) / expr_eval_ratfn(e->b, ring);
        case Expr::Kind::Neg: return -expr_eval_ratfn(e->a, ring);
        case Expr::Kind::Pow: {
            R b = expr_eval_ratfn(e->a, ring);
            long n = e->exponent;
            if (n < 0) {
                b = R::constant(ring, GaussianRational(1)) / b;
                n = -n;
            }
            R r = R::constant(ring, GaussianRational(1));
            for (long k = 0; k < n; ++k) r = r * b;
            return r;
        }
        case Expr::Kind::Sqrt: {
            R arg = expr_eval_ratfn(e->a, ring);
            if (!arg.is_polynomial() || !arg.num.is_constant())
                throw NotExactError("sqrt of a non-constant expression");
            auto r = exact_sqrt(arg.num.constant_value());
            if (!r)
                throw NotExactError("sqrt(" + arg.num.constant_value().str() +
                                    ") is not Gaussian rational");
            return R::constant(ring, *r);
        }
    }
    throw Error("bad expression node");
}

// Free symbols of an expression, in first-appearance order.
inline void collect_symbols(const ExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Symbol) {
        for (auto& s : out)
            if (s == e->symbol) return;
        out.push_back(e->symbol);
        return;
    }
    collect_symbols(e->a, out);
    collect_symbols(e->b, out);
}

}  // namespace isochron
