#pragma once

// Rational functions num/den over a polynomial ring. No gcd reduction is
// attempted (multivariate gcd is out of scope); equality and zero tests use
// cross-multiplication, which is exact. Constant denominators are folded into
// the numerator so simple values print cleanly.

#include <string>
#include <utility>
#include <vector>

#include "isochron/errors.hpp"
#include "isochron/poly.hpp"

namespace isochron {

template <class C>
struct RatFn {
    Polynomial<C> num, den;

    RatFn() {}
    explicit RatFn(Polynomial<C> n)
        : num(std::move(n)), den(Polynomial<C>::one(num.ring())) {}
    RatFn(Polynomial<C> n, Polynomial<C> d) : num(std::move(n)), den(std::move(d)) {
        if (den.is_zero()) throw DivisionByZeroError();
        reduce();
    }

    static RatFn constant(const RingPtr& ring, const C& c) {
        return RatFn(Polynomial<C>::constant(ring, c));
    }
    static RatFn zero(const RingPtr& ring) {
        return RatFn(Polynomial<C>::zero(ring));
    }

    const RingPtr& ring() const { return num.ring(); }
    bool is_zero() const { return num.is_zero(); }

    bool is_polynomial() const { return den == Polynomial<C>::one(den.ring()); }

    RatFn operator-() const { return RatFn(-num, den); }
    RatFn operator+(const RatFn& o) const {
        return RatFn(num * o.den + o.num * den, den * o.den);
    }
    RatFn operator-(const RatFn& o) const {
        return RatFn(num * o.den - o.num * den, den * o.den);
    }
    RatFn operator*(const RatFn& o) const { return RatFn(num * o.num, den * o.den); }
    RatFn operator/(const RatFn& o) const {
        if (o.num.is_zero()) throw DivisionByZeroError();
        return RatFn(num * o.den, den * o.num);
    }

    bool operator==(const RatFn& o) const { return num * o.den == o.num * den; }
    bool operator!=(const RatFn& o) const { return !(*this == o); }

    std::string str() const {
        if (is_polynomial()) return num.str();
        return "(" + num.str() + ")/(" + den.str() + ")";
    }

  private:
    void reduce() {
        if (num.is_zero()) {
            den = Polynomial<C>::one(den.ring());
            return;
        }
        if (den.is_constant()) {
            C inv = Coeff<C>::one(*den.ring()) / den.constant_value();
            num = num.mul_scalar(inv);
            den = Polynomial<C>::one(den.ring());
        }
    }
};

// Evaluate a polynomial at rational-function values for its variables.
template <class C>
RatFn<C> evaluate_rational(const Polynomial<C>& p, const std::vector<RatFn<C>>& values) {
    if (values.size() != p.ring()->vars.size())
        throw Error("rational evaluation arity mismatch");
    const RingPtr& target = values.empty() ? p.ring() : values[0].ring();
    RatFn<C> acc = RatFn<C>::zero(target);
    for (auto& t : p.terms()) {
        RatFn<C> prod = RatFn<C>::constant(target, t.c);
        for (std::size_t i = 0; i < t.m.e.size(); ++i)
            for (std::uint32_t k = 0; k < t.m.e[i]; ++k) prod = prod * values[i];
        acc = acc + prod;
    }
    return acc;
}

}  // namespace isochron
