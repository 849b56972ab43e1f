#pragma once

// Truncated power series support layered on Polynomial: a series of order N
// in a designated set of "state" variables keeps exactly the terms whose
// state-degree is <= N. Parameters (variables outside the set) ride along in
// the coefficients untouched.

#include <cstdint>
#include <vector>

#include "isochron/arith.hpp"
#include "isochron/errors.hpp"
#include "isochron/poly.hpp"

namespace isochron {

template <class C>
Polynomial<C> series_truncate(const Polynomial<C>& p, const std::vector<std::size_t>& sv,
                              unsigned N) {
    std::vector<typename Polynomial<C>::Term> kept;
    for (auto& t : p.terms())
        if (t.m.degree_in(sv) <= N) kept.push_back(t);
    return Polynomial<C>::from_sorted_terms(p.ring(), std::move(kept));
}

template <class C>
Polynomial<C> series_mul(const Polynomial<C>& a, const Polynomial<C>& b,
                         const std::vector<std::size_t>& sv, unsigned N) {
    return series_truncate(a * b, sv, N);
}

namespace detail {

template <class C>
C rational_coeff(const RingPtr& ring, long num, long den) {
    return Coeff<C>::from_rational(BigRational(num) / BigRational(den), *ring);
}

}  // namespace detail

// 1/u for u = c + higher state-order with c a nonzero scalar constant.
template <class C>
Polynomial<C> series_inverse(const Polynomial<C>& u, const std::vector<std::size_t>& sv,
                             unsigned N) {
    Polynomial<C> head = u.component_in(sv, 0);
    if (!head.is_constant() || head.is_zero())
        throw NotExactError("series inverse requires a nonzero constant term, got " +
                            head.str());
    C c = head.constant_value();
    C cinv = Coeff<C>::one(*u.ring()) / c;
    // v = u/c - 1 has state-order >= 1, so the geometric series terminates at N.
    Polynomial<C> v = series_truncate(u.mul_scalar(cinv) - Polynomial<C>::one(u.ring()), sv, N);
    Polynomial<C> acc = Polynomial<C>::one(u.ring());
    Polynomial<C> vp = Polynomial<C>::one(u.ring());
    for (unsigned k = 1; k <= N; ++k) {
        vp = series_mul(vp, -v, sv, N);
        if (vp.is_zero()) break;
        acc = acc + vp;
    }
    return acc.mul_scalar(cinv);
}

// log(u) for u = 1 + higher state-order.
template <class C>
Polynomial<C> series_log(const Polynomial<C>& u, const std::vector<std::size_t>& sv,
                         unsigned N) {
    Polynomial<C> head = u.component_in(sv, 0);
    if (!(head == Polynomial<C>::one(u.ring())))
        throw NotExactError("series log requires constant term 1, got " + head.str());
    Polynomial<C> v = series_truncate(u - Polynomial<C>::one(u.ring()), sv, N);
    Polynomial<C> acc = Polynomial<C>::zero(u.ring());
    Polynomial<C> vp = Polynomial<C>::one(u.ring());
    for (unsigned k = 1; k <= N; ++k) {
        vp = series_mul(vp, v, sv, N);
        if (vp.is_zero()) break;
        long sign = (k % 2 == 1) ? 1 : -1;
        acc = acc + vp.mul_scalar(detail::rational_coeff<C>(u.ring(), sign, static_cast<long>(k)));
    }
    return acc;
}

// exp(s) for s with no state-order-0 part.
template <class C>
Polynomial<C> series_exp(const Polynomial<C>& s, const std::vector<std::size_t>& sv,
                         unsigned N) {
    if (!s.component_in(sv, 0).is_zero())
        throw NotExactError("series exp requires zero constant term, got " +
                            s.component_in(sv, 0).str());
    Polynomial<C> st = series_truncate(s, sv, N);
    Polynomial<C> acc = Polynomial<C>::one(s.ring());
    Polynomial<C> term = Polynomial<C>::one(s.ring());
    for (unsigned k = 1; k <= N; ++k) {
        term = series_mul(term, st, sv, N);
        if (term.is_zero()) break;
        term = term.mul_scalar(detail::rational_coeff<C>(s.ring(), 1, static_cast<long>(k)));
        acc = acc + term;
    }
    return acc;
}

// u^alpha = exp(alpha * log u) for u = 1 + higher state-order, alpha scalar.
template <class C>
Polynomial<C> series_pow(const Polynomial<C>& u, const C& alpha,
                         const std::vector<std::size_t>& sv, unsigned N) {
    return series_exp(series_log(u, sv, N).mul_scalar(alpha), sv, N);
}

// p / var when every term of p is divisible by the variable.
template <class C>
Polynomial<C> series_divide_by_var(const Polynomial<C>& p, std::size_t var) {
    std::vector<typename Polynomial<C>::Term> out;
    out.reserve(p.term_count());
    for (auto& t : p.terms()) {
        if (t.m.e[var] == 0)
            throw NotExactError("term " + p.ring()->vars[var] + "-free in division by " +
                                p.ring()->vars[var] + ": " + Polynomial<C>::from_terms(
                                    p.ring(), {t}).str());
        auto nt = t;
        nt.m.e[var] -= 1;
        out.push_back(std::move(nt));
    }
    return Polynomial<C>::from_terms(p.ring(), std::move(out));
}

}  // namespace isochron
