#pragma once

// Exact coefficient domains: arbitrary-precision rationals (GMP-backed),
// Gaussian rationals, prime fields, the quadratic extension F_p[i], and a
// double-precision complex approximation for radical-bearing checks.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include <gmpxx.h>

#include "errors.hpp"

namespace isochron {

class BigRational {
  public:
    BigRational() : q_(0) {}
    BigRational(long n) : q_(n) {}
    BigRational(long n, unsigned long d) : q_(n, d) {
        if (d == 0) throw DivisionByZeroError();
        q_.canonicalize();
    }
    explicit BigRational(const mpq_class& q) : q_(q) { q_.canonicalize(); }
    explicit BigRational(const mpz_class& n) : q_(n) {}
    BigRational(const mpz_class& n, const mpz_class& d) : q_(n, d) {
        if (d == 0) throw DivisionByZeroError();
        q_.canonicalize();
    }

    static BigRational from_string(const std::string& s) {
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw Error("bad rational literal: " + s);
        q.canonicalize();
        return BigRational(q);
    }

    const mpz_class& num() const { return q_.get_num(); }
    const mpz_class& den() const { return q_.get_den(); }

    bool is_zero() const { return q_ == 0; }
    bool is_one() const { return q_ == 1; }
    bool is_integer() const { return q_.get_den() == 1; }
    int sign() const { return sgn(q_); }

    BigRational operator-() const { return BigRational(mpq_class(-q_)); }
    BigRational operator+(const BigRational& o) const { return BigRational(mpq_class(q_ + o.q_)); }
    BigRational operator-(const BigRational& o) const { return BigRational(mpq_class(q_ - o.q_)); }
    BigRational operator*(const BigRational& o) const { return BigRational(mpq_class(q_ * o.q_)); }
    BigRational operator/(const BigRational& o) const {
        if (o.is_zero()) throw DivisionByZeroError();
        return BigRational(mpq_class(q_ / o.q_));
    }
    BigRational& operator+=(const BigRational& o) { q_ += o.q_; return *this; }
    BigRational& operator-=(const BigRational& o) { q_ -= o.q_; return *this; }
    BigRational& operator*=(const BigRational& o) { q_ *= o.q_; return *this; }

    BigRational inv() const {
        if (is_zero()) throw DivisionByZeroError();
        return BigRational(mpq_class(1 / q_));
    }
    BigRational abs() const { return BigRational(mpq_class(::abs(q_))); }

    BigRational pow(long e) const {
        if (e < 0) return inv().pow(-e);
        mpz_class n, d;
        mpz_pow_ui(n.get_mpz_t(), q_.get_num().get_mpz_t(), static_cast<unsigned long>(e));
        mpz_pow_ui(d.get_mpz_t(), q_.get_den().get_mpz_t(), static_cast<unsigned long>(e));
        return BigRational(n, d);
    }

    bool operator==(const BigRational& o) const { return q_ == o.q_; }
    bool operator!=(const BigRational& o) const { return q_ != o.q_; }
    bool operator<(const BigRational& o) const { return q_ < o.q_; }
    bool operator<=(const BigRational& o) const { return q_ <= o.q_; }
    bool operator>(const BigRational& o) const { return q_ > o.q_; }
    bool operator>=(const BigRational& o) const { return q_ >= o.q_; }

    double to_double() const { return q_.get_d(); }

    // Canonical rendering: "n" or "n/d" with d > 0 and gcd(|n|, d) = 1.
    std::string str() const { return q_.get_str(); }

    const mpq_class& raw() const { return q_; }

  private:
    mpq_class q_;
};

// Exact square root when one exists (numerator and denominator both perfect
// squares and the value is nonnegative).
inline std::optional<BigRational> exact_sqrt(const BigRational& a) {
    if (a.sign() < 0) return std::nullopt;
    if (a.is_zero()) return BigRational(0);
    mpz_class n, d;
    if (!mpz_perfect_square_p(a.num().get_mpz_t())) return std::nullopt;
    if (!mpz_perfect_square_p(a.den().get_mpz_t())) return std::nullopt;
    mpz_sqrt(n.get_mpz_t(), a.num().get_mpz_t());
    mpz_sqrt(d.get_mpz_t(), a.den().get_mpz_t());
    return BigRational(n, d);
}

class GaussianRational {
  public:
    GaussianRational() {}
    GaussianRational(long n) : re_(n) {}
    GaussianRational(const BigRational& re) : re_(re) {}
    GaussianRational(const BigRational& re, const BigRational& im) : re_(re), im_(im) {}

    static GaussianRational i() { return GaussianRational(BigRational(0), BigRational(1)); }

    const BigRational& re() const { return re_; }
    const BigRational& im() const { return im_; }

    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
    bool is_one() const { return re_.is_one() && im_.is_zero(); }
    bool is_real() const { return im_.is_zero(); }

    GaussianRational conj() const { return GaussianRational(re_, -im_); }
    BigRational norm() const { return re_ * re_ + im_ * im_; }

    GaussianRational operator-() const { return GaussianRational(-re_, -im_); }
    GaussianRational operator+(const GaussianRational& o) const {
        return GaussianRational(re_ + o.re_, im_ + o.im_);
    }
    GaussianRational operator-(const GaussianRational& o) const {
        return GaussianRational(re_ - o.re_, im_ - o.im_);
    }
    GaussianRational operator*(const GaussianRational& o) const {
        return GaussianRational(re_ * o.re_ - im_ * o.im_, re_ * o.im_ + im_ * o.re_);
    }
    GaussianRational inv() const {
        if (is_zero()) throw DivisionByZeroError();
        BigRational n = norm();
        return GaussianRational(re_ / n, -im_ / n);
    }
    GaussianRational operator/(const GaussianRational& o) const { return *this * o.inv(); }
    GaussianRational& operator+=(const GaussianRational& o) {
        re_ += o.re_; im_ += o.im_; return *this;
    }
    GaussianRational& operator-=(const GaussianRational& o) {
        re_ -= o.re_; im_ -= o.im_; return *this;
    }

    GaussianRational pow(long e) const {
        if (e < 0) return inv().pow(-e);
        GaussianRational r(1), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

    bool operator==(const GaussianRational& o) const { return re_ == o.re_ && im_ == o.im_; }
    bool operator!=(const GaussianRational& o) const { return !(*this == o); }

    std::complex<double> to_complex() const { return {re_.to_double(), im_.to_double()}; }

    // Canonical rendering "a+b*I"; pure parts collapse to "a" or "b*I".
    std::string str() const {
        if (im_.is_zero()) return re_.str();
        std::string ims;
        if (im_.is_one())
            ims = "I";
        else if ((-im_).is_one())
            ims = "-I";
        else
            ims = im_.str() + "*I";
        if (re_.is_zero()) return ims;
        if (im_.sign() > 0) return re_.str() + "+" + ims;
        return re_.str() + ims;  // ims already carries the minus sign
    }

  private:
    BigRational re_, im_;
};

// sqrt over Q(i) when exact: solves (x+iy)^2 = a+bi with rational x, y.
// Branch: principal (re > 0, or re = 0 and im >= 0).
inline std::optional<GaussianRational> exact_sqrt(const GaussianRational& a) {
    if (a.is_zero()) return GaussianRational(0);
    if (a.im().is_zero()) {
        if (a.re().sign() > 0) {
            auto r = exact_sqrt(a.re());
            if (!r) return std::nullopt;
            return GaussianRational(*r);
        }
        auto r = exact_sqrt(-a.re());
        if (!r) return std::nullopt;
        return GaussianRational(BigRational(0), *r);
    }
    auto n = exact_sqrt(a.norm());
    if (!n) return std::nullopt;
    BigRational half(1, 2);
    auto x2 = (a.re() + *n) * half;
    auto x = exact_sqrt(x2);
    if (!x || x->is_zero()) return std::nullopt;
    BigRational y = a.im() / (BigRational(2) * *x);
    GaussianRational root(*x, y);
    if (x->sign() < 0 || (x->is_zero() && y.sign() < 0)) root = -root;
    return root;
}

class PrimeFieldElement {
  public:
    PrimeFieldElement() : v_(0), p_(0) {}
    PrimeFieldElement(std::uint64_t v, std::uint64_t p) : v_(v % p), p_(p) {}

    static PrimeFieldElement from_signed(std::int64_t v, std::uint64_t p) {
        std::int64_t r = v % static_cast<std::int64_t>(p);
        if (r < 0) r += static_cast<std::int64_t>(p);
        return PrimeFieldElement(static_cast<std::uint64_t>(r), p);
    }

    std::uint64_t value() const { return v_; }
    std::uint64_t modulus() const { return p_; }
    bool is_zero() const { return v_ == 0; }
    bool is_one() const { return v_ == 1; }

    PrimeFieldElement operator-() const { return PrimeFieldElement(v_ ? p_ - v_ : 0, p_); }
    PrimeFieldElement operator+(const PrimeFieldElement& o) const {
        check(o);
        std::uint64_t s = v_ + o.v_;
        if (s >= p_) s -= p_;
        return PrimeFieldElement(s, p_);
    }
    PrimeFieldElement operator-(const PrimeFieldElement& o) const {
        check(o);
        return PrimeFieldElement(v_ >= o.v_ ? v_ - o.v_ : v_ + p_ - o.v_, p_);
    }
    PrimeFieldElement operator*(const PrimeFieldElement& o) const {
        check(o);
        return PrimeFieldElement(static_cast<std::uint64_t>(
                                     static_cast<unsigned __int128>(v_) * o.v_ % p_),
                                 p_);
    }
    PrimeFieldElement inv() const {
        if (v_ == 0) throw DivisionByZeroError();
        // Extended Euclid on (p, v).
        std::int64_t t0 = 0, t1 = 1;
        std::int64_t r0 = static_cast<std::int64_t>(p_), r1 = static_cast<std::int64_t>(v_);
        while (r1 != 0) {
            std::int64_t q = r0 / r1;
            std::int64_t r2 = r0 - q * r1, t2 = t0 - q * t1;
            r0 = r1; r1 = r2; t0 = t1; t1 = t2;
        }
        if (t0 < 0) t0 += static_cast<std::int64_t>(p_);
        return PrimeFieldElement(static_cast<std::uint64_t>(t0), p_);
    }
    PrimeFieldElement operator/(const PrimeFieldElement& o) const { return *this * o.inv(); }

    PrimeFieldElement pow(std::uint64_t e) const {
        PrimeFieldElement r(1, p_), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

    bool operator==(const PrimeFieldElement& o) const { return v_ == o.v_ && p_ == o.p_; }
    bool operator!=(const PrimeFieldElement& o) const { return !(*this == o); }

    std::string str() const { return std::to_string(v_) + " mod " + std::to_string(p_); }

  private:
    void check(const PrimeFieldElement& o) const {
        if (p_ != o.p_) throw RingMismatchError("prime field moduli differ");
    }
    std::uint64_t v_, p_;
};

// F_p[i] = F_p[x]/(x^2+1), a field exactly when p = 3 (mod 4).
class GaussianPrimeElement {
  public:
    GaussianPrimeElement() {}
    GaussianPrimeElement(PrimeFieldElement re, PrimeFieldElement im) : re_(re), im_(im) {}
    GaussianPrimeElement(std::uint64_t re, std::uint64_t im, std::uint64_t p)
        : re_(re, p), im_(im, p) {}

    const PrimeFieldElement& re() const { return re_; }
    const PrimeFieldElement& im() const { return im_; }
    std::uint64_t modulus() const { return re_.modulus(); }
    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }
    bool is_one() const { return re_.is_one() && im_.is_zero(); }

    GaussianPrimeElement conj() const { return {re_, -im_}; }
    PrimeFieldElement norm() const { return re_ * re_ + im_ * im_; }

    GaussianPrimeElement operator-() const { return {-re_, -im_}; }
    GaussianPrimeElement operator+(const GaussianPrimeElement& o) const {
        return {re_ + o.re_, im_ + o.im_};
    }
    GaussianPrimeElement operator-(const GaussianPrimeElement& o) const {
        return {re_ - o.re_, im_ - o.im_};
    }
    GaussianPrimeElement operator*(const GaussianPrimeElement& o) const {
        return {re_ * o.re_ - im_ * o.im_, re_ * o.im_ + im_ * o.re_};
    }
    GaussianPrimeElement inv() const {
        PrimeFieldElement n = norm();
        if (n.is_zero()) throw DivisionByZeroError();
        PrimeFieldElement ni = n.inv();
        return {re_ * ni, (-im_) * ni};
    }
    GaussianPrimeElement operator/(const GaussianPrimeElement& o) const {
        return *this * o.inv();
    }

    bool operator==(const GaussianPrimeElement& o) const {
        return re_ == o.re_ && im_ == o.im_;
    }
    bool operator!=(const GaussianPrimeElement& o) const { return !(*this == o); }

    std::string str() const {
        if (im_.is_zero()) return std::to_string(re_.value());
        std::string imv = std::to_string(im_.value()) + "*I";
        if (re_.is_zero()) return imv;
        return std::to_string(re_.value()) + "+" + imv;
    }

  private:
    PrimeFieldElement re_, im_;
};

using ComplexApprox = std::complex<double>;

inline std::string complex_str(const ComplexApprox& c) {
    std::ostringstream os;
    os.precision(17);
    os << c.real();
    if (c.imag() != 0.0) {
        os << (c.imag() > 0 ? "+" : "-");
        os << (c.imag() > 0 ? c.imag() : -c.imag()) << "*I";
    }
    return os.str();
}

// Wang criterion with the symmetric bound: recover n/d from its residue mod p
// when |n|, d <= sqrt(p/2). Returns nothing when no such fraction exists.
inline std::optional<BigRational> rational_reconstruct(std::uint64_t residue, std::uint64_t p) {
    std::int64_t bound = static_cast<std::int64_t>(std::sqrt(static_cast<double>(p) / 2.0));
    while (static_cast<double>(bound + 1) * static_cast<double>(bound + 1) <=
           static_cast<double>(p) / 2.0)
        ++bound;
    while (bound > 0 && static_cast<double>(bound) * static_cast<double>(bound) >
                            static_cast<double>(p) / 2.0)
        --bound;

    std::int64_t r0 = static_cast<std::int64_t>(p), r1 = static_cast<std::int64_t>(residue % p);
    std::int64_t t0 = 0, t1 = 1;
    while (r1 > bound) {
        std::int64_t q = r0 / r1;
        std::int64_t r2 = r0 - q * r1, t2 = t0 - q * t1;
        r0 = r1; r1 = r2; t0 = t1; t1 = t2;
    }
    std::int64_t den = t1 < 0 ? -t1 : t1;
    std::int64_t num = t1 < 0 ? -r1 : r1;
    if (den == 0 || den > bound) return std::nullopt;
    if (std::gcd(r1 < 0 ? -r1 : r1, den) != 1) return std::nullopt;
    return BigRational(num, static_cast<unsigned long>(den));
}

inline std::optional<BigRational> rational_reconstruct(const PrimeFieldElement& e) {
    return rational_reconstruct(e.value(), e.modulus());
}

// Reduction Q -> F_p; the modulus must not divide the denominator.
inline PrimeFieldElement to_prime_field(const BigRational& q, std::uint64_t p) {
    mpz_class pz(static_cast<unsigned long>(p));
    mpz_class dm = q.den() % pz;
    if (dm == 0) throw BadPrimeError("p divides a denominator");
    mpz_class nm = q.num() % pz;
    std::uint64_t n = mpz_class(nm < 0 ? nm + pz : nm).get_ui();
    std::uint64_t d = dm.get_ui();
    return PrimeFieldElement(n, p) / PrimeFieldElement(d, p);
}

inline GaussianPrimeElement to_prime_field(const GaussianRational& q, std::uint64_t p) {
    return GaussianPrimeElement(to_prime_field(q.re(), p), to_prime_field(q.im(), p));
}

}  // namespace isochron
