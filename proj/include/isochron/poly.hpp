#pragma once

// Sparse multivariate polynomials over the arith domains: rings with named
// variables and a monomial order, exact arithmetic, calculus, substitution,
// parsing and canonical printing.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"

namespace isochron {

enum class DomainKind { Q, Qi, Fp, Fpi, C };

inline std::string domain_name(DomainKind k, std::uint64_t p) {
    switch (k) {
        case DomainKind::Q: return "Q";
        case DomainKind::Qi: return "Qi";
        case DomainKind::Fp: return "Fp(" + std::to_string(p) + ")";
        case DomainKind::Fpi: return "Fpi(" + std::to_string(p) + ")";
        case DomainKind::C: return "C";
    }
    return "?";
}

struct MonomialOrder {
    enum class Kind { lex, degrevlex, block };
    Kind kind = Kind::degrevlex;
    std::size_t split = 0;  // block: variables [0, split) are eliminated first

    static MonomialOrder lex() { return {Kind::lex, 0}; }
    static MonomialOrder degrevlex() { return {Kind::degrevlex, 0}; }
    static MonomialOrder block(std::size_t k) { return {Kind::block, k}; }

    bool operator==(const MonomialOrder& o) const {
        return kind == o.kind && (kind != Kind::block || split == o.split);
    }
    std::string str() const {
        switch (kind) {
            case Kind::lex: return "lex";
            case Kind::degrevlex: return "degrevlex";
            case Kind::block: return "block(" + std::to_string(split) + ")";
        }
        return "?";
    }
};

struct Ring {
    std::vector<std::string> vars;
    MonomialOrder order;
    DomainKind domain = DomainKind::Q;
    std::uint64_t modulus = 0;

    int index_of(std::string_view name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == name) return static_cast<int>(i);
        return -1;
    }
};

using RingPtr = std::shared_ptr<const Ring>;

inline RingPtr make_ring(std::vector<std::string> vars, MonomialOrder order,
                         DomainKind domain, std::uint64_t modulus = 0) {
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            if (vars[i] == vars[j]) throw Error("duplicate variable name: " + vars[i]);
    if (order.kind == MonomialOrder::Kind::block && order.split > vars.size())
        throw Error("block split exceeds variable count");
    if (domain == DomainKind::Fp || domain == DomainKind::Fpi) {
        if (modulus < 2) throw BadPrimeError("modulus must be a prime >= 2");
        if (domain == DomainKind::Fpi && modulus % 4 != 3)
            throw BadPrimeError("F_p[i] is a field only for p = 3 mod 4");
    }
    auto r = std::make_shared<Ring>();
    r->vars = std::move(vars);
    r->order = order;
    r->domain = domain;
    r->modulus = modulus;
    return r;
}

inline bool same_ring(const RingPtr& a, const RingPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->vars == b->vars && a->order == b->order && a->domain == b->domain &&
           a->modulus == b->modulus;
}

// ---------------------------------------------------------------------------
// Monomials

struct Monomial {
    std::vector<std::uint32_t> e;

    Monomial() {}
    explicit Monomial(std::size_t nvars) : e(nvars, 0) {}

    std::uint64_t degree() const {
        std::uint64_t d = 0;
        for (auto x : e) d += x;
        return d;
    }
    std::uint64_t degree_in(const std::vector<std::size_t>& subset) const {
        std::uint64_t d = 0;
        for (auto i : subset) d += e[i];
        return d;
    }
    bool is_one() const {
        for (auto x : e)
            if (x) return false;
        return true;
    }
    bool operator==(const Monomial& o) const { return e == o.e; }
};

inline bool divides(const Monomial& a, const Monomial& b) {
    for (std::size_t i = 0; i < a.e.size(); ++i)
        if (a.e[i] > b.e[i]) return false;
    return true;
}

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial m(a.e.size());
    for (std::size_t i = 0; i < a.e.size(); ++i) {
        std::uint64_t s = static_cast<std::uint64_t>(a.e[i]) + b.e[i];
        if (s > 0xffffffffull) throw ExponentOverflowError();
        m.e[i] = static_cast<std::uint32_t>(s);
    }
    return m;
}

// pre: divides(b, a)
inline Monomial mono_div(const Monomial& a, const Monomial& b) {
    Monomial m(a.e.size());
    for (std::size_t i = 0; i < a.e.size(); ++i) m.e[i] = a.e[i] - b.e[i];
    return m;
}

inline Monomial mono_lcm(const Monomial& a, const Monomial& b) {
    Monomial m(a.e.size());
    for (std::size_t i = 0; i < a.e.size(); ++i) m.e[i] = std::max(a.e[i], b.e[i]);
    return m;
}

inline bool mono_coprime(const Monomial& a, const Monomial& b) {
    for (std::size_t i = 0; i < a.e.size(); ++i)
        if (a.e[i] && b.e[i]) return false;
    return true;
}

namespace detail {

inline int cmp_lex_range(const Monomial& a, const Monomial& b, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
        if (a.e[i] != b.e[i]) return a.e[i] > b.e[i] ? 1 : -1;
    }
    return 0;
}

inline int cmp_degrevlex_range(const Monomial& a, const Monomial& b, std::size_t lo,
                               std::size_t hi) {
    std::uint64_t da = 0, db = 0;
    for (std::size_t i = lo; i < hi; ++i) { da += a.e[i]; db += b.e[i]; }
    if (da != db) return da > db ? 1 : -1;
    for (std::size_t i = hi; i-- > lo;) {
        if (a.e[i] != b.e[i]) return a.e[i] < b.e[i] ? 1 : -1;
    }
    return 0;
}

}  // namespace detail

// Returns +1 if a > b under the order, -1 if a < b, 0 if equal.
inline int mono_cmp(const Monomial& a, const Monomial& b, const MonomialOrder& ord) {
    switch (ord.kind) {
        case MonomialOrder::Kind::lex:
            return detail::cmp_lex_range(a, b, 0, a.e.size());
        case MonomialOrder::Kind::degrevlex:
            return detail::cmp_degrevlex_range(a, b, 0, a.e.size());
        case MonomialOrder::Kind::block: {
            int c = detail::cmp_degrevlex_range(a, b, 0, ord.split);
            if (c) return c;
            return detail::cmp_degrevlex_range(a, b, ord.split, a.e.size());
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Coefficient traits: ring-context construction and term rendering.

struct CoeffRender {
    bool negative = false;   // true when the term should print after a minus
    std::string abs_text;    // magnitude text, "" when it is a bare unit
};

template <class C>
struct Coeff;

template <>
struct Coeff<BigRational> {
    static constexpr DomainKind kind = DomainKind::Q;
    static BigRational zero(const Ring&) { return BigRational(0); }
    static BigRational one(const Ring&) { return BigRational(1); }
    static BigRational from_rational(const BigRational& q, const Ring&) { return q; }
    static std::optional<BigRational> imaginary(const Ring&) { return std::nullopt; }
    static bool is_zero(const BigRational& c) { return c.is_zero(); }
    static CoeffRender render(const BigRational& c) {
        CoeffRender r;
        r.negative = c.sign() < 0;
        BigRational a = c.abs();
        if (!a.is_one()) r.abs_text = a.str();
        return r;
    }
};

template <>
struct Coeff<GaussianRational> {
    static constexpr DomainKind kind = DomainKind::Qi;
    static GaussianRational zero(const Ring&) { return GaussianRational(0); }
    static GaussianRational one(const Ring&) { return GaussianRational(1); }
    static GaussianRational from_rational(const BigRational& q, const Ring&) {
        return GaussianRational(q);
    }
    static std::optional<GaussianRational> imaginary(const Ring&) {
        return GaussianRational::i();
    }
    static bool is_zero(const GaussianRational& c) { return c.is_zero(); }
    static CoeffRender render(const GaussianRational& c) {
        CoeffRender r;
        if (c.im().is_zero()) {
            r.negative = c.re().sign() < 0;
            BigRational a = c.re().abs();
            if (!a.is_one()) r.abs_text = a.str();
        } else if (c.re().is_zero()) {
            r.negative = c.im().sign() < 0;
            BigRational a = c.im().abs();
            r.abs_text = a.is_one() ? "I" : a.str() + "*I";
        } else {
            r.abs_text = "(" + c.str() + ")";
        }
        return r;
    }
};

template <>
struct Coeff<PrimeFieldElement> {
    static constexpr DomainKind kind = DomainKind::Fp;
    static PrimeFieldElement zero(const Ring& r) { return PrimeFieldElement(0, r.modulus); }
    static PrimeFieldElement one(const Ring& r) { return PrimeFieldElement(1, r.modulus); }
    static PrimeFieldElement from_rational(const BigRational& q, const Ring& r) {
        return to_prime_field(q, r.modulus);
    }
    static std::optional<PrimeFieldElement> imaginary(const Ring&) { return std::nullopt; }
    static bool is_zero(const PrimeFieldElement& c) { return c.is_zero(); }
    static CoeffRender render(const PrimeFieldElement& c) {
        CoeffRender r;
        if (!c.is_one()) r.abs_text = std::to_string(c.value());
        return r;
    }
};

template <>
struct Coeff<GaussianPrimeElement> {
    static constexpr DomainKind kind = DomainKind::Fpi;
    static GaussianPrimeElement zero(const Ring& r) {
        return GaussianPrimeElement(0, 0, r.modulus);
    }
    static GaussianPrimeElement one(const Ring& r) {
        return GaussianPrimeElement(1, 0, r.modulus);
    }
    static GaussianPrimeElement from_rational(const BigRational& q, const Ring& r) {
        return GaussianPrimeElement(to_prime_field(q, r.modulus),
                                    PrimeFieldElement(0, r.modulus));
    }
    static std::optional<GaussianPrimeElement> imaginary(const Ring& r) {
        return GaussianPrimeElement(0, 1, r.modulus);
    }
    static bool is_zero(const GaussianPrimeElement& c) { return c.is_zero(); }
    static CoeffRender render(const GaussianPrimeElement& c) {
        CoeffRender r;
        if (c.im().is_zero()) {
            if (!c.re().is_one()) r.abs_text = std::to_string(c.re().value());
        } else if (c.re().is_zero()) {
            r.abs_text = c.im().is_one() ? "I" : std::to_string(c.im().value()) + "*I";
        } else {
            r.abs_text = "(" + c.str() + ")";
        }
        return r;
    }
};

template <>
struct Coeff<ComplexApprox> {
    static constexpr DomainKind kind = DomainKind::C;
    static ComplexApprox zero(const Ring&) { return {0.0, 0.0}; }
    static ComplexApprox one(const Ring&) { return {1.0, 0.0}; }
    static ComplexApprox from_rational(const BigRational& q, const Ring&) {
        return {q.to_double(), 0.0};
    }
    static std::optional<ComplexApprox> imaginary(const Ring&) {
        return ComplexApprox{0.0, 1.0};
    }
    static bool is_zero(const ComplexApprox& c) { return c.real() == 0.0 && c.imag() == 0.0; }
    static CoeffRender render(const ComplexApprox& c) {
        CoeffRender r;
        if (c.imag() == 0.0) {
            r.negative = c.real() < 0;
            double a = std::abs(c.real());
            if (a != 1.0) r.abs_text = complex_str({a, 0.0});
        } else {
            r.abs_text = "(" + complex_str(c) + ")";
        }
        return r;
    }
};

// ---------------------------------------------------------------------------
// Polynomial

template <class C>
class Polynomial {
  public:
    using coeff_type = C;

    struct Term {
        Monomial m;
        C c;
    };

    Polynomial() {}
    explicit Polynomial(RingPtr ring) : ring_(std::move(ring)) {}

    static Polynomial zero(RingPtr ring) { return Polynomial(std::move(ring)); }

    static Polynomial constant(RingPtr ring, C value) {
        Polynomial p(ring);
        if (!Coeff<C>::is_zero(value))
            p.terms_.push_back({Monomial(ring->vars.size()), std::move(value)});
        return p;
    }

    static Polynomial one(RingPtr ring) {
        C v = Coeff<C>::one(*ring);
        return constant(std::move(ring), std::move(v));
    }

    static Polynomial variable(RingPtr ring, std::size_t idx) {
        Polynomial p(ring);
        Monomial m(ring->vars.size());
        m.e.at(idx) = 1;
        p.terms_.push_back({std::move(m), Coeff<C>::one(*ring)});
        return p;
    }

    static Polynomial variable(RingPtr ring, std::string_view name) {
        int i = ring->index_of(name);
        if (i < 0) throw Error("no variable named " + std::string(name));
        return variable(std::move(ring), static_cast<std::size_t>(i));
    }

    // Takes unsorted terms, possibly with repeats and zeros.
    static Polynomial from_terms(RingPtr ring, std::vector<Term> ts) {
        Polynomial p(std::move(ring));
        p.terms_ = std::move(ts);
        p.normalize();
        return p;
    }

    // pre: ts strictly descending in the ring order, coefficients nonzero
    static Polynomial from_sorted_terms(RingPtr ring, std::vector<Term> ts) {
        Polynomial p(std::move(ring));
        p.terms_ = std::move(ts);
        return p;
    }

    Polynomial without_leading() const {
        Polynomial r(ring_);
        if (!terms_.empty()) r.terms_.assign(terms_.begin() + 1, terms_.end());
        return r;
    }

    const RingPtr& ring() const { return ring_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_[0].m.is_one());
    }
    // pre: is_constant()
    C constant_value() const {
        return terms_.empty() ? Coeff<C>::zero(*ring_) : terms_[0].c;
    }

    const Term& leading() const {
        if (terms_.empty()) throw Error("leading term of zero polynomial");
        return terms_.front();
    }

    std::uint64_t degree() const {
        std::uint64_t d = 0;
        for (auto& t : terms_) d = std::max(d, t.m.degree());
        return d;
    }
    std::uint64_t degree_in(const std::vector<std::size_t>& subset) const {
        std::uint64_t d = 0;
        for (auto& t : terms_) d = std::max(d, t.m.degree_in(subset));
        return d;
    }

    Polynomial operator-() const {
        Polynomial r(ring_);
        r.terms_ = terms_;
        for (auto& t : r.terms_) t.c = -t.c;
        return r;
    }

    Polynomial operator+(const Polynomial& o) const {
        check(o);
        Polynomial r(ring_);
        r.terms_.reserve(terms_.size() + o.terms_.size());
        std::size_t i = 0, j = 0;
        const auto& ord = ring_->order;
        while (i < terms_.size() && j < o.terms_.size()) {
            int c = mono_cmp(terms_[i].m, o.terms_[j].m, ord);
            if (c > 0) {
                r.terms_.push_back(terms_[i++]);
            } else if (c < 0) {
                r.terms_.push_back(o.terms_[j++]);
            } else {
                C s = terms_[i].c + o.terms_[j].c;
                if (!Coeff<C>::is_zero(s)) r.terms_.push_back({terms_[i].m, std::move(s)});
                ++i; ++j;
            }
        }
        for (; i < terms_.size(); ++i) r.terms_.push_back(terms_[i]);
        for (; j < o.terms_.size(); ++j) r.terms_.push_back(o.terms_[j]);
        return r;
    }

    Polynomial operator-(const Polynomial& o) const { return *this + (-o); }

    Polynomial mul_term(const Monomial& m, const C& c) const {
        Polynomial r(ring_);
        if (Coeff<C>::is_zero(c)) return r;
        r.terms_.reserve(terms_.size());
        for (auto& t : terms_) {
            C p = t.c * c;
            if (!Coeff<C>::is_zero(p)) r.terms_.push_back({mono_mul(t.m, m), std::move(p)});
        }
        return r;
    }

    Polynomial mul_scalar(const C& c) const {
        Monomial m(ring_->vars.size());
        return mul_term(m, c);
    }

    Polynomial operator*(const Polynomial& o) const {
        check(o);
        Polynomial r(ring_);
        if (terms_.empty() || o.terms_.empty()) return r;
        std::vector<Term> acc;
        acc.reserve(terms_.size() * o.terms_.size());
        for (auto& a : terms_)
            for (auto& b : o.terms_) {
                C p = a.c * b.c;
                if (!Coeff<C>::is_zero(p)) acc.push_back({mono_mul(a.m, b.m), std::move(p)});
            }
        return from_terms(ring_, std::move(acc));
    }

    Polynomial pow(std::uint32_t e) const {
        Polynomial r = one(ring_);
        Polynomial b = *this;
        while (e) {
            if (e & 1) r = r * b;
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }

    Polynomial derivative(std::size_t var) const {
        Polynomial r(ring_);
        for (auto& t : terms_) {
            if (t.m.e[var] == 0) continue;
            C c = t.c * Coeff<C>::from_rational(BigRational(static_cast<long>(t.m.e[var])),
                                                *ring_);
            if (Coeff<C>::is_zero(c)) continue;
            Term nt{t.m, std::move(c)};
            nt.m.e[var] -= 1;
            r.terms_.push_back(std::move(nt));
        }
        r.normalize();
        return r;
    }

    Polynomial homogeneous_component(std::uint64_t d) const {
        Polynomial r(ring_);
        for (auto& t : terms_)
            if (t.m.degree() == d) r.terms_.push_back(t);
        return r;
    }

    Polynomial component_in(const std::vector<std::size_t>& subset, std::uint64_t d) const {
        Polynomial r(ring_);
        for (auto& t : terms_)
            if (t.m.degree_in(subset) == d) r.terms_.push_back(t);
        return r;
    }

    // Coefficient of the sub-monomial with the given exponents on `subset`,
    // as a polynomial with those variables' exponents cleared.
    Polynomial coefficient_of(const std::vector<std::size_t>& subset,
                              const std::vector<std::uint32_t>& exps) const {
        Polynomial r(ring_);
        for (auto& t : terms_) {
            bool match = true;
            for (std::size_t k = 0; k < subset.size(); ++k)
                if (t.m.e[subset[k]] != exps[k]) { match = false; break; }
            if (!match) continue;
            Term nt = t;
            for (auto i : subset) nt.m.e[i] = 0;
            r.terms_.push_back(std::move(nt));
        }
        r.normalize();
        return r;
    }

    // Substitution inside one ring: images[i] replaces variable i when set.
    Polynomial substitute(const std::vector<std::optional<Polynomial>>& images) const {
        Polynomial acc(ring_);
        for (auto& t : terms_) {
            Polynomial prod = constant(ring_, t.c);
            for (std::size_t i = 0; i < t.m.e.size(); ++i) {
                if (!t.m.e[i]) continue;
                if (images.size() > i && images[i]) {
                    prod = prod * images[i]->pow(t.m.e[i]);
                } else {
                    Monomial m(ring_->vars.size());
                    m.e[i] = t.m.e[i];
                    prod = prod.mul_term(m, Coeff<C>::one(*ring_));
                }
            }
            acc = acc + prod;
        }
        return acc;
    }

    C evaluate(const std::vector<C>& values) const {
        if (values.size() != ring_->vars.size()) throw Error("evaluation arity mismatch");
        C acc = Coeff<C>::zero(*ring_);
        for (auto& t : terms_) {
            C prod = t.c;
            for (std::size_t i = 0; i < t.m.e.size(); ++i)
                for (std::uint32_t k = 0; k < t.m.e[i]; ++k) prod = prod * values[i];
            acc = acc + prod;
        }
        return acc;
    }

    bool operator==(const Polynomial& o) const {
        if (!same_ring(ring_, o.ring_)) return false;
        if (terms_.size() != o.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (!(terms_[i].m == o.terms_[i].m)) return false;
            if (!(terms_[i].c == o.terms_[i].c)) return false;
        }
        return true;
    }
    bool operator!=(const Polynomial& o) const { return !(*this == o); }

    // Canonical text: descending degrevlex, reduced coefficients, explicit * and ^.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::vector<const Term*> ordered;
        ordered.reserve(terms_.size());
        for (auto& t : terms_) ordered.push_back(&t);
        MonomialOrder drl = MonomialOrder::degrevlex();
        std::stable_sort(ordered.begin(), ordered.end(),
                         [&](const Term* a, const Term* b) {
                             return mono_cmp(a->m, b->m, drl) > 0;
                         });
        std::string out;
        bool first = true;
        for (auto* t : ordered) {
            CoeffRender cr = Coeff<C>::render(t->c);
            std::string mon = mono_str(t->m);
            std::string body;
            if (cr.abs_text.empty())
                body = mon.empty() ? "1" : mon;
            else
                body = mon.empty() ? cr.abs_text : cr.abs_text + "*" + mon;
            if (first) {
                if (cr.negative) out += "-";
                out += body;
                first = false;
            } else {
                out += cr.negative ? " - " : " + ";
                out += body;
            }
        }
        return out;
    }

    void normalize() {
        const auto& ord = ring_->order;
        std::sort(terms_.begin(), terms_.end(), [&](const Term& a, const Term& b) {
            return mono_cmp(a.m, b.m, ord) > 0;
        });
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (auto& t : terms_) {
            if (!out.empty() && out.back().m == t.m) {
                out.back().c = out.back().c + t.c;
            } else {
                out.push_back(t);
            }
        }
        terms_.clear();
        for (auto& t : out)
            if (!Coeff<C>::is_zero(t.c)) terms_.push_back(std::move(t));
    }

  private:
    void check(const Polynomial& o) const {
        if (!same_ring(ring_, o.ring_)) throw RingMismatchError("polynomial operands");
    }

    std::string mono_str(const Monomial& m) const {
        std::string s;
        for (std::size_t i = 0; i < m.e.size(); ++i) {
            if (!m.e[i]) continue;
            if (!s.empty()) s += "*";
            s += ring_->vars[i];
            if (m.e[i] > 1) s += "^" + std::to_string(m.e[i]);
        }
        return s;
    }

    RingPtr ring_;
    std::vector<Term> terms_;
};

// Transport a polynomial into another ring: each source variable i maps to
// var_images[i] (a polynomial over the target ring), coefficients through fn.
template <class C1, class C2, class F>
Polynomial<C2> map_poly(const Polynomial<C1>& p, const RingPtr& target, F&& coeff_fn,
                        const std::vector<Polynomial<C2>>& var_images) {
    if (var_images.size() != p.ring()->vars.size())
        throw Error("map_poly: image count mismatch");
    // Power cache per variable.
    std::vector<std::vector<Polynomial<C2>>> cache(var_images.size());
    auto power = [&](std::size_t i, std::uint32_t e) -> const Polynomial<C2>& {
        auto& col = cache[i];
        if (col.empty()) col.push_back(Polynomial<C2>::one(target));
        while (col.size() <= e) col.push_back(col.back() * var_images[i]);
        return col[e];
    };
    Polynomial<C2> acc(target);
    for (auto& t : p.terms()) {
        Polynomial<C2> prod = Polynomial<C2>::constant(target, coeff_fn(t.c));
        for (std::size_t i = 0; i < t.m.e.size(); ++i)
            if (t.m.e[i]) prod = prod * power(i, t.m.e[i]);
        acc = acc + prod;
    }
    return acc;
}

// Identity-on-names transport: variables map to the target variable with the
// same name, which must exist whenever the exponent is nonzero.
template <class C1, class C2, class F>
Polynomial<C2> transport(const Polynomial<C1>& p, const RingPtr& target, F&& coeff_fn) {
    std::vector<Polynomial<C2>> images;
    const auto& src = p.ring()->vars;
    images.reserve(src.size());
    std::vector<std::size_t> missing_idx;
    for (std::size_t i = 0; i < src.size(); ++i) {
        int j = target->index_of(src[i]);
        if (j < 0) {
            missing_idx.push_back(i);
            images.push_back(Polynomial<C2>::zero(target));
        } else {
            images.push_back(Polynomial<C2>::variable(target, static_cast<std::size_t>(j)));
        }
    }
    for (auto i : missing_idx)
        for (auto& t : p.terms())
            if (t.m.e[i]) throw RingMismatchError("variable " + src[i] + " absent in target ring");
    return map_poly(p, target, std::forward<F>(coeff_fn), images);
}

template <class C>
Polynomial<C> transport_same(const Polynomial<C>& p, const RingPtr& target) {
    return transport<C, C>(p, target, [](const C& c) { return c; });
}

// ---------------------------------------------------------------------------
// Parser for the polynomial grammar:
//   expr := ["+"|"-"] term (("+"|"-") term)*
//   term := factor ("*" factor)*
//   factor := base ("^" nat)?
//   base := rational | ident | "(" expr ")"
//   rational := int ("/" nat)?
// "I" denotes the imaginary unit in rings whose domain provides one.

namespace detail {

struct Token {
    enum class Kind { End, Ident, Int, Plus, Minus, Star, Slash, Caret, LParen, RParen };
    Kind kind;
    std::string text;
    std::size_t line, col;
};

class Lexer {
  public:
    explicit Lexer(std::string_view s) : s_(s) {}

    Token next() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
        std::size_t line = line_, col = col_;
        if (pos_ >= s_.size()) return {Token::Kind::End, "", line, col};
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string t;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                t += s_[pos_];
                advance();
            }
            return {Token::Kind::Int, t, line, col};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string t;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                t += s_[pos_];
                advance();
            }
            return {Token::Kind::Ident, t, line, col};
        }
        advance();
        switch (c) {
            case '+': return {Token::Kind::Plus, "+", line, col};
            case '-': return {Token::Kind::Minus, "-", line, col};
            case '*': return {Token::Kind::Star, "*", line, col};
            case '/': return {Token::Kind::Slash, "/", line, col};
            case '^': return {Token::Kind::Caret, "^", line, col};
            case '(': return {Token::Kind::LParen, "(", line, col};
            case ')': return {Token::Kind::RParen, ")", line, col};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }

  private:
    void advance() {
        if (s_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++pos_;
    }
    std::string_view s_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

template <class C>
class PolyParser {
  public:
    PolyParser(std::string_view text, RingPtr ring)
        : lex_(text), ring_(std::move(ring)) { bump(); }

    Polynomial<C> parse() {
        Polynomial<C> p = expr();
        expect_end();
        return p;
    }

  private:
    void bump() { tok_ = lex_.next(); }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, tok_.line, tok_.col); }
    void expect_end() {
        if (tok_.kind != Token::Kind::End) fail("unexpected token '" + tok_.text + "'");
    }

    Polynomial<C> expr() {
        bool neg = false;
        if (tok_.kind == Token::Kind::Plus) bump();
        else if (tok_.kind == Token::Kind::Minus) { neg = true; bump(); }
        Polynomial<C> acc = term();
        if (neg) acc = -acc;
        while (tok_.kind == Token::Kind::Plus || tok_.kind == Token::Kind::Minus) {
            bool minus = tok_.kind == Token::Kind::Minus;
            bump();
            Polynomial<C> t = term();
            acc = minus ? acc - t : acc + t;
        }
        return acc;
    }

    Polynomial<C> term() {
        Polynomial<C> acc = factor();
        while (tok_.kind == Token::Kind::Star) {
            bump();
            acc = acc * factor();
        }
        return acc;
    }

    Polynomial<C> factor() {
        Polynomial<C> b = base();
        if (tok_.kind == Token::Kind::Caret) {
            bump();
            if (tok_.kind != Token::Kind::Int) fail("expected integer exponent");
            unsigned long e = std::stoul(tok_.text);
            if (e > 1000000) fail("exponent too large");
            bump();
            return b.pow(static_cast<std::uint32_t>(e));
        }
        return b;
    }

    Polynomial<C> base() {
        if (tok_.kind == Token::Kind::Int) {
            BigRational num = BigRational::from_string(tok_.text);
            bump();
            if (tok_.kind == Token::Kind::Slash) {
                bump();
                if (tok_.kind != Token::Kind::Int) fail("expected denominator");
                BigRational den = BigRational::from_string(tok_.text);
                if (den.is_zero()) fail("zero denominator");
                num = num / den;
                bump();
            }
            return Polynomial<C>::constant(ring_, Coeff<C>::from_rational(num, *ring_));
        }
        if (tok_.kind == Token::Kind::Ident) {
            std::string name = tok_.text;
            int idx = ring_->index_of(name);
            if (idx >= 0) {
                bump();
                return Polynomial<C>::variable(ring_, static_cast<std::size_t>(idx));
            }
            if (name == "I") {
                auto iu = Coeff<C>::imaginary(*ring_);
                if (iu) {
                    bump();
                    return Polynomial<C>::constant(ring_, *iu);
                }
            }
            fail("unknown variable '" + name + "'");
        }
        if (tok_.kind == Token::Kind::LParen) {
            bump();
            Polynomial<C> p = expr();
            if (tok_.kind != Token::Kind::RParen) fail("expected ')'");
            bump();
            return p;
        }
        fail("unexpected token '" + tok_.text + "'");
    }

    Lexer lex_;
    Token tok_;
    RingPtr ring_;
};

}  // namespace detail

template <class C>
Polynomial<C> parse_polynomial(std::string_view text, RingPtr ring) {
    detail::PolyParser<C> p(text, std::move(ring));
    return p.parse();
}

using PolyQ = Polynomial<BigRational>;
using PolyQi = Polynomial<GaussianRational>;
using PolyFp = Polynomial<PrimeFieldElement>;
using PolyFpi = Polynomial<GaussianPrimeElement>;
using PolyC = Polynomial<ComplexApprox>;

}  // namespace isochron
