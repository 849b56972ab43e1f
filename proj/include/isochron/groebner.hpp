#pragma once

// Buchberger engine and ideal operations: reduced bases, normal forms,
// membership and radical membership, elimination, intersection, quotient,
// and modular image / rational lift.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "poly.hpp"

namespace isochron {

struct GBOptions {
    std::uint64_t max_pairs = 2'000'000;   // S-pairs processed before giving up
    std::uint64_t max_terms = 2'000'000;   // size cap for any intermediate polynomial
};

template <class C>
struct Ideal {
    using coeff_type = C;

    RingPtr ring;
    std::vector<Polynomial<C>> gens;
};

template <class C>
Ideal<C> make_ideal(RingPtr ring, std::vector<Polynomial<C>> gens) {
    for (auto& g : gens)
        if (!same_ring(g.ring(), ring)) throw RingMismatchError("ideal generators");
    std::vector<Polynomial<C>> kept;
    for (auto& g : gens)
        if (!g.is_zero()) kept.push_back(std::move(g));
    return Ideal<C>{std::move(ring), std::move(kept)};
}

template <class C>
struct GroebnerBasis {
    RingPtr ring;
    std::vector<Polynomial<C>> polys;
    bool reduced = false;
};

// ---------------------------------------------------------------------------
// Coefficient-size control. Over Q and Q(i) basis elements are rescaled to
// an integer-primitive representative with a sign-normalized leading
// coefficient; over the finite and floating domains rescaling means monic.

namespace gbdetail {

inline BigRational primitive_scale(const std::vector<BigRational>& cs) {
    mpz_class den_lcm = 1, num_gcd = 0;
    for (auto& c : cs) {
        mpz_class l;
        mpz_lcm(l.get_mpz_t(), den_lcm.get_mpz_t(), c.den().get_mpz_t());
        den_lcm = l;
    }
    for (auto& c : cs) {
        mpz_class scaled = c.num() * (den_lcm / c.den());
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_mpz_t());
        num_gcd = g;
    }
    if (num_gcd == 0) return BigRational(1);
    return BigRational(den_lcm, num_gcd);
}

template <class C>
struct Scale {
    static void primitive(Polynomial<C>& p) {
        if (p.is_zero()) return;
        C lc = p.leading().c;
        p = p.mul_scalar(Coeff<C>::one(*p.ring()) / lc);
    }
};

template <>
struct Scale<BigRational> {
    static void primitive(Polynomial<BigRational>& p) {
        if (p.is_zero()) return;
        std::vector<BigRational> cs;
        cs.reserve(p.term_count());
        for (auto& t : p.terms()) cs.push_back(t.c);
        BigRational s = primitive_scale(cs);
        if (p.leading().c.sign() < 0) s = -s;
        if (!s.is_one()) p = p.mul_scalar(s);
    }
};

template <>
struct Scale<GaussianRational> {
    static void primitive(Polynomial<GaussianRational>& p) {
        if (p.is_zero()) return;
        std::vector<BigRational> cs;
        cs.reserve(2 * p.term_count());
        for (auto& t : p.terms()) {
            if (!t.c.re().is_zero()) cs.push_back(t.c.re());
            if (!t.c.im().is_zero()) cs.push_back(t.c.im());
        }
        GaussianRational s(primitive_scale(cs));
        // unit factor so the leading coefficient has re > 0, or re = 0, im > 0
        const GaussianRational& lc = p.leading().c;
        if (lc.re().sign() < 0)
            s = s * GaussianRational(BigRational(-1));
        else if (lc.re().is_zero())
            s = s * GaussianRational(BigRational(0), BigRational(lc.im().sign() > 0 ? -1 : 1));
        if (!s.is_one()) p = p.mul_scalar(s);
    }
};

}  // namespace gbdetail

template <class C>
void scale_primitive(Polynomial<C>& p) {
    gbdetail::Scale<C>::primitive(p);
}

template <class C>
Polynomial<C> make_monic(Polynomial<C> p) {
    if (p.is_zero()) return p;
    C lc = p.leading().c;
    if (!(lc == Coeff<C>::one(*p.ring()))) p = p.mul_scalar(Coeff<C>::one(*p.ring()) / lc);
    return p;
}

// ---------------------------------------------------------------------------
// Division

template <class C>
struct DivisionResult {
    std::vector<Polynomial<C>> quotients;
    Polynomial<C> remainder;
};

template <class C>
DivisionResult<C> divide(const Polynomial<C>& f, const std::vector<Polynomial<C>>& divisors) {
    DivisionResult<C> res;
    res.quotients.assign(divisors.size(), Polynomial<C>::zero(f.ring()));
    std::vector<typename Polynomial<C>::Term> rem;
    Polynomial<C> p = f;
    while (!p.is_zero()) {
        const auto& lt = p.leading();
        bool reduced = false;
        for (std::size_t k = 0; k < divisors.size(); ++k) {
            const auto& g = divisors[k];
            if (g.is_zero() || !divides(g.leading().m, lt.m)) continue;
            Monomial q = mono_div(lt.m, g.leading().m);
            C c = lt.c / g.leading().c;
            res.quotients[k] =
                res.quotients[k] + Polynomial<C>::from_sorted_terms(f.ring(), {{q, c}});
            p = p - g.mul_term(q, c);
            reduced = true;
            break;
        }
        if (!reduced) {
            rem.push_back(lt);
            p = p.without_leading();
        }
    }
    res.remainder = Polynomial<C>::from_sorted_terms(f.ring(), std::move(rem));
    return res;
}

template <class C>
Polynomial<C> normal_form(const Polynomial<C>& f, const std::vector<Polynomial<C>>& basis) {
    std::vector<typename Polynomial<C>::Term> rem;
    Polynomial<C> p = f;
    while (!p.is_zero()) {
        const auto& lt = p.leading();
        bool reduced = false;
        for (auto& g : basis) {
            if (g.is_zero() || !divides(g.leading().m, lt.m)) continue;
            p = p - g.mul_term(mono_div(lt.m, g.leading().m), lt.c / g.leading().c);
            reduced = true;
            break;
        }
        if (!reduced) {
            rem.push_back(lt);
            p = p.without_leading();
        }
    }
    return Polynomial<C>::from_sorted_terms(f.ring(), std::move(rem));
}

template <class C>
Polynomial<C> normal_form(const Polynomial<C>& f, const GroebnerBasis<C>& gb) {
    if (!same_ring(f.ring(), gb.ring)) throw RingMismatchError("normal form");
    return normal_form(f, gb.polys);
}

namespace gbdetail {

// Reduction used inside Buchberger: the value only matters up to a nonzero
// scalar, so both the running polynomial and the parked remainder terms are
// rescaled to primitive form as the loop proceeds.
template <class C>
Polynomial<C> reduce_scaled(Polynomial<C> p, const std::vector<Polynomial<C>>& basis,
                            const GBOptions& opt) {
    std::vector<typename Polynomial<C>::Term> rem;
    while (!p.is_zero()) {
        if (p.term_count() + rem.size() > opt.max_terms)
            throw ResourceLimitError("polynomial terms", p.term_count() + rem.size());
        const auto& lt = p.leading();
        bool reduced = false;
        for (auto& g : basis) {
            if (g.is_zero() || !divides(g.leading().m, lt.m)) continue;
            p = p - g.mul_term(mono_div(lt.m, g.leading().m), lt.c / g.leading().c);
            if (rem.empty() && !p.is_zero()) scale_primitive(p);
            reduced = true;
            break;
        }
        if (!reduced) {
            rem.push_back(lt);
            p = p.without_leading();
        }
    }
    Polynomial<C> r = Polynomial<C>::from_sorted_terms(p.ring(), std::move(rem));
    scale_primitive(r);
    return r;
}

template <class C>
Polynomial<C> spoly(const Polynomial<C>& f, const Polynomial<C>& g) {
    Monomial l = mono_lcm(f.leading().m, g.leading().m);
    const Ring& R = *f.ring();
    C one = Coeff<C>::one(R);
    Polynomial<C> a = f.mul_term(mono_div(l, f.leading().m), one / f.leading().c);
    Polynomial<C> b = g.mul_term(mono_div(l, g.leading().m), one / g.leading().c);
    return a - b;
}

struct Pair {
    std::size_t i, j;  // i < j, indices into the basis
    Monomial l;
    std::uint64_t deg;
};

// Gebauer-Moeller update: install pairs (i, t) for the new element at index
// t, pruning by the product and chain criteria, and filter the old queue.
template <class C>
void update_pairs(std::vector<Polynomial<C>>& G, std::vector<Pair>& B,
                  Polynomial<C> h) {
    std::size_t t = G.size();
    const Monomial& lmh = h.leading().m;

    std::vector<Pair> cand;
    cand.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
        Monomial l = mono_lcm(G[i].leading().m, lmh);
        cand.push_back(Pair{i, t, std::move(l), 0});
        cand.back().deg = cand.back().l.degree();
    }

    std::vector<Pair> kept;
    for (std::size_t a = 0; a < cand.size(); ++a) {
        bool keep = mono_coprime(G[cand[a].i].leading().m, lmh);
        if (!keep) {
            bool dominated = false;
            for (std::size_t b = a + 1; b < cand.size() && !dominated; ++b)
                if (divides(cand[b].l, cand[a].l)) dominated = true;
            for (auto& k : kept)
                if (dominated) break;
                else if (divides(k.l, cand[a].l)) dominated = true;
            keep = !dominated;
        }
        if (keep) kept.push_back(cand[a]);
    }
    std::vector<Pair> fresh;
    for (auto& k : kept)
        if (!mono_coprime(G[k.i].leading().m, lmh)) fresh.push_back(k);

    std::vector<Pair> filtered;
    filtered.reserve(B.size() + fresh.size());
    for (auto& p : B) {
        bool drop = divides(lmh, p.l) &&
                    !(mono_lcm(G[p.i].leading().m, lmh) == p.l) &&
                    !(mono_lcm(G[p.j].leading().m, lmh) == p.l);
        if (!drop) filtered.push_back(p);
    }
    for (auto& p : fresh) filtered.push_back(std::move(p));
    B = std::move(filtered);
    G.push_back(std::move(h));
}

}  // namespace gbdetail

// Reduced Groebner basis: Buchberger with normal pair selection and the
// Gebauer-Moeller criteria, then interreduction. Output is monic, sorted by
// ascending leading monomial, and unique for (ideal, order).
template <class C>
GroebnerBasis<C> buchberger(const Ideal<C>& I, const GBOptions& opt = {}) {
    using gbdetail::Pair;
    const RingPtr& R = I.ring;
    GroebnerBasis<C> out{R, {}, true};

    std::vector<Polynomial<C>> G;
    std::vector<Pair> B;
    for (auto& g : I.gens) {
        if (g.is_zero()) continue;
        Polynomial<C> h = g;
        scale_primitive(h);
        gbdetail::update_pairs(G, B, std::move(h));
    }

    auto pair_after = [&](const Pair& a, const Pair& b) {
        // true when a should be processed after b (sort descending, pop back)
        if (a.deg != b.deg) return a.deg > b.deg;
        int c = mono_cmp(a.l, b.l, R->order);
        if (c) return c > 0;
        if (a.i != b.i) return a.i > b.i;
        return a.j > b.j;
    };
    std::sort(B.begin(), B.end(), pair_after);

    std::uint64_t spent = 0;
    while (!B.empty()) {
        Pair pr = std::move(B.back());
        B.pop_back();
        if (++spent > opt.max_pairs) throw ResourceLimitError("S-pairs", spent);
        Polynomial<C> h =
            gbdetail::reduce_scaled(gbdetail::spoly(G[pr.i], G[pr.j]), G, opt);
        if (h.is_zero()) continue;
        if (h.is_constant()) {
            out.polys = {Polynomial<C>::one(R)};
            return out;
        }
        gbdetail::update_pairs(G, B, std::move(h));
        std::sort(B.begin(), B.end(), pair_after);
    }

    // Minimize: keep only elements whose leading monomial no kept element divides.
    std::sort(G.begin(), G.end(), [&](const Polynomial<C>& a, const Polynomial<C>& b) {
        return mono_cmp(a.leading().m, b.leading().m, R->order) < 0;
    });
    std::vector<Polynomial<C>> minimal;
    for (auto& g : G) {
        bool covered = false;
        for (auto& k : minimal)
            if (divides(k.leading().m, g.leading().m)) { covered = true; break; }
        if (!covered) minimal.push_back(g);
    }
    // Tail-reduce each element against the others, then make monic.
    std::vector<Polynomial<C>> red;
    for (std::size_t i = 0; i < minimal.size(); ++i) {
        std::vector<Polynomial<C>> others;
        for (std::size_t j = 0; j < minimal.size(); ++j)
            if (j != i) others.push_back(minimal[j]);
        Polynomial<C> r = gbdetail::reduce_scaled(minimal[i], others, opt);
        red.push_back(make_monic(std::move(r)));
    }
    std::sort(red.begin(), red.end(), [&](const Polynomial<C>& a, const Polynomial<C>& b) {
        return mono_cmp(a.leading().m, b.leading().m, R->order) < 0;
    });
    out.polys = std::move(red);
    return out;
}

template <class C>
GroebnerBasis<C> buchberger(const Ideal<C>& I, MonomialOrder order, const GBOptions& opt = {}) {
    if (I.ring->order == order) return buchberger(I, opt);
    RingPtr R2 = make_ring(I.ring->vars, order, I.ring->domain, I.ring->modulus);
    Ideal<C> J{R2, {}};
    for (auto& g : I.gens) J.gens.push_back(transport_same(g, R2));
    return buchberger(J, opt);
}

template <class C>
bool ideal_membership(const Polynomial<C>& f, const GroebnerBasis<C>& gb) {
    return normal_form(f, gb).is_zero();
}

template <class C>
bool ideal_membership(const Polynomial<C>& f, const Ideal<C>& I, const GBOptions& opt = {}) {
    return ideal_membership(f, buchberger(I, opt));
}

// ---------------------------------------------------------------------------
// Ring plumbing for elimination tricks

inline std::string fresh_var_name(const Ring& r, const std::string& base) {
    if (r.index_of(base) < 0) return base;
    for (int k = 0;; ++k) {
        std::string name = base + "_" + std::to_string(k);
        if (r.index_of(name) < 0) return name;
    }
}

// f in sqrt(I) iff 1 in <I, 1 - s*f>. f is first reduced modulo a basis of I,
// which keeps the auxiliary ideal small.
template <class C>
bool radical_membership(const Polynomial<C>& f, const Ideal<C>& I, const GBOptions& opt = {}) {
    GroebnerBasis<C> gb = buchberger(I, opt);
    if (!gb.polys.empty() && gb.polys[0].is_constant()) return true;  // unit ideal
    Polynomial<C> fr = normal_form(f, gb);
    if (fr.is_zero()) return true;

    const RingPtr& R = I.ring;
    std::vector<std::string> vars = R->vars;
    vars.push_back(fresh_var_name(*R, "s"));
    RingPtr Rx = make_ring(vars, MonomialOrder::degrevlex(), R->domain, R->modulus);

    Ideal<C> J{Rx, {}};
    for (auto& g : gb.polys) J.gens.push_back(transport_same(g, Rx));
    auto s = Polynomial<C>::variable(Rx, vars.size() - 1);
    J.gens.push_back(Polynomial<C>::one(Rx) - s * transport_same(fr, Rx));

    GroebnerBasis<C> gx = buchberger(J, opt);
    return gx.polys.size() == 1 && gx.polys[0].is_constant();
}

// Generators free of the given variables, extracted through a block order
// with those variables in front. Result lives in the ring of the remaining
// variables (same domain, degrevlex).
template <class C>
Ideal<C> eliminate(const Ideal<C>& I, const std::vector<std::string>& drop,
                   const GBOptions& opt = {}) {
    const RingPtr& R = I.ring;
    std::vector<std::string> front, rest;
    for (auto& v : drop) {
        if (R->index_of(v) < 0) throw Error("eliminate: no variable named " + v);
        front.push_back(v);
    }
    for (auto& v : R->vars)
        if (std::find(drop.begin(), drop.end(), v) == drop.end()) rest.push_back(v);

    std::vector<std::string> ordered = front;
    ordered.insert(ordered.end(), rest.begin(), rest.end());
    RingPtr Rblk = make_ring(ordered, MonomialOrder::block(front.size()), R->domain, R->modulus);

    Ideal<C> J{Rblk, {}};
    for (auto& g : I.gens) J.gens.push_back(transport_same(g, Rblk));
    GroebnerBasis<C> gb = buchberger(J, opt);

    RingPtr Rout = make_ring(rest, MonomialOrder::degrevlex(), R->domain, R->modulus);
    Ideal<C> out{Rout, {}};
    for (auto& g : gb.polys) {
        bool uses_front = false;
        for (std::size_t i = 0; i < front.size() && !uses_front; ++i)
            for (auto& t : g.terms())
                if (t.m.e[i]) { uses_front = true; break; }
        if (!uses_front) out.gens.push_back(transport_same(g, Rout));
    }
    return out;
}

// intersect(I, J) = eliminate(t*I + (1-t)*J, {t}), result back in the input ring.
template <class C>
Ideal<C> intersect(const Ideal<C>& I, const Ideal<C>& J, const GBOptions& opt = {}) {
    if (!same_ring(I.ring, J.ring)) throw RingMismatchError("ideal intersection");
    const RingPtr& R = I.ring;
    std::string tname = fresh_var_name(*R, "t");
    std::vector<std::string> vars;
    vars.push_back(tname);
    vars.insert(vars.end(), R->vars.begin(), R->vars.end());
    RingPtr Rt = make_ring(vars, MonomialOrder::block(1), R->domain, R->modulus);

    auto t = Polynomial<C>::variable(Rt, std::size_t{0});
    Ideal<C> K{Rt, {}};
    for (auto& f : I.gens) K.gens.push_back(t * transport_same(f, Rt));
    for (auto& g : J.gens)
        K.gens.push_back((Polynomial<C>::one(Rt) - t) * transport_same(g, Rt));

    Ideal<C> elim = eliminate(K, {tname}, opt);
    Ideal<C> out{R, {}};
    for (auto& g : elim.gens) out.gens.push_back(transport_same(g, R));
    return out;
}

// I : <f>, computed as intersect(I, <f>) followed by exact division by f.
template <class C>
Ideal<C> quotient(const Ideal<C>& I, const Polynomial<C>& f, const GBOptions& opt = {}) {
    if (!same_ring(I.ring, f.ring())) throw RingMismatchError("ideal quotient");
    if (f.is_zero()) throw Error("quotient by the zero polynomial");
    Ideal<C> cap = intersect(I, Ideal<C>{I.ring, {f}}, opt);
    Ideal<C> out{I.ring, {}};
    for (auto& g : cap.gens) {
        DivisionResult<C> d = divide(g, {f});
        if (!d.remainder.is_zero())
            throw Error("exact division failed in ideal quotient");
        out.gens.push_back(d.quotients[0]);
    }
    return out;
}

template <class C>
Ideal<C> quotient(const Ideal<C>& I, const Ideal<C>& J, const GBOptions& opt = {}) {
    if (J.gens.empty()) throw Error("quotient by the zero ideal");
    Ideal<C> acc = quotient(I, J.gens[0], opt);
    for (std::size_t k = 1; k < J.gens.size(); ++k)
        acc = intersect(acc, quotient(I, J.gens[k], opt), opt);
    return acc;
}

// ---------------------------------------------------------------------------
// Modular image and rational lift

inline Ideal<PrimeFieldElement> modular_image(const Ideal<BigRational>& I, std::uint64_t p) {
    RingPtr Rp = make_ring(I.ring->vars, I.ring->order, DomainKind::Fp, p);
    Ideal<PrimeFieldElement> out{Rp, {}};
    for (auto& g : I.gens)
        out.gens.push_back(transport<BigRational, PrimeFieldElement>(
            g, Rp, [&](const BigRational& c) { return to_prime_field(c, p); }));
    return out;
}

inline Ideal<GaussianPrimeElement> modular_image(const Ideal<GaussianRational>& I,
                                                 std::uint64_t p) {
    RingPtr Rp = make_ring(I.ring->vars, I.ring->order, DomainKind::Fpi, p);
    Ideal<GaussianPrimeElement> out{Rp, {}};
    for (auto& g : I.gens)
        out.gens.push_back(transport<GaussianRational, GaussianPrimeElement>(
            g, Rp, [&](const GaussianRational& c) { return to_prime_field(c, p); }));
    return out;
}

inline Ideal<BigRational> lift_basis(const Ideal<PrimeFieldElement>& I) {
    RingPtr Rq = make_ring(I.ring->vars, I.ring->order, DomainKind::Q);
    Ideal<BigRational> out{Rq, {}};
    std::string bad;
    for (auto& g : I.gens) {
        out.gens.push_back(transport<PrimeFieldElement, BigRational>(
            g, Rq, [&](const PrimeFieldElement& c) {
                auto r = rational_reconstruct(c);
                if (!r) {
                    if (!bad.empty()) bad += ", ";
                    bad += std::to_string(c.value());
                    return BigRational(0);
                }
                return *r;
            }));
    }
    if (!bad.empty()) throw ReconstructionError("residues " + bad);
    return out;
}

inline Ideal<GaussianRational> lift_basis(const Ideal<GaussianPrimeElement>& I) {
    RingPtr Rq = make_ring(I.ring->vars, I.ring->order, DomainKind::Qi);
    Ideal<GaussianRational> out{Rq, {}};
    std::string bad;
    for (auto& g : I.gens) {
        out.gens.push_back(transport<GaussianPrimeElement, GaussianRational>(
            g, Rq, [&](const GaussianPrimeElement& c) {
                auto re = rational_reconstruct(c.re());
                auto im = rational_reconstruct(c.im());
                if (!re || !im) {
                    if (!bad.empty()) bad += ", ";
                    bad += c.str();
                    return GaussianRational(0);
                }
                return GaussianRational(*re, *im);
            }));
    }
    if (!bad.empty()) throw ReconstructionError("residues " + bad);
    return out;
}

}  // namespace isochron
