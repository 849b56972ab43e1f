#pragma once

// Linearizability quantities I_k, J_k, focus quantities g_k, and truncated
// linearizing series, computed degree by degree in complexified coordinates
// where the homological operator is diagonal.

#include <utility>
#include <vector>

#include "planar.hpp"

namespace isochron {

struct NormalizingSeries {
    RingPtr ring;  // complexified ring: params..., z, w
    std::size_t iz = 0, iw = 0;
    PolyQi C, D;  // H1 = z + C, H2 = w + D
    unsigned truncation = 0;
};

struct QuantityPair {
    unsigned k = 0;
    PolyQi I, J;  // polynomials in the parameters
};

struct FocusQuantity {
    unsigned k = 0;
    PolyQi g;
};

// Terms with (z, w)-degree above N dropped.
inline PolyQi truncate_state_degree(const PolyQi& p, const std::vector<std::size_t>& sv,
                                    std::uint64_t N) {
    std::vector<PolyQi::Term> kept;
    for (auto& t : p.terms())
        if (t.m.degree_in(sv) <= N) kept.push_back(t);
    return PolyQi::from_terms(p.ring(), std::move(kept));
}

// Real/imaginary split of a Gaussian-coefficient polynomial over a rational ring.
inline std::pair<PolyQ, PolyQ> split_gaussian(const PolyQi& p) {
    RingPtr RQ = make_ring(p.ring()->vars, p.ring()->order, DomainKind::Q);
    auto re = transport<GaussianRational, BigRational>(
        p, RQ, [](const GaussianRational& c) { return c.re(); });
    auto im = transport<GaussianRational, BigRational>(
        p, RQ, [](const GaussianRational& c) { return c.im(); });
    return {re, im};
}

namespace nfdetail {

inline GaussianRational inv_of_int(long v) {
    return GaussianRational(BigRational(1) / BigRational(v));
}

// Slices of f by (z, w)-degree, indices 0..N.
inline std::vector<PolyQi> state_slices(const PolyQi& f, const std::vector<std::size_t>& sv,
                                        unsigned N) {
    std::vector<PolyQi> out(N + 1, PolyQi::zero(f.ring()));
    for (auto& t : f.terms()) {
        std::uint64_t d = t.m.degree_in(sv);
        if (d <= N) out[d] = out[d] + PolyQi::from_sorted_terms(f.ring(), {t});
    }
    return out;
}

}  // namespace nfdetail

struct LinearizationRun {
    NormalizingSeries series;
    std::vector<PolyQi> I, J;  // index k-1; coefficient polynomials, zero state degree
};

// Degree-by-degree solve of H1(z,w) = z + C, H2 = w + D with dH1/dtau = H1
// and dH2/dtau = -H2 along dz/dtau = z + X, dw/dtau = -w - Y.  Non-resonant
// coefficients are forced; resonant ones are set to zero and the obstruction
// coefficients are collected as I_k (monomial z^{k+1} w^k) and J_k (z^k w^{k+1}).
// In strict mode a nonzero obstruction raises ObstructionError.
inline LinearizationRun linearize(const ComplexSystem& c, unsigned N, bool strict = false) {
    const RingPtr& R = c.ring;
    auto sv = c.state_vars();

    unsigned degX = static_cast<unsigned>(std::max(c.X.degree_in(sv), c.Y.degree_in(sv)));
    auto Xs = nfdetail::state_slices(c.X, sv, std::max(N, degX));
    auto Ys = nfdetail::state_slices(c.Y, sv, std::max(N, degX));

    LinearizationRun run;
    run.series.ring = R;
    run.series.iz = c.iz;
    run.series.iw = c.iw;
    run.series.truncation = N;
    run.series.C = PolyQi::zero(R);
    run.series.D = PolyQi::zero(R);
    unsigned K = N >= 3 ? (N - 1) / 2 : 0;
    run.I.assign(K, PolyQi::zero(R));
    run.J.assign(K, PolyQi::zero(R));

    // derivative slices of C and D, by (z, w)-degree
    std::vector<PolyQi> Cz(N, PolyQi::zero(R)), Cw(N, PolyQi::zero(R));
    std::vector<PolyQi> Dz(N, PolyQi::zero(R)), Dw(N, PolyQi::zero(R));

    for (unsigned m = 2; m <= N; ++m) {
        PolyQi E1 = m < Xs.size() ? Xs[m] : PolyQi::zero(R);
        PolyQi E2 = m < Ys.size() ? Ys[m] : PolyQi::zero(R);
        for (unsigned e = 2; e <= m; ++e) {
            unsigned d = m - e;  // degree of the derivative slice
            if (e >= Xs.size()) break;
            if (!Cz[d].is_zero()) E1 = E1 + Cz[d] * Xs[e];
            if (!Cw[d].is_zero()) E1 = E1 - Cw[d] * Ys[e];
            if (!Dz[d].is_zero()) E2 = E2 - Dz[d] * Xs[e];
            if (!Dw[d].is_zero()) E2 = E2 + Dw[d] * Ys[e];
        }

        // Resonances only occur at odd m = 2k+1; report I_k before J_k.
        if (m % 2 == 1) {
            unsigned k = (m - 1) / 2;
            PolyQi a1 = E1.coefficient_of(sv, {k + 1, k});
            if (!a1.is_zero()) {
                if (strict) throw ObstructionError(k, 'I', a1.str());
                run.I[k - 1] = a1;
            }
            PolyQi a2 = E2.coefficient_of(sv, {k, k + 1});
            if (!a2.is_zero()) {
                if (strict) throw ObstructionError(k, 'J', a2.str());
                run.J[k - 1] = a2;
            }
        }
        PolyQi Cm = PolyQi::zero(R), Dm = PolyQi::zero(R);
        for (unsigned j = 0; j <= m; ++j) {
            unsigned k = m - j;
            if (j != k + 1) {
                PolyQi a1 = E1.coefficient_of(sv, {j, k});
                if (!a1.is_zero()) {
                    long div = 1 - static_cast<long>(j) + static_cast<long>(k);
                    Monomial mono(R->vars.size());
                    mono.e[c.iz] = j;
                    mono.e[c.iw] = k;
                    Cm = Cm + a1.mul_term(mono, nfdetail::inv_of_int(div));
                }
            }
            if (k != j + 1) {
                PolyQi a2 = E2.coefficient_of(sv, {j, k});
                if (!a2.is_zero()) {
                    long div = 1 + static_cast<long>(j) - static_cast<long>(k);
                    Monomial mono(R->vars.size());
                    mono.e[c.iz] = j;
                    mono.e[c.iw] = k;
                    Dm = Dm + a2.mul_term(mono, nfdetail::inv_of_int(div));
                }
            }
        }
        run.series.C = run.series.C + Cm;
        run.series.D = run.series.D + Dm;
        if (m < N) {
            Cz[m - 1] = Cm.derivative(c.iz);
            Cw[m - 1] = Cm.derivative(c.iw);
            Dz[m - 1] = Dm.derivative(c.iz);
            Dw[m - 1] = Dm.derivative(c.iw);
        }
    }
    return run;
}

inline RingPtr parameter_ring(const std::vector<std::string>& params) {
    return make_ring(params, MonomialOrder::degrevlex(), DomainKind::Qi);
}

// Pairs (I_k, J_k) for k = 1..K as polynomials over the parameter ring.
inline std::vector<QuantityPair> linearizability_quantities(const PlanarSystem& s, unsigned K,
                                                            NormalizingSeries* series_out =
                                                                nullptr) {
    ComplexSystem c = complexify(s);
    LinearizationRun run = linearize(c, 2 * K + 1, false);
    RingPtr RP = parameter_ring(s.params);
    auto id = [](const GaussianRational& v) { return v; };
    std::vector<QuantityPair> out;
    for (unsigned k = 1; k <= K; ++k) {
        QuantityPair qp;
        qp.k = k;
        qp.I = transport<GaussianRational, GaussianRational>(run.I[k - 1], RP, id);
        qp.J = transport<GaussianRational, GaussianRational>(run.J[k - 1], RP, id);
        out.push_back(std::move(qp));
    }
    if (series_out) *series_out = run.series;
    return out;
}

// Linearizing series at a (typically numeric) system; throws ObstructionError
// on the first nonzero resonant obstruction.
inline NormalizingSeries linearizing_series(const PlanarSystem& s, unsigned N) {
    ComplexSystem c = complexify(s);
    return linearize(c, N, true).series;
}

// Residuals dH1/dtau - H1 and dH2/dtau + H2 truncated to state degree <= N.
// Both are zero when the series linearizes the flow through degree N.
inline std::pair<PolyQi, PolyQi> linearization_residual(const ComplexSystem& c,
                                                        const NormalizingSeries& ns) {
    if (!same_ring(c.ring, ns.ring)) throw RingMismatchError("series vs system");
    auto sv = c.state_vars();
    auto z = PolyQi::variable(c.ring, c.iz);
    auto w = PolyQi::variable(c.ring, c.iw);
    PolyQi fz = z + c.X, fw = -w - c.Y;
    PolyQi H1 = z + ns.C, H2 = w + ns.D;
    PolyQi r1 = H1.derivative(c.iz) * fz + H1.derivative(c.iw) * fw - H1;
    PolyQi r2 = H2.derivative(c.iz) * fz + H2.derivative(c.iw) * fw + H2;
    return {truncate_state_degree(r1, sv, ns.truncation),
            truncate_state_degree(r2, sv, ns.truncation)};
}

// Focus quantities from Psi = z*w + sum psi_{jk} z^j w^k: g_k is the forced
// coefficient of (zw)^{k+1} in dPsi/dt (real time, hence the factor i against
// the tau-flow), diagonal psi coefficients normalized to zero.
inline std::vector<FocusQuantity> focus_quantities(const PlanarSystem& s, unsigned K,
                                                   PolyQi* psi_out = nullptr) {
    ComplexSystem c = complexify(s);
    const RingPtr& R = c.ring;
    auto sv = c.state_vars();
    auto z = PolyQi::variable(R, c.iz);
    auto w = PolyQi::variable(R, c.iw);
    unsigned N = 2 * K + 2;

    unsigned degX = static_cast<unsigned>(std::max(c.X.degree_in(sv), c.Y.degree_in(sv)));
    auto Xs = nfdetail::state_slices(c.X, sv, std::max(N, degX));
    auto Ys = nfdetail::state_slices(c.Y, sv, std::max(N, degX));

    PolyQi psi = PolyQi::zero(R);
    std::vector<PolyQi> Pz(N, PolyQi::zero(R)), Pw(N, PolyQi::zero(R));
    std::vector<PolyQi> G(K, PolyQi::zero(R));
    GaussianRational iu = GaussianRational::i();

    for (unsigned m = 3; m <= N; ++m) {
        // [ (w + psi_z) X - (z + psi_w) Y ]_m
        PolyQi Rm = PolyQi::zero(R);
        if (m - 1 < Xs.size()) Rm = w * Xs[m - 1] - z * Ys[m - 1];
        for (unsigned e = 2; e < m; ++e) {
            unsigned d = m - e;
            if (e >= Xs.size()) break;
            if (!Pz[d].is_zero()) Rm = Rm + Pz[d] * Xs[e];
            if (!Pw[d].is_zero()) Rm = Rm - Pw[d] * Ys[e];
        }
        PolyQi Pm = PolyQi::zero(R);
        for (unsigned j = 0; j <= m; ++j) {
            unsigned k = m - j;
            PolyQi a = Rm.coefficient_of(sv, {j, k});
            if (a.is_zero()) continue;
            if (j == k) {
                // z^j w^j = (zw)^{k+1} with k = j - 1
                G[j - 2] = a.mul_scalar(iu);
            } else {
                Monomial mono(R->vars.size());
                mono.e[c.iz] = j;
                mono.e[c.iw] = k;
                Pm = Pm + a.mul_term(mono,
                                     -nfdetail::inv_of_int(static_cast<long>(j) -
                                                           static_cast<long>(k)));
            }
        }
        psi = psi + Pm;
        if (m < N) {
            Pz[m - 1] = Pm.derivative(c.iz);
            Pw[m - 1] = Pm.derivative(c.iw);
        }
    }

    RingPtr RP = parameter_ring(s.params);
    auto id = [](const GaussianRational& v) { return v; };
    std::vector<FocusQuantity> out;
    for (unsigned k = 1; k <= K; ++k)
        out.push_back({k, transport<GaussianRational, GaussianRational>(G[k - 1], RP, id)});
    if (psi_out) *psi_out = psi;
    return out;
}

}  // namespace isochron
