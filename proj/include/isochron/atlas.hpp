#pragma once

// Classification atlas for the planar cubic family
//
//   dx/dt = -y + a20 x^2 + a11 xy + a02 y^2 + x (r20 x^2 + r11 xy + r02 y^2)
//   dy/dt =  x + b20 x^2 + b11 xy - b20 y^2 + y (r20 x^2 + r11 xy + r02 y^2):
//
// the six isochronicity condition ideals with their parametrizations, the five
// canonical polar normal forms together with exact polar <-> Cartesian
// conversion, the linear reductions of conditions 2, 3, 4 and the star
// condition onto those forms, and the center-candidate / coexistence analysis
// of the per-condition equilibrium systems.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "isochron/arith.hpp"
#include "isochron/errors.hpp"
#include "isochron/groebner.hpp"
#include "isochron/planar.hpp"
#include "isochron/poly.hpp"
#include "isochron/ratfn.hpp"

namespace isochron {

using RatQi = RatFn<GaussianRational>;

// ---------------------------------------------------------------------------
// The family and its parameter ring

inline const std::vector<std::string>& family_parameters() {
    static const std::vector<std::string> names = {"a20", "a11", "a02", "b20",
                                                   "b11", "r20", "r11", "r02"};
    return names;
}

inline PlanarSystem cubic_family_system() {
    std::vector<std::string> vars = family_parameters();
    vars.push_back("x");
    vars.push_back("y");
    RingPtr R = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto P = [&](const char* s) { return parse_polynomial<GaussianRational>(s, R); };
    PolyQi cubic = P("r20*x^2 + r11*x*y + r02*y^2");
    PolyQi dx = P("-y + a20*x^2 + a11*x*y + a02*y^2") + P("x") * cubic;
    PolyQi dy = P("x + b20*x^2 + b11*x*y - b20*y^2") + P("y") * cubic;
    return planar_from_polys(R, "x", "y", dx, dy);
}

// ---------------------------------------------------------------------------
// Isochronicity conditions

// One member of the classification: the defining ideal in the eight family
// parameters plus a parametrization expressing every parameter through the
// free ones.  Parametrizations for ids 1 and 5 pick one Gaussian branch; all
// generators have rational coefficients.
struct ConditionSpec {
    char id = '?';
    RingPtr ring;  // the eight family parameters
    std::vector<PolyQi> generators;
    std::vector<std::string> free_params;
    std::map<std::string, PolyQi> parametrization;
};

namespace atlasdetail {

inline RingPtr parameter_ring_qi() {
    return make_ring(family_parameters(), MonomialOrder::degrevlex(), DomainKind::Qi);
}

inline ConditionSpec make_condition(char id, const std::vector<const char*>& gens,
                                    std::vector<std::string> free_params,
                                    const std::map<std::string, const char*>& param) {
    ConditionSpec cs;
    cs.id = id;
    cs.ring = parameter_ring_qi();
    for (const char* g : gens)
        cs.generators.push_back(parse_polynomial<GaussianRational>(g, cs.ring));
    cs.free_params = std::move(free_params);
    for (const auto& name : family_parameters()) {
        auto it = param.find(name);
        const char* text = it == param.end() ? name.c_str() : it->second;
        cs.parametrization[name] = parse_polynomial<GaussianRational>(text, cs.ring);
    }
    return cs;
}

}  // namespace atlasdetail

inline const std::vector<ConditionSpec>& conditions() {
    static const std::vector<ConditionSpec> table = [] {
        using atlasdetail::make_condition;
        std::vector<ConditionSpec> t;
        t.push_back(make_condition(
            '1',
            {"4*a20^2 + a11^2 + 4*a11*b20 + 4*b20^2 - 4*a20*b11 + b11^2", "r20 + r02",
             "a02 + a20"},
            {"a20", "b20", "b11", "r20", "r11"},
            {{"a11", "-2*b20 + 2*I*a20 - I*b11"}, {"a02", "-a20"}, {"r02", "-r20"}}));
        t.push_back(make_condition(
            '2',
            {"a02", "r02", "a11 + 2*b20", "b11 - 4*a20", "r11 + b20^2", "r20 - a20*b20"},
            {"a20", "b20"},
            {{"a02", "0"},
             {"r02", "0"},
             {"a11", "-2*b20"},
             {"b11", "4*a20"},
             {"r11", "-b20^2"},
             {"r20", "a20*b20"}}));
        t.push_back(make_condition(
            '3',
            {"4*a02 + a20", "a11 + 2*b20", "2*b11 - a20", "4*r02 + a20*b20",
             "r11 + b20^2", "r20 - a20*b20"},
            {"a20", "b20"},
            {{"a02", "-1/4*a20"},
             {"a11", "-2*b20"},
             {"b11", "1/2*a20"},
             {"r02", "-1/4*a20*b20"},
             {"r11", "-b20^2"},
             {"r20", "a20*b20"}}));
        t.push_back(make_condition(
            '4', {"a02", "r02", "a11 + 2*b20", "b11 - a20", "r20 - a20*b20"},
            {"a20", "b20", "r11"},
            {{"a02", "0"},
             {"r02", "0"},
             {"a11", "-2*b20"},
             {"b11", "a20"},
             {"r20", "a20*b20"}}));
        t.push_back(make_condition(
            '5',
            {"9*a11^2 - 12*a11*b20 + 4*b20^2 + 4*b11^2",
             "-6*a11*b20 + 4*b20^2 + 2*a20*b11 - b11^2",
             "6*a20*a11 - 4*a20*b20 - 3*a11*b11 + 10*b20*b11",
             "4*a20^2 - 12*a11*b20 + 24*b20^2 - b11^2", "-4/3*b20^2 - 1/3*b11^2 + r11",
             "4/9*a20*b20 + 1/6*a11*b11 - 1/9*b20*b11 + r02",
             "1/6*a20*a11 - 1/3*a20*b20 + 1/12*a11*b11 - 1/6*b20*b11 + r20 + r02"},
            {"a02", "b20"},
            {{"a20", "3*a02 + 4*I*b20"},
             {"b11", "6*a02 + 4*I*b20"},
             {"a11", "4*I*a02 - 2*b20"},
             {"r11", "12*a02^2 + 16*I*a02*b20 - 4*b20^2"},
             {"r02", "-4*I*a02^2 + 4*a02*b20"},
             {"r20", "4*a02*b20 + 4*I*b20^2"}}));
        t.push_back(make_condition(
            'L', {"a02 + a20", "a11 + 2*b20", "b11 - 2*a20", "r02 + r20"},
            {"a20", "b20", "r20", "r11"},
            {{"a02", "-a20"}, {"a11", "-2*b20"}, {"b11", "2*a20"}, {"r02", "-r20"}}));
        return t;
    }();
    return table;
}

inline const ConditionSpec& condition(char id) {
    for (const auto& cs : conditions())
        if (cs.id == id) return cs;
    throw Error(std::string("unknown condition id: ") + id);
}

// The condition ideal over Q, suitable for Groebner work and intersections.
inline Ideal<BigRational> condition_ideal(char id) {
    const ConditionSpec& cs = condition(id);
    RingPtr R = make_ring(cs.ring->vars, MonomialOrder::degrevlex(), DomainKind::Q);
    std::vector<Polynomial<BigRational>> gens;
    for (const auto& g : cs.generators)
        gens.push_back(transport<GaussianRational, BigRational>(g, R, [](const GaussianRational& c) {
            if (!c.is_real()) throw Error("condition generator has a complex coefficient");
            return c.re();
        }));
    return make_ideal(R, std::move(gens));
}

// Full parameter assignment induced by values for the free parameters.
inline std::map<std::string, GaussianRational> condition_assignment(
    char id, const std::map<std::string, GaussianRational>& free_values) {
    const ConditionSpec& cs = condition(id);
    std::vector<std::optional<PolyQi>> images(cs.ring->vars.size());
    for (const auto& name : cs.free_params) {
        auto it = free_values.find(name);
        if (it == free_values.end()) throw Error("missing value for parameter " + name);
        int idx = cs.ring->index_of(name);
        images[static_cast<std::size_t>(idx)] = PolyQi::constant(cs.ring, it->second);
    }
    std::map<std::string, GaussianRational> out;
    for (const auto& [name, poly] : cs.parametrization) {
        PolyQi v = poly.substitute(images);
        if (!v.is_constant()) throw Error("parametrization of " + name + " is not bound");
        out[name] = v.constant_value();
    }
    return out;
}

// Seeded sample on the condition variety; free parameters are drawn as nonzero
// halves of integers in [-3, 3].  The same seed always yields the same tuple.
inline std::map<std::string, GaussianRational> sample_condition(char id, std::uint64_t seed) {
    const ConditionSpec& cs = condition(id);
    std::mt19937_64 rng(seed);
    auto draw = [&rng]() {
        long k = 0;
        while (k == 0) k = static_cast<long>(rng() % 13) - 6;
        return GaussianRational(BigRational(k, 2));
    };
    std::map<std::string, GaussianRational> free_values;
    for (const auto& name : cs.free_params) free_values[name] = draw();
    return condition_assignment(id, free_values);
}

inline PlanarSystem condition_system(char id,
                                     const std::map<std::string, GaussianRational>& free_values) {
    return at_parameters(cubic_family_system(), condition_assignment(id, free_values));
}

// Per-condition equilibrium systems with the parameters kept symbolic, in the
// parameter names used by the coexistence analysis.  Condition 3 is written in
// (b11, b20) with a20 = 2 b11.
inline PlanarSystem symbolic_condition_system(char id) {
    auto build = [](const std::vector<std::string>& params, const char* dx, const char* dy) {
        std::vector<std::string> vars = params;
        vars.push_back("x");
        vars.push_back("y");
        RingPtr R = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);
        return planar_from_polys(R, "x", "y", parse_polynomial<GaussianRational>(dx, R),
                                 parse_polynomial<GaussianRational>(dy, R));
    };
    switch (id) {
        case '2':
            return build({"a20", "b20"},
                         "-y + a20*x^2 - 2*b20*x*y + x*(a20*b20*x^2 - b20^2*x*y)",
                         "x + b20*x^2 + 4*a20*x*y - b20*y^2 + y*(a20*b20*x^2 - b20^2*x*y)");
        case '3':
            return build({"b11", "b20"},
                         "-y + 2*b11*x^2 - 2*b20*x*y - 1/2*b11*y^2 + 2*b11*b20*x^3 "
                         "- b20^2*x^2*y - 1/2*b11*b20*x*y^2",
                         "x + b20*x^2 + b11*x*y - b20*y^2 + 2*b11*b20*x^2*y "
                         "- b20^2*x*y^2 - 1/2*b11*b20*y^3");
        case '4':
            return build({"a20", "b20", "r11"},
                         "-y + a20*x^2 - 2*b20*x*y + a20*b20*x^3 + r11*x^2*y",
                         "x + b20*x^2 + a20*x*y - b20*y^2 + a20*b20*x^2*y + r11*x*y^2");
        case 'L':
            return build({"a20", "b20", "r20", "r11"},
                         "-y + a20*x^2 - 2*b20*x*y - a20*y^2 + x*(r20*x^2 + r11*x*y - r20*y^2)",
                         "x + b20*x^2 + 2*a20*x*y - b20*y^2 + y*(r20*x^2 + r11*x*y - r20*y^2)");
        default:
            throw Error("equilibrium systems are available for condition ids 2, 3, 4, L");
    }
}

// ---------------------------------------------------------------------------
// Canonical polar forms

// Trigonometric polynomial sum_j (c_j cos(j t) + s_j sin(j t)); h[j] holds the
// coefficient pair of the j-th harmonic as polynomials in the form parameters.
// h[0].second is identically zero.
struct TrigPoly {
    RingPtr ring;
    std::vector<std::pair<PolyQi, PolyQi>> h;

    static TrigPoly zero(RingPtr R) {
        TrigPoly t;
        t.ring = std::move(R);
        return t;
    }
    bool is_zero() const {
        for (const auto& [c, s] : h)
            if (!c.is_zero() || !s.is_zero()) return false;
        return true;
    }
    void ensure(std::size_t j) {
        while (h.size() <= j) h.emplace_back(PolyQi::zero(ring), PolyQi::zero(ring));
    }
    void add_cos(std::size_t j, const PolyQi& p) {
        ensure(j);
        h[j].first = h[j].first + p;
    }
    void add_sin(std::size_t j, const PolyQi& p) {
        if (j == 0) {
            if (!p.is_zero()) throw Error("sin(0) coefficient must vanish");
            return;
        }
        ensure(j);
        h[j].second = h[j].second + p;
    }
    TrigPoly& normalize() {
        while (!h.empty() && h.back().first.is_zero() && h.back().second.is_zero())
            h.pop_back();
        return *this;
    }
    bool operator==(const TrigPoly& o) const {
        TrigPoly a = *this, b = o;
        a.normalize();
        b.normalize();
        if (a.h.size() != b.h.size()) return false;
        for (std::size_t j = 0; j < a.h.size(); ++j)
            if (a.h[j].first != b.h[j].first || a.h[j].second != b.h[j].second) return false;
        return true;
    }
    bool operator!=(const TrigPoly& o) const { return !(*this == o); }
};

namespace atlasdetail {

inline TrigPoly trig_add(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out = a;
    for (std::size_t j = 0; j < b.h.size(); ++j) {
        out.add_cos(j, b.h[j].first);
        out.add_sin(j, b.h[j].second);
    }
    return out;
}

inline TrigPoly trig_negate(const TrigPoly& a) {
    TrigPoly out = a;
    for (auto& [c, s] : out.h) {
        c = -c;
        s = -s;
    }
    return out;
}

// Multiply by cos t or sin t via the product-to-sum identities.
inline TrigPoly trig_mul_cos(const TrigPoly& a) {
    TrigPoly out = TrigPoly::zero(a.ring);
    GaussianRational half(BigRational(1, 2));
    for (std::size_t j = 0; j < a.h.size(); ++j) {
        const auto& [c, s] = a.h[j];
        if (j == 0) {
            out.add_cos(1, c);
            continue;
        }
        out.add_cos(j + 1, c.mul_scalar(half));
        out.add_cos(j - 1, c.mul_scalar(half));
        out.add_sin(j + 1, s.mul_scalar(half));
        if (j >= 2) out.add_sin(j - 1, s.mul_scalar(half));
    }
    return out;
}

inline TrigPoly trig_mul_sin(const TrigPoly& a) {
    TrigPoly out = TrigPoly::zero(a.ring);
    GaussianRational half(BigRational(1, 2));
    for (std::size_t j = 0; j < a.h.size(); ++j) {
        const auto& [c, s] = a.h[j];
        if (j == 0) {
            out.add_sin(1, c);
            continue;
        }
        out.add_sin(j + 1, c.mul_scalar(half));
        if (j >= 2) out.add_sin(j - 1, -c.mul_scalar(half));
        out.add_cos(j - 1, s.mul_scalar(half));
        out.add_cos(j + 1, -s.mul_scalar(half));
    }
    return out;
}

// Real and imaginary parts of (x + iy)^j as polynomials.
inline std::pair<PolyQi, PolyQi> circle_power(const RingPtr& R, std::size_t ix,
                                              std::size_t iy, std::size_t j) {
    PolyQi x = PolyQi::variable(R, ix), y = PolyQi::variable(R, iy);
    PolyQi u = PolyQi::one(R), v = PolyQi::zero(R);
    for (std::size_t k = 0; k < j; ++k) {
        PolyQi nu = u * x - v * y;
        v = u * y + v * x;
        u = nu;
    }
    return {u, v};
}

// r^m cos(j t) resp. r^m sin(j t) as a polynomial in (x, y); requires j <= m
// and j == m (mod 2).
inline PolyQi harmonic_poly(const RingPtr& R, std::size_t ix, std::size_t iy, std::size_t m,
                            std::size_t j, bool sine) {
    if (j > m || (m - j) % 2 != 0)
        throw DegeneracyError("harmonic does not correspond to a polynomial");
    PolyQi x = PolyQi::variable(R, ix), y = PolyQi::variable(R, iy);
    PolyQi rr = x * x + y * y;
    PolyQi out = PolyQi::one(R);
    for (std::size_t k = 0; k < (m - j) / 2; ++k) out = out * rr;
    auto [u, v] = circle_power(R, ix, iy, j);
    return out * (sine ? v : u);
}

inline PolyQi trig_to_poly(const TrigPoly& t, const RingPtr& R, std::size_t ix,
                           std::size_t iy, std::size_t m) {
    PolyQi out = PolyQi::zero(R);
    for (std::size_t j = 0; j < t.h.size(); ++j) {
        const auto& [c, s] = t.h[j];
        if (!c.is_zero()) out = out + c * harmonic_poly(R, ix, iy, m, j, false);
        if (!s.is_zero()) out = out + s * harmonic_poly(R, ix, iy, m, j, true);
    }
    return out;
}

// Harmonic expansion of cos^a t sin^b t for a + b <= 4, as (j, sine, coeff).
inline const std::vector<std::tuple<std::size_t, bool, BigRational>>& power_table(
    std::size_t a, std::size_t b) {
    using Row = std::vector<std::tuple<std::size_t, bool, BigRational>>;
    static const std::map<std::pair<std::size_t, std::size_t>, Row> table = [] {
        std::map<std::pair<std::size_t, std::size_t>, Row> m;
        auto R = [](long n, long d) { return BigRational(n, static_cast<unsigned long>(d)); };
        m[{0, 0}] = {{0, false, R(1, 1)}};
        m[{1, 0}] = {{1, false, R(1, 1)}};
        m[{0, 1}] = {{1, true, R(1, 1)}};
        m[{2, 0}] = {{0, false, R(1, 2)}, {2, false, R(1, 2)}};
        m[{1, 1}] = {{2, true, R(1, 2)}};
        m[{0, 2}] = {{0, false, R(1, 2)}, {2, false, R(-1, 2)}};
        m[{3, 0}] = {{1, false, R(3, 4)}, {3, false, R(1, 4)}};
        m[{2, 1}] = {{1, true, R(1, 4)}, {3, true, R(1, 4)}};
        m[{1, 2}] = {{1, false, R(1, 4)}, {3, false, R(-1, 4)}};
        m[{0, 3}] = {{1, true, R(3, 4)}, {3, true, R(-1, 4)}};
        m[{4, 0}] = {{0, false, R(3, 8)}, {2, false, R(1, 2)}, {4, false, R(1, 8)}};
        m[{3, 1}] = {{2, true, R(1, 4)}, {4, true, R(1, 8)}};
        m[{2, 2}] = {{0, false, R(1, 8)}, {4, false, R(-1, 8)}};
        m[{1, 3}] = {{2, true, R(1, 4)}, {4, true, R(-1, 8)}};
        m[{0, 4}] = {{0, false, R(3, 8)}, {2, false, R(-1, 2)}, {4, false, R(1, 8)}};
        return m;
    }();
    auto it = table.find({a, b});
    if (it == table.end()) throw Error("trigonometric power outside the supported range");
    return it->second;
}

// Expansion of a homogeneous degree-d component H(x, y) into harmonics of r^d.
inline TrigPoly homogeneous_to_trig(const PolyQi& H, std::size_t ix, std::size_t iy,
                                    std::size_t d) {
    TrigPoly out = TrigPoly::zero(H.ring());
    for (std::size_t a = 0; a <= d; ++a) {
        PolyQi coeff = H.coefficient_of({ix, iy}, {a, d - a});
        if (coeff.is_zero()) continue;
        for (const auto& [j, sine, q] : power_table(a, d - a)) {
            PolyQi part = coeff.mul_scalar(GaussianRational(q));
            if (sine)
                out.add_sin(j, part);
            else
                out.add_cos(j, part);
        }
    }
    out.normalize();
    return out;
}

}  // namespace atlasdetail

// dr/dt = r^2 A + r^3 B, dtheta/dt = 1 + r C in polar coordinates.
struct CanonicalForm {
    char id = '?';
    RingPtr kring;
    TrigPoly r2, r3, th1;
};

inline CanonicalForm canonical_form(char id) {
    std::size_t nk = 0;
    switch (id) {
        case 'a':
        case 'b': nk = 1; break;
        case 'c':
        case 'd': nk = 3; break;
        case 'e': nk = 5; break;
        default: throw Error(std::string("unknown canonical form id: ") + id);
    }
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= nk; ++i) names.push_back("k" + std::to_string(i));
    RingPtr R = make_ring(names, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto P = [&](const char* s) { return parse_polynomial<GaussianRational>(s, R); };
    CanonicalForm f;
    f.id = id;
    f.kring = R;
    f.r2 = TrigPoly::zero(R);
    f.r3 = TrigPoly::zero(R);
    f.th1 = TrigPoly::zero(R);
    switch (id) {
        case 'a':
            f.r2.add_cos(3, P("1"));
            f.r2.add_cos(1, P("-7/3"));
            f.r2.add_sin(1, P("-k1"));
            f.r3.add_cos(0, P("-2/3*k1"));
            f.r3.add_cos(2, P("-2/3*k1"));
            f.r3.add_sin(2, P("-1/2*k1^2"));
            f.th1.add_sin(3, P("-1"));
            f.th1.add_cos(1, P("k1"));
            f.th1.add_sin(1, P("-1"));
            break;
        case 'b':
            f.r2.add_cos(3, P("1"));
            f.r2.add_cos(1, P("13/3"));
            f.r2.add_sin(1, P("-k1"));
            f.r3.add_cos(0, P("2*k1"));
            f.r3.add_cos(2, P("10/3*k1"));
            f.r3.add_sin(2, P("-1/2*k1^2"));
            f.th1.add_sin(3, P("-1"));
            f.th1.add_cos(1, P("k1"));
            f.th1.add_sin(1, P("1/3"));
            break;
        case 'c':
            f.r2.add_cos(1, P("k1"));
            f.r3.add_cos(2, P("k2"));
            f.r3.add_sin(2, P("k3"));
            f.th1.add_sin(1, P("k1"));
            break;
        case 'd':
            f.r2.add_cos(1, P("k1"));
            f.r2.add_sin(1, P("k2"));
            f.r3.add_cos(0, P("1/2*k1*k2"));
            f.r3.add_cos(2, P("-1/2*k1*k2"));
            f.r3.add_sin(2, P("k3"));
            f.th1.add_sin(1, P("k1"));
            break;
        case 'e':
            f.r2.add_cos(1, P("k1"));
            f.r2.add_sin(1, P("k2"));
            f.r3.add_cos(0, P("k3"));
            f.r3.add_cos(2, P("k4"));
            f.r3.add_sin(2, P("k5"));
            break;
    }
    return f;
}

// Text encoding: "form <id>", "k: <names>", then one "<sec> cos|sin <j> = <poly>"
// line per nonzero coefficient with sections r2, r3, th in that order.
inline std::string canonical_form_text(const CanonicalForm& f) {
    std::ostringstream out;
    out << "form " << f.id << "\n";
    out << "k:";
    for (const auto& v : f.kring->vars) out << ' ' << v;
    out << "\n";
    auto emit = [&out](const char* sec, const TrigPoly& t) {
        for (std::size_t j = 0; j < t.h.size(); ++j) {
            if (!t.h[j].first.is_zero())
                out << sec << " cos " << j << " = " << t.h[j].first.str() << "\n";
            if (!t.h[j].second.is_zero())
                out << sec << " sin " << j << " = " << t.h[j].second.str() << "\n";
        }
    };
    emit("r2", f.r2);
    emit("r3", f.r3);
    emit("th", f.th1);
    return out.str();
}

inline CanonicalForm parse_canonical_form(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CanonicalForm f;
    bool have_id = false, have_ring = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = line.substr(0, line.find('#'));
        std::istringstream ls(s);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "form") {
            std::string id;
            if (!(ls >> id) || id.size() != 1)
                throw ParseError("form id", "line " + std::to_string(lineno));
            f.id = id[0];
            have_id = true;
        } else if (tok == "k:") {
            std::vector<std::string> names;
            std::string n;
            while (ls >> n) names.push_back(n);
            f.kring = make_ring(names, MonomialOrder::degrevlex(), DomainKind::Qi);
            f.r2 = TrigPoly::zero(f.kring);
            f.r3 = TrigPoly::zero(f.kring);
            f.th1 = TrigPoly::zero(f.kring);
            have_ring = true;
        } else {
            if (!have_ring) throw ParseError("coefficient before the k: line",
                                             "line " + std::to_string(lineno));
            std::string kind, eq;
            std::size_t j = 0;
            if (!(ls >> kind >> j >> eq) || eq != "=" || (kind != "cos" && kind != "sin"))
                throw ParseError("canonical form entry", "line " + std::to_string(lineno));
            std::string rest;
            std::getline(ls, rest);
            PolyQi p = parse_polynomial<GaussianRational>(rest, f.kring);
            TrigPoly* sec = tok == "r2" ? &f.r2 : tok == "r3" ? &f.r3
                                        : tok == "th" ? &f.th1 : nullptr;
            if (!sec) throw ParseError("canonical form section", "line " + std::to_string(lineno));
            if (kind == "cos")
                sec->add_cos(j, p);
            else
                sec->add_sin(j, p);
        }
    }
    if (!have_id || !have_ring) throw ParseError("canonical form header", "form file");
    return f;
}

// Exact conversion of a canonical polar form to the Cartesian system over the
// ring [k..., x, y].  Harmonics that would not yield a polynomial must cancel.
inline PlanarSystem polar_to_cartesian(const CanonicalForm& f) {
    using namespace atlasdetail;
    std::vector<std::string> vars = f.kring->vars;
    vars.push_back("x");
    vars.push_back("y");
    RingPtr R = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);
    std::size_t ix = f.kring->vars.size(), iy = ix + 1;
    std::vector<PolyQi> images;
    for (std::size_t i = 0; i < f.kring->vars.size(); ++i)
        images.push_back(PolyQi::variable(R, i));
    auto lift_trig = [&](const TrigPoly& t) {
        TrigPoly out = TrigPoly::zero(R);
        auto id = [](const GaussianRational& c) { return c; };
        for (std::size_t j = 0; j < t.h.size(); ++j) {
            out.add_cos(j, map_poly(t.h[j].first, R, id, images));
            out.add_sin(j, map_poly(t.h[j].second, R, id, images));
        }
        return out;
    };
    TrigPoly A = lift_trig(f.r2), B = lift_trig(f.r3), C = lift_trig(f.th1);
    TrigPoly X2 = trig_add(trig_mul_cos(A), trig_negate(trig_mul_sin(C)));
    TrigPoly Y2 = trig_add(trig_mul_sin(A), trig_mul_cos(C));
    PolyQi dx = -PolyQi::variable(R, iy) + trig_to_poly(X2.normalize(), R, ix, iy, 2) +
                trig_to_poly(trig_mul_cos(B).normalize(), R, ix, iy, 3);
    PolyQi dy = PolyQi::variable(R, ix) + trig_to_poly(Y2.normalize(), R, ix, iy, 2) +
                trig_to_poly(trig_mul_sin(B).normalize(), R, ix, iy, 3);
    return planar_from_polys(R, "x", "y", dx, dy);
}

struct PolarData {
    TrigPoly r2, r3, th1;
};

// Polar data of a cubic system in family shape: dr/dt = r^2 A + r^3 B and
// dtheta/dt = 1 + r C; throws when the r^2 term of dtheta does not vanish.
inline PolarData polar_from_cartesian(const PlanarSystem& s) {
    using namespace atlasdetail;
    auto sv = s.state_vars();
    PolyQi x = PolyQi::variable(s.ring, s.ix), y = PolyQi::variable(s.ring, s.iy);
    PolyQi U = x * s.dx + y * s.dy;
    PolyQi V = x * s.dy - y * s.dx;
    if (U.degree_in(sv) > 4 || V.degree_in(sv) > 4)
        throw DegeneracyError("system degree exceeds the cubic family");
    if (!V.component_in(sv, 4).is_zero())
        throw DegeneracyError("the r^2 term of dtheta/dt does not vanish");
    PolarData out;
    out.r2 = homogeneous_to_trig(U.component_in(sv, 3), s.ix, s.iy, 3);
    out.r3 = homogeneous_to_trig(U.component_in(sv, 4), s.ix, s.iy, 4);
    out.th1 = homogeneous_to_trig(V.component_in(sv, 3), s.ix, s.iy, 3);
    return out;
}

// ---------------------------------------------------------------------------
// Reduction of the conditions onto the canonical forms

struct Reduction {
    char condition = '?';
    char form = '?';
    // x = a u + b v, y = c u + d v, dt = lambda dtau
    GaussianRational a, b, c, d, lambda;
    std::map<std::string, GaussianRational> k;
    PlanarSystem system;  // the transformed system; equals the bound canonical form
};

inline Reduction reduce_to_canonical(char id,
                                     const std::map<std::string, GaussianRational>& free_values) {
    auto get = [&](const char* n) {
        auto it = free_values.find(n);
        if (it == free_values.end()) throw Error(std::string("missing value for ") + n);
        return it->second;
    };
    Reduction out;
    out.condition = id;
    GaussianRational zero, one(1);
    switch (id) {
        case '2': {
            GaussianRational a20 = get("a20"), b20 = get("b20");
            if (a20.is_zero()) throw DegeneracyError("a20 = 0 makes the reduction scaling singular");
            GaussianRational s = GaussianRational(BigRational(4, 3)) / a20;
            out.form = 'a';
            out.a = s;
            out.d = -s;
            out.lambda = -one;
            out.k["k1"] = GaussianRational(BigRational(4, 3)) * b20 / a20;
            break;
        }
        case '3': {
            GaussianRational a20 = get("a20"), b20 = get("b20");
            if (a20.is_zero()) throw DegeneracyError("a20 = 0 makes the reduction scaling singular");
            GaussianRational s = GaussianRational(BigRational(16, 3)) / a20;
            out.form = 'b';
            out.a = s;
            out.d = s;
            out.lambda = one;
            out.k["k1"] = GaussianRational(BigRational(16, 3)) * b20 / a20;
            break;
        }
        case '4': {
            GaussianRational a20 = get("a20"), b20 = get("b20"), r11 = get("r11");
            out.form = 'd';
            out.b = one;
            out.c = one;
            out.lambda = -one;
            out.k["k1"] = b20;
            out.k["k2"] = -a20;
            out.k["k3"] = -(r11 / GaussianRational(2));
            break;
        }
        case 'L': {
            GaussianRational a20 = get("a20"), b20 = get("b20");
            GaussianRational r20 = get("r20"), r11 = get("r11");
            GaussianRational S = a20 * a20 + b20 * b20;
            if (S.is_zero()) throw DegeneracyError("a20^2 + b20^2 = 0 makes the rotation singular");
            out.form = 'c';
            out.a = -a20 / S;
            out.b = b20 / S;
            out.c = b20 / S;
            out.d = a20 / S;
            out.lambda = -one;
            GaussianRational S2 = S * S;
            out.k["k1"] = one;
            out.k["k2"] = (a20 * b20 * r11 + S * r20) / S2;
            out.k["k3"] = (a20 * a20 * r11 - b20 * b20 * r11 +
                           GaussianRational(4) * a20 * b20 * r20) /
                          (GaussianRational(2) * S2);
            break;
        }
        default:
            throw Error("reductions are available for condition ids 2, 3, 4, L");
    }
    PlanarSystem sys = condition_system(id, free_values);
    out.system = linear_transform(sys, out.a, out.b, out.c, out.d, out.lambda, true);
    PlanarSystem bound = at_parameters(polar_to_cartesian(canonical_form(out.form)), out.k);
    if (out.system.dx.str() != bound.dx.str() || out.system.dy.str() != bound.dy.str())
        throw Error("reduction does not reproduce the canonical form");
    return out;
}

// ---------------------------------------------------------------------------
// Center candidates

struct EquilibriumCandidate {
    std::string label;
    RatQi x, y;  // coordinates as rational functions of the parameters
    bool trace_zero = false;
    RatQi det;
    std::optional<int> det_sign;  // definite symbolic sign when one exists
    std::string verdict;
};

// Conjugate pair of candidates on the line x = xline0 + xline1 y with
// a2 y^2 + a1 y + a0 = 0 and discriminant d0 = a1^2 - 4 a2 a0; the Jacobian
// determinant restricted to the pair is det0 + det1 y.
struct ConjugatePair {
    PolyQi a2, a1, a0, d0;
    RatQi xline0, xline1;
    RatQi det0, det1;
    RatQi det_product;  // exact product of the two determinant values
    std::optional<int> d0_sign;
};

struct CenterCandidateReport {
    PolyQi trace, det;
    Ideal<GaussianRational> ideal;
    std::vector<PolyQi> basis;
    std::vector<EquilibriumCandidate> points;
    std::optional<ConjugatePair> pair;
    std::vector<std::string> notes;
};

struct CenterOptions {
    // replaces dx among the ideal generators (a supplied factorization of P)
    std::vector<PolyQi> p_factors;
    GBOptions gb;
};

namespace atlasdetail {

// Definite sign of a polynomial in the parameters: all exponents even and all
// real coefficients of one sign.
inline std::optional<int> definite_sign(const PolyQi& p) {
    if (p.is_zero()) return 0;
    int sign = 0;
    for (const auto& t : p.terms()) {
        if (!t.c.is_real()) return std::nullopt;
        for (auto e : t.m.e)
            if (e % 2 != 0) return std::nullopt;
        int s = t.c.re().sign();
        if (sign == 0) sign = s;
        if (s != sign) return std::nullopt;
    }
    return sign;
}

inline std::optional<int> definite_sign(const RatQi& f) {
    auto n = definite_sign(f.num), d = definite_sign(f.den);
    if (!n || !d || *d == 0) return std::nullopt;
    return *n * *d;
}

// Evaluate p at x = X, y = Y with rational-function coordinates; all other
// variables stay symbolic.
inline RatQi eval_at_point(const PolyQi& p, std::size_t ix, std::size_t iy, const RatQi& X,
                           const RatQi& Y) {
    const RingPtr& R = p.ring();
    RatQi out = RatQi::zero(R);
    std::uint64_t dx = p.degree_in({ix}), dy = p.degree_in({iy});
    RatQi xp = RatQi(PolyQi::one(R));
    for (std::uint64_t a = 0; a <= dx; ++a) {
        RatQi yp = RatQi(PolyQi::one(R));
        for (std::uint64_t b = 0; b <= dy; ++b) {
            PolyQi c = p.coefficient_of({ix, iy}, {a, b});
            if (!c.is_zero()) out = out + RatQi(c) * xp * yp;
            if (b < dy) yp = yp * Y;
        }
        if (a < dx) xp = xp * X;
    }
    return out;
}

// Univariate polynomials over the parameter fraction field, coefficients
// ascending.
using UniRat = std::vector<RatQi>;

inline void uni_trim(UniRat& u) {
    while (!u.empty() && u.back().is_zero()) u.pop_back();
}

inline UniRat uni_from_poly(const PolyQi& p, std::size_t var) {
    UniRat out;
    std::uint64_t d = p.degree_in({var});
    for (std::uint64_t e = 0; e <= d; ++e) out.emplace_back(p.coefficient_of({var}, {e}));
    uni_trim(out);
    return out;
}

inline UniRat uni_rem(UniRat a, const UniRat& b) {
    while (a.size() >= b.size() && !b.empty()) {
        RatQi q = a.back() / b.back();
        std::size_t off = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[off + i] = a[off + i] - q * b[i];
        a.pop_back();
        uni_trim(a);
    }
    return a;
}

inline UniRat uni_gcd(UniRat a, UniRat b) {
    uni_trim(a);
    uni_trim(b);
    while (!b.empty()) {
        UniRat r = uni_rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        RatQi lead = a.back();
        for (auto& c : a) c = c / lead;
    }
    return a;
}

inline RatQi uni_eval(const UniRat& u, const RatQi& y) {
    if (u.empty()) return RatQi::zero(y.ring());
    RatQi out = u.back();
    for (std::size_t i = u.size() - 1; i-- > 0;) out = out * y + u[i];
    return out;
}

// Monomial content of p in the two state variables.
inline std::pair<std::uint64_t, std::uint64_t> state_content(const PolyQi& p, std::size_t ix,
                                                             std::size_t iy) {
    std::uint64_t mx = ~0ULL, my = ~0ULL;
    for (const auto& t : p.terms()) {
        mx = std::min(mx, t.m.e[ix]);
        my = std::min(my, t.m.e[iy]);
    }
    return {mx, my};
}

}  // namespace atlasdetail

// Equilibria with zero trace for a system with symbolic parameters: the
// Groebner basis of the ideal generated by dx (or a supplied factorization of
// it), dy and the trace, and the candidate points obtained by the structured
// elimination the analysis uses: a forced vanishing coordinate or a generator
// linear in x, followed by a univariate gcd in the remaining coordinate.
inline CenterCandidateReport center_candidates(const PlanarSystem& s,
                                               const CenterOptions& opt = {}) {
    using namespace atlasdetail;
    CenterCandidateReport rep;
    std::size_t ix = s.ix, iy = s.iy;
    PolyQi px = s.dx.derivative(ix), py = s.dx.derivative(iy);
    PolyQi qx = s.dy.derivative(ix), qy = s.dy.derivative(iy);
    rep.trace = px + qy;
    rep.det = px * qy - py * qx;
    std::vector<PolyQi> gens = opt.p_factors.empty() ? std::vector<PolyQi>{s.dx} : opt.p_factors;
    gens.push_back(s.dy);
    gens.push_back(rep.trace);
    rep.ideal = make_ideal(s.ring, gens);
    rep.basis = buchberger(rep.ideal, opt.gb).polys;

    const RingPtr& R = s.ring;
    RatQi rzero = RatQi::zero(R);
    auto add_point = [&](const std::string& label, const RatQi& X, const RatQi& Y) {
        EquilibriumCandidate c;
        c.label = label;
        c.x = X;
        c.y = Y;
        c.trace_zero = eval_at_point(rep.trace, ix, iy, X, Y).is_zero();
        c.det = eval_at_point(rep.det, ix, iy, X, Y);
        c.det_sign = definite_sign(c.det);
        if (c.det.is_zero())
            c.verdict = "degenerate";
        else if (c.det_sign && *c.det_sign < 0)
            c.verdict = "saddle";
        else if (!c.trace_zero)
            c.verdict = "trace nonzero";
        else if (c.det_sign && *c.det_sign > 0)
            c.verdict = "center candidate";
        else
            c.verdict = "center candidate if the determinant is positive";
        rep.points.push_back(std::move(c));
    };
    add_point("O", rzero, rzero);

    // Deflate the basis by state-variable monomial content; a generator whose
    // deflation is parameter-only forces that coordinate to vanish.
    bool force_x = false, force_y = false;
    std::vector<PolyQi> deflated;
    for (const auto& g : rep.basis) {
        auto [mx, my] = state_content(g, ix, iy);
        if (g.degree_in({ix, iy}) == mx + my && (mx || my)) {
            // g = c(params) x^mx y^my up to lower content; confirm purity
            PolyQi c = g.coefficient_of({ix, iy}, {mx, my});
            PolyQi back = c;
            for (std::uint64_t e = 0; e < mx; ++e) back = back * PolyQi::variable(R, ix);
            for (std::uint64_t e = 0; e < my; ++e) back = back * PolyQi::variable(R, iy);
            if (back == g) {
                if (mx && !my) force_x = true;
                if (my && !mx) force_y = true;
                if (mx && my) rep.notes.push_back("a generator forces x y = 0");
                continue;
            }
        }
        deflated.push_back(g);
    }

    if (force_x && force_y) {
        rep.notes.push_back("the origin is the only candidate");
        return rep;
    }

    // Choose the elimination: a forced coordinate, else a generator linear in
    // x whose x-coefficient is free of y.
    std::size_t main_var = iy, other_var = ix;
    RatQi other_c0 = rzero, other_c1 = rzero;  // other = c0 + c1 * main
    bool have_line = false;
    if (force_x) {
        have_line = true;
    } else if (force_y) {
        main_var = ix;
        other_var = iy;
        have_line = true;
    } else {
        std::vector<PolyQi> linear;
        for (const auto& g : deflated)
            if (g.degree_in({ix}) == 1 && g.coefficient_of({ix}, {1}).degree_in({iy}) == 0)
                linear.push_back(g);
        std::sort(linear.begin(), linear.end(), [](const PolyQi& a, const PolyQi& b) {
            auto da = a.degree(), db = b.degree();
            return da != db ? da < db : a.str() < b.str();
        });
        if (!linear.empty()) {
            PolyQi cx = linear.front().coefficient_of({ix}, {1});
            PolyQi rest = linear.front().coefficient_of({ix}, {0});
            // other = x = -(rest)/cx with rest a polynomial in y
            other_c0 = RatQi(-rest.coefficient_of({iy}, {0}), cx);
            std::uint64_t dy = rest.degree_in({iy});
            other_c1 = dy >= 1 ? RatQi(-rest.coefficient_of({iy}, {1}), cx) : rzero;
            if (dy > 1) {
                rep.notes.push_back("elimination line has degree above one");
                return rep;
            }
            have_line = true;
        }
    }
    if (!have_line) {
        rep.notes.push_back("no structured elimination applies");
        return rep;
    }

    // Substitute the line into every generator and take the univariate gcd.
    PolyQi mv = PolyQi::variable(R, main_var);
    RatQi other_image = other_c0 + other_c1 * RatQi(mv);
    UniRat g;
    bool first = true;
    for (const auto& gen : rep.basis) {
        RatQi val = eval_at_point(
            gen, ix, iy, main_var == iy ? other_image : RatQi(PolyQi::variable(R, ix)),
            main_var == iy ? RatQi(mv) : other_image);
        // along the line only the main variable remains
        UniRat u = uni_from_poly(val.num, main_var);
        uni_trim(u);
        if (u.empty()) continue;
        g = first ? uni_gcd(u, u) : uni_gcd(std::move(g), u);
        first = false;
        if (g.size() == 1) break;  // constant gcd: no common root
    }
    if (first || g.size() == 1) {
        if (!first) rep.notes.push_back("no candidates away from the origin");
        return rep;
    }

    // Zero roots of the gcd reproduce a point with main coordinate zero.
    std::size_t zshift = 0;
    while (!g.empty() && g.front().is_zero()) {
        g.erase(g.begin());
        ++zshift;
    }
    char next_label = 'A';
    auto point_at = [&](const RatQi& root) {
        RatQi other = other_c0 + other_c1 * root;
        RatQi X = main_var == iy ? other : root;
        RatQi Y = main_var == iy ? root : other;
        if (X.is_zero() && Y.is_zero()) return;  // the origin again
        add_point(std::string(1, next_label++), X, Y);
    };
    if (zshift > 0) point_at(rzero);
    if (g.size() == 2) {
        point_at(-(g[0] / g[1]));
    } else if (g.size() == 3) {
        if (main_var != iy) {
            rep.notes.push_back("quadratic residual along y = 0 left unreported");
            return rep;
        }
        ConjugatePair pair;
        // clear denominators: a_i = num_i * prod_{j != i} den_j
        PolyQi d0p = g[0].den, d1p = g[1].den, d2p = g[2].den;
        pair.a0 = g[0].num * d1p * d2p;
        pair.a1 = g[1].num * d0p * d2p;
        pair.a2 = g[2].num * d0p * d1p;
        pair.d0 = pair.a1 * pair.a1 - PolyQi::constant(R, GaussianRational(4)) * pair.a0 * pair.a2;
        pair.d0_sign = definite_sign(pair.d0);
        pair.xline0 = other_c0;
        pair.xline1 = other_c1;
        // determinant restricted to the pair: reduce mod the quadratic
        RatQi detv = eval_at_point(rep.det, ix, iy, other_image, RatQi(mv));
        UniRat dnum = uni_from_poly(detv.num, main_var);
        UniRat dred = uni_rem(std::move(dnum), g);
        RatQi dden = RatQi(detv.den);
        pair.det0 = (dred.size() > 0 ? dred[0] : rzero) / dden;
        pair.det1 = (dred.size() > 1 ? dred[1] : rzero) / dden;
        // product over the conjugate roots: e0^2 - e0 e1 (a1/a2) + e1^2 (a0/a2)
        RatQi ra1 = RatQi(pair.a1, pair.a2), ra0 = RatQi(pair.a0, pair.a2);
        pair.det_product =
            pair.det0 * pair.det0 - pair.det0 * pair.det1 * ra1 + pair.det1 * pair.det1 * ra0;
        // the trace vanishes identically along the pair
        RatQi trv = eval_at_point(rep.trace, ix, iy, other_image, RatQi(mv));
        UniRat tnum = uni_from_poly(trv.num, main_var);
        if (!uni_rem(std::move(tnum), g).empty())
            rep.notes.push_back("trace does not vanish on the conjugate pair");
        rep.pair = std::move(pair);
    } else {
        rep.notes.push_back("residual equation of degree " + std::to_string(g.size() - 1) +
                            " left unsolved");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Exact values in a real quadratic extension

// Value a + b sqrt(d) with d >= 0; perfect-square radicands collapse to the
// rational part, so b != 0 implies sqrt(d) is irrational.
struct QuadExt {
    BigRational a, b, d;

    QuadExt() {}
    QuadExt(BigRational a_, BigRational b_, BigRational d_)
        : a(std::move(a_)), b(std::move(b_)), d(std::move(d_)) {
        if (d.sign() < 0) throw Error("negative radicand");
        if (auto r = exact_sqrt(d)) {
            a = a + b * *r;
            b = BigRational(0);
        }
    }
    static QuadExt rational(BigRational v, BigRational d_) {
        return QuadExt(std::move(v), BigRational(0), std::move(d_));
    }

    bool is_zero() const { return a.is_zero() && b.is_zero(); }
    int sign() const {
        int sa = a.sign(), sb = b.sign();
        if (sb == 0) return sa;
        if (sa == 0) return sb;
        if (sa == sb) return sa;
        int s = (a * a - b * b * d).sign();
        return s == 0 ? 0 : (s > 0 ? sa : sb);
    }
    QuadExt operator-() const { return QuadExt(-a, -b, d); }
    QuadExt operator+(const QuadExt& o) const { return QuadExt(a + o.a, b + o.b, d); }
    QuadExt operator-(const QuadExt& o) const { return QuadExt(a - o.a, b - o.b, d); }
    QuadExt operator*(const QuadExt& o) const {
        return QuadExt(a * o.a + b * o.b * d, a * o.b + b * o.a, d);
    }
    QuadExt inv() const {
        if (is_zero()) throw DivisionByZeroError();
        if (b.is_zero()) return QuadExt(a.inv(), BigRational(0), d);
        BigRational n = a * a - b * b * d;  // nonzero since sqrt(d) is irrational
        return QuadExt(a / n, -b / n, d);
    }
    QuadExt operator/(const QuadExt& o) const { return *this * o.inv(); }
    double to_double() const {
        return a.to_double() + b.to_double() * std::sqrt(d.to_double());
    }
    std::string str() const {
        if (b.is_zero()) return a.str();
        std::string out = a.is_zero() ? "" : a.str() + " + ";
        return out + b.str() + "*sqrt(" + d.str() + ")";
    }
};

namespace atlasdetail {

inline QuadExt eval_quadext(const PolyQi& p, std::size_t ix, std::size_t iy, const QuadExt& X,
                            const QuadExt& Y) {
    QuadExt out = QuadExt::rational(BigRational(0), X.d);
    std::uint64_t dx = p.degree_in({ix}), dy = p.degree_in({iy});
    QuadExt xp = QuadExt::rational(BigRational(1), X.d);
    for (std::uint64_t a = 0; a <= dx; ++a) {
        QuadExt yp = QuadExt::rational(BigRational(1), X.d);
        for (std::uint64_t b = 0; b <= dy; ++b) {
            PolyQi c = p.coefficient_of({ix, iy}, {a, b});
            if (!c.is_zero()) {
                if (!c.is_constant() || !c.constant_value().is_real())
                    throw Error("expected a bound real system");
                out = out + QuadExt::rational(c.constant_value().re(), X.d) * xp * yp;
            }
            if (b < dy) yp = yp * Y;
        }
        if (a < dx) xp = xp * X;
    }
    return out;
}

}  // namespace atlasdetail

// ---------------------------------------------------------------------------
// Coexistence analysis at exact parameter values

struct PointReport {
    std::string label;
    QuadExt x, y, trace, det;
    bool trace_zero = false;
    int det_sign = 0;
    std::string verdict;  // center candidate | saddle | trace nonzero | degenerate
};

struct CoexistenceReport {
    char id = '?';
    std::vector<PointReport> points;
    unsigned center_count = 0;  // candidates with zero trace and positive determinant
    bool has_pair = false;      // the quadratic-pair data below is meaningful
    BigRational a0, a1, a2, d0;
    BigRational det_product;
    std::vector<std::string> notes;
};

namespace atlasdetail {

inline PointReport classify_point(const PlanarSystem& s, const std::string& label,
                                  const QuadExt& X, const QuadExt& Y) {
    PolyQi px = s.dx.derivative(s.ix), py = s.dx.derivative(s.iy);
    PolyQi qx = s.dy.derivative(s.ix), qy = s.dy.derivative(s.iy);
    if (!eval_quadext(s.dx, s.ix, s.iy, X, Y).is_zero() ||
        !eval_quadext(s.dy, s.ix, s.iy, X, Y).is_zero())
        throw Error("classify_point: not an equilibrium");
    PointReport r;
    r.label = label;
    r.x = X;
    r.y = Y;
    r.trace = eval_quadext(px + qy, s.ix, s.iy, X, Y);
    r.det = eval_quadext(px * qy - py * qx, s.ix, s.iy, X, Y);
    r.trace_zero = r.trace.is_zero();
    r.det_sign = r.det.sign();
    if (r.det_sign == 0)
        r.verdict = "degenerate";
    else if (r.det_sign < 0)
        r.verdict = "saddle";
    else if (!r.trace_zero)
        r.verdict = "trace nonzero";
    else
        r.verdict = "center candidate";
    return r;
}

inline BigRational real_value(const std::map<std::string, GaussianRational>& values,
                              const char* name) {
    auto it = values.find(name);
    if (it == values.end()) throw Error(std::string("missing value for ") + name);
    if (!it->second.is_real()) throw Error("coexistence analysis expects real parameters");
    return it->second.re();
}

}  // namespace atlasdetail

// Exact equilibrium census at rational parameter values, following the
// per-condition branch structure.  Condition 3 takes (b11, b20), condition 2
// takes (a20, b20), condition 4 takes (a20, b20, r11) and the star condition
// takes (a20, b20, r20, r11).
inline CoexistenceReport coexistence_analysis(
    char id, const std::map<std::string, GaussianRational>& values) {
    using namespace atlasdetail;
    CoexistenceReport rep;
    rep.id = id;
    BigRational zero(0), one(1), two(2);
    auto bind = [&](const PlanarSystem& sym) {
        std::map<std::string, GaussianRational> m;
        for (const auto& p : sym.params) m[p] = GaussianRational(real_value(values, p.c_str()));
        return at_parameters(sym, m);
    };
    auto push_origin = [&](const PlanarSystem& s, const BigRational& d) {
        rep.points.push_back(classify_point(s, "O", QuadExt::rational(zero, d),
                                            QuadExt::rational(zero, d)));
    };
    switch (id) {
        case '2': {
            BigRational a20 = real_value(values, "a20"), b20 = real_value(values, "b20");
            PlanarSystem s = bind(symbolic_condition_system('2'));
            push_origin(s, zero);
            if (!b20.is_zero()) {
                if (!a20.is_zero()) {
                    rep.points.push_back(classify_point(s, "A",
                                                        QuadExt::rational(-b20.inv(), zero),
                                                        QuadExt::rational(zero, zero)));
                } else {
                    rep.notes.push_back("the line b20 x + 1 = 0 consists of equilibria");
                }
            } else if (!a20.is_zero()) {
                rep.notes.push_back("no equilibria besides the origin");
            }
            break;
        }
        case '3': {
            BigRational b11 = real_value(values, "b11"), b20 = real_value(values, "b20");
            PlanarSystem s = bind(symbolic_condition_system('3'));
            push_origin(s, zero);
            if (!b11.is_zero()) {
                rep.points.push_back(classify_point(s, "B", QuadExt::rational(zero, zero),
                                                    QuadExt::rational(-two / b11, zero)));
            } else {
                rep.notes.push_back("b11 = 0: the line b20 x + 1 = 0 consists of equilibria");
            }
            if (!b20.is_zero()) {
                BigRational d = two;  // roots y = +-sqrt(2)/b20 on the line x = -1/b20
                QuadExt xa = QuadExt::rational(-b20.inv(), d);
                rep.points.push_back(classify_point(s, "A", xa, QuadExt::rational(zero, d)));
                if (!b11.is_zero()) {
                    rep.points.push_back(
                        classify_point(s, "A+", xa, QuadExt(zero, b20.inv(), d)));
                    rep.points.push_back(
                        classify_point(s, "A-", xa, QuadExt(zero, -b20.inv(), d)));
                }
            }
            break;
        }
        case '4': {
            BigRational a20 = real_value(values, "a20"), b20 = real_value(values, "b20");
            BigRational r11 = real_value(values, "r11");
            PlanarSystem s = bind(symbolic_condition_system('4'));
            push_origin(s, zero);
            if (!a20.is_zero()) {
                rep.notes.push_back("a20 != 0: no zero-trace equilibria besides the origin");
            } else if (!b20.is_zero()) {
                rep.points.push_back(classify_point(s, "A", QuadExt::rational(-b20.inv(), zero),
                                                    QuadExt::rational(zero, zero)));
                (void)r11;
            } else {
                rep.notes.push_back("a20 = b20 = 0: no equilibria besides the origin");
            }
            break;
        }
        case 'L': {
            BigRational a20 = real_value(values, "a20"), b20 = real_value(values, "b20");
            BigRational r20 = real_value(values, "r20"), r11 = real_value(values, "r11");
            PlanarSystem s = bind(symbolic_condition_system('L'));
            if (b20.is_zero()) {
                if (a20.is_zero()) {
                    push_origin(s, zero);
                    rep.notes.push_back("a20 = b20 = 0: no equilibria besides the origin");
                    break;
                }
                throw DegeneracyError("b20 = 0: swap x and y to reuse the analysis");
            }
            rep.a0 = a20 * b20 - r20;
            rep.a1 = a20 * a20 * b20 + b20 * b20 * b20 - two * a20 * r20 + b20 * r11;
            rep.a2 = -a20 * a20 * r20 + a20 * b20 * r11 + b20 * b20 * r20;
            if (rep.a2.is_zero()) throw DegeneracyError("a2 = 0: the candidate pair degenerates");
            rep.d0 = rep.a1 * rep.a1 - BigRational(4) * rep.a0 * rep.a2;
            rep.has_pair = true;
            push_origin(s, rep.d0.sign() >= 0 ? rep.d0 : zero);
            if (rep.d0.sign() < 0) {
                rep.notes.push_back("d0 < 0: the candidate pair is not real");
                break;
            }
            BigRational half = one / two;
            QuadExt yp(-rep.a1 * half / rep.a2, half / rep.a2, rep.d0);
            QuadExt ym(-rep.a1 * half / rep.a2, -half / rep.a2, rep.d0);
            auto xof = [&](const QuadExt& yv) {
                QuadExt num = QuadExt::rational(a20, rep.d0) * yv + QuadExt::rational(one, rep.d0);
                return -num * QuadExt::rational(b20.inv(), rep.d0);
            };
            PointReport cp = classify_point(s, "C+", xof(yp), yp);
            PointReport cm = classify_point(s, "C-", xof(ym), ym);
            BigRational prod = (cp.det * cm.det).a;
            if (!(cp.det * cm.det).b.is_zero()) throw Error("determinant product is not rational");
            rep.det_product = prod;
            rep.points.push_back(std::move(cp));
            rep.points.push_back(std::move(cm));
            if (rep.d0.is_zero()) rep.notes.push_back("d0 = 0: the pair collapses to one point");
            break;
        }
        default:
            throw Error("coexistence analysis is available for condition ids 2, 3, 4, L");
    }
    for (const auto& p : rep.points)
        if (p.trace_zero && p.det_sign > 0) ++rep.center_count;
    return rep;
}

}  // namespace isochron
