#pragma once

// Darboux machinery for complexified systems dz/dtau = z + X, dw/dtau = -w - Y:
// cofactors by exact division, linearization recipes (products of factor powers
// with scalar exponents), first-integral recipes, truncated-series validation
// of a recipe at a parameter point, and small-degree factor discovery.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isochron/arith.hpp"
#include "isochron/errors.hpp"
#include "isochron/expr.hpp"
#include "isochron/groebner.hpp"
#include "isochron/planar.hpp"
#include "isochron/poly.hpp"
#include "isochron/ratfn.hpp"
#include "isochron/series.hpp"

namespace isochron {

// ---------------------------------------------------------------------------
// Cofactors

// Derivative of f along the vector field: f_z*(z + X) - f_w*(w + Y).
inline PolyQi lie_derivative(const ComplexSystem& s, const PolyQi& f) {
    PolyQi zdot = PolyQi::variable(s.ring, s.iz) + s.X;
    PolyQi wdot = -(PolyQi::variable(s.ring, s.iw) + s.Y);
    return f.derivative(s.iz) * zdot + f.derivative(s.iw) * wdot;
}

// Quotient g/f; the error carries the nonzero remainder when division fails.
template <class C>
Polynomial<C> exact_div(const Polynomial<C>& g, const Polynomial<C>& f) {
    if (f.is_zero()) throw DivisionByZeroError();
    std::vector<typename Polynomial<C>::Term> quot, rem;
    Polynomial<C> work = g;
    while (!work.is_zero()) {
        auto lt = work.leading();
        if (divides(f.leading().m, lt.m)) {
            C c = lt.c / f.leading().c;
            Monomial m = mono_div(lt.m, f.leading().m);
            work = work - f.mul_term(m, c);
            quot.push_back({std::move(m), std::move(c)});
        } else {
            rem.push_back(lt);
            work = work.without_leading();
        }
    }
    if (!rem.empty())
        throw NotExactError("inexact division, remainder " +
                            Polynomial<C>::from_terms(g.ring(), rem).str());
    return Polynomial<C>::from_terms(g.ring(), std::move(quot));
}

struct DarbouxFactor {
    PolyQi f;
    PolyQi cofactor;
};

// K with f_z*zdot + f_w*wdot = K*f, by exact division.
inline PolyQi cofactor_of(const ComplexSystem& s, const PolyQi& f) {
    if (f.is_zero()) throw DegeneracyError("zero polynomial has no cofactor");
    return exact_div(lie_derivative(s, f), f);
}

// ---------------------------------------------------------------------------
// Recipes

struct RecipeTerm {
    std::string factor;
    ExprPtr exponent;  // null means the literal exponent 1 (the leading factor)
};

// zside/wside encode z1 = f0*f1^a1*..., w1 = g0*g1^b1*...; when wside is empty
// a first-integral product psi with a scale constant stands in via
// w1 = scale*(psi - psi(0,0))/z1.
struct LinearizationRecipe {
    RingPtr ring;  // params..., radicals..., z, w
    std::size_t iz = 0, iw = 0;
    std::vector<std::pair<std::string, ExprPtr>> radicals;
    std::vector<std::pair<std::string, PolyQi>> factors;
    std::map<std::string, PolyQi> declared_cofactors;
    std::vector<RecipeTerm> zside, wside, psi;
    ExprPtr scale;

    const PolyQi& factor(const std::string& name) const {
        for (auto& [n, f] : factors)
            if (n == name) return f;
        throw Error("recipe has no factor named '" + name + "'");
    }
};

struct FirstIntegralRecipe {
    std::vector<RecipeTerm> factors;
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

// Splits "l1 l4^-1 l5^"a/(2*b)"" into product terms; quotes protect spaces.
inline std::vector<RecipeTerm> parse_product(const std::string& text, std::size_t line_no,
                                             bool lead_exponent_ok = false) {
    std::vector<RecipeTerm> out;
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    skip_ws();
    while (i < text.size()) {
        std::string name;
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
            name += text[i++];
        if (name.empty()) throw ParseError("expected factor name", line_no, i + 1);
        RecipeTerm term{name, nullptr};
        if (i < text.size() && text[i] == '^') {
            ++i;
            std::string ex;
            if (i < text.size() && text[i] == '"') {
                ++i;
                while (i < text.size() && text[i] != '"') ex += text[i++];
                if (i >= text.size()) throw ParseError("unterminated quote", line_no, i);
                ++i;
            } else {
                while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
                    ex += text[i++];
            }
            term.exponent = parse_expr(ex);
        }
        out.push_back(std::move(term));
        skip_ws();
    }
    if (out.empty()) throw ParseError("empty product", line_no, 1);
    if (!lead_exponent_ok && out[0].exponent)
        throw ParseError("leading factor must have exponent 1", line_no, 1);
    return out;
}

}  // namespace detail

// Recipe grammar, one declaration per line ("#" comments):
//   radical <name> = <expr with sqrt>
//   factor <name> = <polynomial>
//   cofactor <name> = <polynomial>
//   zside = <name> <name>^<exp> ...     exponents: plain token or "quoted expr"
//   wside = ...
//   psi = <name>^<exp> ...
//   scale = <expr>
// Factor polynomials may use the radical names as ordinary symbols.
inline LinearizationRecipe parse_recipe(const std::string& text, const ComplexSystem& base) {
    LinearizationRecipe r;
    // First pass: radical names, keeping declaration order for evaluation.
    std::vector<std::pair<std::string, std::string>> lines;  // keyword+name, rhs
    std::vector<std::size_t> line_nos;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? std::string::npos
                                                                       : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::strip(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected '='", line_no, 1);
        lines.emplace_back(detail::strip(line.substr(0, eq)), detail::strip(line.substr(eq + 1)));
        line_nos.push_back(line_no);
    }

    std::vector<std::string> radical_names;
    for (auto& [head, rhs] : lines) {
        if (head.rfind("radical ", 0) == 0)
            radical_names.push_back(detail::strip(head.substr(8)));
    }

    // Extended ring: parameters, then radicals, then the state pair.
    std::vector<std::string> vars;
    for (auto& p : base.params) vars.push_back(p);
    for (auto& n : radical_names) vars.push_back(n);
    vars.push_back(base.ring->vars[base.iz]);
    vars.push_back(base.ring->vars[base.iw]);
    r.ring = make_ring(vars, base.ring->order, base.ring->domain);
    r.iz = vars.size() - 2;
    r.iw = vars.size() - 1;

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string& head = lines[li].first;
        const std::string& rhs = lines[li].second;
        std::size_t ln = line_nos[li];
        if (head.rfind("radical ", 0) == 0) {
            r.radicals.emplace_back(detail::strip(head.substr(8)), parse_expr(rhs));
        } else if (head.rfind("factor ", 0) == 0) {
            r.factors.emplace_back(detail::strip(head.substr(7)),
                                   parse_polynomial<GaussianRational>(rhs, r.ring));
        } else if (head.rfind("cofactor ", 0) == 0) {
            r.declared_cofactors[detail::strip(head.substr(9))] =
                parse_polynomial<GaussianRational>(rhs, r.ring);
        } else if (head == "zside") {
            r.zside = detail::parse_product(rhs, ln);
        } else if (head == "wside") {
            r.wside = detail::parse_product(rhs, ln);
        } else if (head == "psi") {
            // A first-integral product has no distinguished leading factor.
            r.psi = detail::parse_product(rhs, ln, true);
        } else if (head == "scale") {
            r.scale = parse_expr(detail::unquote(rhs));
        } else {
            throw ParseError("unknown declaration '" + head + "'", ln, 1);
        }
    }
    if (r.zside.empty()) throw Error("recipe lacks a zside");
    if (r.wside.empty() && (r.psi.empty() || !r.scale))
        throw Error("recipe needs a wside or a psi product with a scale");
    for (auto& side : {r.zside, r.wside, r.psi})
        for (auto& t : side)
            r.factor(t.factor);  // existence check
    return r;
}

// The base system transported into the recipe's extended ring.
inline ComplexSystem recipe_system(const ComplexSystem& base, const LinearizationRecipe& r) {
    ComplexSystem s;
    s.ring = r.ring;
    s.iz = r.iz;
    s.iw = r.iw;
    s.params = base.params;
    auto id = [](const GaussianRational& c) { return c; };
    s.X = transport<GaussianRational, GaussianRational>(base.X, r.ring, id);
    s.Y = transport<GaussianRational, GaussianRational>(base.Y, r.ring, id);
    return s;
}

// ---------------------------------------------------------------------------
// Symbolic verification (no radicals: exponents are rational functions of the
// parameters, cofactor sums are checked by cross-multiplication)

struct RecipeReport {
    bool shape_ok = false;
    bool cofactors_ok = false;
    bool z_sum_ok = false;
    bool w_sum_ok = false;  // covers the psi sum when the recipe uses one
    bool exact = true;
    double residual = 0.0;
    std::vector<std::string> notes;

    bool passed() const { return shape_ok && cofactors_ok && z_sum_ok && w_sum_ok; }
};

namespace detail {

// Theorem shape: leading factors start with the state variable itself, the
// rest are units. Checked on the symbolic polynomials; radical symbols only
// ever sit in coefficients, so the check is meaningful in every mode.
inline bool recipe_shape_ok(const LinearizationRecipe& r, std::vector<std::string>& notes) {
    auto sv = std::vector<std::size_t>{r.iz, r.iw};
    bool ok = true;
    auto check_side = [&](const std::vector<RecipeTerm>& side, std::size_t lead_var,
                          const char* label) {
        if (side.empty()) return;
        const PolyQi& f0 = r.factor(side[0].factor);
        PolyQi low = f0.component_in(sv, 0) + f0.component_in(sv, 1);
        if (!(low == PolyQi::variable(r.ring, lead_var))) {
            ok = false;
            notes.push_back(std::string(label) + " leading factor " + side[0].factor +
                            " does not start with the state variable");
        }
        for (std::size_t j = 1; j < side.size(); ++j) {
            const PolyQi& f = r.factor(side[j].factor);
            if (!(f.component_in(sv, 0) == PolyQi::one(r.ring))) {
                ok = false;
                notes.push_back(std::string(label) + " factor " + side[j].factor +
                                " has constant term != 1");
            }
        }
    };
    check_side(r.zside, r.iz, "zside");
    check_side(r.wside, r.iw, "wside");
    for (auto& t : r.psi) {
        const PolyQi& f = r.factor(t.factor);
        if (!(f.component_in(sv, 0) == PolyQi::one(r.ring))) {
            ok = false;
            notes.push_back("psi factor " + t.factor + " has constant term != 1");
        }
    }
    return ok;
}

}  // namespace detail

// Exact check of Theorem conditions (a)-(c). Requires a radical-free recipe;
// exponent expressions are evaluated as rational functions of the parameters.
inline RecipeReport verify_recipe(const ComplexSystem& base, const LinearizationRecipe& r) {
    if (!r.radicals.empty())
        throw NotExactError("recipe has radicals; use the sampled numeric verifier");
    RecipeReport rep;
    rep.shape_ok = detail::recipe_shape_ok(r, rep.notes);

    ComplexSystem s = recipe_system(base, r);
    std::map<std::string, PolyQi> cof;
    rep.cofactors_ok = true;
    for (auto& [name, f] : r.factors) {
        try {
            cof[name] = cofactor_of(s, f);
        } catch (const NotExactError& e) {
            rep.cofactors_ok = false;
            rep.notes.push_back("factor " + name + ": " + e.what());
            continue;
        }
        auto it = r.declared_cofactors.find(name);
        if (it != r.declared_cofactors.end() && !(it->second == cof[name])) {
            rep.cofactors_ok = false;
            rep.notes.push_back("declared cofactor of " + name + " is wrong: computed " +
                                cof[name].str());
        }
    }
    if (!rep.cofactors_ok) return rep;

    using RF = RatFn<GaussianRational>;
    auto sum_of = [&](const std::vector<RecipeTerm>& side, bool implicit_lead) {
        RF acc = RF::zero(r.ring);
        for (std::size_t j = 0; j < side.size(); ++j) {
            RF alpha = (implicit_lead && j == 0) || !side[j].exponent
                           ? RF::constant(r.ring, GaussianRational(1))
                           : expr_eval_ratfn(side[j].exponent, r.ring);
            acc = acc + alpha * RF(cof.at(side[j].factor));
        }
        return acc;
    };
    rep.z_sum_ok = sum_of(r.zside, true) == RF::constant(r.ring, GaussianRational(1));
    if (!r.wside.empty()) {
        rep.w_sum_ok = sum_of(r.wside, true) == RF::constant(r.ring, GaussianRational(-1));
    } else {
        rep.w_sum_ok = sum_of(r.psi, false).is_zero();
        if (!rep.w_sum_ok) rep.notes.push_back("psi cofactor sum is not 0");
    }
    if (!rep.z_sum_ok) rep.notes.push_back("zside cofactor sum is not 1");
    if (!r.wside.empty() && !rep.w_sum_ok) rep.notes.push_back("wside cofactor sum is not -1");
    return rep;
}

// Sigma s_i K_i = 0, exactly.
inline bool verify_first_integral(const ComplexSystem& base, const LinearizationRecipe& host,
                                  const FirstIntegralRecipe& fi) {
    ComplexSystem s = recipe_system(base, host);
    using RF = RatFn<GaussianRational>;
    RF acc = RF::zero(host.ring);
    for (auto& t : fi.factors) {
        RF alpha = t.exponent ? expr_eval_ratfn(t.exponent, host.ring)
                              : RF::constant(host.ring, GaussianRational(1));
        acc = acc + alpha * RF(cofactor_of(s, host.factor(t.factor)));
    }
    return acc.is_zero();
}

// ---------------------------------------------------------------------------
// Numeric instantiation and verification at a parameter point

namespace detail {

inline GaussianRational coeff_from_gaussian(const GaussianRational& q, GaussianRational*) {
    return q;
}
inline ComplexApprox coeff_from_gaussian(const GaussianRational& q, ComplexApprox*) {
    return q.to_complex();
}

inline double coeff_abs(const GaussianRational& q) {
    return q.is_zero() ? 0.0 : 1.0;
}
inline double coeff_abs(const ComplexApprox& c) { return std::abs(c); }

template <class C>
double max_coeff_abs(const Polynomial<C>& p) {
    double m = 0.0;
    for (auto& t : p.terms()) m = std::max(m, coeff_abs(t.c));
    return m;
}

}  // namespace detail

// Radical symbols resolved in declaration order on top of the parameter values.
// A radical already bound in params keeps that value, so a caller can pick the
// other square-root branch explicitly.
inline std::map<std::string, ComplexApprox> numeric_env(
    const LinearizationRecipe& r, const std::map<std::string, ComplexApprox>& params) {
    std::map<std::string, ComplexApprox> env = params;
    for (auto& [name, def] : r.radicals)
        if (!env.count(name)) env[name] = expr_eval(def, env);
    return env;
}

inline std::map<std::string, GaussianRational> exact_env(
    const LinearizationRecipe& r, const std::map<std::string, GaussianRational>& params) {
    std::map<std::string, GaussianRational> env = params;
    for (auto& [name, def] : r.radicals)
        if (!env.count(name)) env[name] = expr_eval_exact(def, env);
    return env;
}

// Binds every non-state variable to a scalar from env, landing in a 2-variable
// ring over the requested coefficient type.
template <class C>
Polynomial<C> bind_parameters(const PolyQi& p, std::size_t iz, std::size_t iw,
                              const RingPtr& zw_ring, const std::map<std::string, C>& env) {
    const auto& vars = p.ring()->vars;
    std::vector<Polynomial<C>> images;
    images.reserve(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i == iz) {
            images.push_back(Polynomial<C>::variable(zw_ring, std::size_t{0}));
        } else if (i == iw) {
            images.push_back(Polynomial<C>::variable(zw_ring, std::size_t{1}));
        } else {
            auto it = env.find(vars[i]);
            if (it == env.end()) throw Error("no value for parameter " + vars[i]);
            images.push_back(Polynomial<C>::constant(zw_ring, it->second));
        }
    }
    return map_poly(p, zw_ring, [&](const GaussianRational& q) {
        return detail::coeff_from_gaussian(q, static_cast<C*>(nullptr));
    }, images);
}

// The system with every parameter bound to a scalar, over a fresh z,w ring.
inline ComplexSystem complex_at_parameters(const ComplexSystem& s,
                                           const std::map<std::string, GaussianRational>& env) {
    RingPtr R2 = make_ring({s.ring->vars[s.iz], s.ring->vars[s.iw]},
                           MonomialOrder::degrevlex(), DomainKind::Qi);
    ComplexSystem out;
    out.ring = R2;
    out.iz = 0;
    out.iw = 1;
    out.X = bind_parameters<GaussianRational>(s.X, s.iz, s.iw, R2, env);
    out.Y = bind_parameters<GaussianRational>(s.Y, s.iz, s.iw, R2, env);
    return out;
}

namespace detail {

// Dense complex linear solve (Gauss, partial pivoting); A is n x n.
inline std::vector<ComplexApprox> solve_dense(std::vector<std::vector<ComplexApprox>> A,
                                              std::vector<ComplexApprox> b) {
    std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t rr = col + 1; rr < n; ++rr)
            if (std::abs(A[rr][col]) > std::abs(A[piv][col])) piv = rr;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        if (std::abs(A[col][col]) < 1e-300) continue;  // singular direction: leave zero
        for (std::size_t rr = col + 1; rr < n; ++rr) {
            ComplexApprox f = A[rr][col] / A[col][col];
            if (f == ComplexApprox{0.0, 0.0}) continue;
            for (std::size_t cc = col; cc < n; ++cc) A[rr][cc] -= f * A[col][cc];
            b[rr] -= f * b[col];
        }
    }
    std::vector<ComplexApprox> x(n, {0.0, 0.0});
    for (std::size_t col = n; col-- > 0;) {
        if (std::abs(A[col][col]) < 1e-300) continue;
        ComplexApprox s = b[col];
        for (std::size_t cc = col + 1; cc < n; ++cc) s -= A[col][cc] * x[cc];
        x[col] = s / A[col][col];
    }
    return x;
}

inline std::vector<Monomial> monomials_2v_up_to(unsigned d) {
    std::vector<Monomial> out;
    for (unsigned total = 0; total <= d; ++total)
        for (unsigned a = 0; a <= total; ++a) {
            Monomial m(2);
            m.e[0] = a;
            m.e[1] = total - a;
            out.push_back(m);
        }
    return out;
}

// Least-squares fit of K (degree <= kdeg) with R ~ K*f; returns the fit and
// the worst coefficient residual of R - K*f.
inline std::pair<PolyC, double> cofactor_fit(const PolyC& R, const PolyC& f, unsigned kdeg) {
    auto kmons = monomials_2v_up_to(kdeg);
    std::size_t q = kmons.size();
    unsigned rows_deg = kdeg + static_cast<unsigned>(f.degree());
    auto rmons = monomials_2v_up_to(std::max<unsigned>(rows_deg,
                                                       static_cast<unsigned>(R.degree())));
    auto coeff_at = [](const PolyC& p, const Monomial& m) -> ComplexApprox {
        for (auto& t : p.terms())
            if (t.m == m) return t.c;
        return {0.0, 0.0};
    };
    // Normal equations A^H A x = A^H b over rows indexed by product monomials.
    std::vector<std::vector<ComplexApprox>> N(q, std::vector<ComplexApprox>(q, {0.0, 0.0}));
    std::vector<ComplexApprox> rhs(q, {0.0, 0.0});
    for (auto& row : rmons) {
        std::vector<ComplexApprox> a(q, {0.0, 0.0});
        for (std::size_t j = 0; j < q; ++j)
            if (divides(kmons[j], row)) a[j] = coeff_at(f, mono_div(row, kmons[j]));
        ComplexApprox b = coeff_at(R, row);
        for (std::size_t j = 0; j < q; ++j) {
            if (a[j] == ComplexApprox{0.0, 0.0}) continue;
            ComplexApprox cj = std::conj(a[j]);
            for (std::size_t k = 0; k < q; ++k) N[j][k] += cj * a[k];
            rhs[j] += cj * b;
        }
    }
    auto x = solve_dense(std::move(N), std::move(rhs));
    std::vector<PolyC::Term> terms;
    for (std::size_t j = 0; j < q; ++j)
        if (!(x[j] == ComplexApprox{0.0, 0.0})) terms.push_back({kmons[j], x[j]});
    PolyC K = PolyC::from_terms(R.ring(), std::move(terms));
    double res = max_coeff_abs(R - K * f);
    return {K, res};
}

inline RingPtr numeric_state_ring(const LinearizationRecipe& r) {
    return make_ring({r.ring->vars[r.iz], r.ring->vars[r.iw]}, MonomialOrder::degrevlex(),
                     DomainKind::C);
}

}  // namespace detail

// Numeric check of Theorem conditions at one parameter point; radicals are
// evaluated on the principal branch. Cofactors are fitted by least squares
// and accepted below tol.
inline RecipeReport verify_recipe_numeric(const ComplexSystem& base,
                                          const LinearizationRecipe& r,
                                          const std::map<std::string, ComplexApprox>& params,
                                          double tol = 1e-9) {
    RecipeReport rep;
    rep.exact = false;
    rep.shape_ok = detail::recipe_shape_ok(r, rep.notes);
    auto env = numeric_env(r, params);
    RingPtr R2 = detail::numeric_state_ring(r);

    ComplexSystem s = recipe_system(base, r);
    PolyC F = PolyC::variable(R2, std::size_t{0}) + bind_parameters(s.X, r.iz, r.iw, R2, env);
    PolyC G = -(PolyC::variable(R2, std::size_t{1}) + bind_parameters(s.Y, r.iz, r.iw, R2, env));

    unsigned kdeg = static_cast<unsigned>(std::max<std::uint64_t>(
        {std::uint64_t{1}, s.X.degree_in({s.iz, s.iw}), s.Y.degree_in({s.iz, s.iw})})) - 1;

    std::map<std::string, PolyC> cof;
    rep.cofactors_ok = true;
    double worst = 0.0;
    for (auto& [name, fsym] : r.factors) {
        PolyC f = bind_parameters(fsym, r.iz, r.iw, R2, env);
        PolyC Lf = f.derivative(0) * F + f.derivative(1) * G;
        auto [K, res] = detail::cofactor_fit(Lf, f, kdeg);
        double scale = std::max(1.0, detail::max_coeff_abs(Lf));
        worst = std::max(worst, res / scale);
        if (res / scale >= tol) {
            rep.cofactors_ok = false;
            rep.notes.push_back("factor " + name + ": no cofactor within tolerance (residual " +
                                std::to_string(res / scale) + ")");
        }
        cof[name] = K;
    }

    auto sum_res = [&](const std::vector<RecipeTerm>& side, bool implicit_lead,
                       ComplexApprox target) {
        PolyC acc = PolyC::constant(R2, -target);
        for (std::size_t j = 0; j < side.size(); ++j) {
            ComplexApprox alpha = (implicit_lead && j == 0) || !side[j].exponent
                                      ? ComplexApprox{1.0, 0.0}
                                      : expr_eval(side[j].exponent, env);
            acc = acc + cof.at(side[j].factor).mul_scalar(alpha);
        }
        return detail::max_coeff_abs(acc);
    };
    double rz = sum_res(r.zside, true, {1.0, 0.0});
    double rw = r.wside.empty() ? sum_res(r.psi, false, {0.0, 0.0})
                                : sum_res(r.wside, true, {-1.0, 0.0});
    rep.z_sum_ok = rz < tol;
    rep.w_sum_ok = rw < tol;
    rep.residual = std::max({worst, rz, rw});
    if (!rep.z_sum_ok) rep.notes.push_back("zside cofactor sum misses 1 by " + std::to_string(rz));
    if (!rep.w_sum_ok)
        rep.notes.push_back((r.wside.empty() ? "psi sum misses 0 by " : "wside sum misses -1 by ") +
                            std::to_string(rw));
    return rep;
}

inline bool verify_first_integral_numeric(const ComplexSystem& base,
                                          const LinearizationRecipe& host,
                                          const FirstIntegralRecipe& fi,
                                          const std::map<std::string, ComplexApprox>& params,
                                          double tol = 1e-9) {
    auto env = numeric_env(host, params);
    RingPtr R2 = detail::numeric_state_ring(host);
    ComplexSystem s = recipe_system(base, host);
    PolyC F = PolyC::variable(R2, std::size_t{0}) + bind_parameters(s.X, host.iz, host.iw, R2, env);
    PolyC G = -(PolyC::variable(R2, std::size_t{1}) +
                bind_parameters(s.Y, host.iz, host.iw, R2, env));
    unsigned kdeg = static_cast<unsigned>(std::max<std::uint64_t>(
        {std::uint64_t{1}, s.X.degree_in({s.iz, s.iw}), s.Y.degree_in({s.iz, s.iw})})) - 1;
    PolyC acc = PolyC::zero(R2);
    for (auto& t : fi.factors) {
        PolyC f = bind_parameters(host.factor(t.factor), host.iz, host.iw, R2, env);
        PolyC Lf = f.derivative(0) * F + f.derivative(1) * G;
        auto [K, res] = detail::cofactor_fit(Lf, f, kdeg);
        if (res >= tol * std::max(1.0, detail::max_coeff_abs(Lf))) return false;
        ComplexApprox alpha = t.exponent ? expr_eval(t.exponent, env) : ComplexApprox{1.0, 0.0};
        acc = acc + K.mul_scalar(alpha);
    }
    return detail::max_coeff_abs(acc) < tol;
}

// ---------------------------------------------------------------------------
// Series-level validation: z1 and w1 expanded as truncated series at a
// parameter point must satisfy dz1 = z1 and dw1 = -w1 through degree N.

struct SeriesReport {
    unsigned N = 0;
    bool exact = true;
    bool zero = false;      // exact mode
    double residual = 0.0;  // numeric mode
    std::vector<std::string> notes;

    bool passed(double tol = 1e-9) const { return exact ? zero : residual < tol; }
};

namespace detail {

template <class C>
SeriesReport series_check_impl(const ComplexSystem& base, const LinearizationRecipe& r,
                               const std::map<std::string, C>& env, unsigned N) {
    SeriesReport rep;
    rep.N = N;
    rep.exact = std::is_same_v<C, GaussianRational>;
    RingPtr R2 = make_ring({r.ring->vars[r.iz], r.ring->vars[r.iw]}, MonomialOrder::degrevlex(),
                           rep.exact ? DomainKind::Qi : DomainKind::C);
    std::vector<std::size_t> sv{0, 1};
    unsigned M = N + 1;  // internal truncation; division by z costs one degree

    ComplexSystem s = recipe_system(base, r);
    Polynomial<C> F = Polynomial<C>::variable(R2, std::size_t{0}) +
                      bind_parameters(s.X, r.iz, r.iw, R2, env);
    Polynomial<C> G = -(Polynomial<C>::variable(R2, std::size_t{1}) +
                        bind_parameters(s.Y, r.iz, r.iw, R2, env));
    auto ddt = [&](const Polynomial<C>& p) {
        return series_truncate(p.derivative(0) * F + p.derivative(1) * G, sv, M);
    };
    auto product = [&](const std::vector<RecipeTerm>& side, bool implicit_lead) {
        Polynomial<C> acc = Polynomial<C>::one(R2);
        for (std::size_t j = 0; j < side.size(); ++j) {
            Polynomial<C> f = series_truncate(
                bind_parameters(r.factor(side[j].factor), r.iz, r.iw, R2, env), sv, M);
            if ((implicit_lead && j == 0) || !side[j].exponent) {
                acc = series_mul(acc, f, sv, M);
            } else {
                C alpha = [&] {
                    if constexpr (std::is_same_v<C, GaussianRational>)
                        return expr_eval_exact(side[j].exponent, env);
                    else
                        return expr_eval(side[j].exponent, env);
                }();
                acc = series_mul(acc, series_pow(f, alpha, sv, M), sv, M);
            }
        }
        return acc;
    };

    Polynomial<C> z1 = product(r.zside, true);
    Polynomial<C> res1 = series_truncate(ddt(z1) - z1, sv, N);

    Polynomial<C> w1(R2);
    double leak = 0.0;  // float noise stripped from terms that block division by z
    if (!r.wside.empty()) {
        w1 = product(r.wside, true);
    } else {
        Polynomial<C> psi = product(r.psi, false);
        Polynomial<C> u = psi - psi.component_in(sv, 0);
        if constexpr (!std::is_same_v<C, GaussianRational>) {
            std::vector<typename Polynomial<C>::Term> kept;
            for (auto& t : u.terms()) {
                if (t.m.e[0] == 0)
                    leak = std::max(leak, coeff_abs(t.c));
                else
                    kept.push_back(t);
            }
            u = Polynomial<C>::from_sorted_terms(u.ring(), std::move(kept));
        }
        Polynomial<C> q = series_divide_by_var(u, 0);
        // z1 = z * (unit) is required here; the leading recipe factor must be
        // divisible by the state variable for the first-integral fallback.
        Polynomial<C> zu = series_divide_by_var(z1, 0);
        C scale = [&] {
            if constexpr (std::is_same_v<C, GaussianRational>)
                return expr_eval_exact(r.scale, env);
            else
                return expr_eval(r.scale, env);
        }();
        w1 = series_mul(q, series_inverse(zu, sv, M), sv, M).mul_scalar(scale);
    }
    Polynomial<C> res2 = series_truncate(ddt(w1) + w1, sv, N);

    // The computed w1 must actually start with w; a wrong scale shows up here.
    Polynomial<C> wlin = w1.component_in(sv, 1) - Polynomial<C>::variable(R2, std::size_t{1});

    if constexpr (std::is_same_v<C, GaussianRational>) {
        rep.zero = res1.is_zero() && res2.is_zero() && wlin.is_zero();
        if (!rep.zero) {
            if (!res1.is_zero()) rep.notes.push_back("dz1 - z1 = " + res1.str());
            if (!res2.is_zero()) rep.notes.push_back("dw1 + w1 = " + res2.str());
            if (!wlin.is_zero()) rep.notes.push_back("w1 linear part off by " + wlin.str());
        }
    } else {
        rep.residual =
            std::max({max_coeff_abs(res1), max_coeff_abs(res2), max_coeff_abs(wlin), leak});
    }
    return rep;
}

}  // namespace detail

inline SeriesReport series_linearization_check(const ComplexSystem& base,
                                               const LinearizationRecipe& r,
                                               const std::map<std::string, GaussianRational>&
                                                   params,
                                               unsigned N) {
    return detail::series_check_impl<GaussianRational>(base, r, exact_env(r, params), N);
}

inline SeriesReport series_linearization_check_numeric(
    const ComplexSystem& base, const LinearizationRecipe& r,
    const std::map<std::string, ComplexApprox>& params, unsigned N) {
    return detail::series_check_impl<ComplexApprox>(base, r, numeric_env(r, params), N);
}

// ---------------------------------------------------------------------------
// Factor discovery at a bound parameter point (the system ring has only the
// two state variables): the bilinear system for (f, K) is solved by Groebner
// bases under a sequence of coefficient normalizations.

namespace detail {

inline std::optional<BigRational> snap_rational(double x, long max_den = 1000000,
                                                double tol = 1e-8) {
    if (!std::isfinite(x)) return std::nullopt;
    // Continued-fraction convergents of x.
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double v = x;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(v);
        if (fl > 1e15 || fl < -1e15) break;
        long a = static_cast<long>(fl);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double rem = v - fl;
        if (std::abs(static_cast<double>(p1) / q1 - x) < tol * std::max(1.0, std::abs(x)))
            break;
        if (rem < 1e-15) break;
        v = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    double approx = static_cast<double>(p1) / q1;
    if (std::abs(approx - x) > tol * std::max(1.0, std::abs(x))) return std::nullopt;
    return BigRational(p1, static_cast<unsigned long>(q1));
}

struct UniPoly {
    std::vector<GaussianRational> c;  // ascending degree, c.back() != 0
};

inline std::optional<UniPoly> as_univariate(const PolyQi& p, std::size_t var) {
    UniPoly u;
    for (auto& t : p.terms()) {
        for (std::size_t i = 0; i < t.m.e.size(); ++i)
            if (i != var && t.m.e[i] != 0) return std::nullopt;
        std::size_t d = t.m.e[var];
        if (u.c.size() <= d) u.c.resize(d + 1, GaussianRational(0));
        u.c[d] = t.c;
    }
    while (!u.c.empty() && u.c.back().is_zero()) u.c.pop_back();
    return u;
}

inline GaussianRational uni_eval(const UniPoly& u, const GaussianRational& x) {
    GaussianRational acc(0);
    for (std::size_t i = u.c.size(); i-- > 0;) acc = acc * x + u.c[i];
    return acc;
}

// Exact Gaussian-rational roots. Degrees 1 and 2 are solved in closed form;
// higher degrees run Durand-Kerner and snap candidates back to Q(i), keeping
// only exactly verified roots.
inline std::vector<GaussianRational> exact_roots(const UniPoly& u) {
    std::vector<GaussianRational> roots;
    if (u.c.size() <= 1) return roots;
    if (u.c.size() == 2) {
        roots.push_back(-(u.c[0] / u.c[1]));
        return roots;
    }
    if (u.c.size() == 3) {
        GaussianRational a = u.c[2], b = u.c[1], c = u.c[0];
        GaussianRational disc = b * b - GaussianRational(4) * a * c;
        auto s = exact_sqrt(disc);
        if (s) {
            GaussianRational two_a = GaussianRational(2) * a;
            roots.push_back((-b + *s) / two_a);
            GaussianRational r2 = (-b - *s) / two_a;
            if (!(r2 == roots[0])) roots.push_back(r2);
            return roots;
        }
        return roots;  // irrational pair: nothing exact to report
    }
    // Durand-Kerner with snapping.
    std::size_t n = u.c.size() - 1;
    std::vector<ComplexApprox> cc;
    for (auto& q : u.c) cc.push_back(q.to_complex());
    std::vector<ComplexApprox> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = std::pow(ComplexApprox{0.4, 0.9}, static_cast<double>(k + 1));
    auto eval = [&](ComplexApprox t) {
        ComplexApprox acc{0.0, 0.0};
        for (std::size_t i = cc.size(); i-- > 0;) acc = acc * t + cc[i];
        return acc / cc.back();
    };
    for (int it = 0; it < 400; ++it) {
        double moved = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            ComplexApprox d{1.0, 0.0};
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) d *= x[k] - x[j];
            if (d == ComplexApprox{0.0, 0.0}) { x[k] += ComplexApprox{1e-4, 1e-4}; continue; }
            ComplexApprox step = eval(x[k]) / d;
            x[k] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14) break;
    }
    for (auto& t : x) {
        auto re = snap_rational(t.real());
        auto im = snap_rational(t.imag());
        if (!re || !im) continue;
        GaussianRational cand(*re, *im);
        if (uni_eval(u, cand).is_zero()) {
            bool dup = false;
            for (auto& r0 : roots) dup = dup || r0 == cand;
            if (!dup) roots.push_back(cand);
        }
    }
    return roots;
}

// Back-substitution over a zero-dimensional lex basis: assign variables from
// the lex-last one upward. Coordinates constrained by nothing are pinned to
// zero; every full assignment is checked against all generators.
inline void solve_zero_dim_rec(const std::vector<PolyQi>& gens, const RingPtr& U,
                               std::vector<std::optional<GaussianRational>>& assign,
                               std::size_t level,
                               std::vector<std::vector<GaussianRational>>& out,
                               std::size_t budget) {
    if (out.size() >= budget) return;
    std::size_t n = U->vars.size();
    if (level == n) {
        std::vector<GaussianRational> point;
        for (auto& a : assign) point.push_back(*a);
        for (auto& g : gens) {
            GaussianRational v = g.evaluate(point);
            if (!v.is_zero()) return;
        }
        out.push_back(std::move(point));
        return;
    }
    std::size_t var = n - 1 - level;
    std::vector<std::optional<PolyQi>> images(n);
    for (std::size_t i = 0; i < n; ++i)
        if (assign[i]) images[i] = PolyQi::constant(U, *assign[i]);
    std::optional<UniPoly> best;
    for (auto& g : gens) {
        PolyQi h = g.substitute(images);
        auto u = as_univariate(h, var);
        if (!u || u->c.size() <= 1) continue;
        if (!best || u->c.size() < best->c.size()) best = u;
    }
    if (!best) {
        assign[var] = GaussianRational(0);
        solve_zero_dim_rec(gens, U, assign, level + 1, out, budget);
        assign[var].reset();
        return;
    }
    for (auto& root : exact_roots(*best)) {
        assign[var] = root;
        solve_zero_dim_rec(gens, U, assign, level + 1, out, budget);
        assign[var].reset();
        if (out.size() >= budget) return;
    }
}

}  // namespace detail

// All Darboux factors of degree <= max_deg with Gaussian-rational coefficients
// whose lowest monomial (graded, z over w) is 1, w or z, deduplicated up to
// scalar. Factors with a higher lowest monomial (zw, z^2, ...) are products of
// these. The system must have its parameters already bound (state variables
// only).
//
// For each pin the remaining unknowns split into factor coefficients c and
// cofactor coefficients k. Since the pinned coefficient is 1, reading
// E = L(f) - K*f at the monomial pin + kappa determines k_kappa in terms of c
// and earlier k's, so every k eliminates symbolically and only a small ideal
// in the c's is left for the Groebner/back-substitution solve.
inline std::vector<DarbouxFactor> discover_factors(const ComplexSystem& s, unsigned max_deg,
                                                   const GBOptions& opt = {}) {
    if (s.ring->vars.size() != 2)
        throw Error("discover_factors needs a parameter-free system");
    unsigned kdeg = static_cast<unsigned>(std::max<std::uint64_t>(
        {std::uint64_t{1}, s.X.degree(), s.Y.degree()})) - 1;
    auto fmons = detail::monomials_2v_up_to(max_deg);  // graded ascending: 1, w, z, w^2, ...
    auto kmons = detail::monomials_2v_up_to(kdeg);

    std::vector<DarbouxFactor> found;
    auto seen = [&](const PolyQi& f) {
        for (auto& df : found) {
            // Equal up to scalar: cross-multiply leading coefficients.
            if (df.f.term_count() != f.term_count()) continue;
            PolyQi a = df.f.mul_scalar(f.leading().c), b = f.mul_scalar(df.f.leading().c);
            if (a == b) return true;
        }
        return false;
    };

    for (std::size_t norm = 0; norm < 3 && norm < fmons.size(); ++norm) {
        const Monomial& pin = fmons[norm];

        // Mixed ring: unknown f coefficients above the pin, unknown K
        // coefficients, then z and w.
        std::vector<std::string> vars;
        std::vector<Monomial> cvars;
        for (std::size_t j = norm + 1; j < fmons.size(); ++j) {
            const Monomial& m = fmons[j];
            vars.push_back("c" + std::to_string(m.e[0]) + std::to_string(m.e[1]));
            cvars.push_back(m);
        }
        std::size_t nk = kmons.size();
        for (auto& m : kmons)
            vars.push_back("k" + std::to_string(m.e[0]) + std::to_string(m.e[1]));
        std::size_t zi = vars.size(), wi = vars.size() + 1;
        vars.push_back(s.ring->vars[s.iz]);
        vars.push_back(s.ring->vars[s.iw]);
        RingPtr M = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);

        auto lift_state = [&](const Monomial& m2) {
            Monomial m(vars.size());
            m.e[zi] = m2.e[0];
            m.e[wi] = m2.e[1];
            return m;
        };
        auto id = [](const GaussianRational& q) { return q; };
        PolyQi Xm = transport<GaussianRational, GaussianRational>(s.X, M, id);
        PolyQi Ym = transport<GaussianRational, GaussianRational>(s.Y, M, id);
        ComplexSystem sm{M, zi, wi, Xm, Ym, {}};

        PolyQi f = PolyQi::zero(M), K = PolyQi::zero(M);
        {
            std::vector<PolyQi::Term> fterms, kterms;
            fterms.push_back({lift_state(pin), GaussianRational(1)});
            for (std::size_t j = 0; j < cvars.size(); ++j) {
                Monomial m = lift_state(cvars[j]);
                m.e[j] = 1;
                fterms.push_back({m, GaussianRational(1)});
            }
            for (std::size_t j = 0; j < nk; ++j) {
                Monomial m = lift_state(kmons[j]);
                m.e[cvars.size() + j] = 1;
                kterms.push_back({m, GaussianRational(1)});
            }
            f = PolyQi::from_terms(M, std::move(fterms));
            K = PolyQi::from_terms(M, std::move(kterms));
        }

        PolyQi E = lie_derivative(sm, f) - K * f;

        // Triangular elimination of the k's, lowest monomial first.
        for (std::size_t j = 0; j < nk; ++j) {
            std::size_t kj = cvars.size() + j;
            Monomial target = mono_mul(kmons[j], pin);
            PolyQi g = E.coefficient_of({zi, wi}, {target.e[0], target.e[1]});
            // g = -k_j + rest, rest free of k_j and of later k's.
            PolyQi kval = g + PolyQi::variable(M, kj);
            if (kval.degree_in({kj}) != 0)
                throw Error("cofactor elimination lost triangularity");
            std::vector<std::optional<PolyQi>> im(vars.size());
            im[kj] = kval;
            E = E.substitute(im);
        }

        // What remains constrains the c's only.
        std::vector<PolyQi> gens;
        {
            std::map<std::pair<std::uint32_t, std::uint32_t>, bool> seen_zw;
            for (auto& t : E.terms()) seen_zw[{t.m.e[zi], t.m.e[wi]}] = true;
            for (auto& [zw, unused] : seen_zw) {
                PolyQi g = E.coefficient_of({zi, wi}, {zw.first, zw.second});
                if (!g.is_zero()) gens.push_back(g);
            }
        }
        std::vector<std::string> cnames(vars.begin(), vars.begin() + cvars.size());
        RingPtr U = make_ring(cnames, MonomialOrder::lex(), DomainKind::Qi);
        Ideal<GaussianRational> I{U, {}};
        for (auto& g : gens)
            I.gens.push_back(transport<GaussianRational, GaussianRational>(g, U, id));
        GroebnerBasis<GaussianRational> gb = buchberger(I, opt);
        bool trivial = false;
        for (auto& g : gb.polys)
            if (g.is_constant() && !g.is_zero()) trivial = true;
        if (trivial) continue;

        std::vector<std::optional<GaussianRational>> assign(cnames.size());
        std::vector<std::vector<GaussianRational>> points;
        detail::solve_zero_dim_rec(gb.polys, U, assign, 0, points, 64);

        RingPtr R2 = make_ring({s.ring->vars[s.iz], s.ring->vars[s.iw]},
                               MonomialOrder::degrevlex(), s.ring->domain);
        for (auto& pt : points) {
            std::vector<PolyQi::Term> fterms;
            Monomial mp(2);
            mp.e[0] = pin.e[0];
            mp.e[1] = pin.e[1];
            fterms.push_back({mp, GaussianRational(1)});
            for (std::size_t j = 0; j < cvars.size(); ++j) {
                if (pt[j].is_zero()) continue;
                Monomial m(2);
                m.e[0] = cvars[j].e[0];
                m.e[1] = cvars[j].e[1];
                fterms.push_back({m, pt[j]});
            }
            PolyQi fr = PolyQi::from_terms(R2, std::move(fterms));
            if (fr.is_constant()) continue;
            PolyQi fr_t = transport<GaussianRational, GaussianRational>(fr, s.ring, id);
            PolyQi Kr(s.ring);
            try {
                Kr = cofactor_of(s, fr_t);
            } catch (const NotExactError&) {
                continue;  // spurious zero-pinned coordinate
            }
            if (!seen(fr_t)) found.push_back({fr_t, Kr});
        }
    }
    std::sort(found.begin(), found.end(), [](const DarbouxFactor& a, const DarbouxFactor& b) {
        if (a.f.degree() != b.f.degree()) return a.f.degree() < b.f.degree();
        return a.f.str() < b.f.str();
    });
    return found;
}

}  // namespace isochron
