#pragma once

// Planar polynomial systems around a linear center, their complexified form,
// parameter substitution, linear coordinate changes, and the system file
// format ("var", "param", "dx =", "dy =" lines).

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "poly.hpp"

namespace isochron {

// dx/dt = -y + (higher order), dy/dt = x + (higher order); coefficients are
// Gaussian-rational polynomials in the parameters.
struct PlanarSystem {
    RingPtr ring;  // vars = params..., then the two state variables
    std::size_t ix = 0, iy = 0;
    PolyQi dx, dy;
    std::vector<std::string> params;

    std::vector<std::size_t> state_vars() const { return {ix, iy}; }
    const std::string& xname() const { return ring->vars[ix]; }
    const std::string& yname() const { return ring->vars[iy]; }
};

// dz/dtau = z + X, dw/dtau = -w - Y after complexification and time rescale;
// X and Y start at degree 2 in (z, w).
struct ComplexSystem {
    RingPtr ring;
    std::size_t iz = 0, iw = 0;
    PolyQi X, Y;
    std::vector<std::string> params;

    std::vector<std::size_t> state_vars() const { return {iz, iw}; }
};

inline PlanarSystem planar_from_polys(RingPtr ring, const std::string& xvar,
                                      const std::string& yvar, PolyQi dx, PolyQi dy,
                                      bool check_shape = true) {
    PlanarSystem s;
    int ix = ring->index_of(xvar), iy = ring->index_of(yvar);
    if (ix < 0 || iy < 0 || ix == iy) throw Error("bad state variable names");
    s.ring = std::move(ring);
    s.ix = static_cast<std::size_t>(ix);
    s.iy = static_cast<std::size_t>(iy);
    s.dx = std::move(dx);
    s.dy = std::move(dy);
    for (std::size_t i = 0; i < s.ring->vars.size(); ++i)
        if (i != s.ix && i != s.iy) s.params.push_back(s.ring->vars[i]);
    if (check_shape) {
        auto sv = s.state_vars();
        auto x = PolyQi::variable(s.ring, s.ix);
        auto y = PolyQi::variable(s.ring, s.iy);
        if (!s.dx.component_in(sv, 0).is_zero() || !s.dy.component_in(sv, 0).is_zero() ||
            s.dx.component_in(sv, 1) != -y || s.dy.component_in(sv, 1) != x)
            throw DegeneracyError("linear part must be dx = -y, dy = x");
    }
    return s;
}

// Nonlinear parts p, q with dx = -y + p, dy = x + q.
inline PolyQi nonlinear_p(const PlanarSystem& s) {
    return s.dx + PolyQi::variable(s.ring, s.iy);
}
inline PolyQi nonlinear_q(const PlanarSystem& s) {
    return s.dy - PolyQi::variable(s.ring, s.ix);
}

// z = x + iy, w = x - iy, then rescale time by i, giving dz/dtau = z + X with
// X = -i(p + iq) and dw/dtau = -w - Y with Y = i(p - iq), both evaluated at
// x = (z+w)/2, y = -(i/2)(z-w).
inline ComplexSystem complexify(const PlanarSystem& s) {
    ComplexSystem c;
    c.params = s.params;
    std::vector<std::string> vars = s.params;
    std::string zn = "z", wn = "w";
    for (auto& pname : s.params) {
        if (pname == zn) zn = "z_c";
        if (pname == wn) wn = "w_c";
    }
    vars.push_back(zn);
    vars.push_back(wn);
    c.ring = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);
    c.iz = vars.size() - 2;
    c.iw = vars.size() - 1;

    auto z = PolyQi::variable(c.ring, c.iz);
    auto w = PolyQi::variable(c.ring, c.iw);
    GaussianRational half(BigRational(1, 2));
    GaussianRational mhalf_i = GaussianRational(BigRational(0), BigRational(-1, 2));

    std::vector<PolyQi> images;
    for (std::size_t i = 0; i < s.ring->vars.size(); ++i) {
        if (i == s.ix) {
            images.push_back((z + w).mul_scalar(half));
        } else if (i == s.iy) {
            images.push_back((z - w).mul_scalar(mhalf_i));
        } else {
            int j = c.ring->index_of(s.ring->vars[i]);
            images.push_back(PolyQi::variable(c.ring, static_cast<std::size_t>(j)));
        }
    }
    auto lift = [&](const PolyQi& f) {
        return map_poly(f, c.ring, [](const GaussianRational& v) { return v; }, images);
    };
    PolyQi p = lift(nonlinear_p(s));
    PolyQi q = lift(nonlinear_q(s));
    GaussianRational iu = GaussianRational::i();
    c.X = (p + q.mul_scalar(iu)).mul_scalar(-iu);
    c.Y = (p - q.mul_scalar(iu)).mul_scalar(iu);
    return c;
}

// Inverse of complexify; used to round-trip and to realize complex systems.
inline PlanarSystem realify(const ComplexSystem& c, const std::string& xvar = "x",
                            const std::string& yvar = "y") {
    std::vector<std::string> vars = c.params;
    vars.push_back(xvar);
    vars.push_back(yvar);
    RingPtr R = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);
    std::size_t ix = vars.size() - 2, iy = vars.size() - 1;
    auto x = PolyQi::variable(R, ix);
    auto y = PolyQi::variable(R, iy);
    GaussianRational iu = GaussianRational::i();

    std::vector<PolyQi> images;
    for (std::size_t i = 0; i < c.ring->vars.size(); ++i) {
        if (i == c.iz) {
            images.push_back(x + y.mul_scalar(iu));
        } else if (i == c.iw) {
            images.push_back(x - y.mul_scalar(iu));
        } else {
            int j = R->index_of(c.ring->vars[i]);
            images.push_back(PolyQi::variable(R, static_cast<std::size_t>(j)));
        }
    }
    auto drop = [&](const PolyQi& f) {
        return map_poly(f, R, [](const GaussianRational& v) { return v; }, images);
    };
    // p + iq = iX, p - iq = -iY
    PolyQi ip_plus = drop(c.X).mul_scalar(iu);
    PolyQi ip_minus = drop(c.Y).mul_scalar(-iu);
    GaussianRational half(BigRational(1, 2));
    PolyQi p = (ip_plus + ip_minus).mul_scalar(half);
    PolyQi q = (ip_plus - ip_minus).mul_scalar(half * (-iu));
    return planar_from_polys(R, xvar, yvar, -y + p, x + q);
}

// ---------------------------------------------------------------------------
// Parameter substitution

inline PlanarSystem at_parameters(const PlanarSystem& s,
                                  const std::map<std::string, GaussianRational>& values) {
    RingPtr R = make_ring({s.xname(), s.yname()}, MonomialOrder::degrevlex(), DomainKind::Qi);
    std::vector<PolyQi> images;
    for (std::size_t i = 0; i < s.ring->vars.size(); ++i) {
        if (i == s.ix) {
            images.push_back(PolyQi::variable(R, std::size_t{0}));
        } else if (i == s.iy) {
            images.push_back(PolyQi::variable(R, std::size_t{1}));
        } else {
            auto it = values.find(s.ring->vars[i]);
            if (it == values.end())
                throw Error("no value for parameter " + s.ring->vars[i]);
            images.push_back(PolyQi::constant(R, it->second));
        }
    }
    auto id = [](const GaussianRational& v) { return v; };
    return planar_from_polys(R, s.xname(), s.yname(), map_poly(s.dx, R, id, images),
                             map_poly(s.dy, R, id, images));
}

// ---------------------------------------------------------------------------
// Coordinate changes (no shape requirement on the output)

// x = a*u + b*v, y = c*u + d*v and dt = lambda dtau, with (u, v) written back
// into the same variable slots.
inline PlanarSystem linear_transform(const PlanarSystem& s, const GaussianRational& a,
                                     const GaussianRational& b, const GaussianRational& c,
                                     const GaussianRational& d, const GaussianRational& lambda,
                                     bool check_shape = false) {
    GaussianRational det = a * d - b * c;
    if (det.is_zero()) throw DegeneracyError("singular linear transform");
    auto u = PolyQi::variable(s.ring, s.ix);
    auto v = PolyQi::variable(s.ring, s.iy);
    std::vector<std::optional<PolyQi>> images(s.ring->vars.size());
    images[s.ix] = u.mul_scalar(a) + v.mul_scalar(b);
    images[s.iy] = u.mul_scalar(c) + v.mul_scalar(d);
    PolyQi fx = s.dx.substitute(images);
    PolyQi fy = s.dy.substitute(images);
    GaussianRational inv_det = det.inv();
    // (du, dv) = lambda * A^{-1} (fx, fy)
    PolyQi du = (fx.mul_scalar(d) - fy.mul_scalar(b)).mul_scalar(inv_det * lambda);
    PolyQi dv = (fy.mul_scalar(a) - fx.mul_scalar(c)).mul_scalar(inv_det * lambda);
    return planar_from_polys(s.ring, s.xname(), s.yname(), std::move(du), std::move(dv),
                             check_shape);
}

// Shift the origin to (x0, y0): u = x - x0, v = y - y0.
inline PlanarSystem translate(const PlanarSystem& s, const GaussianRational& x0,
                              const GaussianRational& y0) {
    std::vector<std::optional<PolyQi>> images(s.ring->vars.size());
    images[s.ix] = PolyQi::variable(s.ring, s.ix) + PolyQi::constant(s.ring, x0);
    images[s.iy] = PolyQi::variable(s.ring, s.iy) + PolyQi::constant(s.ring, y0);
    PlanarSystem out = s;
    out.dx = s.dx.substitute(images);
    out.dy = s.dy.substitute(images);
    return out;
}

// Time reversal dt -> -dt.
inline PlanarSystem reverse_time(const PlanarSystem& s) {
    PlanarSystem out = s;
    out.dx = -s.dx;
    out.dy = -s.dy;
    return out;
}

// ---------------------------------------------------------------------------
// System file format

inline PlanarSystem parse_system(const std::string& text) {
    std::vector<std::string> state, params;
    std::string dx_text, dy_text;
    std::size_t dx_line = 0, dy_line = 0;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        if (head == "var") {
            std::string v;
            while (ls >> v) state.push_back(v);
        } else if (head == "param") {
            std::string v;
            while (ls >> v) params.push_back(v);
        } else if (head == "dx" || head == "dy") {
            std::string eq;
            if (!(ls >> eq) || eq != "=")
                throw ParseError("expected '=' after " + head, lineno, 1);
            std::string rest;
            std::getline(ls, rest);
            (head == "dx" ? dx_text : dy_text) = rest;
            (head == "dx" ? dx_line : dy_line) = lineno;
        } else {
            throw ParseError("unknown directive '" + head + "'", lineno, 1);
        }
    }
    if (state.size() != 2) throw ParseError("need exactly two state variables", lineno, 1);
    if (dx_text.empty() || dy_text.empty())
        throw ParseError("missing dx or dy equation", lineno, 1);

    std::vector<std::string> vars = params;
    vars.push_back(state[0]);
    vars.push_back(state[1]);
    RingPtr R = make_ring(vars, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto parse_rhs = [&](const std::string& src, std::size_t at) {
        try {
            return parse_polynomial<GaussianRational>(src, R);
        } catch (const ParseError& e) {
            throw ParseError(e.msg, at, e.column);
        }
    };
    return planar_from_polys(R, state[0], state[1], parse_rhs(dx_text, dx_line),
                             parse_rhs(dy_text, dy_line));
}

inline std::string print_system(const PlanarSystem& s) {
    std::string out = "var " + s.xname() + " " + s.yname() + "\n";
    if (!s.params.empty()) {
        out += "param";
        for (auto& p : s.params) out += " " + p;
        out += "\n";
    }
    out += "dx = " + s.dx.str() + "\n";
    out += "dy = " + s.dy.str() + "\n";
    return out;
}

}  // namespace isochron
