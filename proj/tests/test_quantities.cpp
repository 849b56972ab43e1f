#include <catch2/catch_amalgamated.hpp>

#include "isochron/groebner.hpp"
#include "isochron/quantities.hpp"

using namespace isochron;

static PolyQi qi(const std::string& text, const RingPtr& R) {
    return parse_polynomial<GaussianRational>(text, R);
}
static PolyQ qq(const std::string& text, const RingPtr& R) {
    return parse_polynomial<BigRational>(text, R);
}

static std::vector<std::string> reduced_gb_strings(const RingPtr& R, std::vector<PolyQ> gens) {
    auto gb = buchberger(make_ideal(R, std::move(gens)));
    std::vector<std::string> out;
    for (auto& g : gb.polys) out.push_back(g.str());
    return out;
}

// Re I, Im I, Re J, Im J for pairs with k <= upto, over the rational image of
// the parameter ring.
static std::vector<PolyQ> real_pair_generators(const std::vector<QuantityPair>& pairs,
                                               unsigned upto, RingPtr& RQ_out) {
    std::vector<PolyQ> gens;
    for (auto& qp : pairs) {
        if (qp.k > upto) continue;
        auto [re_i, im_i] = split_gaussian(qp.I);
        auto [re_j, im_j] = split_gaussian(qp.J);
        RQ_out = re_i.ring();
        gens.push_back(re_i);
        gens.push_back(im_i);
        gens.push_back(re_j);
        gens.push_back(im_j);
    }
    return gens;
}

// ---------------------------------------------------------------------------
// Independent check in the original (x, y) coordinates.  Seek x1 = x + U,
// y1 = y + V with x1' = -y1, y1' = x1 along dx = -y + p, dy = x + q.  Each
// state degree m gives a linear system with a constant coefficient matrix and
// parameter-polynomial right-hand sides:
//   v_{ab} + (b+1) u_{a-1,b+1} - (a+1) u_{a+1,b-1} = -[p + U_x p + U_y q]_{ab}
//   u_{ab} - (b+1) v_{a-1,b+1} + (a+1) v_{a+1,b-1} =  [q + V_x p + V_y q]_{ab}
// Rows whose coefficients eliminate to zero with a nonzero right side are the
// obstructions; free coefficients are set to zero and the sweep continues.
struct BruteForceOracle {
    RingPtr R;  // rational domain: params..., x, y
    std::size_t ix, iy;
    PolyQ p, q;
    std::vector<std::vector<PolyQ>> per_degree;  // index m-2

    BruteForceOracle(RingPtr ring, const PolyQ& dx, const PolyQ& dy, std::size_t ix_,
                     std::size_t iy_)
        : R(std::move(ring)), ix(ix_), iy(iy_) {
        p = dx + PolyQ::variable(R, iy);
        q = dy - PolyQ::variable(R, ix);
    }

    void run(unsigned N) {
        std::vector<std::size_t> sv{ix, iy};
        PolyQ U = PolyQ::zero(R), V = PolyQ::zero(R);
        for (unsigned m = 2; m <= N; ++m) {
            PolyQ r1 = p + U.derivative(ix) * p + U.derivative(iy) * q;
            PolyQ r2 = q + V.derivative(ix) * p + V.derivative(iy) * q;
            std::size_t n = m + 1, dim = 2 * n;
            std::vector<std::vector<BigRational>> A(dim,
                                                    std::vector<BigRational>(dim, BigRational(0)));
            std::vector<PolyQ> rhs(dim, PolyQ::zero(R));
            for (std::uint32_t a = 0; a <= m; ++a) {
                std::uint32_t b = m - a;
                std::size_t r_first = a, r_second = n + a;
                A[r_first][n + a] = A[r_first][n + a] + BigRational(1);
                if (a >= 1) A[r_first][a - 1] = A[r_first][a - 1] + BigRational(long(b) + 1);
                if (b >= 1) A[r_first][a + 1] = A[r_first][a + 1] - BigRational(long(a) + 1);
                rhs[r_first] = -r1.coefficient_of(sv, {a, b});

                A[r_second][a] = A[r_second][a] + BigRational(1);
                if (a >= 1) A[r_second][n + a - 1] = A[r_second][n + a - 1] - BigRational(long(b) + 1);
                if (b >= 1) A[r_second][n + a + 1] = A[r_second][n + a + 1] + BigRational(long(a) + 1);
                rhs[r_second] = r2.coefficient_of(sv, {a, b});
            }

            // Reduced row echelon form, eliminating above and below each pivot.
            std::vector<std::pair<std::size_t, std::size_t>> pivots;
            std::size_t rank = 0;
            for (std::size_t col = 0; col < dim && rank < dim; ++col) {
                std::size_t pr = rank;
                while (pr < dim && A[pr][col].is_zero()) ++pr;
                if (pr == dim) continue;
                std::swap(A[pr], A[rank]);
                std::swap(rhs[pr], rhs[rank]);
                BigRational inv = A[rank][col].inv();
                for (std::size_t c2 = col; c2 < dim; ++c2) A[rank][c2] = A[rank][c2] * inv;
                rhs[rank] = rhs[rank].mul_scalar(inv);
                for (std::size_t r2 = 0; r2 < dim; ++r2) {
                    if (r2 == rank || A[r2][col].is_zero()) continue;
                    BigRational f = A[r2][col];
                    for (std::size_t c2 = col; c2 < dim; ++c2)
                        A[r2][c2] = A[r2][c2] - f * A[rank][c2];
                    rhs[r2] = rhs[r2] - rhs[rank].mul_scalar(f);
                }
                pivots.push_back({rank, col});
                ++rank;
            }
            std::vector<PolyQ> obs;
            for (std::size_t r2 = rank; r2 < dim; ++r2)
                if (!rhs[r2].is_zero()) obs.push_back(rhs[r2]);
            per_degree.push_back(std::move(obs));

            std::vector<PolyQ> sol(dim, PolyQ::zero(R));
            for (auto& [row, col] : pivots) sol[col] = rhs[row];
            for (std::uint32_t a = 0; a <= m; ++a) {
                Monomial mono(R->vars.size());
                mono.e[ix] = a;
                mono.e[iy] = m - a;
                if (!sol[a].is_zero()) U = U + sol[a].mul_term(mono, BigRational(1));
                if (!sol[n + a].is_zero()) V = V + sol[n + a].mul_term(mono, BigRational(1));
            }
        }
    }

    const std::vector<PolyQ>& at_degree(unsigned m) const { return per_degree.at(m - 2); }

    std::vector<PolyQ> all_through(unsigned m) const {
        std::vector<PolyQ> out;
        for (unsigned d = 2; d <= m; ++d)
            for (auto& o : at_degree(d)) out.push_back(o);
        return out;
    }
};

// Cubic family with quadratic part (a20, a11, a02 / b20, b11, -b20) and the
// shared cubic multiplier r20 x^2 + r11 xy + r02 y^2.
static const char* kCubicFamilyText =
    "param a20 a11 a02 b20 b11 r20 r11 r02\n"
    "var x y\n"
    "dx = -y + a20*x^2 + a11*x*y + a02*y^2 + x*(r20*x^2 + r11*x*y + r02*y^2)\n"
    "dy = x + b20*x^2 + b11*x*y - b20*y^2 + y*(r20*x^2 + r11*x*y + r02*y^2)\n";

static PlanarSystem cubic_family() { return parse_system(kCubicFamilyText); }

// Oracle-side copy of the same family over a rational ring.
static BruteForceOracle cubic_family_oracle() {
    RingPtr R = make_ring({"a20", "a11", "a02", "b20", "b11", "r20", "r11", "r02", "x", "y"},
                          MonomialOrder::degrevlex(), DomainKind::Q);
    PolyQ dx = qq("-y + a20*x^2 + a11*x*y + a02*y^2 + x*(r20*x^2 + r11*x*y + r02*y^2)", R);
    PolyQ dy = qq("x + b20*x^2 + b11*x*y - b20*y^2 + y*(r20*x^2 + r11*x*y + r02*y^2)", R);
    return BruteForceOracle(R, dx, dy, 8, 9);
}

static const char* kI1Text =
    "1/9*(10*a02^2 + a11^2 + 10*a02*a20 + 4*a20^2 - a02*b11 - 5*a20*b11 + b11^2 + 4*a11*b20 + "
    "4*b20^2)";
static const char* kJ1Text =
    "1/3*(a02*a11 + a11*a20 - 2*a02*b20 - 2*a20*b20 + 4*r02 + 4*r20)";

TEST_CASE("system files parse, print, and report line positions") {
    PlanarSystem s = parse_system(
        "# quadratic example\n"
        "param a b\n"
        "var x y\n"
        "dx = -y + a*x^2\n"
        "dy = x + b*y^2\n");
    CHECK(s.params == std::vector<std::string>{"a", "b"});
    CHECK(s.xname() == "x");
    CHECK(s.yname() == "y");
    CHECK(print_system(s) ==
          "var x y\n"
          "param a b\n"
          "dx = a*x^2 - y\n"
          "dy = b*y^2 + x\n");
    // Round trip through the printed form.
    PlanarSystem s2 = parse_system(print_system(s));
    CHECK(s2.dx.str() == s.dx.str());
    CHECK(s2.dy.str() == s.dy.str());

    try {
        parse_system("var x y\ndx = -y\ndy = x + ++\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(parse_system("var x y\nfoo = 1\ndx = -y\ndy = x\n"), ParseError);
    CHECK_THROWS_AS(parse_system("var x\ndx = -y\ndy = x\n"), ParseError);
    // Wrong linear part is rejected at construction.
    CHECK_THROWS_AS(parse_system("var x y\ndx = y\ndy = x\n"), DegeneracyError);
    CHECK_THROWS_AS(parse_system("var x y\ndx = -y + 1\ndy = x\n"), DegeneracyError);
}

TEST_CASE("complexification of a single quadratic term, and its inverse") {
    PlanarSystem s = parse_system("var x y\ndx = -y + x^2\ndy = x\n");
    ComplexSystem c = complexify(s);
    REQUIRE(c.ring->vars == std::vector<std::string>{"z", "w"});
    // p = x^2, q = 0: X = -i((z+w)/2)^2, Y = i((z+w)/2)^2.
    CHECK(c.X == qi("-1/4*I*z^2 - 1/2*I*z*w - 1/4*I*w^2", c.ring));
    CHECK(c.Y == qi("1/4*I*z^2 + 1/2*I*z*w + 1/4*I*w^2", c.ring));

    PlanarSystem back = realify(c);
    CHECK(back.dx.str() == s.dx.str());
    CHECK(back.dy.str() == s.dy.str());
}

TEST_CASE("complexification round trip on the nine-parameter cubic family") {
    PlanarSystem s = parse_system(
        "param a20 a11 a02 b20 b11 b02 r20 r11 r02\n"
        "var x y\n"
        "dx = -y + a20*x^2 + a11*x*y + a02*y^2 + x*(r20*x^2 + r11*x*y + r02*y^2)\n"
        "dy = x + b20*x^2 + b11*x*y + b02*y^2 + y*(r20*x^2 + r11*x*y + r02*y^2)\n");
    PlanarSystem back = realify(complexify(s));
    CHECK(back.params == s.params);
    CHECK(back.dx.str() == s.dx.str());
    CHECK(back.dy.str() == s.dy.str());
}

TEST_CASE("complexification matches the printed quadratic-parameter system of condition (2)") {
    PlanarSystem s = parse_system(
        "param a20 b20\n"
        "var x y\n"
        "dx = (b20*x + 1)*(a20*x^2 - b20*x*y - y)\n"
        "dy = x + b20*x^2 + 4*a20*x*y + a20*b20*x^2*y - b20*y^2 - b20^2*x*y^2\n");
    // The factored dx expands to -y + a20 x^2 - 2 b20 xy + a20 b20 x^3 - b20^2 x^2 y.
    {
        auto R = s.ring;
        CHECK(s.dx ==
              qi("-y + a20*x^2 - 2*b20*x*y + a20*b20*x^3 - b20^2*x^2*y", R));
    }
    ComplexSystem c = complexify(s);
    PolyQi X_expected = qi(
        "(b20 - 5/4*I*a20)*z^2 - 1/2*I*a20*z*w + 3/4*I*a20*w^2"
        " + (1/4*b20^2 - 1/4*I*a20*b20)*z^3 - 1/2*I*a20*b20*z^2*w"
        " - (1/4*b20^2 + 1/4*I*a20*b20)*z*w^2",
        c.ring);
    PolyQi wdot_plus_w = qi(
        "3/4*I*a20*z^2 - 1/2*I*a20*z*w - (b20 + 5/4*I*a20)*w^2"
        " + (1/4*b20^2 - 1/4*I*a20*b20)*z^2*w - 1/2*I*a20*b20*z*w^2"
        " - (1/4*b20^2 + 1/4*I*a20*b20)*w^3",
        c.ring);
    CHECK(c.X == X_expected);
    CHECK(c.Y == -wdot_plus_w);
}

TEST_CASE("complexification matches the printed quadratic-parameter system of condition (3)") {
    PlanarSystem s = parse_system(
        "param a20 b20\n"
        "var x y\n"
        "dx = -y + a20*x^2 - 2*b20*x*y - 1/4*a20*y^2"
        " + x*(a20*b20*x^2 - b20^2*x*y - 1/4*a20*b20*y^2)\n"
        "dy = x + b20*x^2 + 1/2*a20*x*y - b20*y^2"
        " + y*(a20*b20*x^2 - b20^2*x*y - 1/4*a20*b20*y^2)\n");
    ComplexSystem c = complexify(s);
    PolyQi X_expected = qi(
        "(b20 - 7/16*I*a20)*z^2 - 3/8*I*a20*z*w - 3/16*I*a20*w^2"
        " + (1/4*b20^2 - 5/16*I*a20*b20)*z^3 - 3/8*I*a20*b20*z^2*w"
        " - (1/4*b20^2 + 5/16*I*a20*b20)*z*w^2",
        c.ring);
    PolyQi wdot_plus_w = qi(
        "-3/16*I*a20*z^2 - 3/8*I*a20*z*w - (b20 + 7/16*I*a20)*w^2"
        " + (1/4*b20^2 - 5/16*I*a20*b20)*z^2*w - 3/8*I*a20*b20*z*w^2"
        " - (1/4*b20^2 + 5/16*I*a20*b20)*w^3",
        c.ring);
    CHECK(c.X == X_expected);
    CHECK(c.Y == -wdot_plus_w);
}

TEST_CASE("linear center: all quantities vanish and the series is empty") {
    PlanarSystem s = parse_system("var x y\ndx = -y\ndy = x\n");
    auto pairs = linearizability_quantities(s, 3);
    REQUIRE(pairs.size() == 3);
    for (auto& qp : pairs) {
        CHECK(qp.I.is_zero());
        CHECK(qp.J.is_zero());
    }
    for (auto& fq : focus_quantities(s, 3)) CHECK(fq.g.is_zero());
    NormalizingSeries ns = linearizing_series(s, 8);
    CHECK(ns.C.is_zero());
    CHECK(ns.D.is_zero());
}

TEST_CASE("quadratic one-term system: exact first pair and reversible-center focus values") {
    PlanarSystem s = parse_system("var x y\ndx = -y + x^2\ndy = x\n");
    // Degree-2/3 recursion by hand: C2 = (i/4)z^2 - (i/2)zw - (i/12)w^2 and
    // the degree-3 resonant coefficients both come out to -1/6.
    auto pairs = linearizability_quantities(s, 2);
    CHECK(pairs[0].I.str() == "-1/6");
    CHECK(pairs[0].J.str() == "-1/6");
    CHECK(!pairs[1].I.is_zero());

    // The orbits are symmetric under (x, t) -> (-x, -t), so the origin is a
    // center and every focus quantity vanishes even though the period varies.
    for (auto& fq : focus_quantities(s, 3)) CHECK(fq.g.is_zero());

    // Strict mode names the first obstruction.
    bool threw = false;
    try {
        linearizing_series(s, 5);
    } catch (const ObstructionError& e) {
        threw = true;
        CHECK(e.k == 1);
        CHECK(e.which == 'I');
    }
    CHECK(threw);

    // The sibling with both quadratic terms has a genuine focus.
    PlanarSystem f = parse_system("var x y\ndx = -y + x^2\ndy = x + x^2\n");
    auto fqs = focus_quantities(f, 1);
    CHECK(fqs[0].g.str() == "-1/2");
}

TEST_CASE("Hamiltonian cubic center has vanishing focus quantities") {
    PlanarSystem s = parse_system("var x y\ndx = -y\ndy = x + x^2\n");
    // H = (x^2 + y^2)/2 + x^3/3 satisfies dH/dt = 0, certifying a center.
    auto R = s.ring;
    PolyQi H = qi("1/2*x^2 + 1/2*y^2 + 1/3*x^3", R);
    PolyQi dH = H.derivative(s.ix) * s.dx + H.derivative(s.iy) * s.dy;
    REQUIRE(dH.is_zero());
    for (auto& fq : focus_quantities(s, 3)) CHECK(fq.g.is_zero());
    // Not isochronous: some linearizability pair below k = 4 is nonzero.
    bool any = false;
    for (auto& qp : linearizability_quantities(s, 3))
        if (!qp.I.is_zero() || !qp.J.is_zero()) any = true;
    CHECK(any);
}

TEST_CASE("brute-force oracle agrees on the two-parameter quadratic family") {
    PlanarSystem s = parse_system("param a b\nvar x y\ndx = -y + a*x^2\ndy = x + b*y^2\n");
    auto pairs = linearizability_quantities(s, 2);

    RingPtr RQ;
    auto gens1 = real_pair_generators(pairs, 1, RQ);
    auto gens2 = real_pair_generators(pairs, 2, RQ);

    RingPtr RO = make_ring({"a", "b", "x", "y"}, MonomialOrder::degrevlex(), DomainKind::Q);
    BruteForceOracle oracle(RO, qq("-y + a*x^2", RO), qq("x + b*y^2", RO), 2, 3);
    oracle.run(5);
    CHECK(oracle.at_degree(2).empty());
    CHECK(oracle.at_degree(4).empty());
    CHECK(!oracle.at_degree(3).empty());

    auto lift = [&](const std::vector<PolyQ>& polys) {
        std::vector<PolyQ> out;
        for (auto& f : polys)
            out.push_back(transport<BigRational, BigRational>(
                f, RQ, [](const BigRational& c) { return c; }));
        return out;
    };
    // First-obstruction ideals agree, and so do the cumulative ones through
    // degree five (the degree-five representatives are only defined modulo the
    // first pair, so the comparison is cumulative).
    CHECK(reduced_gb_strings(RQ, gens1) == reduced_gb_strings(RQ, lift(oracle.all_through(3))));
    CHECK(reduced_gb_strings(RQ, gens2) == reduced_gb_strings(RQ, lift(oracle.all_through(5))));
}

TEST_CASE("first pair of the cubic family matches the published pair and the oracle") {
    PlanarSystem s = cubic_family();
    auto pairs = linearizability_quantities(s, 1);

    // Conjugate symmetry of the two resonant coefficients for real systems.
    auto [re_i, im_i] = split_gaussian(pairs[0].I);
    auto [re_j, im_j] = split_gaussian(pairs[0].J);
    CHECK(re_j == re_i);
    CHECK(im_j == -im_i);

    RingPtr RQ;
    auto gens = real_pair_generators(pairs, 1, RQ);
    auto published = reduced_gb_strings(RQ, {qq(kI1Text, RQ), qq(kJ1Text, RQ)});
    CHECK(reduced_gb_strings(RQ, gens) == published);

    BruteForceOracle oracle = cubic_family_oracle();
    oracle.run(3);
    CHECK(oracle.at_degree(2).empty());
    REQUIRE(!oracle.at_degree(3).empty());
    std::vector<PolyQ> lifted;
    for (auto& f : oracle.at_degree(3))
        lifted.push_back(
            transport<BigRational, BigRational>(f, RQ, [](const BigRational& c) { return c; }));
    CHECK(reduced_gb_strings(RQ, lifted) == published);
}

TEST_CASE("published first-pair values at the all-ones point") {
    RingPtr RQ = make_ring({"a20", "a11", "a02", "b20", "b11", "r20", "r11", "r02"},
                           MonomialOrder::degrevlex(), DomainKind::Q);
    std::vector<BigRational> ones(8, BigRational(1));
    CHECK(qq(kI1Text, RQ).evaluate(ones) == BigRational(28, 9));
    CHECK(qq(kJ1Text, RQ).evaluate(ones) == BigRational(2, 1));

    PlanarSystem s = cubic_family();
    std::map<std::string, GaussianRational> vals;
    for (auto& pname : s.params) vals[pname] = GaussianRational(1);
    PlanarSystem inst = at_parameters(s, vals);

    bool threw = false;
    try {
        linearizing_series(inst, 3);
    } catch (const ObstructionError& e) {
        threw = true;
        CHECK(e.k == 1);
        CHECK(e.which == 'I');
    }
    CHECK(threw);

    auto pairs = linearizability_quantities(inst, 1);
    CHECK(!pairs[0].I.is_zero());
    CHECK(pairs[0].J == transport<GaussianRational, GaussianRational>(
                            pairs[0].I, pairs[0].I.ring(),
                            [](const GaussianRational& c) { return c.conj(); }));
}

// Parameter substitutions for Theorem-1-style linearizable families.  Each
// case below must make every pair through k = 2 vanish identically.
static void check_pairs_vanish(const PlanarSystem& s, unsigned K) {
    for (auto& qp : linearizability_quantities(s, K)) {
        INFO("k = " << qp.k);
        CHECK(qp.I.is_zero());
        CHECK(qp.J.is_zero());
    }
    for (auto& fq : focus_quantities(s, K)) {
        INFO("k = " << fq.k);
        CHECK(fq.g.is_zero());
    }
}

TEST_CASE("condition (2) family: pairs and focus quantities vanish symbolically") {
    PlanarSystem s = parse_system(
        "param a20 b20\n"
        "var x y\n"
        "dx = (b20*x + 1)*(a20*x^2 - b20*x*y - y)\n"
        "dy = x + b20*x^2 + 4*a20*x*y + a20*b20*x^2*y - b20*y^2 - b20^2*x*y^2\n");
    check_pairs_vanish(s, 2);
}

TEST_CASE("condition (3) family: pairs and focus quantities vanish symbolically") {
    PlanarSystem s = parse_system(
        "param a20 b20\n"
        "var x y\n"
        "dx = -y + a20*x^2 - 2*b20*x*y - 1/4*a20*y^2"
        " + x*(a20*b20*x^2 - b20^2*x*y - 1/4*a20*b20*y^2)\n"
        "dy = x + b20*x^2 + 1/2*a20*x*y - b20*y^2"
        " + y*(a20*b20*x^2 - b20^2*x*y - 1/4*a20*b20*y^2)\n");
    check_pairs_vanish(s, 2);
}

TEST_CASE("condition (4) family keeps a free cubic coefficient and still vanishes") {
    // a02 = r02 = 0, a11 = -2 b20, b11 = a20, r20 = a20 b20, r11 free.
    PlanarSystem s = parse_system(
        "param a20 b20 r11\n"
        "var x y\n"
        "dx = -y + a20*x^2 - 2*b20*x*y + x*(a20*b20*x^2 + r11*x*y)\n"
        "dy = x + b20*x^2 + a20*x*y - b20*y^2 + y*(a20*b20*x^2 + r11*x*y)\n");
    check_pairs_vanish(s, 2);
}

TEST_CASE("condition (1) family with a Gaussian parameter slice vanishes") {
    // a02 = -a20, r20 = -r02, a11 = -2 b20 + (2 a20 - b11) I; the remaining
    // five parameters stay symbolic.
    PlanarSystem s = parse_system(
        "param a20 b20 b11 r11 r02\n"
        "var x y\n"
        "dx = -y + a20*x^2 + (-2*b20 + (2*a20 - b11)*I)*x*y - a20*y^2"
        " + x*(-r02*x^2 + r11*x*y + r02*y^2)\n"
        "dy = x + b20*x^2 + b11*x*y - b20*y^2 + y*(-r02*x^2 + r11*x*y + r02*y^2)\n");
    for (auto& qp : linearizability_quantities(s, 2)) {
        INFO("k = " << qp.k);
        CHECK(qp.I.is_zero());
        CHECK(qp.J.is_zero());
    }
}

TEST_CASE("linearizing series residual vanishes through the truncation degree") {
    PlanarSystem family = parse_system(
        "param a20 b20\n"
        "var x y\n"
        "dx = (b20*x + 1)*(a20*x^2 - b20*x*y - y)\n"
        "dy = x + b20*x^2 + 4*a20*x*y + a20*b20*x^2*y - b20*y^2 - b20^2*x*y^2\n");
    PlanarSystem inst = at_parameters(
        family, {{"a20", GaussianRational(1)}, {"b20", GaussianRational(1)}});
    NormalizingSeries ns = linearizing_series(inst, 8);
    CHECK(ns.truncation == 8);

    ComplexSystem c = complexify(inst);
    auto [r1, r2] = linearization_residual(c, ns);
    CHECK(r1.is_zero());
    CHECK(r2.is_zero());

    // Deeper numeric sweep at the same point.
    for (auto& qp : linearizability_quantities(inst, 3)) {
        CHECK(qp.I.is_zero());
        CHECK(qp.J.is_zero());
    }

    auto sv = std::vector<std::size_t>{ns.iz, ns.iw};
    // No constant, linear, or resonant entries in the series.
    CHECK(ns.C.component_in(sv, 0).is_zero());
    CHECK(ns.C.component_in(sv, 1).is_zero());
    CHECK(ns.D.component_in(sv, 0).is_zero());
    CHECK(ns.D.component_in(sv, 1).is_zero());
    CHECK(ns.C.degree_in(sv) <= 8);
    CHECK(ns.D.degree_in(sv) <= 8);
    for (std::uint32_t k = 1; k <= 3; ++k) {
        CHECK(ns.C.coefficient_of(sv, {k + 1, k}).is_zero());
        CHECK(ns.D.coefficient_of(sv, {k, k + 1}).is_zero());
    }
}

TEST_CASE("resonant series coefficients stay zero even with nonzero obstructions") {
    PlanarSystem s = parse_system("var x y\ndx = -y + x^2\ndy = x\n");
    NormalizingSeries ns;
    linearizability_quantities(s, 3, &ns);
    auto sv = std::vector<std::size_t>{ns.iz, ns.iw};
    for (std::uint32_t k = 1; k <= 3; ++k) {
        CHECK(ns.C.coefficient_of(sv, {k + 1, k}).is_zero());
        CHECK(ns.D.coefficient_of(sv, {k, k + 1}).is_zero());
    }
    // Residual consists of resonant terms only.
    ComplexSystem c = complexify(s);
    auto [r1, r2] = linearization_residual(c, ns);
    for (auto& t : r1.terms()) {
        CHECK(t.m.e[ns.iz] == t.m.e[ns.iw] + 1);
    }
    for (auto& t : r2.terms()) {
        CHECK(t.m.e[ns.iw] == t.m.e[ns.iz] + 1);
    }
}

TEST_CASE("coordinate changes preserve the quantities' vanishing") {
    // Rotating the linear center by a rational rotation-like transform and
    // rescaling time keeps the shape; translate/reverse_time round trip.
    PlanarSystem s = parse_system("var x y\ndx = -y + x^2\ndy = x\n");
    PlanarSystem r = reverse_time(reverse_time(s));
    CHECK(r.dx == s.dx);
    CHECK(r.dy == s.dy);
    PlanarSystem t = translate(translate(s, GaussianRational(1), GaussianRational(2)),
                               GaussianRational(-1), GaussianRational(-2));
    CHECK(t.dx == s.dx);
    CHECK(t.dy == s.dy);

    // u = y, v = x swaps the equations up to sign: still a center after time
    // reversal (lambda = -1).
    PlanarSystem sw = linear_transform(s, GaussianRational(0), GaussianRational(1),
                                       GaussianRational(1), GaussianRational(0),
                                       GaussianRational(-1), true);
    auto pairs = linearizability_quantities(sw, 1);
    CHECK(!pairs[0].I.is_zero());
    CHECK_THROWS_AS(linear_transform(s, GaussianRational(1), GaussianRational(1),
                                     GaussianRational(1), GaussianRational(1),
                                     GaussianRational(1)),
                    DegeneracyError);
}
