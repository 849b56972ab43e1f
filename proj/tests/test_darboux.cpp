#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "isochron/darboux.hpp"

using namespace isochron;

static PolyQi qi(const std::string& text, const RingPtr& R) {
    return parse_polynomial<GaussianRational>(text, R);
}

static std::string read_file(const std::string& rel) {
    std::ifstream in(std::string(ISOCHRON_DATA_DIR) + "/" + rel);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

static ComplexSystem family_complex(int n) {
    return complexify(parse_system(read_file("systems/case" + std::to_string(n) + ".sys")));
}

static LinearizationRecipe family_recipe(int n, const ComplexSystem& cs) {
    return parse_recipe(read_file("recipes/case" + std::to_string(n) + ".rcp"), cs);
}

static GaussianRational gr(long num, long den = 1) {
    return GaussianRational(BigRational(num, static_cast<unsigned long>(den)));
}

TEST_CASE("lie derivative and cofactors on a hand-checked system") {
    auto R = make_ring({"z", "w"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    // dz = z + zw = z(1+w), dw = -w - zw = -w(1+z)
    ComplexSystem s{R, 0, 1, qi("z*w", R), qi("z*w", R), {}};

    CHECK(cofactor_of(s, qi("z", R)) == qi("1 + w", R));
    CHECK(cofactor_of(s, qi("w", R)) == qi("-1 - z", R));
    CHECK_THROWS_AS(cofactor_of(s, qi("z + w", R)), NotExactError);

    SECTION("scalar invariance and the product rule") {
        auto f = qi("z", R), g = qi("w", R);
        CHECK(cofactor_of(s, f.mul_scalar(gr(7, 3))) == cofactor_of(s, f));
        CHECK(cofactor_of(s, f * g) == cofactor_of(s, f) + cofactor_of(s, g));
        CHECK(cofactor_of(s, f * f * g) ==
              cofactor_of(s, f).mul_scalar(gr(2)) + cofactor_of(s, g));
    }
}

TEST_CASE("exact division") {
    auto R = make_ring({"z", "w"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    CHECK(exact_div(qi("z^2 - w^2", R), qi("z - w", R)) == qi("z + w", R));
    CHECK(exact_div(qi("z^3*w + z*w", R), qi("z*w", R)) == qi("z^2 + 1", R));
    CHECK_THROWS_AS(exact_div(qi("z^2 + w", R), qi("z + 1", R)), NotExactError);
    CHECK_THROWS_AS(exact_div(qi("z", R), PolyQi::zero(R)), DivisionByZeroError);
}

// Complexification z = x + iy of each restricted family must match the
// independently recorded dz = z + X, dw = -(w + Y) right-hand sides.
TEST_CASE("restricted families complexify to their recorded complex forms") {
    struct Expected {
        int n;
        const char* X;
        const char* Y;
    };
    const Expected table[] = {
        {1,
         "-(I*a20 - b20)*z^2 - 1/4*(r11 + 2*I*r20)*z^3 + 1/4*(r11 - 2*I*r20)*z*w^2",
         "-1/2*(I*b11 - 2*I*a20)*z^2 + 1/2*(I*b11 + 2*b20)*w^2 + 1/4*(r11 + 2*I*r20)*z^2*w - "
         "1/4*(r11 - 2*I*r20)*w^3"},
        {2,
         "(b20 - 5/4*I*a20)*z^2 - 1/2*I*a20*z*w + 3/4*I*a20*w^2 + (1/4*b20^2 - "
         "1/4*I*a20*b20)*z^3 - 1/2*I*a20*b20*z^2*w - (1/4*b20^2 + 1/4*I*a20*b20)*z*w^2",
         "-3/4*I*a20*z^2 + 1/2*I*a20*z*w + (b20 + 5/4*I*a20)*w^2 - (1/4*b20^2 - "
         "1/4*I*a20*b20)*z^2*w + 1/2*I*a20*b20*z*w^2 + (1/4*b20^2 + 1/4*I*a20*b20)*w^3"},
        {3,
         "(b20 - 7/16*I*a20)*z^2 - 3/8*I*a20*z*w - 3/16*I*a20*w^2 + (1/4*b20^2 - "
         "5/16*I*a20*b20)*z^3 - 3/8*I*a20*b20*z^2*w - (1/4*b20^2 + 5/16*I*a20*b20)*z*w^2",
         "3/16*I*a20*z^2 + 3/8*I*a20*z*w + (b20 + 7/16*I*a20)*w^2 - (1/4*b20^2 - "
         "5/16*I*a20*b20)*z^2*w + 3/8*I*a20*b20*z*w^2 + (1/4*b20^2 + 5/16*I*a20*b20)*w^3"},
        {4,
         "(b20 - 1/2*I*a20)*z^2 - 1/2*I*a20*z*w - (1/4*r11 + 1/4*I*a20*b20)*z^3 - "
         "1/2*I*a20*b20*z^2*w + (1/4*r11 - 1/4*I*a20*b20)*z*w^2",
         "1/2*I*a20*z*w + (b20 + 1/2*I*a20)*w^2 + (1/4*r11 + 1/4*I*a20*b20)*z^2*w + "
         "1/2*I*a20*b20*z*w^2 - (1/4*r11 - 1/4*I*a20*b20)*w^3"},
        {5,
         "(3*b20 - 3*I*a02)*z^2 + (2*b20 - 2*I*a02)*z*w + 2*I*a02*w^2 + (2*b20^2 - 2*a02^2 - "
         "4*I*a02*b20)*z^3 - (2*a02^2 + 4*I*a02*b20 - 2*b20^2)*z^2*w + (4*a02^2 + "
         "4*I*a02*b20)*z*w^2",
         "w*((2*I*a02 - 2*b20)*z + (I*a02 - b20)*w + (2*a02^2 + 4*I*a02*b20 - 2*b20^2)*z^2 + "
         "(2*a02^2 + 4*I*a02*b20 - 2*b20^2)*z*w - (4*a02^2 + 4*I*a02*b20)*w^2)"},
    };
    for (auto& e : table) {
        INFO("family " << e.n);
        ComplexSystem cs = family_complex(e.n);
        CHECK(cs.X == qi(e.X, cs.ring));
        CHECK(cs.Y == qi(e.Y, cs.ring));
    }
}

TEST_CASE("recipe parsing") {
    ComplexSystem cs = family_complex(2);
    LinearizationRecipe r = family_recipe(2, cs);
    REQUIRE(r.factors.size() == 4);
    REQUIRE(r.zside.size() == 3);
    REQUIRE(r.wside.size() == 3);
    CHECK(r.zside[0].factor == "l1");
    CHECK(!r.zside[0].exponent);
    CHECK(r.radicals.empty());
    CHECK(r.factor("l3") == qi("1 + 1/2*b20*z + 1/2*b20*w", r.ring));

    std::map<std::string, GaussianRational> env{{"a20", gr(1)}, {"b20", gr(0)}};
    CHECK(expr_eval_exact(r.zside[1].exponent, env) == gr(-3, 2));
    CHECK(expr_eval_exact(r.zside[2].exponent, env) == gr(-1, 2));
    CHECK(expr_eval_exact(r.wside[1].exponent, env) == gr(-3, 2));
    CHECK(expr_eval_exact(r.wside[2].exponent, env) == gr(-1, 2));

    CHECK_THROWS_AS(parse_recipe("zside = l9\n", cs), Error);
    CHECK_THROWS_AS(parse_recipe("factor f = z\nzside = f^2 f\n", cs), ParseError);
}

TEST_CASE("families 2, 3 and 5 verify symbolically") {
    for (int n : {2, 3, 5}) {
        INFO("family " << n);
        ComplexSystem cs = family_complex(n);
        LinearizationRecipe r = family_recipe(n, cs);
        RecipeReport rep = verify_recipe(cs, r);
        for (auto& note : rep.notes) INFO(note);
        CHECK(rep.shape_ok);
        CHECK(rep.cofactors_ok);
        CHECK(rep.z_sum_ok);
        CHECK(rep.w_sum_ok);
        CHECK(rep.exact);
        CHECK(rep.passed());
    }
}

TEST_CASE("a broken exponent is rejected") {
    ComplexSystem cs = family_complex(5);
    std::string text = read_file("recipes/case5.rcp");
    auto pos = text.find("l4^\"-1/2\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 9, "l4^\"-1/3\"");
    LinearizationRecipe r = parse_recipe(text, cs);
    RecipeReport rep = verify_recipe(cs, r);
    CHECK(rep.cofactors_ok);
    CHECK(!rep.w_sum_ok);
    CHECK(!rep.passed());
}

TEST_CASE("family 4 verifies exactly where the radical collapses") {
    ComplexSystem cs = family_complex(4);
    LinearizationRecipe r = family_recipe(4, cs);
    REQUIRE(r.radicals.size() == 1);
    CHECK_THROWS_AS(verify_recipe(cs, r), NotExactError);

    // a20 = 3, b20 = 1, r11 = 1 gives C = sqrt(9 - 4 - 4) = 1.
    std::map<std::string, GaussianRational> pt{{"a20", gr(3)}, {"b20", gr(1)}, {"r11", gr(1)}};
    CHECK(expr_eval_exact(r.radicals[0].second, pt) == gr(1));
    SeriesReport sr = series_linearization_check(cs, r, pt, 8);
    for (auto& note : sr.notes) INFO(note);
    CHECK(sr.exact);
    CHECK(sr.zero);

    SECTION("the opposite branch of the radical also linearizes") {
        auto flipped = pt;
        flipped["C"] = gr(-1);
        SeriesReport sr2 = series_linearization_check(cs, r, flipped, 8);
        for (auto& note : sr2.notes) INFO(note);
        CHECK(sr2.zero);
    }

    SECTION("exact check fails where C is irrational") {
        // C^2 = -3 has no square root in Q(i).
        std::map<std::string, GaussianRational> bad{{"a20", gr(1)}, {"b20", gr(1)},
                                                    {"r11", gr(0)}};
        CHECK_THROWS_AS(series_linearization_check(cs, r, bad, 4), NotExactError);
    }
}

TEST_CASE("series check confirms the exact recipes at sampled points") {
    std::mt19937 rng(20260815);
    std::uniform_int_distribution<long> coin(-6, 6);
    auto draw_nonzero = [&] {
        long v = 0;
        while (v == 0) v = coin(rng);
        return v;
    };
    for (int n : {2, 3, 5}) {
        INFO("family " << n);
        ComplexSystem cs = family_complex(n);
        LinearizationRecipe r = family_recipe(n, cs);
        const std::string lead = n == 5 ? "a02" : "a20";
        const std::string other = "b20";
        for (int trial = 0; trial < 10; ++trial) {
            std::map<std::string, GaussianRational> pt{
                {lead, GaussianRational(BigRational(draw_nonzero(), 2),
                                        BigRational(coin(rng), 2))},
                {other, GaussianRational(BigRational(coin(rng), 2), BigRational(coin(rng), 2))}};
            INFO("trial " << trial << ": " << lead << " = " << pt[lead].str()
                          << ", b20 = " << pt[other].str());
            SeriesReport sr = series_linearization_check(cs, r, pt, 8);
            for (auto& note : sr.notes) INFO(note);
            CHECK(sr.zero);
        }
    }
}

TEST_CASE("families 1 and 4 verify numerically at seeded samples") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> u(-1.5, 1.5);

    SECTION("family 4") {
        ComplexSystem cs = family_complex(4);
        LinearizationRecipe r = family_recipe(4, cs);
        int accepted = 0;
        while (accepted < 20) {
            std::map<std::string, ComplexApprox> pt{
                {"a20", {u(rng), u(rng)}}, {"b20", {u(rng), u(rng)}}, {"r11", {u(rng), u(rng)}}};
            auto env = numeric_env(r, pt);
            if (std::abs(env.at("C")) < 0.2) continue;
            ++accepted;
            RecipeReport rep = verify_recipe_numeric(cs, r, pt);
            for (auto& note : rep.notes) INFO(note);
            CHECK(rep.passed());
            CHECK(rep.residual < 1e-9);
            SeriesReport sr = series_linearization_check_numeric(cs, r, pt, 8);
            CHECK(sr.residual < 1e-9);
        }
    }

    SECTION("family 1") {
        ComplexSystem cs = family_complex(1);
        LinearizationRecipe r = family_recipe(1, cs);
        FirstIntegralRecipe fi{r.psi};
        int accepted = 0;
        while (accepted < 20) {
            std::map<std::string, ComplexApprox> pt{{"a20", {u(rng), u(rng)}},
                                                    {"b20", {u(rng), u(rng)}},
                                                    {"b11", {u(rng), u(rng)}},
                                                    {"r20", {u(rng), u(rng)}},
                                                    {"r11", {u(rng), u(rng)}}};
            auto env = numeric_env(r, pt);
            if (std::abs(env.at("xi")) < 0.2 || std::abs(env.at("etap")) < 0.2 ||
                std::abs(env.at("etam")) < 0.2)
                continue;
            ++accepted;
            RecipeReport rep = verify_recipe_numeric(cs, r, pt);
            for (auto& note : rep.notes) INFO(note);
            CHECK(rep.passed());
            CHECK(rep.residual < 1e-9);
            CHECK(verify_first_integral_numeric(cs, r, fi, pt));
            SeriesReport sr = series_linearization_check_numeric(cs, r, pt, 8);
            CHECK(sr.residual < 1e-9);
        }
    }
}

TEST_CASE("first integral cofactor sums") {
    ComplexSystem cs = family_complex(5);
    LinearizationRecipe r = family_recipe(5, cs);
    // z1*w1 is constant along orbits, so l1 l2 l4^(-3/2) has cofactor sum 0.
    FirstIntegralRecipe fi;
    fi.factors.push_back({"l1", nullptr});
    fi.factors.push_back({"l2", nullptr});
    fi.factors.push_back({"l4", parse_expr("-3/2")});
    CHECK(verify_first_integral(cs, r, fi));

    FirstIntegralRecipe bad;
    bad.factors.push_back({"l1", nullptr});
    bad.factors.push_back({"l2", nullptr});
    bad.factors.push_back({"l4", parse_expr("-1")});
    CHECK(!verify_first_integral(cs, r, bad));
}

TEST_CASE("series check accepts the identity recipe on the linear system") {
    auto R = make_ring({"z", "w"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    ComplexSystem s{R, 0, 1, PolyQi::zero(R), PolyQi::zero(R), {}};
    LinearizationRecipe r = parse_recipe("factor f = z\nfactor g = w\nzside = f\nwside = g\n", s);
    SeriesReport sr = series_linearization_check(s, r, {}, 10);
    CHECK(sr.zero);
}

TEST_CASE("factor discovery") {
    SECTION("linear system has the axes") {
        auto R = make_ring({"z", "w"}, MonomialOrder::degrevlex(), DomainKind::Qi);
        ComplexSystem s{R, 0, 1, PolyQi::zero(R), PolyQi::zero(R), {}};
        auto found = discover_factors(s, 1);
        REQUIRE(found.size() == 2);
        CHECK(found[0].f == qi("w", R));
        CHECK(found[0].cofactor == qi("-1", R));
        CHECK(found[1].f == qi("z", R));
        CHECK(found[1].cofactor == qi("1", R));
    }

    SECTION("family 2 at a20 = b20 = 1 recovers the recipe's linear factors") {
        ComplexSystem cs = family_complex(2);
        LinearizationRecipe r = family_recipe(2, cs);
        std::map<std::string, GaussianRational> pt{{"a20", gr(1)}, {"b20", gr(1)}};
        ComplexSystem bound = complex_at_parameters(cs, pt);
        auto found = discover_factors(bound, 1);
        auto l3 = bind_parameters<GaussianRational>(r.factor("l3"), r.iz, r.iw, bound.ring, pt);
        auto l4 = bind_parameters<GaussianRational>(r.factor("l4"), r.iz, r.iw, bound.ring, pt);
        bool has3 = false, has4 = false;
        for (auto& df : found) {
            has3 = has3 || df.f == l3;
            has4 = has4 || df.f == l4;
            CHECK(cofactor_of(bound, df.f) == df.cofactor);
        }
        CHECK(has3);
        CHECK(has4);
    }

    SECTION("family 4 at the rational-radical point recovers the quadratic factor") {
        ComplexSystem cs = family_complex(4);
        LinearizationRecipe r = family_recipe(4, cs);
        std::map<std::string, GaussianRational> pt{{"a20", gr(3)}, {"b20", gr(1)},
                                                   {"r11", gr(1)}, {"C", gr(1)}};
        ComplexSystem bound =
            complex_at_parameters(cs, {{"a20", gr(3)}, {"b20", gr(1)}, {"r11", gr(1)}});
        auto found = discover_factors(bound, 2);
        auto l4 = bind_parameters<GaussianRational>(r.factor("l4"), r.iz, r.iw, bound.ring, pt);
        auto l3 = bind_parameters<GaussianRational>(r.factor("l3"), r.iz, r.iw, bound.ring, pt);
        bool has3 = false, has4 = false;
        for (auto& df : found) {
            has3 = has3 || df.f == l3;
            has4 = has4 || df.f == l4;
        }
        CHECK(has3);
        CHECK(has4);
    }
}
