#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isochron/poly.hpp"

using namespace isochron;

static RingPtr ring_xy_Q() {
    return make_ring({"x", "y"}, MonomialOrder::degrevlex(), DomainKind::Q);
}

TEST_CASE("monomial orders on frozen pairs") {
    MonomialOrder lex = MonomialOrder::lex();
    MonomialOrder drl = MonomialOrder::degrevlex();

    Monomial x(2), y(2), x2y(2), xy2(2);
    x.e = {1, 0};
    y.e = {0, 1};
    x2y.e = {2, 1};
    xy2.e = {1, 2};

    CHECK(mono_cmp(x, y, lex) > 0);
    CHECK(mono_cmp(x, y, drl) > 0);
    CHECK(mono_cmp(x2y, xy2, drl) > 0);
    CHECK(mono_cmp(x2y, xy2, lex) > 0);
    // degrevlex ranks by total degree first
    Monomial y3(2);
    y3.e = {0, 3};
    CHECK(mono_cmp(y3, x2y, lex) < 0);
    CHECK(mono_cmp(y3, x2y, drl) < 0);
    Monomial y4(2);
    y4.e = {0, 4};
    CHECK(mono_cmp(y4, x2y, lex) < 0);
    CHECK(mono_cmp(y4, x2y, drl) > 0);

    // block(1) on (t, x, y): the t-part dominates
    MonomialOrder blk = MonomialOrder::block(1);
    Monomial t(3), x2y5(3);
    t.e = {1, 0, 0};
    x2y5.e = {0, 2, 5};
    CHECK(mono_cmp(t, x2y5, blk) > 0);
    CHECK(mono_cmp(x2y5, t, blk) < 0);
}

TEST_CASE("parse and canonical print") {
    // factors inside a term print in ring declaration order
    auto R = make_ring({"a20", "x", "y"}, MonomialOrder::degrevlex(), DomainKind::Q);
    auto p = parse_polynomial<BigRational>("-y + a20*x^2", R);
    CHECK(p.str() == "a20*x^2 - y");
    CHECK(p.term_count() == 2);

    auto R2 = make_ring({"x", "y", "a20"}, MonomialOrder::degrevlex(), DomainKind::Q);
    CHECK(parse_polynomial<BigRational>("-y + a20*x^2", R2).str() == "x^2*a20 - y");

    auto q = parse_polynomial<BigRational>("a20*x^2 - y", R);
    CHECK(p == q);

    CHECK(parse_polynomial<BigRational>("0", R).is_zero());
    CHECK(parse_polynomial<BigRational>("x - x", R).is_zero());
    CHECK(parse_polynomial<BigRational>("2/4", R).str() == "1/2");
    CHECK(parse_polynomial<BigRational>("(x + y)^3", R).str() ==
          "x^3 + 3*x^2*y + 3*x*y^2 + y^3");
}

TEST_CASE("product expansion oracle") {
    auto R = make_ring({"x", "y", "a20", "b20"}, MonomialOrder::degrevlex(), DomainKind::Q);
    auto p = parse_polynomial<BigRational>("(b20*x+1)*(a20*x^2-b20*x*y-y)", R);
    // expanded by hand
    auto q = parse_polynomial<BigRational>(
        "a20*b20*x^3 - b20^2*x^2*y + a20*x^2 - 2*b20*x*y - y", R);
    CHECK(p == q);
    CHECK(p.str() == q.str());
}

TEST_CASE("parse errors carry position") {
    auto R = ring_xy_Q();
    CHECK_THROWS_AS(parse_polynomial<BigRational>("x^2/0", R), ParseError);
    CHECK_THROWS_AS(parse_polynomial<BigRational>("1/0", R), ParseError);
    CHECK_THROWS_AS(parse_polynomial<BigRational>("x +", R), ParseError);
    CHECK_THROWS_AS(parse_polynomial<BigRational>("(x + y", R), ParseError);
    CHECK_THROWS_AS(parse_polynomial<BigRational>("z + 1", R), ParseError);
    CHECK_THROWS_AS(parse_polynomial<BigRational>("I*x", R), ParseError);  // no i in Q
    try {
        parse_polynomial<BigRational>("x ? y", R);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 3);
    }
}

TEST_CASE("imaginary literal in Qi rings") {
    auto R = make_ring({"x", "y"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto p = parse_polynomial<GaussianRational>("(1+2*I)*x - I*y + 3", R);
    CHECK(p.str() == "(1+2*I)*x - I*y + 3");
    auto again = parse_polynomial<GaussianRational>(p.str(), R);
    CHECK(again == p);

    auto sq = parse_polynomial<GaussianRational>("I^2 + 1", R);
    CHECK(sq.is_zero());
}

TEST_CASE("prime field coefficients normalize through parse") {
    auto R = make_ring({"x"}, MonomialOrder::degrevlex(), DomainKind::Fp, 32003);
    auto quarter = parse_polynomial<PrimeFieldElement>("1/4", R);
    auto direct = parse_polynomial<PrimeFieldElement>("8001", R);
    CHECK(quarter == direct);
    CHECK(quarter.str() == "8001");
    auto negone = parse_polynomial<PrimeFieldElement>("-1", R);
    CHECK(negone.str() == "32002");
}

TEST_CASE("derivative") {
    auto R = ring_xy_Q();
    auto p = parse_polynomial<BigRational>("x^2*y", R);
    CHECK(p.derivative(0).str() == "2*x*y");
    CHECK(p.derivative(1).str() == "x^2");
    auto c = parse_polynomial<BigRational>("5", R);
    CHECK(c.derivative(0).is_zero());

    // product rule on random-ish fixed inputs
    auto f = parse_polynomial<BigRational>("x^3 - 2*x*y + 7", R);
    auto g = parse_polynomial<BigRational>("y^2 + x", R);
    auto lhs = (f * g).derivative(0);
    auto rhs = f.derivative(0) * g + f * g.derivative(0);
    CHECK(lhs == rhs);
}

TEST_CASE("substitution maps x^2 + y^2 to z*w") {
    auto Rxy = make_ring({"x", "y"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto Rzw = make_ring({"z", "w"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto p = parse_polynomial<GaussianRational>("x^2 + y^2", Rxy);
    // x = (z+w)/2, y = -(i/2)(z-w)
    std::vector<PolyQi> images = {
        parse_polynomial<GaussianRational>("1/2*(z + w)", Rzw),
        parse_polynomial<GaussianRational>("1/2*I*(w - z)", Rzw),
    };
    auto mapped = map_poly(p, Rzw, [](const GaussianRational& c) { return c; }, images);
    CHECK(mapped.str() == "z*w");
}

TEST_CASE("slash binds only to integer literals") {
    auto R = ring_xy_Q();
    auto p = parse_polynomial<BigRational>("1/2*(x + y)^2", R);
    CHECK(p.str() == "1/2*x^2 + x*y + 1/2*y^2");
    CHECK_THROWS_AS(parse_polynomial<BigRational>("(x + y)/2", R), ParseError);
    CHECK_THROWS_AS(parse_polynomial<BigRational>("x/2", R), ParseError);
}

TEST_CASE("homogeneous components partition the polynomial") {
    auto R = make_ring({"x", "y", "b20"}, MonomialOrder::degrevlex(), DomainKind::Q);
    auto p = parse_polynomial<BigRational>("x^3 + b20*x*y + x - 5 + y^2", R);
    auto sum = PolyQ::zero(R);
    for (std::uint64_t d = 0; d <= p.degree(); ++d) {
        auto h = p.homogeneous_component(d);
        for (auto& t : h.terms()) CHECK(t.m.degree() == d);
        sum = sum + h;
    }
    CHECK(sum == p);

    // grading by a variable subset (x, y only)
    std::vector<std::size_t> xy = {0, 1};
    CHECK(p.degree_in(xy) == 3);
    auto slice2 = p.component_in(xy, 2);
    CHECK(slice2 == parse_polynomial<BigRational>("b20*x*y + y^2", R));
}

TEST_CASE("coefficient extraction on a variable subset") {
    auto R = make_ring({"z", "w", "a", "b"}, MonomialOrder::degrevlex(), DomainKind::Q);
    auto p = parse_polynomial<BigRational>("3*a*z^2*w + b*z^2*w - z*w + a*b", R);
    std::vector<std::size_t> zw = {0, 1};
    auto c21 = p.coefficient_of(zw, {2, 1});
    CHECK(c21 == parse_polynomial<BigRational>("3*a + b", R));
    auto c00 = p.coefficient_of(zw, {0, 0});
    CHECK(c00 == parse_polynomial<BigRational>("a*b", R));
    auto c11 = p.coefficient_of(zw, {1, 1});
    CHECK(c11 == parse_polynomial<BigRational>("-1", R));
    CHECK(p.coefficient_of(zw, {5, 0}).is_zero());
}

TEST_CASE("evaluation") {
    auto R = ring_xy_Q();
    auto p = parse_polynomial<BigRational>("x^2 + 2*y", R);
    BigRational v = p.evaluate({BigRational(3), BigRational(1, 2)});
    CHECK(v == BigRational(10));
}

TEST_CASE("transport between rings") {
    auto R2 = ring_xy_Q();
    auto R3 = make_ring({"x", "y", "t"}, MonomialOrder::block(1), DomainKind::Q);
    auto p = parse_polynomial<BigRational>("x^2 - y + 3", R2);
    auto up = transport_same(p, R3);
    CHECK(up.str() == "x^2 - y + 3");
    auto back = transport_same(up, R2);
    CHECK(back == p);

    auto q = parse_polynomial<BigRational>("t*x", R3);
    CHECK_THROWS_AS(transport_same(q, R2), RingMismatchError);

    // domain widening Q -> Qi
    auto Ri = make_ring({"x", "y"}, MonomialOrder::degrevlex(), DomainKind::Qi);
    auto wide = transport<BigRational, GaussianRational>(
        p, Ri, [](const BigRational& c) { return GaussianRational(c); });
    CHECK(wide.str() == "x^2 - y + 3");
}

TEST_CASE("exponent overflow is a hard error") {
    auto R = make_ring({"x"}, MonomialOrder::degrevlex(), DomainKind::Q);
    auto x = PolyQ::variable(R, std::size_t{0});
    auto big = x.pow(1u << 31);
    CHECK(big.leading().m.e[0] == (1u << 31));
    CHECK_THROWS_AS(big * big, ExponentOverflowError);
}

TEST_CASE("print-parse-print is stable") {
    auto R = make_ring({"x", "y", "a20", "b20"}, MonomialOrder::degrevlex(), DomainKind::Q);
    std::vector<std::string> inputs = {
        "x", "-x", "x - y", "1/2*x^2 - 3/4", "a20*b20^2*x*y - x^17",
        "(x - y)*(x + y)", "x*y*a20 - 2", "-1 + x",
    };
    for (auto& s : inputs) {
        auto p = parse_polynomial<BigRational>(s, R);
        auto printed = p.str();
        auto q = parse_polynomial<BigRational>(printed, R);
        CHECK(q == p);
        CHECK(q.str() == printed);
    }
}

namespace {

PolyQ random_poly_Q(const RingPtr& R, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(0, 6), expo(0, 4), num(-9, 9), den(1, 5);
    std::vector<PolyQ::Term> ts;
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        Monomial m(R->vars.size());
        for (auto& e : m.e) e = static_cast<std::uint32_t>(expo(rng));
        ts.push_back({m, BigRational(num(rng), static_cast<unsigned long>(den(rng)))});
    }
    return PolyQ::from_terms(R, std::move(ts));
}

PolyFp random_poly_Fp(const RingPtr& R, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(0, 6), expo(0, 4);
    std::uniform_int_distribution<std::uint64_t> val(0, R->modulus - 1);
    std::vector<PolyFp::Term> ts;
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        Monomial m(R->vars.size());
        for (auto& e : m.e) e = static_cast<std::uint32_t>(expo(rng));
        ts.push_back({m, PrimeFieldElement(val(rng), R->modulus)});
    }
    return PolyFp::from_terms(R, std::move(ts));
}

template <class C, class Gen>
void check_ring_axioms(const RingPtr& R, Gen gen, std::mt19937_64& rng, int rounds) {
    for (int i = 0; i < rounds; ++i) {
        auto a = gen(R, rng), b = gen(R, rng), c = gen(R, rng);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK((a - a).is_zero());
        CHECK(a + Polynomial<C>::zero(R) == a);
        CHECK(a * Polynomial<C>::one(R) == a);
    }
}

}  // namespace

TEST_CASE("ring axioms hold on random polynomials") {
    std::mt19937_64 rng(20260816);
    auto RQ = make_ring({"x", "y", "z"}, MonomialOrder::degrevlex(), DomainKind::Q);
    check_ring_axioms<BigRational>(RQ, random_poly_Q, rng, 40);
    auto RQl = make_ring({"x", "y", "z"}, MonomialOrder::lex(), DomainKind::Q);
    check_ring_axioms<BigRational>(RQl, random_poly_Q, rng, 20);
    auto RF = make_ring({"x", "y", "z"}, MonomialOrder::degrevlex(), DomainKind::Fp, 32003);
    check_ring_axioms<PrimeFieldElement>(RF, random_poly_Fp, rng, 40);
    auto RFb = make_ring({"x", "y", "z"}, MonomialOrder::block(1), DomainKind::Fp, 32003);
    check_ring_axioms<PrimeFieldElement>(RFb, random_poly_Fp, rng, 20);
}

TEST_CASE("ring construction rejects bad input") {
    CHECK_THROWS_AS(make_ring({"x", "x"}, MonomialOrder::lex(), DomainKind::Q), Error);
    // F_p[i] needs p = 3 mod 4; 32003 qualifies, 13 does not
    CHECK_NOTHROW(make_ring({"x"}, MonomialOrder::degrevlex(), DomainKind::Fpi, 32003));
    CHECK_THROWS_AS(make_ring({"x"}, MonomialOrder::degrevlex(), DomainKind::Fpi, 13),
                    BadPrimeError);
    CHECK_THROWS_AS(make_ring({"x"}, MonomialOrder::degrevlex(), DomainKind::Fp, 0),
                    BadPrimeError);
    auto Ra = ring_xy_Q();
    auto Rb = make_ring({"u", "v"}, MonomialOrder::degrevlex(), DomainKind::Q);
    auto pa = parse_polynomial<BigRational>("x + y", Ra);
    auto pb = parse_polynomial<BigRational>("u + v", Rb);
    CHECK_THROWS_AS(pa + pb, RingMismatchError);
}
