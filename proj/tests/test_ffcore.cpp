#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lmcount/fp.hpp"
#include "lmcount/fp_matrix.hpp"
#include "lmcount/fp_poly.hpp"

using namespace lmcount;

namespace {

FpMatrix random_matrix(std::uint32_t p, std::size_t n, std::mt19937& rng) {
    FpMatrix m(p, n, n);
    std::uniform_int_distribution<std::uint32_t> d(0, p - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m.set_reduced(i, j, d(rng));
    return m;
}

FpPoly random_poly(std::uint32_t p, int deg, std::mt19937& rng) {
    std::uniform_int_distribution<std::uint32_t> d(0, p - 1);
    std::vector<std::int64_t> c(deg + 1);
    for (auto& x : c) x = d(rng);
    if (c.back() == 0) c.back() = 1;
    return FpPoly(p, c);
}

// Horner evaluation of f at a matrix argument.
FpMatrix eval_at_matrix(const FpPoly& f, const FpMatrix& m) {
    const std::size_t n = m.rows();
    FpMatrix acc(m.modulus(), n, n);
    const auto& cs = f.coefficients();
    for (std::size_t i = cs.size(); i-- > 0;) {
        acc = acc * m;
        for (std::size_t d = 0; d < n; ++d) acc.set_reduced(d, d, mod_add(acc(d, d), cs[i], m.modulus()));
    }
    return acc;
}

FpMatrix companion(const FpPoly& f) {
    const std::size_t n = static_cast<std::size_t>(f.degree());
    FpMatrix m(f.modulus(), n, n);
    for (std::size_t i = 1; i < n; ++i) m.set_reduced(i, i - 1, 1u);
    for (std::size_t i = 0; i < n; ++i)
        m.set_reduced(i, n - 1, f.coeff(i) ? f.modulus() - f.coeff(i) : 0u);
    return m;
}

}  // namespace

TEST_CASE("poly_eval basics") {
    FpPoly f(5, {1, 0, 1});  // x^2 + 1 over F_5
    CHECK(poly_eval(f, FpElement(2, 5)).value == 0);
    CHECK(poly_eval(f, FpElement(1, 5)).value == 2);
    FpPoly zero(5);
    CHECK(poly_eval(zero, FpElement(3, 5)).value == 0);
    CHECK_THROWS_AS(poly_eval(f, FpElement(1, 7)), std::invalid_argument);
}

TEST_CASE("simple_roots") {
    // (x-1)^2 (x-2) over F_5
    FpPoly f = FpPoly::x_minus(FpElement(1, 5)) * FpPoly::x_minus(FpElement(1, 5)) * FpPoly::x_minus(FpElement(2, 5));
    CHECK(simple_roots(f) == std::vector<std::uint32_t>{2});
    FpPoly g(5, {1, 0, 1});
    CHECK(simple_roots(g) == std::vector<std::uint32_t>{2, 3});
    FpPoly h(3, {1, 0, 1});
    CHECK(simple_roots(h).empty());
    CHECK_THROWS_AS(simple_roots(FpPoly(5)), std::invalid_argument);
}

TEST_CASE("root_multiplicities") {
    FpPoly f = FpPoly::x_minus(FpElement(1, 5)) * FpPoly::x_minus(FpElement(1, 5)) * FpPoly::x_minus(FpElement(2, 5));
    auto m = root_multiplicities(f);
    REQUIRE(m.size() == 2);
    CHECK(m.at(1) == 2);
    CHECK(m.at(2) == 1);

    FpPoly cube(3, {0, 0, 0, 1});  // x^3 over F_3; derivative vanishes identically
    auto m2 = root_multiplicities(cube);
    REQUIRE(m2.size() == 1);
    CHECK(m2.at(0) == 3);

    FpPoly h(3, {1, 0, 1});
    CHECK(root_multiplicities(h).empty());
    CHECK_THROWS_AS(root_multiplicities(FpPoly(3)), std::invalid_argument);
}

TEST_CASE("simple roots agree with multiplicity one") {
    std::mt19937 rng(12345);
    for (std::uint32_t p : {3u, 5u, 101u}) {
        for (int trial = 0; trial < 30; ++trial) {
            FpPoly f = random_poly(p, 1 + static_cast<int>(rng() % 8), rng);
            auto mult = root_multiplicities(f);
            std::vector<std::uint32_t> expect;
            for (auto [a, m] : mult)
                if (m == 1) expect.push_back(a);
            CHECK(simple_roots(f) == expect);
        }
    }
}

TEST_CASE("charpoly basics") {
    FpMatrix id2 = FpMatrix::identity(7, 2);
    FpPoly expect = FpPoly::x_minus(FpElement(1, 7)) * FpPoly::x_minus(FpElement(1, 7));
    CHECK(charpoly(id2) == expect);

    FpMatrix z(7, 3, 3);
    CHECK(charpoly(z) == FpPoly(7, {0, 0, 0, 1}));

    FpMatrix bad(7, 2, 3);
    CHECK_THROWS_AS(charpoly(bad), std::invalid_argument);

    CHECK(charpoly(FpMatrix(7, 0, 0)) == FpPoly::one(7));
}

TEST_CASE("charpoly of companion matrix recovers the polynomial") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        FpPoly f = random_poly(5, 4, rng);
        // force monic
        std::vector<std::int64_t> cs(f.coefficients().begin(), f.coefficients().end());
        cs.back() = 1;
        FpPoly monic(5, cs);
        CHECK(charpoly(companion(monic)) == monic);
    }
}

TEST_CASE("Cayley-Hamilton and determinant relation") {
    std::mt19937 rng(777);
    for (std::uint32_t p : {3u, 5u, 101u}) {
        for (std::size_t n : {1u, 2u, 5u, 12u}) {
            FpMatrix m = random_matrix(p, n, rng);
            FpPoly chi = charpoly(m);
            REQUIRE(chi.degree() == static_cast<int>(n));
            CHECK(chi.is_monic());
            CHECK(eval_at_matrix(chi, m).is_zero());
            // chi(0) = (-1)^n det(M)
            std::uint32_t c0 = chi.coeff(0);
            std::uint32_t d = m.det().value;
            if (n % 2 == 1) d = d ? p - d : 0;
            CHECK(c0 == d);
        }
    }
}

TEST_CASE("kernel and rank-nullity") {
    FpMatrix z(5, 3, 3);
    CHECK(kernel(z).dim() == 3);
    CHECK(kernel(FpMatrix::identity(5, 4)).dim() == 0);

    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
        FpMatrix m(101, r, c);
        std::uniform_int_distribution<std::uint32_t> d(0, 100);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m.set_reduced(i, j, d(rng));
        CHECK(kernel(m).dim() + m.rank() == c);
    }
}

TEST_CASE("intersect of coordinate planes") {
    FpMatrix a(5, 2, 3, {1, 0, 0, 0, 1, 0});  // span(e1, e2)
    FpMatrix b(5, 2, 3, {0, 1, 0, 0, 0, 1});  // span(e2, e3)
    Subspace inter = intersect(Subspace::from_rows(a), Subspace::from_rows(b));
    REQUIRE(inter.dim() == 1);
    CHECK(inter.basis(0, 0) == 0);
    CHECK(inter.basis(0, 1) == 1);
    CHECK(inter.basis(0, 2) == 0);
}

TEST_CASE("restrict to invariant subspace divides ambient charpoly") {
    // block upper triangular: span(e1,e2) is invariant
    FpMatrix m(7, 3, 3, {2, 1, 3, 0, 4, 5, 0, 0, 6});
    Subspace v = Subspace::from_rows(FpMatrix(7, 2, 3, {1, 0, 0, 0, 1, 0}));
    FpMatrix r = restrict_operator(m, v);
    REQUIRE(r.rows() == 2);
    CHECK(charpoly(m).divisible_by(charpoly(r)));

    // here span(e2, e3) is not invariant (column 3 leaks into e1)
    Subspace w = Subspace::from_rows(FpMatrix(7, 2, 3, {0, 1, 0, 0, 0, 1}));
    CHECK_THROWS_AS(restrict_operator(m, w), std::invalid_argument);
}

TEST_CASE("modulus guards") {
    CHECK_THROWS_AS(FpPoly(4, {1}), std::invalid_argument);
    CHECK_THROWS_AS(FpPoly(1ULL << 32, {1}), std::invalid_argument);
    CHECK_THROWS_AS(FpMatrix(9, 2, 2), std::invalid_argument);
    CHECK(FpElement::make(7, 5).value == 2);
}
