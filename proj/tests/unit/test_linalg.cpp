#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "robba/linalg.hpp"

using namespace robba;

namespace {

constexpr int kPrec = 56;

Padic pq(int p, const Rational& q) { return Padic::from_rational(p, q, kPrec); }

Matrix<Padic> pmat(int p, const std::vector<std::vector<long>>& rows)
{
    std::vector<std::vector<Padic>> m;
    for (const auto& r : rows) {
        m.emplace_back();
        for (long x : r) m.back().push_back(pq(p, x));
    }
    return Matrix<Padic>::from_rows(m, Padic::zero(p));
}

TPowerSeries tser(int p, const std::vector<long>& c, long order)
{
    std::vector<CyclotomicScalar> v;
    for (long k = 0; k < order; ++k)
        v.push_back(CyclotomicScalar::from_padic(1, pq(p, k < static_cast<long>(c.size()) ? c[static_cast<std::size_t>(k)] : 0)));
    return TPowerSeries::from_coeffs(p, 1, v);
}

Matrix<TPowerSeries> tmat(int p, const std::vector<std::vector<std::vector<long>>>& rows, long order)
{
    std::vector<std::vector<TPowerSeries>> m;
    for (const auto& r : rows) {
        m.emplace_back();
        for (const auto& x : r) m.back().push_back(tser(p, x, order));
    }
    return Matrix<TPowerSeries>::from_rows(m, TPowerSeries::zero(p, 1, order));
}

oracle::Q det_oracle(std::vector<std::vector<oracle::Q>> a)
{
    const std::size_t n = a.size();
    oracle::Q d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t r = c;
        while (r < n && a[r][c] == 0) ++r;
        if (r == n) return 0;
        if (r != c) {
            std::swap(a[r], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            const oracle::Q f = a[i][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    return d;
}

} // namespace

TEST_CASE("kernel of a rank one matrix")
{
    for (int p : {2, 3, 5}) {
        auto A = pmat(p, {{1, p}, {p, p * p}});
        auto K = kernel(A, LinalgOptions{});
        REQUIRE(K.basis.size() == 1);
        CHECK(K.rank == 1);
        CHECK(K.residual >= 24);
        const auto& x = K.basis[0];
        CHECK((x[0] + pq(p, p) * x[1]).is_zero());
        CHECK((x[1] - pq(p, 1)).is_zero());
    }
}

TEST_CASE("kernel of the identity is trivial")
{
    auto K = kernel(pmat(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), LinalgOptions{});
    CHECK(K.basis.empty());
    CHECK(K.rank == 3);
    CHECK_FALSE(K.ill_conditioned);
}

TEST_CASE("pivots near the tolerance")
{
    const int p = 3;
    auto A = pmat(p, {{1, 1}, {1, 1}});
    A(1, 1) = pq(p, 1) + Padic::from_parts(p, 20, mpz_class(1), kPrec);
    auto K = kernel(A, LinalgOptions{});
    CHECK(K.rank == 2);
    CHECK(K.ill_conditioned);
    LinalgOptions strict;
    strict.strict = true;
    CHECK_THROWS_AS(kernel(A, strict), Error);
    A(1, 1) = pq(p, 1) + Padic::from_parts(p, 30, mpz_class(1), kPrec);
    auto K2 = kernel(A, LinalgOptions{});
    CHECK(K2.rank == 1);
    CHECK(K2.basis.size() == 1);
}

TEST_CASE("solve a diagonal system")
{
    const int p = 5;
    auto A = pmat(p, {{1, 0}, {0, p}});
    auto S = solve(A, {pq(p, 1), pq(p, p)}, LinalgOptions{});
    CHECK((S.x[0] - pq(p, 1)).is_zero());
    CHECK((S.x[1] - pq(p, 1)).is_zero());
    CHECK(S.residual >= 40);
    CHECK_THROWS_AS(solve(pmat(p, {{1, p}, {p, p * p}}), {pq(p, 1), pq(p, 0)}, LinalgOptions{}), Error);
}

TEST_CASE("random systems reconstruct")
{
    std::mt19937_64 rng(17);
    for (int p : {2, 3, 7}) {
        for (int trial = 0; trial < 5; ++trial) {
            const long n = 3;
            std::vector<std::vector<long>> rows(n, std::vector<long>(n));
            std::vector<std::vector<oracle::Q>> q(n, std::vector<oracle::Q>(n));
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j) {
                    rows[i][j] = static_cast<long>(rng() % 41) - 20;
                    q[i][j] = rows[i][j];
                }
            auto A = pmat(p, rows);
            const oracle::Q d = det_oracle(q);
            Padic dA = det(A);
            if (d == 0) {
                CHECK(dA.is_zero());
                continue;
            }
            CHECK((dA - pq(p, Rational(d))).is_zero());
            std::vector<Padic> x;
            for (long i = 0; i < n; ++i) x.push_back(pq(p, static_cast<long>(rng() % 9) - 4));
            std::vector<Padic> b;
            for (long i = 0; i < n; ++i) {
                Padic s = Padic::zero(p);
                for (long j = 0; j < n; ++j) s = s + A(i, j) * x[j];
                b.push_back(s);
            }
            auto S = solve(A, b, LinalgOptions{});
            for (long i = 0; i < n; ++i)
                CHECK(valuation_or_precision(S.x[i] - x[i]) >= kPrec - 2 * oracle::vp(d, p) - 8);
            auto adj = adjugate(A);
            auto prod = A * adj;
            for (long i = 0; i < n; ++i)
                for (long j = 0; j < n; ++j)
                    CHECK((prod(i, j) - (i == j ? dA : Padic::zero(p))).is_zero());
        }
    }
}

TEST_CASE("Smith form over Z_p")
{
    const int p = 3;
    auto A = pmat(p, {{p, 0}, {0, p * p * p}});
    auto S = snf_local(A);
    CHECK(S.exponents[0] == 1);
    CHECK(S.exponents[1] == 3);
    CHECK(matrix_residual(S.U * A * S.V, S.D) >= 40);

    auto B = pmat(p, {{p * p * p, 0}, {0, p}});
    auto SB = snf_local(B);
    CHECK(SB.exponents[0] == 1);
    CHECK(SB.exponents[1] == 3);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::vector<long>> rows(3, std::vector<long>(3));
        std::vector<std::vector<oracle::Q>> q(3, std::vector<oracle::Q>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                rows[i][j] = (static_cast<long>(rng() % 11) - 5) * (j == 2 ? 9 : 1);
                q[i][j] = rows[i][j];
            }
        const oracle::Q d = det_oracle(q);
        if (d == 0) continue;
        auto M = pmat(p, rows);
        auto R = snf_local(M);
        long sum = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(R.exponents[i].has_value());
            sum += *R.exponents[i];
            if (i > 0) CHECK(*R.exponents[i - 1] <= *R.exponents[i]);
        }
        CHECK(sum == oracle::vp(d, p));
        CHECK(matrix_residual(R.U * M * R.V, R.D) >= kPrec - 2 * sum - 8);
        CHECK(det(R.U).valuation() == 0);
        CHECK(det(R.V).valuation() == 0);
    }
}

TEST_CASE("Smith form over power series in t")
{
    const int p = 3;
    const long order = 10;
    auto D1 = tmat(p, {{{0, 1}, {0}}, {{0}, {1}}}, order);
    auto S1 = snf_local(D1);
    CHECK(S1.exponents[0] == 0);
    CHECK(S1.exponents[1] == 1);
    CHECK(matrix_residual(S1.U * D1 * S1.V, S1.D) >= order - 1);

    auto M = tmat(p, {{{0, 1}, {0, 0, 1}}, {{0, 0, 1}, {0, 0, 0, 1, 1}}}, order);
    auto S = snf_local(M);
    CHECK(S.exponents[0] == 1);
    CHECK(S.exponents[1] == 4);
    CHECK(S.D(1, 1).valuation() == 4);
    CHECK(matrix_residual(S.U * M * S.V, S.D) >= order - 4);
    auto dM = det(M);
    CHECK(dM.valuation() == 5);
}

TEST_CASE("determinants")
{
    auto I = pmat(5, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK((det(I) - pq(5, 1)).is_zero());
    const long order = 8;
    auto D = tmat(2, {{{0, 1}, {0}}, {{0}, {0, 0, 0, 0, 1}}}, order);
    auto d = det(D);
    CHECK(d.valuation() == 5);
    CHECK((d.coeff(5) - CyclotomicScalar::from_padic(1, pq(2, 1))).is_zero());
    auto cp = char_poly(pmat(7, {{2, 1}, {1, 3}}));
    CHECK((cp[1] - pq(7, -5)).is_zero());
    CHECK((cp[2] - pq(7, 5)).is_zero());
}
