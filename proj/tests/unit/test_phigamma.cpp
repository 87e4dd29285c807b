#include <doctest.h>

#include <random>

#include "robba/phigamma.hpp"

using namespace robba;

namespace {

PrecisionBudget budget() { return PrecisionBudget{}; }

Padic pq(int p, const Rational& q) { return Padic::from_rational(p, q, budget().working()); }

AnnulusSeries random_series(std::mt19937_64& rng, int p, const Rational& r, long lo, long hi)
{
    std::vector<Rational> c;
    for (long k = lo; k <= hi; ++k) c.push_back(Rational(static_cast<long>(rng() % 19) - 9));
    return AnnulusSeries::from_rationals(p, r, lo, c, budget().working(), budget().window());
}

bool constant_equals(const AnnulusSeries& f, const Padic& a, long tol)
{
    AnnulusSeries c = AnnulusSeries::constant(a, f.annulus(), f.width_cap());
    return residual_valuation(f, c) >= tol;
}

} // namespace

TEST_CASE("rank one modules validate")
{
    const auto B = budget();
    for (int p : {2, 3}) {
        auto M = build_rank1(p, 1, 0, B);
        CHECK(validate(M).ok);
        CHECK(M.gammas().size() == 2);
        auto M1 = build_rank1(p, 1, 1, B);
        CHECK(constant_equals(M1.gammas()[0].G(0, 0), main_gamma_unit(p, B.working()), B.working()));
        CHECK(validate(build_rank1(p, p == 2 ? 3 : 2, -2, B)).ok);
    }
    auto M = build_rank1(3, 2, -2, B);
    const Padic c = main_gamma_unit(3, B.working());
    CHECK(constant_equals(M.gammas()[0].G(0, 0), c.inverse().pow(2), B.working()));
    CHECK(constant_equals(M.P()(0, 0), pq(3, 2), B.working()));
    CHECK_THROWS_AS(build_rank1(3, 3, 1, B), Error);
}

TEST_CASE("test extensions validate")
{
    const auto B = budget();
    for (int p : {2, 3}) {
        CHECK(validate(build_test_extension(p, TestExtension::CyclotomicCocycle, B)).ok);
        CHECK(validate(build_test_extension(p, TestExtension::UnipotentDemo, B)).ok);
    }
}

TEST_CASE("corrupted cocycle fails with residual 3")
{
    const auto B = budget();
    const int p = 3;
    auto M = build_test_extension(p, TestExtension::CyclotomicCocycle, B);
    auto gs = M.gammas();
    auto& tor = gs[1];
    REQUIRE(tor.torsion_order == 2);
    tor.G(0, 1) = tor.G(0, 1) + AnnulusSeries::constant(pq(p, 27), M.annulus(), B.window());
    PhiGammaModule bad(p, M.annulus(), B, M.P(), gs, M.meta());
    auto rep = validation_report(bad);
    CHECK_FALSE(rep.ok);
    CHECK(rep.residual == 3);
    try {
        validate(bad);
        FAIL("validate accepted a corrupted module");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ValidationFailure);
    }
}

TEST_CASE("nabla of rank one modules")
{
    const auto B = budget();
    for (int p : {2, 3}) {
        for (long r : {-2L, 0L, 1L, 3L}) {
            auto M = build_rank1(p, 1, r, B);
            const auto& A = M.nabla().A;
            CHECK(constant_equals(A(0, 0), pq(p, r), B.tolerance()));
            CHECK(M.nabla().independence_residual >= B.digits - B.slack);
            CHECK(nabla_phi_residual(M) >= B.tolerance());
            auto S = sen_matrix(M, 1);
            CHECK((S(0, 0) - CyclotomicScalar::from_padic(1, pq(p, r))).valuation() >= B.tolerance());
        }
    }
}

TEST_CASE("nabla of the cyclotomic cocycle")
{
    const auto B = budget();
    for (int p : {2, 3}) {
        auto M = build_test_extension(p, TestExtension::CyclotomicCocycle, B);
        const auto& A = M.nabla().A;
        CHECK(is_zero_at_precision(A(0, 0)));
        CHECK(is_zero_at_precision(A(1, 0)));
        CHECK(is_zero_at_precision(A(1, 1)));
        CHECK(constant_equals(A(0, 1), pq(p, 1), B.tolerance()));
        auto S = sen_matrix(M, 2);
        CHECK((S(0, 1) - CyclotomicScalar::from_padic(2, pq(p, 1))).valuation() >= B.tolerance());
        CHECK(S(0, 0).is_zero());
        auto triv = build_rank1(p, 1, 0, B);
        CHECK(is_zero_at_precision(triv.nabla().A(0, 0)));
    }
}

TEST_CASE("partial connection flags")
{
    const auto B = budget();
    const int p = 3;
    auto triv = partial_V(build_rank1(p, 1, 0, B));
    CHECK_FALSE(triv.t_inverse[0][0]);
    auto tw = partial_V(build_rank1(p, 1, 2, B));
    CHECK(tw.t_inverse[0][0]);
    auto cc = partial_V(build_test_extension(p, TestExtension::CyclotomicCocycle, B));
    CHECK(cc.t_inverse[0][1]);
    CHECK_FALSE(cc.t_inverse[0][0]);
    CHECK_FALSE(cc.t_inverse[1][1]);
}

TEST_CASE("unipotent demo connection")
{
    const auto B = budget();
    auto M = build_test_extension(3, TestExtension::UnipotentDemo, B);
    REQUIRE(M.meta().synthetic_partial.has_value());
    auto anti = antiderivative(LogSeries((*M.meta().synthetic_partial)(0, 1)));
    CHECK((anti.logT_coeff - pq(3, 1)).is_zero());
}

TEST_CASE("logarithm of gamma is t times partial")
{
    const auto B = budget();
    std::mt19937_64 rng(2);
    for (int p : {2, 3}) {
        const Rational r = r_n(p, 1);
        const Padic c = Padic::from_integer(p, p == 2 ? 9 : 1 + p * p, B.working() + 8);
        for (int i = 0; i < 4; ++i) {
            auto f = random_series(rng, p, r, -3, 6);
            auto lhs = log_gamma_operator(f, c, B);
            auto rhs = nabla_series(f, B);
            CHECK(gauss_residual(lhs, rhs, r) >= B.digits - 10);
        }
    }
}

TEST_CASE("Leibniz rule for nabla_V")
{
    const auto B = budget();
    std::mt19937_64 rng(8);
    const int p = 3;
    auto M = build_rank1(p, 2, 1, B);
    const Rational r = M.annulus();
    for (int i = 0; i < 3; ++i) {
        auto lam = random_series(rng, p, r, -2, 4);
        auto x = random_series(rng, p, r, -1, 3);
        auto direct = nabla_apply(M, {lam * x});
        auto assembled = nabla_assemble(M, {lam * x});
        auto split = nabla_series(lam, B) * x + lam * nabla_assemble(M, {x})[0];
        CHECK(gauss_residual(direct[0], assembled[0], r) >= B.digits - 10);
        CHECK(gauss_residual(direct[0], split, r) >= B.digits - 10);
    }
}
