#include <doctest.h>

#include <random>

#include "robba/hodge.hpp"

using namespace robba;

namespace {

PrecisionBudget budget() { return PrecisionBudget{}; }

Padic pq(int p, const Rational& q) { return Padic::from_rational(p, q, budget().working()); }

CyclotomicScalar cq(int p, int n, long v) { return CyclotomicScalar::from_padic(n, pq(p, v)); }

Matrix<TPowerSeries> constant_system(int p, const std::vector<std::vector<long>>& rows, long w)
{
    std::vector<std::vector<TPowerSeries>> m;
    for (const auto& r : rows) {
        m.emplace_back();
        for (long x : r) m.back().push_back(TPowerSeries::constant(cq(p, 1, x), w));
    }
    return Matrix<TPowerSeries>::from_rows(m, TPowerSeries::zero(p, 1, w));
}

} // namespace

TEST_CASE("crystalline invariants of rank one modules")
{
    const auto B = budget();
    const int p = 3;
    for (long c0 : {1L, 2L})
        for (long r : {-2L, 0L, 3L}) {
            auto M = build_rank1(p, c0, r, B);
            auto D = dcris(M);
            REQUIRE(D.dim == 1);
            CHECK(D.basis[0].t_power == -r);
            CHECK_FALSE(D.boundary_hit);
            CHECK(D.invariance_residual >= B.tolerance());
            const Padic expected = pq(p, c0) * pq(p, Rational(p)).pow(-r);
            CHECK(valuation_or_precision(D.phi(0, 0) - expected) >= B.digits - 8);
            CHECK(D.N(0, 0).is_zero());
            auto cmp = comparison_residual(M, D);
            CHECK(cmp.ok);
            CHECK(cmp.lambda_constant);
            CHECK(cmp.r == -r);
        }
}

TEST_CASE("comparison with a corrupted invariant")
{
    const auto B = budget();
    const int p = 3;
    auto M = build_rank1(p, 1, 1, B);
    auto D = dcris(M);
    REQUIRE(D.dim == 1);
    LatticeVector v = D.basis[0];
    v.coords[0] = v.coords[0] * AnnulusSeries::from_rationals(p, M.annulus(), 0, {1, 1}, B.working(), B.window());
    auto cmp = comparison_residual(M, v);
    CHECK(cmp.ok);
    CHECK_FALSE(cmp.lambda_constant);
    LatticeVector u = D.basis[0];
    std::vector<Rational> big;
    for (long k = 0; k <= 60; ++k) big.push_back(Rational(1) / Rational(ppow(p, k / 4)));
    u.coords[0] = u.coords[0] * AnnulusSeries::from_rationals(p, M.annulus(), 0, big, B.working(), B.window());
    CHECK_FALSE(comparison_residual(M, u).ok);
    LatticeVector w = D.basis[0];
    w.t_power = 3;
    CHECK_THROWS_AS(comparison_residual(M, w), Error);
}

TEST_CASE("invariants of the test extensions")
{
    const auto B = budget();
    for (int p : {2, 3}) {
        auto triv = dcris(build_rank1(p, 1, 0, B));
        REQUIRE(triv.dim == 1);
        CHECK((triv.phi(0, 0) - pq(p, 1)).is_zero());
        auto M = build_test_extension(p, TestExtension::CyclotomicCocycle, B);
        auto Dc = dcris(M);
        CHECK(Dc.dim == 1);
        auto Ds = dst(M);
        CHECK(Ds.dim <= 2);
        CHECK(Dc.dim <= Ds.dim);
        CHECK(Ds.n_phi_residual >= B.tolerance());
    }
}

TEST_CASE("de Rham system of rank one modules")
{
    const auto B = budget();
    const int p = 3;
    for (long r : {-2L, 0L, 3L}) {
        auto M = build_rank1(p, 2, r, B);
        for (int n : {1, 2}) {
            auto C = ddif_system(M, n, 8);
            auto S = sen_matrix(M, n);
            CHECK((C(0, 0).coeff(0) - S(0, 0)).valuation() >= B.tolerance());
            auto h = horizontal_sections(C, B);
            CHECK(h.rank == 1);
            REQUIRE(h.basis.size() == 1);
            CHECK(h.basis[0].lambda == r);
            CHECK(h.residual >= B.tolerance());
        }
        auto w = sen_weights(sen_matrix(M, 1), B);
        REQUIRE(w.size() == 1);
        CHECK(w[0].integral);
        CHECK(*w[0].integer == r);
    }
}

TEST_CASE("horizontal sections of constant systems")
{
    const auto B = budget();
    const int p = 3;
    const long w = 10;
    auto h = horizontal_sections(constant_system(p, {{2, 0}, {0, -1}}, w), B);
    CHECK(h.rank == 2);
    CHECK(h.obstructions.empty());
    REQUIRE(h.basis.size() == 2);
    CHECK(h.basis[0].lambda == 2);
    CHECK(h.basis[1].lambda == -1);
    CHECK((h.basis[0].coeffs[0][0] - cq(p, 1, 1)).is_zero());
    CHECK(h.basis[0].coeffs[0][1].is_zero());

    auto j = horizontal_sections(constant_system(p, {{0, 1}, {0, 0}}, w), B);
    CHECK(j.rank == 1);
    REQUIRE(j.obstructions.size() == 1);
    CHECK(j.obstructions[0].lambda == 0);
    CHECK(j.obstructions[0].multiplicity == 2);
    CHECK(j.obstructions[0].found == 1);

    auto s = horizontal_sections(constant_system(p, {{4}}, w), B);
    CHECK(s.rank == 1);
    CHECK(s.basis[0].lambda == 4);
}

TEST_CASE("resonant system with a perturbation")
{
    const auto B = budget();
    const int p = 3;
    const long w = 8;
    auto C = constant_system(p, {{1, 0}, {0, 0}}, w);
    // t * E_{01}: a_1 solves only if the resonance block is compatible
    std::vector<CyclotomicScalar> c(static_cast<std::size_t>(w), CyclotomicScalar::zero(p, 1));
    c[1] = cq(p, 1, 1);
    C(0, 1) = TPowerSeries::from_coeffs(p, 1, c);
    auto h = horizontal_sections(C, B);
    CHECK(h.residual >= B.tolerance());
    CHECK(h.rank + static_cast<long>(h.obstructions.size()) >= 1);
}

TEST_CASE("classification")
{
    const auto B = budget();
    for (int p : {2, 3}) {
        auto rep = classify(build_rank1(p, 1, 2, B), {2, 16, {}});
        CHECK(rep.crystalline);
        CHECK(rep.semistable);
        CHECK(rep.de_rham);
        CHECK(rep.hodge_tate);
        CHECK_FALSE(rep.cp_admissible);
        CHECK(rep.monotone);
        REQUIRE(rep.sen_weights.size() == 1);
        CHECK(*rep.sen_weights[0].integer == 2);

        auto triv = classify(build_rank1(p, 1, 0, B));
        CHECK(triv.cp_admissible);
        CHECK(triv.crystalline);
        CHECK(triv.hodge_tate);

        auto cc = classify(build_test_extension(p, TestExtension::CyclotomicCocycle, B));
        CHECK_FALSE(cc.cp_admissible);
        CHECK_FALSE(cc.hodge_tate);
        CHECK_FALSE(cc.de_rham);
        CHECK_FALSE(cc.crystalline);
        CHECK_FALSE(cc.semistable);
        CHECK(cc.dcris == 1);
        CHECK(cc.monotone);
    }
}

TEST_CASE("N_dR in rank one")
{
    const auto B = budget();
    const int p = 3;
    for (long r : {0L, -1L, -2L}) {
        const long c0 = r == -1 ? 2 : 1;
        auto res = ndr_rank1(pq(p, c0), r, B);
        CHECK(res.report.ok);
        CHECK(res.report.integral);
        CHECK(res.report.phi_stable);
        CHECK(res.report.det_exponent == -r);
        if (r < 0) {
            NdrCandidate plain{res.basis.F, {0}};
            auto bad = verify_ndr(res.module, plain);
            CHECK_FALSE(bad.integral);
            REQUIRE_FALSE(bad.flags.empty());
            CHECK(bad.flags[0].find("t^-1") != std::string::npos);
        }
    }
    auto M = build_rank1(p, 1, -2, B);
    NdrCandidate over{identity_series_matrix(p, M.annulus(), 1, B.working(), B.window()), {3}};
    auto rep = verify_ndr(M, over);
    CHECK(rep.det_exponent == 3);
    CHECK_FALSE(rep.det_ok);
    CHECK_FALSE(rep.integral);
    CHECK_THROWS_AS(ndr_rank1(pq(p, 1), 1, B), Error);
}
