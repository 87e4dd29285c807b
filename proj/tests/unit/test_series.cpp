#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "robba/series.hpp"

using namespace robba;

namespace {

constexpr int kPrec = 40;

AnnulusSeries ser(int p, const Rational& r, long kmin, const std::vector<Rational>& c, long cap = 96)
{
    return AnnulusSeries::from_rationals(p, r, kmin, c, kPrec, cap);
}

AnnulusSeries ser(int p, long kmin, const std::vector<long>& c)
{
    std::vector<Rational> q(c.begin(), c.end());
    return ser(p, Rational(1), kmin, q);
}

bool same(const AnnulusSeries& f, const AnnulusSeries& g, long prec)
{
    return residual_valuation(f, g) >= prec;
}

AnnulusSeries from_oracle(int p, const Rational& r, const oracle::Poly& c)
{
    return ser(p, r, 0, std::vector<Rational>(c.begin(), c.end()));
}

AnnulusSeries random_series(std::mt19937_64& rng, int p, const Rational& r, long lo, long hi)
{
    std::vector<Rational> c;
    for (long k = lo; k <= hi; ++k) c.push_back(Rational(static_cast<long>(rng() % 19) - 9, 1 + static_cast<long>(rng() % 3) * p));
    for (auto& x : c) x.canonicalize();
    return ser(p, r, lo, c);
}

} // namespace

TEST_CASE("products")
{
    CHECK(same(ser(3, 1, {1}) * ser(3, 1, {1}), ser(3, 2, {1}), kPrec));
    CHECK(same(ser(3, 0, {1, 1}) * ser(3, 0, {1, -1}), ser(3, 0, {1, 0, -1}), kPrec));
    auto q = special_qn(2, 1, kPrec, Rational(1), 96);
    auto prod = q * ser(2, 1, {1});
    CHECK(same(prod, frobenius(ser(2, 1, {1})).with_annulus(Rational(1)), kPrec));
    CHECK(prod.kmin() == 1);
    CHECK(prod.kmax() == 2);
}

TEST_CASE("composition")
{
    auto g = ser(2, 1, {2, 1});
    CHECK(same(compose(ser(2, 1, {1}), g), g, kPrec));
    auto sq = compose(ser(2, 2, {1}), g);
    CHECK(same(sq, g * g, kPrec));
    CHECK(same(sq, ser(2, 2, {4, 4, 1}), kPrec));

    auto m1 = Padic::from_integer(3, -1, kPrec);
    auto gm = gamma_image_of_T(m1, Rational(2), 60, 96);
    auto inv = compose(ser(3, -1, {1}), gm);
    auto one = inv * gm;
    CHECK(one.coeff(0).to_rational() == 1);
    for (long k = 1; k <= 20; ++k) CHECK(one.coeff(k).is_zero());
    CHECK_THROWS_AS(compose(ser(3, 1, {1}), ser(3, 0, {1, 1})), Error);
}

TEST_CASE("frobenius and Gamma on T")
{
    CHECK(same(frobenius(ser(2, 1, {1})), ser(2, 1, {2, 1}), kPrec));
    CHECK(frobenius(ser(2, 1, {1})).annulus() == 2);
    auto T = ser(3, Rational(2), 1, {Rational(1)});
    CHECK(same(gamma_action(T, Padic::one(3, kPrec)), T, kPrec - 8));
    auto g = gamma_action(T, Padic::from_integer(3, -1, kPrec));
    for (long k = 1; k <= 30; ++k) CHECK(g.coeff(k).to_rational() == ((k % 2) ? -1 : 1));
}

TEST_CASE("psi examples")
{
    CHECK(same(psi(ser(2, 0, {1})), ser(2, 0, {1}), kPrec));
    CHECK(same(psi(ser(2, 1, {1})), ser(2, 0, {-1}), kPrec));
    auto pt2 = psi(ser(2, 2, {1}));
    CHECK(same(pt2, ser(2, 0, {2, 1}), kPrec));
    CHECK(pt2.annulus() == Rational(1, 2));
    // oracle: phi(T + 2) is the conjugate average of T^2
    auto avg = oracle::conjugate_average({0, 0, 1}, 2);
    CHECK(avg == oracle::phi({2, 1}, 2));
    CHECK(same(frobenius(pt2).with_annulus(1), from_oracle(2, 1, avg), kPrec));
}

TEST_CASE("psi is a left inverse of frobenius")
{
    std::mt19937_64 rng(5);
    for (int p : {2, 3}) {
        for (int i = 0; i < 25; ++i) {
            auto f = random_series(rng, p, Rational(p - 1), -3, 8);
            auto back = psi(frobenius(f));
            CHECK(back.annulus() == f.annulus());
            CHECK(same(back, f, kPrec - 8));
            CHECK(back.known(f.kmin()));
            CHECK(back.known(f.kmax()));
        }
    }
}

TEST_CASE("phi psi against the conjugate average")
{
    std::mt19937_64 rng(6);
    for (int p : {2, 3, 5}) {
        for (int i = 0; i < 9; ++i) {
            auto f = random_series(rng, p, Rational(p - 1), 0, 10);
            oracle::Poly fc;
            for (long k = 0; k <= 10; ++k) fc.push_back(f.coeff(k).to_rational());
            auto want = from_oracle(p, p - 1, oracle::conjugate_average(fc, p));
            auto got = frobenius(psi(f)).with_annulus(p - 1);
            CHECK(same(got, want, kPrec - 8));
        }
    }
}

TEST_CASE("commutation of the operators")
{
    std::mt19937_64 rng(8);
    for (int p : {2, 3}) {
        for (int i = 0; i < 6; ++i) {
            auto f = random_series(rng, p, Rational(p - 1), -2, 6);
            auto lhs = partial(frobenius(f));
            auto rhs = frobenius(partial(f)) * Padic::from_integer(p, p, kPrec);
            CHECK(same(lhs, rhs, kPrec - 8));
            Padic c = Padic::from_integer(p, 1 + (p == 2 ? 4 : p), kPrec);
            auto a = gamma_action(frobenius(f), c);
            auto b = frobenius(gamma_action(f, c));
            CHECK(residual_valuation(a, b) >= 20);
        }
    }
}

TEST_CASE("t under the operators")
{
    PrecisionBudget B;
    for (int p : {2, 3}) {
        auto t = special_t(p, B, Rational(p - 1));
        CHECK(t.coeff(1).to_rational() == 1);
        CHECK(t.coeff(2).to_rational() == Rational(-1, 2));
        CHECK(t.coeff(3).to_rational() == Rational(1, 3));
        auto pt = frobenius(t);
        auto want = t.with_annulus(pt.annulus()) * Padic::from_integer(p, p, kPrec);
        CHECK(residual_valuation(pt, want) >= B.tolerance());
        Padic c = Padic::from_integer(p, gamma_generator(p), kPrec);
        CHECK(residual_valuation(gamma_action(t, c), t * c) >= B.tolerance());
        auto d = partial(t);
        CHECK(d.coeff(0).to_rational() == 1);
        for (long k = 1; k < 40; ++k) CHECK(d.coeff(k).is_zero());
    }
}

TEST_CASE("Gauss valuations")
{
    CHECK(gauss_valuation(ser(3, 4, {1}), Rational(2)) == 2);
    CHECK(gauss_valuation(ser(3, -1, {3}), Rational(1)) == 0);
    PrecisionBudget B;
    CHECK(gauss_valuation(special_t(2, B, Rational(1)), Rational(1)) == 1);
    CHECK(is_infinite(gauss_valuation(AnnulusSeries::zero(2, 1, 96), 1)));
}

TEST_CASE("maximum principle")
{
    std::mt19937_64 rng(9);
    auto f = random_series(rng, 3, Rational(2), -6, 10);
    for (int i = 0; i < 50; ++i) {
        Rational s1 = 2 + Rational(static_cast<long>(rng() % 50), 7);
        Rational s2 = s1 + Rational(static_cast<long>(rng() % 50), 3);
        s1.canonicalize();
        s2.canonicalize();
        const Rational m = interval_valuation(f, s1, s2);
        CHECK(m == std::min(gauss_valuation(f, s1), gauss_valuation(f, s2)));
        for (int j = 0; j < 20; ++j) {
            Rational s = s1 + (s2 - s1) * Rational(static_cast<long>(rng() % 97), 96);
            s.canonicalize();
            CHECK(gauss_valuation(f, s) >= m);
        }
    }
}

TEST_CASE("1 - gamma gains a digit")
{
    std::mt19937_64 rng(10);
    for (int p : {3, 5}) {
        Padic c = Padic::from_integer(p, 1 + p * p, kPrec);
        for (int i = 0; i < 6; ++i) {
            auto f = random_series(rng, p, Rational(p - 1), -3, 8);
            const Rational s1 = p - 1, s2 = 2 * (p - 1);
            auto d = f - gamma_action(f, c);
            CHECK(interval_valuation(d, s1, s2) >= interval_valuation(f, s1, s2) + 1);
        }
    }
}

TEST_CASE("special elements")
{
    CHECK(same(special_qn(2, 1, kPrec, 1, 96), ser(2, 0, {2, 1}), kPrec));
    CHECK(same(special_qn(2, 2, kPrec, 1, 96), ser(2, 0, {2, 2, 1}), kPrec));
    CHECK(same(special_qn(3, 1, kPrec, 1, 96), ser(3, 0, {3, 3, 1}), kPrec));
    CHECK(r_n(3, 2) == 6);
}

TEST_CASE("partial examples")
{
    CHECK(same(partial(ser(3, 1, {1})), ser(3, 0, {1, 1}), kPrec));
    CHECK(same(partial(ser(3, 2, {1})), ser(3, 1, {2, 2}), kPrec));
    auto d = partial(ser(3, -1, {1}));
    CHECK(same(d, ser(3, -2, {-1, -1}), kPrec));
}

TEST_CASE("distinguished division")
{
    PrecisionBudget B;
    for (int p : {2, 3}) {
        for (int n : {1, 2}) {
            const Rational r = r_n(p, n);
            auto q = special_qn(p, n, kPrec, r, 96);
            auto f = q * ser(p, r, 3, {Rational(1)});
            auto res = divide_distinguished(f, qn_coefficients(p, n), B, n);
            CHECK(res.divisible);
            CHECK(same(res.quotient, ser(p, r, 3, {Rational(1)}), kPrec - 8));
            CHECK(res.remainder_valuation >= res.threshold);
        }
    }
    auto res = divide_distinguished(ser(2, 1, {1}), qn_coefficients(2, 1), B, 1);
    CHECK(!res.divisible);
    CHECK(same(res.quotient, ser(2, 0, {1}), kPrec));
    CHECK(same(res.remainder, ser(2, 0, {-2}), kPrec));

    for (int p : {2, 3}) {
        auto t = special_t(p, B, Rational(p - 1));
        auto rt = divide_distinguished(t, qn_coefficients(p, 1), B, 1);
        CHECK(rt.divisible);
        auto back = rt.quotient * special_qn(p, 1, kPrec, p - 1, 96) + rt.remainder;
        CHECK(residual_valuation(back, t) >= B.tolerance());
    }
}

TEST_CASE("division reconstruction")
{
    std::mt19937_64 rng(12);
    PrecisionBudget B;
    for (int i = 0; i < 20; ++i) {
        auto f = random_series(rng, 3, Rational(2), -2, 12);
        auto res = divide_distinguished(f, qn_coefficients(3, 1), B, 0);
        auto back = res.quotient * special_qn(3, 1, kPrec, 2, 96) + res.remainder;
        CHECK(residual_valuation(back, f) >= kPrec - 8);
    }
}

TEST_CASE("division by t")
{
    PrecisionBudget B;
    for (int p : {2, 3}) {
        const Rational r = p - 1;
        auto t = special_t(p, B, r);
        auto one = divide_by_t(t, B);
        CHECK(one.coeff(0).to_rational() == 1);
        for (long k = 1; k <= 20; ++k) CHECK(one.coeff(k).is_zero());
        auto tt = divide_by_t(t * ser(p, r, 1, {Rational(1)}), B);
        CHECK(tt.coeff(1).to_rational() == 1);
        CHECK(tt.coeff(0).is_zero());
        auto t2 = divide_by_t(t * t, B);
        CHECK(gauss_residual(t2 * t, t * t, r) >= B.tolerance());
        CHECK(gauss_residual(t2, t, r) >= B.tolerance());
        CHECK_THROWS_AS(divide_by_t(ser(p, r, 1, {Rational(1)}), B), Error);
    }
}

TEST_CASE("boundedness heuristic")
{
    CHECK(is_bounded(ser(3, -3, {1})).bounded);
    PrecisionBudget B;
    CHECK(is_bounded(special_t(3, B, 2)).bounded);
    std::vector<Rational> c;
    for (long k = 0; k <= 60; ++k) c.push_back(Rational(1) / Rational(ppow(3, k / 4)));
    CHECK(!is_bounded(ser(3, Rational(2), 0, c)).bounded);
}
