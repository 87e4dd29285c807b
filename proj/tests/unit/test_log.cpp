#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "robba/log_series.hpp"

using namespace robba;

namespace {

constexpr int kPrec = 40;

AnnulusSeries ser(int p, const Rational& r, long kmin, const std::vector<long>& c)
{
    std::vector<Rational> q(c.begin(), c.end());
    return AnnulusSeries::from_rationals(p, r, kmin, q, kPrec, 96);
}

LogSeries ell(int p, const Rational& r) { return LogSeries::ell(p, r, kPrec, 96); }

AnnulusSeries random_series(std::mt19937_64& rng, int p, const Rational& r, long lo, long hi)
{
    std::vector<Rational> c;
    for (long k = lo; k <= hi; ++k) {
        Rational x(static_cast<long>(rng() % 19) - 9, 1 + static_cast<long>(rng() % 2) * p);
        x.canonicalize();
        c.push_back(x);
    }
    return AnnulusSeries::from_rationals(p, r, lo, c, PrecisionBudget{}.working(), 96);
}

LogSeries random_log(std::mt19937_64& rng, int p, const Rational& r, long deg)
{
    std::vector<AnnulusSeries> c;
    for (long j = 0; j <= deg; ++j) c.push_back(random_series(rng, p, r, -3, 6));
    return LogSeries(std::move(c));
}

} // namespace

TEST_CASE("derivative of log")
{
    const Rational r = 2;
    auto l = ell(3, r);
    auto d = log_partial(l);
    CHECK(d.degree() == 0);
    CHECK(residual_valuation(d.coeff(0), ser(3, r, -1, {1, 1})) >= kPrec);
    auto d2 = log_partial(l * LogSeries(ser(3, r, 1, {1})));
    CHECK(d2.degree() == 1);
    CHECK(residual_valuation(d2.coeff(1), ser(3, r, 0, {1, 1})) >= kPrec);
    CHECK(residual_valuation(d2.coeff(0), ser(3, r, 0, {1, 1})) >= kPrec);
    auto d3 = log_partial(l * l);
    CHECK(d3.degree() == 1);
    CHECK(residual_valuation(d3.coeff(1), ser(3, r, -1, {2, 2})) >= kPrec);
    CHECK(is_zero_at_precision(d3.coeff(0)));
}

TEST_CASE("nabla examples")
{
    PrecisionBudget B;
    for (int p : {2, 3}) {
        const Rational r = p - 1;
        auto t = special_t(p, B, r);
        auto nt = log_nabla(LogSeries(t), B);
        CHECK(gauss_residual(nt.coeff(0), t, r) >= B.tolerance());
        auto nT = log_nabla(LogSeries(ser(p, r, 1, {1})), B);
        CHECK(gauss_residual(nT.coeff(0), t * ser(p, r, 0, {1, 1}), r) >= B.tolerance());
        auto nl = log_nabla(ell(p, r), B);
        CHECK(nl.degree() == 0);
        CHECK(gauss_residual(nl.coeff(0), t * ser(p, r, -1, {1, 1}), r) >= B.tolerance());
    }
}

TEST_CASE("monodromy")
{
    const Rational r = 1;
    auto one = LogSeries(ser(2, r, 0, {1}));
    CHECK(monodromy_N(one).is_zero());
    auto nl = monodromy_N(ell(2, r));
    CHECK(nl.degree() == 0);
    CHECK(residual_valuation(nl.coeff(0), ser(2, r, 0, {-1})) >= kPrec);
    auto nl2 = monodromy_N(ell(2, r) * ell(2, r));
    CHECK(nl2.degree() == 1);
    CHECK(residual_valuation(nl2.coeff(1), ser(2, r, 0, {-2})) >= kPrec);
    CHECK(is_zero_at_precision(nl2.coeff(0)));
    // nilpotent of order degree + 1
    auto l = ell(2, r);
    auto l3 = l * l * l;
    CHECK(!monodromy_N(monodromy_N(monodromy_N(l3))).is_zero());
    CHECK(monodromy_N(monodromy_N(monodromy_N(monodromy_N(l3)))).is_zero());
}

TEST_CASE("Frobenius of log")
{
    PrecisionBudget B;
    auto u = log_phi_correction(2, Rational(1), B);
    CHECK(u.annulus() == 2);
    CHECK(u.coeff(-1).to_rational() == 2);
    CHECK(u.coeff(-2).to_rational() == -2);
    CHECK(u.coeff(-3).to_rational() == Rational(8, 3));
    CHECK(*u.tailbound() >= B.working());
    // exp(u) = phi(T)/T^2 = 1 + 2/T, checked in X = 1/T with exact rationals
    const long K = 12;
    oracle::Poly ux(K + 1, 0);
    for (long k = 1; k <= K; ++k) ux[static_cast<std::size_t>(k)] = u.coeff(-k).to_rational();
    oracle::Poly e(K + 1, 0), term(K + 1, 0);
    term[0] = 1;
    for (long m = 0; m <= K; ++m) {
        e = oracle::add(e, term);
        term = oracle::mul(term, ux);
        term.resize(K + 1);
        for (auto& x : term) x /= (m + 1);
    }
    CHECK(e[0] == 1);
    CHECK(e[1] == 2);
    for (long k = 2; k <= K; ++k) CHECK(e[static_cast<std::size_t>(k)] == 0);

    auto fl = log_frobenius(ell(2, 1), B);
    CHECK(fl.degree() == 1);
    CHECK(fl.coeff(1).coeff(0).to_rational() == 2);
    CHECK(residual_valuation(fl.coeff(0), u) >= kPrec);

    // p = 3: exp check against phi(T)/T^3 = 1 + 3/T + 3/T^2
    auto u3 = log_phi_correction(3, Rational(2), B);
    oracle::Poly v(K + 1, 0);
    for (long k = 1; k <= K; ++k) v[static_cast<std::size_t>(k)] = u3.coeff(-k).to_rational();
    oracle::Poly e3(K + 1, 0), t3(K + 1, 0);
    t3[0] = 1;
    for (long m = 0; m <= K; ++m) {
        e3 = oracle::add(e3, t3);
        t3 = oracle::mul(t3, v);
        t3.resize(K + 1);
        for (auto& x : t3) x /= (m + 1);
    }
    CHECK(e3[1] == 3);
    CHECK(e3[2] == 3);
    for (long k = 3; k <= K; ++k) CHECK(e3[static_cast<std::size_t>(k)] == 0);
}

TEST_CASE("N phi = p phi N")
{
    PrecisionBudget B;
    auto l = ell(2, 1);
    auto l2 = l * l;
    auto lhs = monodromy_N(log_frobenius(l2, B));
    auto rhs = log_frobenius(monodromy_N(l2), B) * Padic::from_integer(2, 2, kPrec);
    CHECK(residual_valuation(lhs, rhs) >= B.tolerance());

    std::mt19937_64 rng(21);
    for (int i = 0; i < 4; ++i) {
        auto f = random_log(rng, 3, Rational(2), 2);
        auto a = monodromy_N(log_frobenius(f, B));
        auto b = log_frobenius(monodromy_N(f), B) * Padic::from_integer(3, 3, kPrec);
        CHECK(gauss_residual(a, b, Rational(6)) >= B.tolerance());
    }
}

TEST_CASE("Gamma on log")
{
    PrecisionBudget B;
    for (int p : {2, 3}) {
        const Rational r = p - 1;
        auto g1 = log_gamma(ell(p, r), Padic::one(p, kPrec), B);
        CHECK(residual_valuation(g1, ell(p, r)) >= B.tolerance());
        // cocycle: v_{c c'} = gamma_c(v_{c'}) + v_c
        Padic c = Padic::from_integer(p, gamma_generator(p), B.working());
        Padic c2 = Padic::from_integer(p, p == 2 ? 3 : 2, B.working());
        auto v1 = log_gamma_correction(c, r, B);
        auto v2 = log_gamma_correction(c2, r, B);
        auto v12 = log_gamma_correction(c * c2, r, B);
        CHECK(gauss_residual(gamma_action(v2, c) + v1, v12, r) >= B.tolerance());
        // gamma commutes with N
        auto l2 = ell(p, r) * ell(p, r);
        CHECK(gauss_residual(monodromy_N(log_gamma(l2, c, B)), log_gamma(monodromy_N(l2), c, B), r) >= B.tolerance());
    }
}

TEST_CASE("antiderivative examples")
{
    const Rational r = 2;
    auto a = antiderivative(LogSeries(ser(3, r, 0, {1, 1})));
    CHECK(a.logT_coeff.is_zero());
    CHECK(residual_valuation(a.primitive.coeff(0), ser(3, r, 1, {1})) >= kPrec - 8);
    auto b = antiderivative(LogSeries(ser(3, r, -1, {1, 1})));
    CHECK(b.logT_coeff.to_rational() == 1);
    CHECK(is_zero_at_precision(b.primitive.coeff(0)));
    auto c = antiderivative(LogSeries(ser(3, r, 1, {1, 1})));
    CHECK(c.logT_coeff.is_zero());
    CHECK(residual_valuation(c.primitive.coeff(0), AnnulusSeries::from_rationals(3, r, 2, {Rational(1, 2)}, kPrec, 96)) >=
          kPrec - 8);
}

TEST_CASE("antiderivative inverts the derivative")
{
    PrecisionBudget B;
    std::mt19937_64 rng(22);
    for (int p : {2, 3}) {
        for (int i = 0; i < 15; ++i) {
            auto f = random_log(rng, p, Rational(p - 1), i % 3);
            auto a = antiderivative(f);
            auto back = log_partial(a.primitive + LogSeries::ell(p, p - 1, B.working(), 96) * a.logT_coeff);
            CHECK(residual_valuation(back, f) >= B.tolerance());
        }
    }
}

TEST_CASE("N commutes with the connection")
{
    PrecisionBudget B;
    std::mt19937_64 rng(23);
    for (int i = 0; i < 5; ++i) {
        auto f = random_log(rng, 3, Rational(2), 2);
        CHECK(residual_valuation(log_partial(monodromy_N(f)), monodromy_N(log_partial(f))) >= B.tolerance());
        CHECK(gauss_residual(log_nabla(monodromy_N(f), B), monodromy_N(log_nabla(f, B)), Rational(2)) >= B.tolerance());
    }
}
