#include "robba/identities.hpp"

#include <random>

namespace robba {

namespace {

class Sampler {
public:
    Sampler(int p, const Rational& r, int relprec, long cap, std::uint64_t seed) : p_(p), r_(r), rel_(relprec), cap_(cap), rng_(seed) {}

    AnnulusSeries series(long lo, long hi)
    {
        std::vector<Rational> c;
        for (long k = lo; k <= hi; ++k) c.push_back(frac(static_cast<long>(rng_() % 19) - 9, 1 + static_cast<long>(rng_() % 3)));
        return AnnulusSeries::from_rationals(p_, r_, lo, c, rel_, cap_);
    }

    LogSeries log_series(long deg)
    {
        std::vector<AnnulusSeries> c;
        for (long j = 0; j <= deg; ++j) c.push_back(series(-3, 6));
        return LogSeries(std::move(c));
    }

    Rational point(const Rational& lo, const Rational& hi)
    {
        Rational s = lo + (hi - lo) * frac(static_cast<long>(rng_() % 97), 96);
        s.canonicalize();
        return s;
    }

    long below(long n) { return static_cast<long>(rng_() % static_cast<std::uint64_t>(n)); }

private:
    int p_;
    Rational r_;
    int rel_;
    long cap_;
    std::mt19937_64 rng_;
};

struct Accumulator {
    IdentityResult res;
    Accumulator(std::string name, std::string module, const Rational& threshold)
    {
        res.name = std::move(name);
        res.module = std::move(module);
        res.threshold = threshold;
        res.residual = infinite_valuation();
    }
    void add(const Rational& v)
    {
        ++res.cases;
        if (v < res.residual) res.residual = v;
    }
    IdentityResult done(std::string detail = "")
    {
        res.pass = res.residual >= res.threshold;
        res.detail = std::move(detail);
        return res;
    }
};

Padic gain_unit(int p, long a, int relprec) { return Padic::from_integer(p, 1 + ppow(p, a), relprec); }

} // namespace

std::vector<Rational> convergence_to_t(int p, long kmax, long mmax)
{
    std::vector<Rational> out;
    for (long m = 0; m <= mmax; ++m) {
        const mpz_class q = ppow(p, m);
        Rational worst = infinite_valuation();
        for (long k = 1; k <= kmax; ++k) {
            // C(p^m, k) / p^m - (-1)^{k-1} / k
            mpz_class b = 1;
            for (long i = 0; i < k; ++i) b *= q - i;
            mpz_class kf = 1;
            for (long i = 2; i <= k; ++i) kf *= i;
            Rational d = Rational(b, kf * q) - frac(k % 2 ? 1 : -1, k);
            d.canonicalize();
            if (d == 0) continue;
            const Rational v = valuation_of(p, d);
            if (v < worst) worst = v;
        }
        out.push_back(worst);
    }
    return out;
}

std::vector<IdentityResult> run_identities(const IdentityConfig& config)
{
    const int p = config.p;
    const PrecisionBudget& B = config.budget;
    B.validate();
    require(is_prime(p), ErrorKind::InvalidInput, "p must be prime");
    require(config.cases > 0, ErrorKind::InvalidInput, "at least one case per identity");
    const Rational r = config.annulus == 0 ? Rational(p - 1) : config.annulus;
    require(r > 0, ErrorKind::InvalidInput, "annulus index must be positive");
    const int rel = B.working();
    const long cap = B.window();
    const Rational tol = B.tolerance();
    const long n = config.cases;
    Sampler S(p, r, rel, cap, config.seed);
    const Padic pp = Padic::from_integer(p, p, rel);
    const Padic c = Padic::from_integer(p, gamma_generator(p), rel);
    std::vector<IdentityResult> out;

    {
        Accumulator a("psi o phi = id", "robba-series", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.series(-3, 8);
            a.add(residual_valuation(psi(frobenius(f)), f));
        }
        out.push_back(a.done());
    }
    {
        Accumulator a("partial o phi = p phi o partial", "robba-series", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.series(-2, 6);
            a.add(residual_valuation(partial(frobenius(f)), frobenius(partial(f)) * pp));
        }
        out.push_back(a.done());
    }
    {
        Accumulator a("gamma_c o phi = phi o gamma_c", "robba-series", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.series(0, 8);
            a.add(residual_valuation(gamma_action(frobenius(f), c), frobenius(gamma_action(f, c))));
        }
        out.push_back(a.done("power series in T: the lower tail of phi(T^-k) caps the digits of gamma on it"));
    }
    {
        Accumulator a("gamma_a o gamma_b = gamma_ab", "robba-series", tol);
        const Padic b = Padic::from_integer(p, p == 2 ? 3 : 2, rel);
        for (long i = 0; i < n; ++i) {
            auto f = S.series(-2, 6);
            a.add(gauss_residual(gamma_action(gamma_action(f, b), c), gamma_action(f, c * b), r));
        }
        out.push_back(a.done("Gauss residual at s = r"));
    }
    {
        Accumulator a("gamma_c(t) = c t and phi(t) = p t", "robba-series", tol);
        auto t = special_t(p, B, r);
        a.add(residual_valuation(gamma_action(t, c), t * c));
        auto pt = frobenius(t);
        a.add(residual_valuation(pt, t.with_annulus(pt.annulus()) * pp));
        out.push_back(a.done());
    }
    {
        Accumulator a("maximum principle", "robba-series", 0);
        for (long i = 0; i < n; ++i) {
            auto f = S.series(-6, 10);
            const Rational s1 = S.point(r, 4 * r);
            const Rational s2 = S.point(s1, s1 + 8 * r);
            const Rational m = interval_valuation(f, s1, s2);
            a.add(m == std::min(gauss_valuation(f, s1), gauss_valuation(f, s2)) ? Rational(0) : Rational(-1));
            for (int k = 0; k < 20; ++k) a.add(gauss_valuation(f, S.point(s1, s2)) - m);
        }
        out.push_back(a.done("interior Gauss valuation minus the endpoint minimum"));
    }
    {
        const long e = p == 2 ? 3 : 2;
        Accumulator a("1 - gamma gains a digit", "robba-series", 1);
        const Padic g = gain_unit(p, e, rel);
        for (long i = 0; i < n; ++i) {
            auto f = S.series(-3, 8);
            const Rational s1 = r, s2 = 2 * r;
            a.add(interval_valuation(f - gamma_action(f, g), s1, s2) - interval_valuation(f, s1, s2));
        }
        out.push_back(a.done("c = 1 + p^" + std::to_string(e) + " on [r, 2r]"));
    }
    {
        Accumulator a("division by q_n reconstructs f", "robba-series", tol);
        for (long i = 0; i < n; ++i) {
            const int level = 1 + static_cast<int>(i % 2);
            auto f = S.series(-2, 12);
            auto res = divide_distinguished(f, qn_coefficients(p, level), B, 0);
            auto back = res.quotient * special_qn(p, level, rel, r, cap) + res.remainder;
            a.add(residual_valuation(back, f));
        }
        out.push_back(a.done());
    }
    {
        auto vals = convergence_to_t(p, 12, 2 * B.digits);
        long m_needed = -1;
        bool monotone = true;
        for (std::size_t m = 0; m < vals.size(); ++m) {
            if (m > 0 && vals[m] < vals[m - 1]) monotone = false;
            if (m_needed < 0 && vals[m] > Rational(B.digits, 2)) m_needed = static_cast<long>(m);
        }
        Accumulator a("((1+T)^{p^m} - 1)/p^m -> t", "robba-series", Rational(B.digits, 2));
        a.add(m_needed >= 0 && monotone ? vals[static_cast<std::size_t>(m_needed)] : vals.back());
        out.push_back(a.done(monotone ? "nondecreasing in m; exceeds N/2 from m = " + std::to_string(m_needed) : "not monotone in m"));
    }
    {
        Accumulator a("antiderivative inverts partial", "log-extension", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.log_series(i % 3);
            auto anti = antiderivative(f);
            auto back = log_partial(anti.primitive + LogSeries::ell(p, r, rel, cap) * anti.logT_coeff);
            a.add(residual_valuation(back, f));
        }
        out.push_back(a.done());
    }
    {
        Accumulator a("N o partial = partial o N", "log-extension", tol);
        Accumulator b("N o nabla = nabla o N", "log-extension", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.log_series(2);
            a.add(residual_valuation(log_partial(monodromy_N(f)), monodromy_N(log_partial(f))));
            b.add(gauss_residual(log_nabla(monodromy_N(f), B), monodromy_N(log_nabla(f, B)), r));
        }
        out.push_back(a.done());
        out.push_back(b.done("Gauss residual at s = r"));
    }
    {
        Accumulator a("N phi = p phi N", "log-extension", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.log_series(2);
            auto lhs = monodromy_N(log_frobenius(f, B));
            a.add(gauss_residual(lhs, log_frobenius(monodromy_N(f), B) * pp, p * r));
        }
        out.push_back(a.done("Gauss residual at s = p r"));
    }
    {
        Accumulator a("gamma_c commutes with N", "log-extension", tol);
        for (long i = 0; i < n; ++i) {
            auto f = S.log_series(2);
            a.add(gauss_residual(monodromy_N(log_gamma(f, c, B)), log_gamma(monodromy_N(f), c, B), r));
        }
        out.push_back(a.done("Gauss residual at s = r"));
    }
    return out;
}

} // namespace robba
