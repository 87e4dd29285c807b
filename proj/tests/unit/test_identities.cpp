#include <doctest.h>

#include "../oracles.hpp"
#include "robba/identities.hpp"

using namespace robba;

TEST_CASE("identity suite at p = 3")
{
    IdentityConfig cfg;
    cfg.p = 3;
    cfg.cases = 3;
    auto out = run_identities(cfg);
    REQUIRE(out.size() >= 10);
    for (const auto& r : out) {
        INFO(r.name << " " << r.detail);
        CHECK(r.pass);
        CHECK(r.residual >= r.threshold);
    }
    auto again = run_identities(cfg);
    REQUIRE(again.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].residual == out[i].residual);
}

TEST_CASE("convergence to t against the binomial oracle")
{
    for (int p : {2, 3}) {
        auto v = convergence_to_t(p, 12, 12);
        REQUIRE(v.size() == 13);
        for (std::size_t m = 1; m < v.size(); ++m) CHECK(v[m] >= v[m - 1]);
        long worst = 1L << 30;
        for (long k = 1; k <= 12; ++k) {
            const auto q = oracle::binomial_minus_log(ppow(p, 12), k);
            if (q != 0) worst = std::min(worst, oracle::vp(q, p));
        }
        CHECK(v[12] == Rational(worst));
    }
}
