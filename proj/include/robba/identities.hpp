#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robba/log_series.hpp"
#include "robba/series.hpp"

namespace robba {

struct IdentityConfig {
    int p = 2;
    PrecisionBudget budget;
    /// Annulus index; 0 selects r_1 = p - 1.
    Rational annulus = 0;
    std::uint64_t seed = 1;
    long cases = 10;
};

struct IdentityResult {
    std::string name;
    std::string module;
    long cases = 0;
    /// Worst residual valuation over the cases.
    Rational residual;
    Rational threshold;
    bool pass = false;
    std::string detail;
};

/// The window-ring and log-ring identities on seeded random inputs.
std::vector<IdentityResult> run_identities(const IdentityConfig& config);

/// Valuations of the T^k-coefficients of ((1+T)^{p^m} - 1)/p^m - t for k = 1..kmax, worst over k, for m = 0..mmax.
std::vector<Rational> convergence_to_t(int p, long kmax, long mmax);

} // namespace robba
