#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robba/linalg.hpp"
#include "robba/localization.hpp"
#include "robba/phigamma.hpp"

namespace robba {

/// The coordinate lattice {T^k t^j l^m e_i} searched for Gamma-invariants.
struct LatticeSearch {
    long tmin = -8;
    long tmax = 8;
    long kmin = -4;
    long kmax = 8;
    long ell_max = 0;
};

/// t^j sum_i X_i e_i with X_i polynomials in T^{+-1} and l.
struct LatticeVector {
    long t_power = 0;
    std::vector<LogSeries> coords;
};

struct InvariantSpace {
    long dim = 0;
    std::vector<LatticeVector> basis;
    Matrix<Padic> phi;
    Matrix<Padic> N;
    /// Power of t carried by the first basis vector.
    long twist_exponent = 0;
    bool boundary_hit = false;
    /// Worst gamma(x) - x over the basis, on every known coefficient.
    Rational invariance_residual;
    /// N phi - p phi N.
    Rational n_phi_residual;
    LatticeSearch search;
    std::vector<std::string> diagnostics;
};

/// Kernel of (gamma_c - 1) over the lattice for every stored generator, with its phi- and N-action.
InvariantSpace gamma_invariants(const PhiGammaModule& M, const LatticeSearch& search);
InvariantSpace dcris(const PhiGammaModule& M, LatticeSearch search = {});
InvariantSpace dst(const PhiGammaModule& M, LatticeSearch search = {});

struct ComparisonReport {
    bool ok = false;
    long r = 0;
    bool lambda_bounded = false;
    bool lambda_constant = false;
    Rational invariance_residual;
    std::string note;
};

/// Rank one: the basis vector is lambda t^r e with lambda bounded and r = -twist.
ComparisonReport comparison_residual(const PhiGammaModule& M, const LatticeVector& v);
ComparisonReport comparison_residual(const PhiGammaModule& M, const InvariantSpace& inv);

/// C(t) = iota_n(Mat nabla_V) modulo t^w.
Matrix<TPowerSeries> ddif_system(const PhiGammaModule& M, int n, long w);

struct HorizontalSection {
    /// Y(t) = t^{-lambda} sum_k a_k t^k, a_0 possibly zero for non-leading components.
    long lambda = 0;
    std::vector<std::vector<CyclotomicScalar>> coeffs;  // coeffs[k][i]
};

struct Obstruction {
    long lambda = 0;
    long multiplicity = 0;
    long found = 0;
    std::string message;
};

struct HorizontalResult {
    long rank = 0;
    std::vector<long> exponents;  // integer eigenvalues of C(0) with multiplicity
    std::vector<HorizontalSection> basis;
    std::vector<Obstruction> obstructions;
    /// Smallest valuation of t Y' + C Y over the basis, orders below w - 1.
    Rational residual;
    bool integral_exponents = true;
};

/// Frobenius method for t dY/dt + C Y = 0.
HorizontalResult horizontal_sections(const Matrix<TPowerSeries>& C, const PrecisionBudget& budget);

struct SenWeight {
    CyclotomicScalar value;
    bool integral = false;
    std::optional<long> integer;
    /// Valuation of value - (nearest integer), for non-integral weights.
    Rational distance;
};

/// Integer roots of det(x - S) with multiplicity, plus the remaining trace for the rest.
std::vector<SenWeight> sen_weights(const Matrix<CyclotomicScalar>& S, const PrecisionBudget& budget);

struct ClassifyParams {
    int n = 0;  // 0 selects the smallest level allowed by the annulus
    long w = 16;
    LatticeSearch search;
};

struct ClassificationReport {
    bool cp_admissible = false;
    bool hodge_tate = false;
    bool de_rham = false;
    bool crystalline = false;
    bool semistable = false;
    bool semisimple = false;
    bool monotone = true;
    std::vector<SenWeight> sen_weights;
    long dcris = 0;
    long dst = 0;
    long ddr = 0;
    std::vector<std::string> diagnostics;
    int level = 0;
};

ClassificationReport classify(const PhiGammaModule& M, const ClassifyParams& params = {});

struct NdrCandidate {
    /// Basis b_a = t^{k_a} sum_i F_ia e_i.
    SeriesMatrix F;
    std::vector<long> t_powers;
};

struct NdrReport {
    bool integral = false;
    bool phi_stable = false;
    bool det_ok = false;
    bool det_unit = false;
    long det_exponent = 0;
    long expected_exponent = 0;
    bool ok = false;
    std::vector<std::string> flags;
    std::vector<std::string> notes;
};

/// Mat(partial_V) in the basis, the determinant exponent against -sum(weights), and phi-stability.
NdrReport verify_ndr(const PhiGammaModule& M, const NdrCandidate& B);

struct NdrResult {
    PhiGammaModule module;
    NdrCandidate basis;
    NdrReport report;
};

/// N_dR = t^{|r|} D for the rank one module (c0, r), r <= 0.
NdrResult ndr_rank1(const Padic& c0, long r, const PrecisionBudget& budget);

} // namespace robba
