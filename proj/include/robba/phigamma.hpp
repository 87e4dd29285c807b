#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "robba/linalg.hpp"
#include "robba/log_series.hpp"
#include "robba/series.hpp"

namespace robba {

using SeriesMatrix = Matrix<AnnulusSeries>;
using SeriesVector = std::vector<AnnulusSeries>;

struct GammaGenerator {
    Padic c;
    SeriesMatrix G;
    /// Order of c when it is a root of unity, 0 otherwise.
    long torsion_order = 0;
};

struct ConnectionMatrix {
    SeriesMatrix A;
    enum class Tag { Nabla, Partial } tag = Tag::Nabla;
    /// Entries that are a t^{-1} multiple of the stored series (partial tag only).
    std::vector<std::vector<bool>> t_inverse;
    /// The generator c' = c^{p^b} whose logarithm series was summed.
    Padic generator;
    long terms = 0;
    /// Residual against the second generator c'^2.
    Rational independence_residual;
};

struct ModuleMeta {
    std::string name;
    std::optional<long> twist;
    /// A synthetic partial connection carried for connection-level tests.
    std::optional<SeriesMatrix> synthetic_partial;
};

/// A (phi, Gamma)-module over the window ring in a fixed basis: phi(e) = P e, gamma_c(e) = G_c e (columns).
class PhiGammaModule {
public:
    PhiGammaModule() = default;
    PhiGammaModule(int p, const Rational& r, const PrecisionBudget& budget, SeriesMatrix P, std::vector<GammaGenerator> gammas,
                   ModuleMeta meta);

    int prime() const { return p_; }
    const Rational& annulus() const { return r_; }
    const PrecisionBudget& budget() const { return budget_; }
    long rank() const { return P_.rows(); }
    const SeriesMatrix& P() const { return P_; }
    const std::vector<GammaGenerator>& gammas() const { return gammas_; }
    const ModuleMeta& meta() const { return meta_; }
    /// The first generator that is not torsion.
    const GammaGenerator& main_generator() const;

    /// Mat(nabla_V), computed once.
    const ConnectionMatrix& nabla() const;

private:
    int p_ = 0;
    Rational r_ = 1;
    PrecisionBudget budget_;
    SeriesMatrix P_;
    std::vector<GammaGenerator> gammas_;
    ModuleMeta meta_;
    struct Cache {
        std::mutex mu;
        std::shared_ptr<const ConnectionMatrix> nabla;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Scalar and matrix helpers over the window ring.
SeriesMatrix series_matrix(int p, const Rational& r, long width_cap, const std::vector<std::vector<Padic>>& rows);
SeriesMatrix identity_series_matrix(int p, const Rational& r, long d, int relprec, long width_cap);
SeriesMatrix frobenius(const SeriesMatrix& M);
SeriesMatrix gamma_action(const SeriesMatrix& M, const Padic& c);
SeriesVector gamma_action(const SeriesVector& v, const Padic& c);
SeriesVector apply(const SeriesMatrix& M, const SeriesVector& v);
/// Smallest residual_valuation over the entries.
long residual_valuation(const SeriesMatrix& A, const SeriesMatrix& B);
long residual_valuation(const SeriesVector& a, const SeriesVector& b);
/// Smallest gauss_residual at s over the entries.
Rational gauss_residual(const SeriesMatrix& A, const SeriesMatrix& B, const Rational& s);
Rational gauss_residual(const SeriesVector& a, const SeriesVector& b, const Rational& s);
/// Smallest Gauss valuation at s over the entries.
Rational gauss_valuation(const SeriesMatrix& A, const Rational& s);
Rational gauss_valuation(const SeriesVector& a, const Rational& s);

/// Stored generators: 1+p (5 for p = 2) and a Teichmüller unit of order p-1 (-1 for p = 2).
Padic main_gamma_unit(int p, int relprec);
Padic torsion_gamma_unit(int p, int relprec);
long torsion_order(int p);

/// G_{c^m} = G gamma_c(G) ... gamma_c^{m-1}(G).
SeriesMatrix cocycle_power(const SeriesMatrix& G, const Padic& c, long m);

struct LawCheck {
    std::string name;
    Rational residual;
    std::string entry;
};

struct ValidationReport {
    bool ok = false;
    Rational residual;
    Rational threshold;
    std::vector<LawCheck> checks;
};

/// G_c gamma_c(P) = P phi(G_c), G_c gamma_c(G_c') = G_c' gamma_c'(G_c), and the torsion cocycle condition.
ValidationReport validation_report(const PhiGammaModule& M);
/// validation_report, throwing ValidationFailure with the offending entry.
ValidationReport validate(const PhiGammaModule& M);

PhiGammaModule build_rank1(const Padic& c0, long r, const PrecisionBudget& budget);
PhiGammaModule build_rank1(int p, long c0, long r, const PrecisionBudget& budget);
enum class TestExtension { CyclotomicCocycle, UnipotentDemo };
PhiGammaModule build_test_extension(int p, TestExtension kind, const PrecisionBudget& budget);

/// The operator -(1/log c) sum_k (1-gamma_c)^k / k on a single series, summed until the terms pass N.
AnnulusSeries log_gamma_operator(const AnnulusSeries& f, const Padic& c, const PrecisionBudget& budget);

/// Mat(nabla_V) from the logarithm series of a generator c' = c^{p^b}.
ConnectionMatrix nabla_V(const PhiGammaModule& M);
/// nabla_V(x) for x = sum x_i e_i, by summing the logarithm series on x itself.
SeriesVector nabla_apply(const PhiGammaModule& M, const SeriesVector& x);
/// nabla(x) + A x.
SeriesVector nabla_assemble(const PhiGammaModule& M, const SeriesVector& x);
/// nabla on a single series: t * partial.
AnnulusSeries nabla_series(const AnnulusSeries& f, const PrecisionBudget& budget);

/// nabla(P) + A P - P phi(A): the matrix form of nabla_V o phi = phi o nabla_V.
Rational nabla_phi_residual(const PhiGammaModule& M);

/// theta o iota_n of Mat(nabla_V).
Matrix<CyclotomicScalar> sen_matrix(const PhiGammaModule& M, int n);

/// t^{-1} Mat(nabla_V), entrywise divide_by_t where divisible and flagged otherwise.
ConnectionMatrix partial_V(const PhiGammaModule& M);

/// Smallest n with r_n >= r.
int minimal_level(int p, const Rational& r);

} // namespace robba
