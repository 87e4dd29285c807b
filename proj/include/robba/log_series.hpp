#pragma once

#include <string>
#include <vector>

#include "robba/series.hpp"

namespace robba {

/// Polynomial in the formal symbol l = log(T) with AnnulusSeries coefficients.
class LogSeries {
public:
    static constexpr long kDefaultMaxDegree = 4;

    LogSeries() = default;
    /// The zero element over (p, r).
    LogSeries(int p, const Rational& r, long width_cap);
    /// A series of l-degree 0.
    explicit LogSeries(const AnnulusSeries& a);
    /// Coefficients of l^0, l^1, ...; all must share p and r.
    explicit LogSeries(std::vector<AnnulusSeries> coeffs);

    /// The symbol l itself.
    static LogSeries ell(int p, const Rational& r, int relprec, long width_cap);

    int prime() const { return p_; }
    const Rational& annulus() const { return r_; }
    long width_cap() const { return cap_; }
    /// l-degree; -1 for zero.
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    /// Coefficient of l^j (zero beyond the degree).
    AnnulusSeries coeff(long j) const;
    const std::vector<AnnulusSeries>& coeffs() const { return c_; }

    LogSeries operator-() const;
    LogSeries operator+(const LogSeries& g) const;
    LogSeries operator-(const LogSeries& g) const;
    LogSeries operator*(const LogSeries& g) const;
    LogSeries operator*(const AnnulusSeries& a) const;
    LogSeries operator*(const Padic& a) const;
    LogSeries& operator+=(const LogSeries& g) { return *this = *this + g; }
    LogSeries& operator-=(const LogSeries& g) { return *this = *this - g; }

    LogSeries with_annulus(const Rational& r) const;
    std::string to_string(int max_terms = 6) const;

private:
    int p_ = 0;
    Rational r_ = 1;
    long cap_ = 96;
    std::vector<AnnulusSeries> c_;

    void normalize();
};

/// True when every stored coefficient is zero at precision.
bool is_zero_at_precision(const AnnulusSeries& f);

/// Smallest residual_valuation over the l-coefficients.
long residual_valuation(const LogSeries& f, const LogSeries& g);
/// Smallest gauss_residual over the l-coefficients.
Rational gauss_residual(const LogSeries& f, const LogSeries& g, const Rational& s);

/// (1+T)/T, the derivative of l.
AnnulusSeries dlog_T(int p, const Rational& r, int relprec, long width_cap);

/// d = (1+T) d/dT with d(l) = (1+T)/T.
LogSeries log_partial(const LogSeries& f);
/// nabla = t * d.
LogSeries log_nabla(const LogSeries& f, const PrecisionBudget& budget);
/// N = -d/dl.
LogSeries monodromy_N(const LogSeries& f);

/// log(phi(T)/T^p) on the annulus of index p*r (a series in T^{-1}).
AnnulusSeries log_phi_correction(int p, const Rational& r, const PrecisionBudget& budget);
/// log(gamma_c(T)/T) = log(c) + log(1 + w), w = sum_{k>=1} C(c,k+1)/c T^k.
AnnulusSeries log_gamma_correction(const Padic& c, const Rational& r, const PrecisionBudget& budget);

/// phi on coefficients with l -> p l + log(phi(T)/T^p).
LogSeries log_frobenius(const LogSeries& f, const PrecisionBudget& budget);
/// gamma_c on coefficients with l -> l + log(gamma_c(T)/T).
LogSeries log_gamma(const LogSeries& f, const Padic& c, const PrecisionBudget& budget);

struct Antiderivative {
    LogSeries primitive;
    Padic logT_coeff;
};

/// G and a with d(G + a l) = f.
Antiderivative antiderivative(const LogSeries& f);

} // namespace robba
