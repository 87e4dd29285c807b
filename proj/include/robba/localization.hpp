#pragma once

#include <string>
#include <vector>

#include "robba/cyclotomic.hpp"
#include "robba/log_series.hpp"
#include "robba/series.hpp"

namespace robba {

/// Truncated power series in t over K_n: coefficients of t^0..t^{order-1} are known.
class TPowerSeries {
public:
    TPowerSeries() = default;

    static TPowerSeries zero(int p, int n, long order);
    static TPowerSeries constant(const CyclotomicScalar& a, long order);
    /// a * t^k.
    static TPowerSeries monomial(const CyclotomicScalar& a, long k, long order);
    static TPowerSeries from_coeffs(int p, int n, std::vector<CyclotomicScalar> coeffs);

    int prime() const { return p_; }
    int level() const { return n_; }
    long order() const { return static_cast<long>(c_.size()); }
    const CyclotomicScalar& coeff(long k) const { return c_[static_cast<std::size_t>(k)]; }
    const std::vector<CyclotomicScalar>& coeffs() const { return c_; }

    /// t-adic valuation: the first coefficient that is nonzero at precision (order when none is).
    long valuation() const;
    bool is_zero() const { return valuation() >= order(); }

    TPowerSeries operator-() const;
    TPowerSeries operator+(const TPowerSeries& b) const;
    TPowerSeries operator-(const TPowerSeries& b) const;
    TPowerSeries operator*(const TPowerSeries& b) const;
    TPowerSeries operator*(const CyclotomicScalar& a) const;
    TPowerSeries operator*(const Padic& a) const;
    TPowerSeries& operator+=(const TPowerSeries& b) { return *this = *this + b; }
    TPowerSeries& operator-=(const TPowerSeries& b) { return *this = *this - b; }
    TPowerSeries& operator*=(const TPowerSeries& b) { return *this = *this * b; }

    /// Inverse when the constant term is nonzero at precision.
    TPowerSeries inverse() const;
    /// t^k * f; for k < 0 the first -k coefficients must vanish and the order drops by -k.
    TPowerSeries shift(long k) const;
    TPowerSeries truncated(long order) const;
    /// Replace each coefficient by its capped value.
    TPowerSeries capped(const Rational& absprec) const;

    std::string to_string(int max_terms = 6) const;

private:
    int p_ = 0;
    int n_ = 0;
    std::vector<CyclotomicScalar> c_;
};

/// t d/dt.
TPowerSeries tderiv(const TPowerSeries& f);
/// a / b for v(a) >= v(b); the order drops by v(b).
TPowerSeries divide(const TPowerSeries& a, const TPowerSeries& b);
/// Smallest normalized valuation of a_k - b_k + n k, for k below both orders (in u = t/p^n).
Rational normalized_residual(const TPowerSeries& a, const TPowerSeries& b);

/// The map iota_n : T -> (1+pi_n) exp(t/p^n) - 1 into K_n[[t]] modulo t^order.
class Localizer {
public:
    Localizer(int p, int n, long order, int relprec);

    int prime() const { return p_; }
    int level() const { return n_; }
    long order() const { return w_; }
    int relprec() const { return rel_; }

    /// iota_n(T).
    const TPowerSeries& iota_T() const { return T_; }
    /// iota_n(T)^{-1}.
    const TPowerSeries& iota_T_inverse() const { return Tinv_; }
    /// iota_n(l) = log(pi_n) + log(1 + (iota_n(T) - pi_n)/pi_n).
    const TPowerSeries& iota_ell() const { return ell_; }

    TPowerSeries iota(const AnnulusSeries& f) const;
    TPowerSeries iota(const LogSeries& f) const;
    /// theta o iota_n = evaluation at pi_n.
    CyclotomicScalar theta(const AnnulusSeries& f) const;
    CyclotomicScalar theta(const LogSeries& f) const;

private:
    int p_;
    int n_;
    long w_;
    int rel_;
    TPowerSeries T_;
    TPowerSeries Tinv_;
    TPowerSeries ell_;
};

/// theta o iota_m (p^n t / q_n) computed by t-series division at level m.
CyclotomicScalar partunit_value(int p, int m, int n, long order, int relprec);

/// A window polynomial f with f(pi_n) = y (the pi_n-adic digits of y).
AnnulusSeries lift_to_window(const CyclotomicScalar& y, const Rational& r, long width_cap);

} // namespace robba
