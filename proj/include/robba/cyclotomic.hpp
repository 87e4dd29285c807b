#pragma once

#include <string>
#include <vector>

#include "robba/padic.hpp"

namespace robba {

/// a * n for an integer n, keeping the relative precision of a.
Padic mul_int(const Padic& a, const mpz_class& n);

/// Coefficients of E_n(x) = Phi_{p^n}(1+x), constant term first (monic, degree (p-1)p^{n-1}).
const std::vector<mpz_class>& eisenstein_coefficients(int p, int n);

/// Element of K_n = Q_p(zeta_{p^n}), as a polynomial in pi_n = zeta_{p^n} - 1 reduced modulo E_n.
class CyclotomicScalar {
public:
    CyclotomicScalar() = default;

    static long degree_of(int p, int n);

    static CyclotomicScalar zero(int p, int n, long absprec = Padic::kInfinitePrecision);
    static CyclotomicScalar from_padic(int n, const Padic& a);
    static CyclotomicScalar from_coeffs(int p, int n, std::vector<Padic> coeffs);
    /// pi_n = zeta_{p^n} - 1.
    static CyclotomicScalar pi(int p, int n, int relprec);
    /// zeta_{p^n}^a.
    static CyclotomicScalar zeta_power(int p, int n, long a, int relprec);

    int prime() const { return p_; }
    int level() const { return n_; }
    long degree() const { return static_cast<long>(c_.size()); }
    const std::vector<Padic>& coeffs() const { return c_; }
    const Padic& coeff(long i) const { return c_[static_cast<std::size_t>(i)]; }

    bool is_zero() const;
    /// Normalized valuation (v(p) = 1); a lower bound when the value is zero at precision.
    Rational valuation() const;
    /// Normalized absolute precision.
    Rational absprec() const;
    /// True when the value lies in Q_p at precision.
    bool is_rational() const;

    CyclotomicScalar operator-() const;
    CyclotomicScalar operator+(const CyclotomicScalar& b) const;
    CyclotomicScalar operator-(const CyclotomicScalar& b) const;
    CyclotomicScalar operator*(const CyclotomicScalar& b) const;
    CyclotomicScalar operator*(const Padic& b) const;
    CyclotomicScalar operator/(const CyclotomicScalar& b) const { return *this * b.inverse(); }
    CyclotomicScalar& operator+=(const CyclotomicScalar& b) { return *this = *this + b; }
    CyclotomicScalar& operator-=(const CyclotomicScalar& b) { return *this = *this - b; }
    CyclotomicScalar& operator*=(const CyclotomicScalar& b) { return *this = *this * b; }

    CyclotomicScalar inverse() const;
    CyclotomicScalar pow(long e) const;
    /// Cap every coefficient at normalized absolute precision a.
    CyclotomicScalar capped(const Rational& a) const;

    std::string to_string() const;

private:
    int p_ = 0;
    int n_ = 0;
    std::vector<Padic> c_;
};

/// Evaluate an integer polynomial (constant term first) at pi_n.
CyclotomicScalar eval_at_pi(const std::vector<mpz_class>& poly, int p, int n, int relprec);

/// Iwasawa logarithm on K_n^*.
CyclotomicScalar iwasawa_log(const CyclotomicScalar& x);

} // namespace robba
