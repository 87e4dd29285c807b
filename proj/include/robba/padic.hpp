#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "robba/errors.hpp"

namespace robba {

/// Exact rationals: valuations, annulus indices, tail bounds.
using Rational = mpq_class;

/// Canonical a/b.
inline Rational frac(long a, long b)
{
    Rational q(a, b);
    q.canonicalize();
    return q;
}
Rational parse_rational(const std::string& s);
std::string rational_to_string(const Rational& q);
long floor_rational(const Rational& q);
long ceil_rational(const Rational& q);

/// Digit and window budgets shared by every composite operation.
struct PrecisionBudget {
    int digits = 40;      // N: retained p-adic digits
    int half_window = 48; // M: Laurent window half-width
    int t_order = 16;     // w: t-adic order of K_n[[t]]
    int slack = 8;        // allowed digit loss per composite operation

    int window() const { return 2 * half_window; }
    /// Working precision used for exact input data: N plus guard digits.
    int working() const { return digits + 2 * slack; }
    int tolerance() const { return digits - slack; }
    void validate() const;
};

bool is_prime(long p);

/// p^k as a big integer (k >= 0); cached per thread.
const mpz_class& ppow(int p, long k);

/// p-adic valuation of a nonzero integer.
long valuation_of(int p, const mpz_class& n);
/// p-adic valuation of a nonzero rational.
long valuation_of(int p, const Rational& q);

/// Element of Q_p with capped relative precision.
///
/// A nonzero value is p^val * unit with unit a p-adic unit known modulo p^relprec.
/// A value whose known digits are all zero keeps only its absolute precision.
class Padic {
public:
    static constexpr long kInfinitePrecision = 1L << 40;

    Padic() = default;

    static Padic zero(int p, long absprec = kInfinitePrecision);
    static Padic one(int p, int relprec);
    static Padic from_integer(int p, const mpz_class& n, int relprec);
    static Padic from_integer(int p, long n, int relprec) { return from_integer(p, mpz_class(n), relprec); }
    static Padic from_rational(int p, const Rational& q, int relprec);
    /// p^val * unit; unit need not be reduced, but must be prime to p unless zero.
    static Padic from_parts(int p, long val, const mpz_class& unit, int relprec);

    int prime() const { return p_; }
    bool is_zero() const { return zero_; }
    bool is_exact_zero() const { return zero_ && val_ >= kInfinitePrecision; }
    /// Valuation for nonzero values; for zero, the absolute precision (a lower bound).
    long valuation() const { return val_; }
    long absprec() const { return zero_ ? val_ : val_ + relprec_; }
    int relprec() const { return zero_ ? 0 : relprec_; }
    const mpz_class& unit() const { return unit_; }

    Padic operator-() const;
    Padic operator+(const Padic& b) const;
    Padic operator-(const Padic& b) const;
    Padic operator*(const Padic& b) const;
    Padic operator/(const Padic& b) const;
    Padic& operator+=(const Padic& b) { return *this = *this + b; }
    Padic& operator-=(const Padic& b) { return *this = *this - b; }
    Padic& operator*=(const Padic& b) { return *this = *this * b; }

    Padic inverse() const;
    Padic pow(long e) const;
    /// Multiply by p^k (k may be negative); exact.
    Padic shift(long k) const;
    /// Lower the absolute precision to at most absprec.
    Padic capped(long absprec) const;
    /// Lower the relative precision to at most relprec.
    Padic with_relprec(int relprec) const;

    bool equals_at_precision(const Padic& b) const { return (*this - b).is_zero(); }
    bool is_integral() const { return zero_ || val_ >= 0; }

    /// Representative in Z / p^absprec Z for integral values (nonnegative).
    mpz_class lift() const;
    /// Small rational a/b congruent to the value when one exists; otherwise p^val * balanced unit.
    Rational to_rational() const;
    std::string to_string() const;

private:
    Padic(int p, bool zero, long val, int relprec, mpz_class unit)
        : p_(p), zero_(zero), val_(val), relprec_(relprec), unit_(std::move(unit))
    {
    }

    int p_ = 0;
    bool zero_ = true;
    long val_ = kInfinitePrecision;
    int relprec_ = 0;
    mpz_class unit_;
};

/// C(c, k) for c in Z_p: computed exactly from the integer lift of c, returned with val >= 0.
Padic padic_binomial(const Padic& c, long k);
/// C(c, 0..kmax), sharing the work.
std::vector<Padic> padic_binomials(const Padic& c, long kmax);

/// Teichmüller representative of a mod p at the given precision.
Padic teichmuller(int p, long a, int relprec);

/// Iwasawa logarithm on Q_p^* (log p = 0, log of roots of unity = 0).
Padic iwasawa_log(const Padic& x);

/// Generator of Γ modulo torsion: 1+p for odd p, 5 for p = 2.
long gamma_generator(int p);

} // namespace robba
