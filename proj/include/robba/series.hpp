#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robba/cyclotomic.hpp"
#include "robba/padic.hpp"

namespace robba {

/// Sentinel for an infinite valuation.
inline Rational infinite_valuation() { return Rational(Padic::kInfinitePrecision); }
inline bool is_infinite(const Rational& v) { return v >= Padic::kInfinitePrecision; }

/// Truncated Laurent series in T on the annulus p^{-1/r} <= |T| < 1.
///
/// The stored window kmin..kmax holds p-adic coefficients. Beyond the window a side is either
/// exact (all further coefficients are 0) or truncated; the discarded part of a truncated side
/// has Gauss valuation at s = r bounded below by the tail bound, when one is known.
class AnnulusSeries {
public:
    AnnulusSeries() = default;

    static AnnulusSeries zero(int p, const Rational& r, long width_cap);
    static AnnulusSeries constant(const Padic& a, const Rational& r, long width_cap);
    static AnnulusSeries monomial(const Padic& a, long k, const Rational& r, long width_cap);
    static AnnulusSeries from_coeffs(int p, const Rational& r, long kmin, std::vector<Padic> coeffs, long width_cap,
                                     bool lower_exact = true, bool upper_exact = true,
                                     std::optional<Rational> tailbound = std::nullopt);
    /// Exact Laurent polynomial with rational coefficients.
    static AnnulusSeries from_rationals(int p, const Rational& r, long kmin, const std::vector<Rational>& coeffs,
                                        int relprec, long width_cap);

    int prime() const { return p_; }
    const Rational& annulus() const { return r_; }
    long kmin() const { return kmin_; }
    long kmax() const { return kmin_ + static_cast<long>(c_.size()) - 1; }
    long width_cap() const { return cap_; }
    bool empty() const { return c_.empty(); }
    bool lower_exact() const { return lower_exact_; }
    bool upper_exact() const { return upper_exact_; }
    bool is_exact() const { return lower_exact_ && upper_exact_; }
    const std::optional<Rational>& tailbound() const { return tail_; }
    const std::vector<Padic>& coeffs() const { return c_; }

    /// True when the coefficient of T^k is determined (stored, or beyond an exact side).
    bool known(long k) const;
    /// Coefficient of T^k; exact zero beyond an exact side. Throws for unknown coefficients.
    Padic coeff(long k) const;
    /// Smallest absolute precision over stored coefficients.
    long min_absprec() const;

    /// Same series re-labelled with another annulus index (tails are dropped when no longer valid).
    AnnulusSeries with_annulus(const Rational& r) const;
    AnnulusSeries with_width_cap(long cap) const;
    /// Restrict to lo..hi; discarded coefficients are folded into the tail bound.
    AnnulusSeries truncated(long lo, long hi) const;
    /// Drop exactly-zero coefficients at exact ends.
    AnnulusSeries trimmed() const;
    /// Cap every coefficient at absolute precision a.
    AnnulusSeries capped(long a) const;

    AnnulusSeries operator-() const;
    AnnulusSeries operator+(const AnnulusSeries& g) const;
    AnnulusSeries operator-(const AnnulusSeries& g) const;
    AnnulusSeries operator*(const AnnulusSeries& g) const;
    AnnulusSeries operator*(const Padic& a) const;
    AnnulusSeries& operator+=(const AnnulusSeries& g) { return *this = *this + g; }
    AnnulusSeries& operator-=(const AnnulusSeries& g) { return *this = *this - g; }
    AnnulusSeries& operator*=(const AnnulusSeries& g) { return *this = *this * g; }

    /// Multiply by T^k.
    AnnulusSeries shift(long k) const;
    /// Multiplicative inverse through a dominant term (lowest or highest).
    AnnulusSeries inverse() const;
    AnnulusSeries pow(long e) const;

    std::string to_string(int max_terms = 8) const;

private:
    int p_ = 0;
    Rational r_ = 1;
    long kmin_ = 0;
    std::vector<Padic> c_;
    long cap_ = 96;
    bool lower_exact_ = true;
    bool upper_exact_ = true;
    std::optional<Rational> tail_;

    friend AnnulusSeries build_series(int, const Rational&, long, std::vector<Padic>, long, bool, bool,
                                      std::optional<Rational>);
};

/// min over the window of v(a_k) + k/s; zero coefficients contribute their precision bound.
Rational gauss_valuation(const AnnulusSeries& f, const Rational& s);
/// Valuation on the closed annulus s1 <= s <= s2 (minimum of the two boundary circles).
Rational interval_valuation(const AnnulusSeries& f, const Rational& s1, const Rational& s2);

/// Smallest absolute precision of f_k - g_k over the coefficients known in both.
long residual_valuation(const AnnulusSeries& f, const AnnulusSeries& g);
/// min of v(f_k - g_k) + k/s over the coefficients known in both.
Rational gauss_residual(const AnnulusSeries& f, const AnnulusSeries& g, const Rational& s);

/// f(g) for an exact Laurent polynomial f and g with positive lowest exponent.
AnnulusSeries compose(const AnnulusSeries& f, const AnnulusSeries& g);
/// f((1+T)^p - 1); the annulus index is multiplied by p.
AnnulusSeries frobenius(const AnnulusSeries& f);
/// f((1+T)^c - 1) for c in Z_p^*.
AnnulusSeries gamma_action(const AnnulusSeries& f, const Padic& c);
/// The left inverse of frobenius; the annulus index is divided by p.
AnnulusSeries psi(const AnnulusSeries& f);
/// (1+T) d/dT.
AnnulusSeries partial(const AnnulusSeries& f);

/// ((1+T)^c - 1) truncated after T^degree.
AnnulusSeries gamma_image_of_T(const Padic& c, const Rational& r, long degree, long width_cap);

/// t = log(1+T) truncated after T^terms.
AnnulusSeries special_t(int p, int relprec, const Rational& r, long terms, long width_cap);
/// t with the default truncation for a budget.
AnnulusSeries special_t(int p, const PrecisionBudget& budget, const Rational& r);
/// q_n = Phi_{p^n}(1+T), exact.
AnnulusSeries special_qn(int p, int n, int relprec, const Rational& r, long width_cap);
/// Integer coefficients of q_n, constant term first.
std::vector<mpz_class> qn_coefficients(int p, int n);

/// Lower bound for min over k > K of k/r - floor(log_p k): the Gauss valuation at r of the part
/// beyond T^K of a series whose k-th coefficient has valuation >= -floor(log_p k).
Rational log_tail_bound(int p, const Rational& r, long K);

/// Annulus index r_n = (p-1)p^{n-1}.
Rational r_n(int p, int n);

/// f(pi_n) in K_n (tail errors folded into the precision).
CyclotomicScalar evaluate_at_pi(const AnnulusSeries& f, int n);

struct DivisionResult {
    AnnulusSeries quotient;
    AnnulusSeries remainder;
    bool divisible = false;
    Rational remainder_valuation;
    Rational evaluation_valuation;
    Rational threshold;
};

/// Top-down division by a monic polynomial Q (constant term first). When level > 0 the verdict
/// also requires f(pi_level) to vanish at the threshold.
DivisionResult divide_distinguished(const AnnulusSeries& f, const std::vector<mpz_class>& Q, const PrecisionBudget& budget,
                                    int level = 0);

/// f / t, after checking divisibility by q_n for n = 1..n_test.
AnnulusSeries divide_by_t(const AnnulusSeries& f, const PrecisionBudget& budget, int n_test = 1);

struct BoundedVerdict {
    bool bounded = false;
    Rational minimum;
    Rational bound;
    std::vector<std::pair<Rational, Rational>> ladder;
};

/// Boundedness heuristic over the ladder s = r * 2^i.
BoundedVerdict is_bounded(const AnnulusSeries& f);

} // namespace robba
