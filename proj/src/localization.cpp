#include "robba/localization.hpp"

#include <algorithm>
#include <sstream>

namespace robba {

namespace {

std::size_t idx(long k) { return static_cast<std::size_t>(k); }

void check_same(const TPowerSeries& a, const TPowerSeries& b)
{
    require(a.prime() == b.prime() && a.level() == b.level(), ErrorKind::InvalidInput, "t-series over different fields");
}

// sum_k a_k (c + X)^k for X of t-valuation >= 1, through the Taylor expansion at c.
TPowerSeries taylor_substitute(std::vector<CyclotomicScalar> a, const CyclotomicScalar& c, const TPowerSeries& X, long w)
{
    const int p = c.prime(), n = c.level();
    std::vector<CyclotomicScalar> b;
    for (long j = 0; j < w && !a.empty(); ++j) {
        std::vector<CyclotomicScalar> q(a.size() - 1, CyclotomicScalar::zero(p, n));
        CyclotomicScalar acc = CyclotomicScalar::zero(p, n);
        for (std::size_t k = a.size(); k-- > 0;) {
            acc = acc * c + a[k];
            if (k > 0) q[k - 1] = acc;
        }
        b.push_back(acc);
        a = std::move(q);
    }
    TPowerSeries res = TPowerSeries::zero(p, n, w);
    for (std::size_t j = b.size(); j-- > 0;) res = res * X + TPowerSeries::constant(b[j], w);
    return res;
}

} // namespace

TPowerSeries TPowerSeries::zero(int p, int n, long order)
{
    TPowerSeries s;
    s.p_ = p;
    s.n_ = n;
    s.c_.assign(idx(std::max(0L, order)), CyclotomicScalar::zero(p, n));
    return s;
}

TPowerSeries TPowerSeries::constant(const CyclotomicScalar& a, long order) { return monomial(a, 0, order); }

TPowerSeries TPowerSeries::monomial(const CyclotomicScalar& a, long k, long order)
{
    require(k >= 0, ErrorKind::InvalidInput, "monomial exponent must be nonnegative");
    TPowerSeries s = zero(a.prime(), a.level(), order);
    if (k < order) s.c_[idx(k)] = a;
    return s;
}

TPowerSeries TPowerSeries::from_coeffs(int p, int n, std::vector<CyclotomicScalar> coeffs)
{
    for (const auto& a : coeffs)
        require(a.prime() == p && a.level() == n, ErrorKind::InvalidInput, "t-series coefficient over the wrong field");
    TPowerSeries s;
    s.p_ = p;
    s.n_ = n;
    s.c_ = std::move(coeffs);
    return s;
}

long TPowerSeries::valuation() const
{
    for (long k = 0; k < order(); ++k)
        if (!c_[idx(k)].is_zero()) return k;
    return order();
}

TPowerSeries TPowerSeries::operator-() const
{
    TPowerSeries s = *this;
    for (auto& a : s.c_) a = -a;
    return s;
}

TPowerSeries TPowerSeries::operator+(const TPowerSeries& b) const
{
    check_same(*this, b);
    const long w = std::min(order(), b.order());
    TPowerSeries s = zero(p_, n_, w);
    for (long k = 0; k < w; ++k) s.c_[idx(k)] = c_[idx(k)] + b.c_[idx(k)];
    return s;
}

TPowerSeries TPowerSeries::operator-(const TPowerSeries& b) const { return *this + (-b); }

TPowerSeries TPowerSeries::operator*(const TPowerSeries& b) const
{
    check_same(*this, b);
    const long w = std::min({order() + b.valuation(), b.order() + valuation(), std::max(order(), b.order())});
    TPowerSeries s = zero(p_, n_, w);
    const long va = valuation(), vb = b.valuation();
    for (long i = va; i < std::min(order(), w); ++i) {
        for (long j = vb; j < b.order() && i + j < w; ++j) s.c_[idx(i + j)] += c_[idx(i)] * b.c_[idx(j)];
    }
    return s;
}

TPowerSeries TPowerSeries::operator*(const CyclotomicScalar& a) const
{
    TPowerSeries s = *this;
    for (auto& x : s.c_) x = x * a;
    return s;
}

TPowerSeries TPowerSeries::operator*(const Padic& a) const
{
    TPowerSeries s = *this;
    for (auto& x : s.c_) x = x * a;
    return s;
}

TPowerSeries TPowerSeries::inverse() const
{
    if (order() == 0 || c_[0].is_zero()) fail(ErrorKind::DivisionByZeroAtPrecision, "t-series with zero constant term");
    const CyclotomicScalar a0i = c_[0].inverse();
    TPowerSeries s = zero(p_, n_, order());
    s.c_[0] = a0i;
    for (long k = 1; k < order(); ++k) {
        CyclotomicScalar acc = CyclotomicScalar::zero(p_, n_);
        for (long i = 1; i <= k; ++i) acc += c_[idx(i)] * s.c_[idx(k - i)];
        s.c_[idx(k)] = -(acc * a0i);
    }
    return s;
}

TPowerSeries TPowerSeries::shift(long k) const
{
    if (k == 0) return *this;
    TPowerSeries s = *this;
    if (k > 0) {
        s.c_.insert(s.c_.begin(), idx(k), CyclotomicScalar::zero(p_, n_));
        return s;
    }
    const long m = -k;
    require(m <= order(), ErrorKind::InvalidInput, "shift past the known order");
    for (long i = 0; i < m; ++i)
        if (!c_[idx(i)].is_zero()) fail(ErrorKind::NotDivisible, "t-series is not divisible by t^" + std::to_string(m));
    s.c_.erase(s.c_.begin(), s.c_.begin() + m);
    return s;
}

TPowerSeries TPowerSeries::truncated(long order) const
{
    TPowerSeries s = *this;
    if (order < this->order()) s.c_.resize(idx(std::max(0L, order)));
    return s;
}

TPowerSeries TPowerSeries::capped(const Rational& absprec) const
{
    TPowerSeries s = *this;
    for (auto& x : s.c_) x = x.capped(absprec);
    return s;
}

std::string TPowerSeries::to_string(int max_terms) const
{
    std::ostringstream os;
    int shown = 0;
    for (long k = 0; k < order() && shown < max_terms; ++k) {
        if (c_[idx(k)].is_zero()) continue;
        if (shown > 0) os << " + ";
        os << "(" << c_[idx(k)].to_string() << ")";
        if (k == 1) os << "*t";
        if (k > 1) os << "*t^" << k;
        ++shown;
    }
    if (shown == 0) os << "0";
    os << " + O(t^" << order() << ")";
    return os.str();
}

TPowerSeries tderiv(const TPowerSeries& f)
{
    std::vector<CyclotomicScalar> c = f.coeffs();
    for (long k = 0; k < f.order(); ++k) {
        std::vector<Padic> x = c[idx(k)].coeffs();
        for (auto& a : x) a = k == 0 ? Padic::zero(f.prime()) : mul_int(a, mpz_class(k));
        c[idx(k)] = CyclotomicScalar::from_coeffs(f.prime(), f.level(), std::move(x));
    }
    return TPowerSeries::from_coeffs(f.prime(), f.level(), std::move(c));
}

TPowerSeries divide(const TPowerSeries& a, const TPowerSeries& b)
{
    check_same(a, b);
    const long vb = b.valuation();
    if (vb >= b.order()) fail(ErrorKind::DivisionByZeroAtPrecision, "division by a t-series that is zero at precision");
    const TPowerSeries num = a.truncated(std::max(a.order(), vb)).shift(-vb);
    return num * b.shift(-vb).inverse();
}

Rational normalized_residual(const TPowerSeries& a, const TPowerSeries& b)
{
    check_same(a, b);
    Rational best = infinite_valuation();
    const long w = std::min(a.order(), b.order());
    for (long k = 0; k < w; ++k) {
        const CyclotomicScalar d = a.coeff(k) - b.coeff(k);
        best = std::min(best, Rational(d.valuation() + static_cast<long>(a.level()) * k));
    }
    return best;
}

Localizer::Localizer(int p, int n, long order, int relprec) : p_(p), n_(n), w_(order), rel_(relprec)
{
    require(n >= 1, ErrorKind::InvalidInput, "level must be >= 1");
    require(order >= 1, ErrorKind::InvalidInput, "t-order must be >= 1");
    const CyclotomicScalar pi = CyclotomicScalar::pi(p, n, relprec);
    const CyclotomicScalar one = CyclotomicScalar::from_padic(n, Padic::one(p, relprec));
    const CyclotomicScalar u = one + pi;
    // iota(T) = pi + (1+pi)(exp(t/p^n) - 1)
    std::vector<CyclotomicScalar> c(idx(order), CyclotomicScalar::zero(p, n));
    c[0] = pi;
    mpz_class den = 1;
    const mpz_class& pn = ppow(p, n);
    for (long j = 1; j < order; ++j) {
        den *= pn * j;
        c[idx(j)] = u * Padic::from_rational(p, Rational(mpz_class(1), den), relprec);
    }
    T_ = TPowerSeries::from_coeffs(p, n, c);
    Tinv_ = T_.inverse();
    // log(1 + Z) with Z = (iota(T) - pi)/pi, Z of t-valuation 1
    c[0] = CyclotomicScalar::zero(p, n);
    const TPowerSeries Z = TPowerSeries::from_coeffs(p, n, c) * pi.inverse();
    TPowerSeries acc = TPowerSeries::zero(p, n, order);
    TPowerSeries pw = Z;
    for (long m = 1; m < order; ++m) {
        const Rational inv_m((m % 2) ? 1 : -1, m);
        acc += pw * Padic::from_rational(p, inv_m, relprec);
        pw = pw * Z;
    }
    ell_ = acc + TPowerSeries::constant(iwasawa_log(pi), order);
}

TPowerSeries Localizer::iota(const AnnulusSeries& f) const
{
    require(f.prime() == p_, ErrorKind::InvalidInput, "series over a different prime");
    const Rational rn = r_n(p_, n_);
    require(f.annulus() <= rn, ErrorKind::InvalidInput, "the circle of pi_n lies outside the annulus of the series");
    TPowerSeries acc = TPowerSeries::zero(p_, n_, w_);
    if (!f.empty()) {
        if (f.kmax() >= 0) {
            std::vector<CyclotomicScalar> a;
            for (long k = 0; k <= f.kmax(); ++k) a.push_back(CyclotomicScalar::from_padic(n_, f.coeff(k)));
            const CyclotomicScalar& c0 = T_.coeff(0);
            acc += taylor_substitute(std::move(a), c0, T_ - TPowerSeries::constant(c0, w_), w_);
        }
        if (f.kmin() < 0) {
            std::vector<CyclotomicScalar> a{CyclotomicScalar::zero(p_, n_)};
            for (long k = -1; k >= f.kmin(); --k) a.push_back(CyclotomicScalar::from_padic(n_, f.coeff(k)));
            const CyclotomicScalar& c0 = Tinv_.coeff(0);
            acc += taylor_substitute(std::move(a), c0, Tinv_ - TPowerSeries::constant(c0, w_), w_);
        }
    }
    if (f.is_exact()) return acc;
    if (!f.upper_exact() && f.annulus() != rn)
        fail(ErrorKind::PrecisionExhausted, "upper tail bound is not certified on the circle of pi_n");
    if (!f.tailbound()) fail(ErrorKind::PrecisionExhausted, "series tail has no bound");
    // t^j coefficient of the image of the tail: valuation >= tb - j (1/r_n + n + 1/(p-1))
    const Rational slope = Rational(1) / rn + n_ + Rational(1, p_ - 1);
    std::vector<CyclotomicScalar> c = acc.coeffs();
    for (long j = 0; j < w_; ++j) c[idx(j)] = c[idx(j)].capped(*f.tailbound() - slope * j);
    return TPowerSeries::from_coeffs(p_, n_, std::move(c));
}

TPowerSeries Localizer::iota(const LogSeries& f) const
{
    TPowerSeries acc = TPowerSeries::zero(p_, n_, w_);
    for (long j = f.degree(); j >= 0; --j) acc = acc * ell_ + iota(f.coeff(j));
    return acc;
}

CyclotomicScalar Localizer::theta(const AnnulusSeries& f) const { return evaluate_at_pi(f, n_); }

CyclotomicScalar Localizer::theta(const LogSeries& f) const
{
    const CyclotomicScalar l = ell_.coeff(0);
    CyclotomicScalar acc = CyclotomicScalar::zero(p_, n_);
    for (long j = f.degree(); j >= 0; --j) acc = acc * l + theta(f.coeff(j));
    return acc;
}

CyclotomicScalar partunit_value(int p, int m, int n, long order, int relprec)
{
    require(m >= 1 && n >= 1, ErrorKind::InvalidInput, "levels must be >= 1");
    const Localizer L(p, m, std::max(order, 2L), relprec);
    // log(1 + iota(T)) = log(zeta) + t/p^m with log(zeta) = 0
    const TPowerSeries t_image = TPowerSeries::monomial(
        CyclotomicScalar::from_padic(m, Padic::from_rational(p, Rational(mpz_class(1), ppow(p, m)), relprec)), 1, L.order());
    const AnnulusSeries q = special_qn(p, n, relprec, r_n(p, m), 0);
    const TPowerSeries qi = L.iota(q);
    const TPowerSeries quotient = divide(t_image * Padic::from_integer(p, ppow(p, n), relprec), qi);
    return quotient.coeff(0);
}

AnnulusSeries lift_to_window(const CyclotomicScalar& y, const Rational& r, long width_cap)
{
    return AnnulusSeries::from_coeffs(y.prime(), r, 0, y.coeffs(), width_cap);
}

} // namespace robba
