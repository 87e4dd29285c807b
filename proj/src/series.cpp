#include "robba/series.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace robba {

namespace {

using Opt = std::optional<Rational>;
constexpr long kNoLimit = std::numeric_limits<long>::max() / 4;

Opt opt_min(const Opt& a, const Opt& b)
{
    if (!a || !b) return std::nullopt;
    return std::min(*a, *b);
}

Opt opt_add(const Opt& a, const Rational& b)
{
    if (!a) return std::nullopt;
    if (is_infinite(*a) || is_infinite(b)) return infinite_valuation();
    return *a + b;
}

Opt opt_add(const Opt& a, const Opt& b)
{
    if (!b) return std::nullopt;
    return opt_add(a, *b);
}

std::size_t idx(long k) { return static_cast<std::size_t>(k); }

long ilog(int p, long k)
{
    long e = 0;
    for (long x = k; x >= p; x /= p) ++e;
    return e;
}

// Gauss valuation at s of the coefficients c (starting at exponent lo).
Rational gauss_of(const std::vector<Padic>& c, long lo, const Rational& s)
{
    Rational best = infinite_valuation();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Padic& a = c[i];
        if (a.is_exact_zero()) continue;
        Rational v = Rational(a.valuation()) + Rational(lo + static_cast<long>(i)) / s;
        if (v < best) best = v;
    }
    return best;
}

// Lower bound for min_{k > K} (k/r - floor(log_p k)), the Gauss valuation of the tail of a series
// whose k-th coefficient has valuation >= -floor(log_p k).
Rational log_type_tail(int p, const Rational& r, long K)
{
    Rational best = infinite_valuation();
    long e = ilog(p, K + 1);
    for (int it = 0; it < 400; ++it, ++e) {
        const mpz_class& pe = ppow(p, e);
        const Rational k = std::max(Rational(K + 1), Rational(pe));
        best = std::min(best, Rational(k / r - e));
        if (pe > K + 1 && Rational(pe * (p - 1)) / r >= 1) break;
    }
    return best;
}

// An upper bound for the Gauss valuation of t at r.
Rational t_valuation_upper(int p, const Rational& r)
{
    Rational best = infinite_valuation();
    for (long k = 1; k <= 4096; ++k) {
        long v = 0;
        for (long x = k; x % p == 0; x /= p) ++v;
        best = std::min(best, Rational(Rational(k) / r - v));
    }
    return best;
}

// ---------------------------------------------------------------- exact polynomial helpers

using Poly = std::vector<Padic>;

Poly poly_mul(const Poly& a, const Poly& b, int p)
{
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, Padic::zero(p));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_exact_zero()) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j].is_exact_zero()) continue;
            c[i + j] += a[i] * b[j];
        }
    }
    return c;
}

// b(X) = g(X - 1): coordinates of g in the basis (1+T)^k.
Poly to_binomial_basis(const Poly& g, int p)
{
    Poly b;
    for (auto it = g.rbegin(); it != g.rend(); ++it) {
        Poly nb(b.size() + 1, Padic::zero(p));
        for (std::size_t j = 0; j < b.size(); ++j) {
            nb[j + 1] += b[j];
            nb[j] -= b[j];
        }
        nb[0] += *it;
        b = std::move(nb);
    }
    return b;
}

// g(T) = b(T + 1).
Poly from_binomial_basis(const Poly& b, int p)
{
    Poly g;
    for (auto it = b.rbegin(); it != b.rend(); ++it) {
        Poly ng(g.size() + 1, Padic::zero(p));
        for (std::size_t j = 0; j < g.size(); ++j) {
            ng[j + 1] += g[j];
            ng[j] += g[j];
        }
        ng[0] += *it;
        g = std::move(ng);
    }
    return g;
}

Poly integer_poly(const std::vector<mpz_class>& q, int p, int relprec)
{
    Poly out;
    out.reserve(q.size());
    for (const auto& c : q) out.push_back(c == 0 ? Padic::zero(p) : Padic::from_integer(p, c, relprec));
    return out;
}

int max_relprec(const std::vector<Padic>& c)
{
    int rel = 1;
    for (const auto& a : c) rel = std::max(rel, a.relprec());
    return rel;
}

} // namespace

// ---------------------------------------------------------------- construction

AnnulusSeries build_series(int p, const Rational& r, long kmin, std::vector<Padic> c, long cap, bool lex, bool uex,
                           std::optional<Rational> tail)
{
    // trim exact zeros at exact ends
    std::size_t b = 0, e = c.size();
    if (lex)
        while (b < e && c[b].is_exact_zero()) ++b;
    if (uex)
        while (e > b && c[e - 1].is_exact_zero()) --e;
    if (b > 0 || e < c.size()) {
        std::vector<Padic> t(c.begin() + static_cast<long>(b), c.begin() + static_cast<long>(e));
        kmin += static_cast<long>(b);
        c = std::move(t);
    }
    // width cap
    const long width = static_cast<long>(c.size()) - 1;
    if (cap >= 0 && width > cap) {
        const long drop = width - cap;
        std::vector<Padic> dropped;
        long dropped_lo;
        if (!uex || lex) {
            dropped.assign(c.end() - drop, c.end());
            dropped_lo = kmin + static_cast<long>(c.size()) - drop;
            c.resize(c.size() - static_cast<std::size_t>(drop));
            if (uex) {
                uex = false;
                if (lex) tail = infinite_valuation();
            }
        } else {
            dropped.assign(c.begin(), c.begin() + drop);
            dropped_lo = kmin;
            c.erase(c.begin(), c.begin() + drop);
            kmin += drop;
            lex = false;
        }
        tail = opt_min(tail, gauss_of(dropped, dropped_lo, r));
    }
    AnnulusSeries s;
    s.p_ = p;
    s.r_ = r;
    s.kmin_ = c.empty() ? 0 : kmin;
    s.c_ = std::move(c);
    s.cap_ = cap;
    s.lower_exact_ = lex;
    s.upper_exact_ = uex;
    s.tail_ = (lex && uex) ? std::nullopt : tail;
    return s;
}

AnnulusSeries AnnulusSeries::zero(int p, const Rational& r, long width_cap)
{
    return build_series(p, r, 0, {}, width_cap, true, true, std::nullopt);
}

AnnulusSeries AnnulusSeries::constant(const Padic& a, const Rational& r, long width_cap)
{
    return build_series(a.prime(), r, 0, {a}, width_cap, true, true, std::nullopt);
}

AnnulusSeries AnnulusSeries::monomial(const Padic& a, long k, const Rational& r, long width_cap)
{
    return build_series(a.prime(), r, k, {a}, width_cap, true, true, std::nullopt);
}

AnnulusSeries AnnulusSeries::from_coeffs(int p, const Rational& r, long kmin, std::vector<Padic> coeffs, long width_cap,
                                         bool lower_exact, bool upper_exact, std::optional<Rational> tailbound)
{
    require(is_prime(p), ErrorKind::InvalidInput, "p must be prime");
    require(r > 0, ErrorKind::InvalidInput, "annulus index must be positive");
    for (const auto& a : coeffs) require(a.prime() == p, ErrorKind::InvalidInput, "coefficient prime mismatch");
    return build_series(p, r, kmin, std::move(coeffs), width_cap, lower_exact, upper_exact, std::move(tailbound));
}

AnnulusSeries AnnulusSeries::from_rationals(int p, const Rational& r, long kmin, const std::vector<Rational>& coeffs,
                                            int relprec, long width_cap)
{
    std::vector<Padic> c;
    c.reserve(coeffs.size());
    for (const auto& q : coeffs) c.push_back(Padic::from_rational(p, q, relprec));
    return from_coeffs(p, r, kmin, std::move(c), width_cap);
}

// ---------------------------------------------------------------- accessors

bool AnnulusSeries::known(long k) const
{
    if (c_.empty()) return true;
    if (k < kmin_) return lower_exact_;
    if (k > kmax()) return upper_exact_;
    return true;
}

Padic AnnulusSeries::coeff(long k) const
{
    if (!c_.empty() && k >= kmin_ && k <= kmax()) return c_[idx(k - kmin_)];
    if (!known(k)) fail(ErrorKind::WindowOverflow, "coefficient of T^" + std::to_string(k) + " lies beyond the window");
    return Padic::zero(p_);
}

long AnnulusSeries::min_absprec() const
{
    long m = Padic::kInfinitePrecision;
    for (const auto& a : c_) m = std::min(m, a.absprec());
    return m;
}

AnnulusSeries AnnulusSeries::with_annulus(const Rational& r) const
{
    AnnulusSeries s = *this;
    if (r == r_) return s;
    // lower tails only improve for larger r; upper tails only for smaller r
    if (!upper_exact_ && r > r_) s.tail_ = std::nullopt;
    if (!lower_exact_ && r < r_) s.tail_ = std::nullopt;
    s.r_ = r;
    return s;
}

AnnulusSeries AnnulusSeries::with_width_cap(long cap) const
{
    return build_series(p_, r_, kmin_, c_, cap, lower_exact_, upper_exact_, tail_);
}

AnnulusSeries AnnulusSeries::truncated(long lo, long hi) const
{
    if (c_.empty()) return *this;
    lo = std::max(lo, kmin_);
    hi = std::min(hi, kmax());
    bool lex = lower_exact_, uex = upper_exact_;
    Opt tail = is_exact() ? Opt(infinite_valuation()) : tail_;
    if (lo > kmin_) {
        std::vector<Padic> d(c_.begin(), c_.begin() + (std::min(lo, kmax() + 1) - kmin_));
        tail = opt_min(tail, gauss_of(d, kmin_, r_));
        lex = false;
    }
    if (hi < kmax()) {
        long from = std::max(hi + 1, kmin_);
        std::vector<Padic> d(c_.begin() + (from - kmin_), c_.end());
        tail = opt_min(tail, gauss_of(d, from, r_));
        uex = false;
    }
    std::vector<Padic> c;
    if (lo <= hi) c.assign(c_.begin() + (lo - kmin_), c_.begin() + (hi - kmin_ + 1));
    if (c.empty()) fail(ErrorKind::WindowOverflow, "truncation leaves no known coefficient");
    return build_series(p_, r_, lo, std::move(c), cap_, lex, uex, tail);
}

AnnulusSeries AnnulusSeries::trimmed() const { return build_series(p_, r_, kmin_, c_, cap_, lower_exact_, upper_exact_, tail_); }

AnnulusSeries AnnulusSeries::capped(long a) const
{
    AnnulusSeries s = *this;
    for (auto& x : s.c_) x = x.capped(a);
    return s;
}

// ---------------------------------------------------------------- arithmetic

AnnulusSeries AnnulusSeries::operator-() const
{
    AnnulusSeries s = *this;
    for (auto& a : s.c_) a = -a;
    return s;
}

AnnulusSeries AnnulusSeries::operator+(const AnnulusSeries& g0) const
{
    require(p_ == g0.p_, ErrorKind::InvalidInput, "series over different primes");
    const Rational r = std::max(r_, g0.r_);
    const long cap = std::max(cap_, g0.cap_);
    AnnulusSeries f = with_annulus(r), g = g0.with_annulus(r);
    if (f.empty() && f.is_exact()) return g.with_width_cap(cap);
    if (g.empty() && g.is_exact()) return f.with_width_cap(cap);

    long hi = -kNoLimit, lo = kNoLimit;
    long hi_lim = kNoLimit, lo_lim = -kNoLimit;
    for (const AnnulusSeries* s : {&f, &g}) {
        if (s->empty()) continue;
        hi = std::max(hi, s->kmax());
        lo = std::min(lo, s->kmin());
        if (!s->upper_exact_) hi_lim = std::min(hi_lim, s->kmax());
        if (!s->lower_exact_) lo_lim = std::max(lo_lim, s->kmin());
    }
    hi = std::min(hi, hi_lim);
    lo = std::max(lo, lo_lim);
    if (lo > hi) fail(ErrorKind::WindowOverflow, "sum has no common known window");

    Opt tail = infinite_valuation();
    for (const AnnulusSeries* s : {&f, &g}) {
        if (!s->is_exact()) tail = opt_min(tail, s->tail_);
        if (s->empty()) continue;
        std::vector<Padic> below, above;
        for (long k = s->kmin(); k <= s->kmax(); ++k) {
            if (k < lo) below.push_back(s->c_[idx(k - s->kmin())]);
            if (k > hi) above.push_back(s->c_[idx(k - s->kmin())]);
        }
        if (!below.empty()) tail = opt_min(tail, gauss_of(below, s->kmin(), r));
        if (!above.empty()) tail = opt_min(tail, gauss_of(above, hi + 1, r));
    }
    std::vector<Padic> c;
    c.reserve(idx(hi - lo + 1));
    for (long k = lo; k <= hi; ++k) c.push_back(f.coeff(k) + g.coeff(k));
    const bool lex = f.lower_exact_ && g.lower_exact_ && lo == std::min(f.empty() ? lo : f.kmin(), g.empty() ? lo : g.kmin());
    const bool uex = f.upper_exact_ && g.upper_exact_ && hi == std::max(f.empty() ? hi : f.kmax(), g.empty() ? hi : g.kmax());
    return build_series(p_, r, lo, std::move(c), cap, lex, uex, tail);
}

AnnulusSeries AnnulusSeries::operator-(const AnnulusSeries& g) const { return *this + (-g); }

AnnulusSeries AnnulusSeries::operator*(const Padic& a) const
{
    AnnulusSeries s = *this;
    for (auto& x : s.c_) x *= a;
    if (s.tail_) {
        long v = a.is_exact_zero() ? Padic::kInfinitePrecision : a.valuation();
        s.tail_ = opt_add(s.tail_, Rational(v));
    }
    return s;
}

AnnulusSeries AnnulusSeries::operator*(const AnnulusSeries& g0) const
{
    require(p_ == g0.p_, ErrorKind::InvalidInput, "series over different primes");
    const Rational r = std::max(r_, g0.r_);
    const long cap = std::max(cap_, g0.cap_);
    const AnnulusSeries f = with_annulus(r), g = g0.with_annulus(r);
    if ((f.empty() && f.is_exact()) || (g.empty() && g.is_exact())) return zero(p_, r, cap);
    require(!f.empty() && !g.empty(), ErrorKind::WindowOverflow, "product of series with no known coefficient");

    std::vector<Padic> c = poly_mul(f.c_, g.c_, p_);
    const long lo0 = f.kmin() + g.kmin();
    const long hi0 = f.kmax() + g.kmax();

    const Rational vf = gauss_of(f.c_, f.kmin(), r);
    const Rational vg = gauss_of(g.c_, g.kmin(), r);
    const Opt tf = f.is_exact() ? Opt(infinite_valuation()) : f.tail_;
    const Opt tg = g.is_exact() ? Opt(infinite_valuation()) : g.tail_;

    long hi = hi0, lo = lo0;
    if (!f.upper_exact_) hi = std::min(hi, f.kmax() + g.kmin());
    if (!g.upper_exact_) hi = std::min(hi, g.kmax() + f.kmin());
    if (!f.lower_exact_) lo = std::max(lo, f.kmin() + g.kmax());
    if (!g.lower_exact_) lo = std::max(lo, g.kmin() + f.kmax());
    const bool mixed = (!f.upper_exact_ && !g.lower_exact_) || (!f.lower_exact_ && !g.upper_exact_);

    Opt err = infinite_valuation();
    if (!f.is_exact()) err = opt_min(err, opt_add(tf, vg));
    if (!g.is_exact()) err = opt_min(err, opt_add(tg, vf));
    if (!f.is_exact() && !g.is_exact()) err = opt_min(err, opt_add(tf, tg));

    const bool lex = f.lower_exact_ && g.lower_exact_;
    const bool uex = f.upper_exact_ && g.upper_exact_;
    if (!mixed && lo <= hi) {
        Opt tail = err;
        std::vector<Padic> below, above;
        for (long k = lo0; k <= hi0; ++k) {
            if (k < lo) below.push_back(c[idx(k - lo0)]);
            if (k > hi) above.push_back(c[idx(k - lo0)]);
        }
        if (!below.empty()) tail = opt_min(tail, gauss_of(below, lo0, r));
        if (!above.empty()) tail = opt_min(tail, gauss_of(above, hi + 1, r));
        std::vector<Padic> kept(c.begin() + (lo - lo0), c.begin() + (hi - lo0 + 1));
        return build_series(p_, r, lo, std::move(kept), cap, lex && lo == lo0, uex && hi == hi0, tail);
    }
    // The unknown parts reach every exponent: fold them into the coefficient precision.
    if (!err) fail(ErrorKind::WindowOverflow, "tail bounds cannot certify the product");
    for (long k = lo0; k <= hi0; ++k) {
        if (is_infinite(*err)) break;
        c[idx(k - lo0)] = c[idx(k - lo0)].capped(ceil_rational(*err - Rational(k) / r));
    }
    return build_series(p_, r, lo0, std::move(c), cap, lex, uex, err);
}

AnnulusSeries AnnulusSeries::shift(long k) const
{
    AnnulusSeries s = *this;
    if (!s.c_.empty()) s.kmin_ += k;
    if (s.tail_) s.tail_ = opt_add(s.tail_, Rational(Rational(k) / r_));
    return s;
}

AnnulusSeries AnnulusSeries::inverse() const
{
    if (c_.empty()) fail(ErrorKind::DivisionByZeroAtPrecision, "inverting the zero series");
    // single exact term
    if (is_exact() && c_.size() == 1) return monomial(c_[0].inverse(), -kmin_, r_, cap_);

    const long D = cap_;
    // bottom-dominant route: f = a_m T^m (1 + w) with w integral
    if (lower_exact_ && !c_.front().is_zero()) {
        const Padic am = c_.front();
        const Padic inv_am = am.inverse();
        std::vector<Padic> w(c_.size());
        bool integral = true;
        for (std::size_t i = 1; i < c_.size(); ++i) {
            w[i] = c_[i] * inv_am;
            if (!w[i].is_integral()) integral = false;
        }
        if (integral) {
            long deg = D;
            if (!upper_exact_) deg = std::min(deg, kmax() - kmin_);
            std::vector<Padic> h(idx(deg + 1), Padic::zero(p_));
            h[0] = Padic::one(p_, am.relprec());
            for (long k = 1; k <= deg; ++k) {
                Padic s = Padic::zero(p_);
                const long top = std::min<long>(k, static_cast<long>(c_.size()) - 1);
                for (long i = 1; i <= top; ++i) {
                    if (w[idx(i)].is_exact_zero()) continue;
                    s += w[idx(i)] * h[idx(k - i)];
                }
                h[idx(k)] = -s;
            }
            for (auto& x : h) x *= inv_am;
            // h has integral coefficients times a_m^{-1}: the dropped part is bounded by (deg+1)/r
            Opt tail = Rational(-am.valuation()) - Rational(kmin_) / r_ + Rational(deg + 1) / r_;
            if (!upper_exact_) {
                const Rational v = gauss_of(c_, kmin_, r_);
                tail = opt_min(tail, opt_add(tail_, Rational(Rational(-2) * v)));
            }
            return build_series(p_, r_, -kmin_, std::move(h), cap_, true, false, tail);
        }
    }
    // top-dominant route: f = a_M T^M (1 + w) with w in T^{-1}, slope above 1/r
    if (upper_exact_ && lower_exact_ && !c_.back().is_zero()) {
        const Padic aM = c_.back();
        const Padic inv_aM = aM.inverse();
        const long len = static_cast<long>(c_.size());
        std::vector<Padic> w(idx(len));
        Rational mu = infinite_valuation();
        for (long j = 1; j < len; ++j) {
            w[idx(j)] = c_[idx(len - 1 - j)] * inv_aM;
            if (w[idx(j)].is_exact_zero()) continue;
            Rational slope = frac(w[idx(j)].valuation(), j);
            mu = std::min(mu, slope);
        }
        if (mu > Rational(1) / r_) {
            std::vector<Padic> h(idx(D + 1), Padic::zero(p_));
            h[0] = Padic::one(p_, aM.relprec());
            for (long k = 1; k <= D; ++k) {
                Padic s = Padic::zero(p_);
                for (long i = 1; i <= std::min(k, len - 1); ++i) {
                    if (w[idx(i)].is_exact_zero()) continue;
                    s += w[idx(i)] * h[idx(k - i)];
                }
                h[idx(k)] = -s;
            }
            std::reverse(h.begin(), h.end());
            for (auto& x : h) x *= inv_aM;
            const long M = kmax();
            Rational tail =
                Rational(-aM.valuation()) - Rational(M) / r_ +
                (is_infinite(mu) ? infinite_valuation() : Rational(D + 1) * (mu - Rational(1) / r_));
            return build_series(p_, r_, -M - D, std::move(h), cap_, false, true, tail);
        }
    }
    fail(ErrorKind::NotComposable, "series has no dominant term on the annulus; not a unit");
}

AnnulusSeries AnnulusSeries::pow(long e) const
{
    if (e < 0) return inverse().pow(-e);
    AnnulusSeries result = constant(Padic::one(p_, std::max(1, max_relprec(c_))), r_, cap_);
    AnnulusSeries base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    return result;
}

std::string AnnulusSeries::to_string(int max_terms) const
{
    std::ostringstream os;
    int shown = 0;
    bool first = true;
    for (std::size_t i = 0; i < c_.size() && shown < max_terms; ++i) {
        if (c_[i].is_zero()) continue;
        const long k = kmin_ + static_cast<long>(i);
        std::string s = c_[i].to_string();
        bool neg = s[0] == '-';
        if (neg) s.erase(0, 1);
        if (!first) os << (neg ? " - " : " + ");
        else if (neg) os << "-";
        first = false;
        if (k == 0) os << s;
        else {
            if (s != "1") os << s << "*";
            os << "T";
            if (k != 1) os << "^" << k;
        }
        ++shown;
    }
    if (first) os << "0";
    if (!is_exact() || shown == max_terms) os << " + ...";
    return os.str();
}

// ---------------------------------------------------------------- valuations

Rational gauss_valuation(const AnnulusSeries& f, const Rational& s)
{
    require(s > 0, ErrorKind::InvalidInput, "circle index must be positive");
    return gauss_of(f.coeffs(), f.kmin(), s);
}

Rational interval_valuation(const AnnulusSeries& f, const Rational& s1, const Rational& s2)
{
    require(s1 <= s2, ErrorKind::InvalidInput, "interval endpoints out of order");
    return std::min(gauss_valuation(f, s1), gauss_valuation(f, s2));
}

long residual_valuation(const AnnulusSeries& f, const AnnulusSeries& g)
{
    long lo = kNoLimit, hi = -kNoLimit;
    for (const AnnulusSeries* s : {&f, &g}) {
        if (s->empty()) continue;
        lo = std::min(lo, s->kmin());
        hi = std::max(hi, s->kmax());
    }
    long best = Padic::kInfinitePrecision;
    for (long k = lo; k <= hi; ++k) {
        if (!f.known(k) || !g.known(k)) continue;
        const Padic d = f.coeff(k) - g.coeff(k);
        best = std::min(best, d.is_zero() ? d.absprec() : d.valuation());
    }
    return best;
}

Rational gauss_residual(const AnnulusSeries& f, const AnnulusSeries& g, const Rational& s)
{
    require(s > 0, ErrorKind::InvalidInput, "circle index must be positive");
    long lo = kNoLimit, hi = -kNoLimit;
    for (const AnnulusSeries* x : {&f, &g}) {
        if (x->empty()) continue;
        lo = std::min(lo, x->kmin());
        hi = std::max(hi, x->kmax());
    }
    Rational best = infinite_valuation();
    for (long k = lo; k <= hi; ++k) {
        if (!f.known(k) || !g.known(k)) continue;
        const Padic d = f.coeff(k) - g.coeff(k);
        if (d.is_exact_zero()) continue;
        best = std::min(best, Rational(Rational(d.is_zero() ? d.absprec() : d.valuation()) + Rational(k) / s));
    }
    return best;
}

// ---------------------------------------------------------------- operators

AnnulusSeries compose(const AnnulusSeries& f, const AnnulusSeries& g)
{
    require(f.prime() == g.prime(), ErrorKind::InvalidInput, "series over different primes");
    require(f.is_exact(), ErrorKind::InvalidInput, "compose expects an exact Laurent polynomial");
    if (g.empty() || g.kmin() < 1 || g.coeffs().front().is_zero())
        fail(ErrorKind::NotComposable, "inner series must start with a nonzero term of positive degree");
    const int p = f.prime();
    const long cap = std::max(f.width_cap(), g.width_cap());
    AnnulusSeries acc = AnnulusSeries::zero(p, g.annulus(), cap);
    if (f.empty()) return acc;
    if (f.kmax() >= 0) {
        for (long k = f.kmax(); k >= 0; --k) {
            acc = acc * g;
            const Padic a = f.coeff(k);
            if (!a.is_exact_zero()) acc += AnnulusSeries::constant(a, g.annulus(), cap);
        }
    }
    if (f.kmin() < 0) {
        const AnnulusSeries h = g.inverse();
        AnnulusSeries neg = AnnulusSeries::zero(p, g.annulus(), cap);
        for (long k = f.kmin(); k <= -1; ++k) {
            const Padic a = f.coeff(k);
            if (!a.is_exact_zero()) neg += AnnulusSeries::constant(a, g.annulus(), cap);
            neg = neg * h;
        }
        acc += neg;
    }
    return acc;
}

namespace {

// Stored coefficients of f split as T^{-K} * gneg (gneg a polynomial of degree < K) and gpos.
struct Split {
    long K = 0;
    Poly neg;
    Poly pos;
};

Split split_poly(const AnnulusSeries& f)
{
    Split s;
    if (f.empty()) return s;
    s.K = std::max(0L, -f.kmin());
    for (long k = f.kmin(); k <= f.kmax(); ++k) {
        if (k < 0) s.neg.push_back(f.coeffs()[idx(k - f.kmin())]);
        else {
            if (s.pos.empty()) s.pos.assign(idx(k), Padic::zero(f.prime()));
            s.pos.push_back(f.coeffs()[idx(k - f.kmin())]);
        }
    }
    if (!s.neg.empty()) s.neg.resize(idx(s.K), Padic::zero(f.prime()));
    return s;
}

AnnulusSeries exact_poly(int p, const Rational& r, long lo, Poly c, long cap)
{
    return build_series(p, r, lo, std::move(c), cap, true, true, std::nullopt);
}

} // namespace

AnnulusSeries frobenius(const AnnulusSeries& f)
{
    const int p = f.prime();
    const Rational r = f.annulus() * p;
    const long cap = f.width_cap();
    if (f.empty()) return AnnulusSeries::zero(p, r, cap);
    const Split s = split_poly(f);
    const int rel = max_relprec(f.coeffs());

    auto phi_poly = [&](const Poly& g) {
        Poly b = to_binomial_basis(g, p);
        Poly e(b.empty() ? 0 : (b.size() - 1) * static_cast<std::size_t>(p) + 1, Padic::zero(p));
        for (std::size_t k = 0; k < b.size(); ++k) e[k * static_cast<std::size_t>(p)] = b[k];
        return from_binomial_basis(e, p);
    };

    AnnulusSeries result = AnnulusSeries::zero(p, r, cap);
    if (!s.pos.empty()) result = exact_poly(p, r, 0, phi_poly(s.pos), cap);
    if (s.K > 0) {
        Poly phiT(idx(p + 1), Padic::zero(p));
        {
            mpz_class b = 1;
            for (int i = 1; i <= p; ++i) {
                b *= (p - i + 1);
                mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(i));
                phiT[idx(i)] = Padic::from_integer(p, b, rel);
            }
            phiT[0] = Padic::zero(p);
        }
        const AnnulusSeries h = exact_poly(p, r, 0, phiT, cap).inverse();
        AnnulusSeries neg = exact_poly(p, r, 0, phi_poly(s.neg), cap) * h.pow(s.K);
        result = f.kmax() >= 0 ? result + neg : neg;
    }
    if (f.is_exact()) return result;
    // unknown parts of f
    const Opt tb = f.tailbound();
    long lo = result.kmin(), hi = result.kmax();
    if (!f.upper_exact()) hi = std::min(hi, f.kmax());
    if (!f.lower_exact()) lo = std::max(lo, p * (f.kmin() - 1) + 1);
    AnnulusSeries out = result.truncated(lo, hi);
    std::vector<Padic> c = out.coeffs();
    Opt tail = opt_min(out.is_exact() ? Opt(infinite_valuation()) : out.tailbound(), tb);
    return AnnulusSeries::from_coeffs(p, r, out.kmin(), std::move(c), cap, out.lower_exact() && f.lower_exact(),
                                      out.upper_exact() && f.upper_exact(), tail);
}

AnnulusSeries gamma_image_of_T(const Padic& c, const Rational& r, long degree, long width_cap)
{
    std::vector<Padic> b = padic_binomials(c, degree);
    b[0] = Padic::zero(c.prime());
    const long cap = std::max(width_cap, degree);
    return AnnulusSeries::from_coeffs(c.prime(), r, 0, std::move(b), cap, true, false, Rational(degree + 1) / r);
}

AnnulusSeries gamma_action(const AnnulusSeries& f, const Padic& c)
{
    const int p = f.prime();
    require(c.prime() == p && !c.is_zero() && c.valuation() == 0, ErrorKind::InvalidInput, "gamma_action needs c in Z_p^*");
    const Rational& r = f.annulus();
    const long cap = f.width_cap();
    if (f.empty()) return f;
    if (f.is_exact() && f.kmin() == 0 && f.kmax() == 0) return f;
    const Split s = split_poly(f);
    // the result is kept up to T^{kmin + cap}; T^K f is a polynomial, so its image is needed up to T^cap
    const long D_pos = std::min(0L, f.kmin()) + cap;
    const long D_neg = cap;

    // (1+T)-basis image of a polynomial, truncated after T^D
    auto gamma_poly = [&](const Poly& g, long D) {
        Poly b = to_binomial_basis(g, p);
        Poly out(idx(D + 1), Padic::zero(p));
        Rational vb = infinite_valuation();
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (b[k].is_exact_zero()) continue;
            vb = std::min(vb, Rational(b[k].is_zero() ? b[k].absprec() : b[k].valuation()));
            if (k == 0) {
                out[0] += b[0];
                continue;
            }
            const Padic ck = mul_int(c, mpz_class(static_cast<unsigned long>(k)));
            const std::vector<Padic> bin = padic_binomials(ck, D);
            for (long j = 0; j <= D; ++j) out[idx(j)] += b[k] * bin[idx(j)];
        }
        Rational tail = is_infinite(vb) ? vb : vb + Rational(D + 1) / r;
        return AnnulusSeries::from_coeffs(p, r, 0, std::move(out), std::max(cap, D), true, false, tail);
    };

    AnnulusSeries result = AnnulusSeries::zero(p, r, cap);
    if (!s.pos.empty()) result = gamma_poly(s.pos, D_pos);
    if (s.K > 0) {
        const AnnulusSeries gT = gamma_image_of_T(c, r, cap + 2, cap);
        const AnnulusSeries h = gT.inverse();
        AnnulusSeries neg = gamma_poly(s.neg, D_neg) * h.pow(s.K);
        result = s.pos.empty() ? neg : result + neg;
    }
    result = result.with_width_cap(cap);
    if (f.is_exact()) return result;
    const Opt tb = f.tailbound();
    if (!f.lower_exact()) {
        if (!tb) fail(ErrorKind::WindowOverflow, "lower tail without a bound");
        std::vector<Padic> c2 = result.coeffs();
        for (std::size_t i = 0; i < c2.size(); ++i)
            c2[i] = c2[i].capped(ceil_rational(*tb - Rational(result.kmin() + static_cast<long>(i)) / r));
        Opt tail = opt_min(result.is_exact() ? Opt(infinite_valuation()) : result.tailbound(), tb);
        return AnnulusSeries::from_coeffs(p, r, result.kmin(), std::move(c2), cap, false,
                                          result.upper_exact() && f.upper_exact(), tail);
    }
    AnnulusSeries out = result.truncated(result.kmin(), std::min(result.kmax(), f.kmax()));
    Opt tail = opt_min(out.is_exact() ? Opt(infinite_valuation()) : out.tailbound(), tb);
    return AnnulusSeries::from_coeffs(p, r, out.kmin(), out.coeffs(), cap, out.lower_exact(), false, tail);
}

AnnulusSeries psi(const AnnulusSeries& f)
{
    const int p = f.prime();
    const Rational r = f.annulus() / p;
    const long cap = f.width_cap();
    if (f.empty()) return AnnulusSeries::zero(p, r, cap);
    const int rel = max_relprec(f.coeffs());

    // psi(f) = T^{-K} psi(phi(T)^K f), with phi(T)^K f a polynomial
    const long K = std::max(0L, -f.kmin());
    Poly g(idx(f.kmin() + K), Padic::zero(p));
    for (const auto& a : f.coeffs()) g.push_back(a);
    if (K > 0) {
        Poly phiT(idx(p + 1), Padic::zero(p));
        mpz_class b = 1;
        for (int i = 1; i <= p; ++i) {
            b *= (p - i + 1);
            mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(i));
            phiT[idx(i)] = Padic::from_integer(p, b, rel);
        }
        // multiply by phi(T)^K / T^K = q^K
        Poly q(phiT.begin() + 1, phiT.end());
        for (long i = 0; i < K; ++i) g = poly_mul(g, q, p);
    }
    Poly b = to_binomial_basis(g, p);
    Poly bp;
    for (std::size_t k = 0; k < b.size(); k += static_cast<std::size_t>(p)) bp.push_back(b[k]);
    Poly h = from_binomial_basis(bp, p);
    AnnulusSeries result = build_series(p, r, -K, std::move(h), std::max<long>(cap, 0), true, true, std::nullopt);
    result = result.with_width_cap(cap);
    if (f.is_exact()) return result;

    const Opt tb = f.tailbound();
    const Opt tb1 = tb ? Opt(is_infinite(*tb) ? *tb : *tb - 1) : std::nullopt;
    AnnulusSeries out = result;
    if (!f.lower_exact()) {
        const long lo = -ceil_rational(frac(1 - f.kmin(), p)) + 1;
        out = out.truncated(lo, out.kmax());
        Opt tail = opt_min(out.is_exact() ? Opt(infinite_valuation()) : out.tailbound(), tb1);
        out = AnnulusSeries::from_coeffs(p, r, out.kmin(), out.coeffs(), cap, false, out.upper_exact(), tail);
    }
    if (!f.upper_exact()) {
        if (!tb1) fail(ErrorKind::WindowOverflow, "upper tail without a bound");
        std::vector<Padic> c = out.coeffs();
        for (std::size_t i = 0; i < c.size(); ++i) {
            const long j = out.kmin() + static_cast<long>(i);
            if (j >= 0) c[i] = c[i].capped(ceil_rational(*tb1 - Rational(j * p) / f.annulus()));
        }
        Opt tail = opt_min(out.is_exact() ? Opt(infinite_valuation()) : out.tailbound(), tb1);
        out = AnnulusSeries::from_coeffs(p, r, out.kmin(), std::move(c), cap, out.lower_exact(), false, tail);
    }
    return out;
}

AnnulusSeries partial(const AnnulusSeries& f)
{
    const int p = f.prime();
    if (f.empty()) return f;
    const long lo = f.kmin(), hi = f.kmax();
    std::vector<Padic> c;
    c.reserve(idx(hi - lo + 2));
    for (long j = lo - 1; j <= hi; ++j) {
        Padic s = Padic::zero(p);
        if (j + 1 >= lo && j + 1 <= hi && j + 1 != 0) s += mul_int(f.coeffs()[idx(j + 1 - lo)], mpz_class(j + 1));
        if (j >= lo && j != 0) s += mul_int(f.coeffs()[idx(j - lo)], mpz_class(j));
        c.push_back(s);
    }
    long nlo = lo - 1, nhi = hi;
    std::vector<Padic> kept = c;
    if (!f.lower_exact()) {
        kept.erase(kept.begin());
        nlo = lo;
    }
    if (!f.upper_exact()) {
        kept.pop_back();
        nhi = hi - 1;
    }
    (void)nhi;
    Opt tail = f.tailbound();
    if (tail && !is_infinite(*tail)) tail = *tail - Rational(1) / f.annulus();
    if (kept.empty()) fail(ErrorKind::WindowOverflow, "window too short for the derivative");
    return AnnulusSeries::from_coeffs(p, f.annulus(), nlo, std::move(kept), f.width_cap(), f.lower_exact(),
                                      f.upper_exact(), f.is_exact() ? std::nullopt : tail);
}

// ---------------------------------------------------------------- special elements

Rational log_tail_bound(int p, const Rational& r, long K) { return log_type_tail(p, r, K); }

Rational r_n(int p, int n)
{
    require(n >= 1, ErrorKind::InvalidInput, "level must be >= 1");
    return Rational(ppow(p, n - 1) * (p - 1));
}

AnnulusSeries special_t(int p, int relprec, const Rational& r, long terms, long width_cap)
{
    require(terms >= 1, ErrorKind::InvalidInput, "t needs at least one term");
    std::vector<Padic> c;
    c.reserve(idx(terms));
    for (long k = 1; k <= terms; ++k) c.push_back(Padic::from_rational(p, Rational((k % 2 == 1) ? 1 : -1, k), relprec));
    return AnnulusSeries::from_coeffs(p, r, 1, std::move(c), std::max(width_cap, terms), true, false,
                                      log_type_tail(p, r, terms));
}

AnnulusSeries special_t(int p, const PrecisionBudget& budget, const Rational& r)
{
    long K = budget.window();
    while (log_type_tail(p, r, K) < budget.working() && K < 64L * budget.window()) K += 8;
    return special_t(p, budget.working(), r, K, budget.window());
}

std::vector<mpz_class> qn_coefficients(int p, int n) { return eisenstein_coefficients(p, n); }

AnnulusSeries special_qn(int p, int n, int relprec, const Rational& r, long width_cap)
{
    const auto& q = eisenstein_coefficients(p, n);
    return AnnulusSeries::from_coeffs(p, r, 0, integer_poly(q, p, relprec), std::max<long>(width_cap, static_cast<long>(q.size())));
}

CyclotomicScalar evaluate_at_pi(const AnnulusSeries& f, int n)
{
    const int p = f.prime();
    const Rational rn = r_n(p, n);
    require(f.annulus() <= rn, ErrorKind::InvalidInput, "pi_n lies outside the annulus of the series");
    const int rel = std::max(1, max_relprec(f.coeffs()));
    CyclotomicScalar acc = CyclotomicScalar::zero(p, n);
    if (!f.empty()) {
        const CyclotomicScalar x = CyclotomicScalar::pi(p, n, rel);
        // Horner over the nonnegative part, then over the negative part with pi^{-1}
        if (f.kmax() >= 0) {
            for (long k = f.kmax(); k >= 0; --k) {
                acc = acc * x;
                const Padic a = f.coeff(k);
                if (!a.is_exact_zero()) acc += CyclotomicScalar::from_padic(n, a);
            }
        }
        if (f.kmin() < 0) {
            const CyclotomicScalar xi = x.inverse();
            CyclotomicScalar neg = CyclotomicScalar::zero(p, n);
            for (long k = f.kmin(); k <= -1; ++k) {
                const Padic a = f.coeff(k);
                if (!a.is_exact_zero()) neg += CyclotomicScalar::from_padic(n, a);
                neg = neg * xi;
            }
            acc += neg;
        }
    }
    if (f.is_exact()) return acc;
    if (!f.upper_exact() && f.annulus() != rn)
        fail(ErrorKind::PrecisionExhausted, "upper tail bound is not certified on the circle of pi_n");
    if (!f.tailbound()) fail(ErrorKind::PrecisionExhausted, "series tail has no bound");
    return acc.capped(*f.tailbound());
}

DivisionResult divide_distinguished(const AnnulusSeries& f, const std::vector<mpz_class>& Q, const PrecisionBudget& budget,
                                    int level)
{
    const int p = f.prime();
    require(!Q.empty() && Q.back() == 1, ErrorKind::InvalidInput, "divisor must be monic");
    const long D = static_cast<long>(Q.size()) - 1;
    const Rational& r = f.annulus();
    DivisionResult res;
    const long s = f.empty() ? 0 : std::max(0L, -f.kmin());
    Poly g;
    if (!f.empty()) {
        g.assign(idx(f.kmin() + s), Padic::zero(p));
        for (const auto& a : f.coeffs()) g.push_back(a);
    }
    const long deg = static_cast<long>(g.size()) - 1;
    Poly quot(idx(std::max(0L, deg - D + 1)), Padic::zero(p));
    for (long i = deg; i >= D; --i) {
        const Padic top = g[idx(i)];
        quot[idx(i - D)] = top;
        if (top.is_exact_zero()) continue;
        for (long j = 0; j < D; ++j)
            if (Q[idx(j)] != 0) g[idx(i - D + j)] -= mul_int(top, Q[idx(j)]);
        g[idx(i)] = Padic::zero(p);
    }
    g.resize(idx(std::min(deg + 1, D)));
    const long cap = f.width_cap();
    res.quotient = quot.empty() ? AnnulusSeries::zero(p, r, cap)
                                : AnnulusSeries::from_coeffs(p, r, -s, std::move(quot), cap, f.lower_exact(), f.upper_exact(),
                                                             f.is_exact() ? std::nullopt : f.tailbound());
    res.remainder = g.empty() ? AnnulusSeries::zero(p, r, cap) : AnnulusSeries::from_coeffs(p, r, -s, std::move(g), cap);

    Rational threshold = budget.digits - 2 * budget.slack;
    if (!f.is_exact()) {
        if (!f.tailbound()) fail(ErrorKind::WindowOverflow, "truncated input without a tail bound");
        threshold = std::min(threshold, Rational(floor_rational(*f.tailbound())));
    }
    res.threshold = threshold;
    res.remainder_valuation = gauss_valuation(res.remainder, r);
    bool ok = res.remainder_valuation >= threshold;
    res.evaluation_valuation = infinite_valuation();
    if (level > 0) {
        const CyclotomicScalar e = evaluate_at_pi(f, level);
        res.evaluation_valuation = e.valuation();
        ok = ok && res.evaluation_valuation >= threshold;
    }
    res.divisible = ok;
    return res;
}

AnnulusSeries divide_by_t(const AnnulusSeries& f, const PrecisionBudget& budget, int n_test)
{
    const int p = f.prime();
    const Rational& r = f.annulus();
    if (f.empty() && f.is_exact()) return f;
    require(f.lower_exact(), ErrorKind::WindowOverflow, "division by t needs an exact lower end");
    for (int n = 1; n <= n_test; ++n) {
        if (r > r_n(p, n)) continue;
        const DivisionResult d = divide_distinguished(f, qn_coefficients(p, n), budget, n);
        if (!d.divisible) fail(ErrorKind::NotDivisible, "not divisible by q_" + std::to_string(n));
    }
    const int rel = std::max(1, max_relprec(f.coeffs()));
    const long lo = f.kmin(), hi = f.kmax();
    const long len = hi - lo;
    std::vector<Padic> tau(idx(len + 1));
    for (long i = 0; i <= len; ++i) tau[idx(i)] = Padic::from_rational(p, Rational((i % 2 == 0) ? 1 : -1, i + 1), rel);
    std::vector<Padic> h(idx(len), Padic::zero(p));
    for (long k = 0; k < len; ++k) {
        Padic s = f.coeffs()[idx(k)];
        for (long i = 1; i <= k; ++i) s -= tau[idx(i)] * h[idx(k - i)];
        h[idx(k)] = s;
    }
    if (h.empty()) fail(ErrorKind::WindowOverflow, "window too short to divide by t");
    // f/t - h = (u + (s - t h)) / t with s - t h supported above the window
    const Rational vt_lo = log_type_tail(p, r, 0);
    const Rational vt_hi = t_valuation_upper(p, r);
    const Rational vh = gauss_of(h, lo - 1, r);
    Opt rest = std::min(gauss_valuation(f, r), Rational(vt_lo + vh));
    if (!f.upper_exact()) rest = opt_min(rest, f.tailbound());
    Opt tail = opt_add(rest, Rational(-vt_hi));
    return AnnulusSeries::from_coeffs(p, r, lo - 1, std::move(h), std::max(f.width_cap(), len), true, false, tail);
}

BoundedVerdict is_bounded(const AnnulusSeries& f)
{
    BoundedVerdict v;
    const Rational& r = f.annulus();
    Rational s = r;
    v.minimum = infinite_valuation();
    for (int i = 0; i <= 12; ++i) {
        const Rational g = gauss_valuation(f, s);
        v.ladder.emplace_back(s, g);
        v.minimum = std::min(v.minimum, g);
        s *= 2;
    }
    const long width = std::max<long>(2, static_cast<long>(f.coeffs().size()));
    const Rational g0 = v.ladder.front().second;
    const Rational base = std::min(is_infinite(g0) ? Rational(0) : g0, Rational(0));
    v.bound = base - Rational(ilog(f.prime(), width) + 1);
    v.bounded = v.minimum >= v.bound;
    return v;
}

} // namespace robba
