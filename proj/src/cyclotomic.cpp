#include "robba/cyclotomic.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace robba {

Padic mul_int(const Padic& a, const mpz_class& n)
{
    if (n == 0 || a.is_exact_zero()) return Padic::zero(a.prime());
    if (a.is_zero()) return a.shift(valuation_of(a.prime(), n));
    return a * Padic::from_integer(a.prime(), n, a.relprec());
}

const std::vector<mpz_class>& eisenstein_coefficients(int p, int n)
{
    thread_local std::map<std::pair<int, int>, std::vector<mpz_class>> cache;
    auto key = std::make_pair(p, n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    require(n >= 1, ErrorKind::InvalidInput, "cyclotomic level must be >= 1");
    const long step = ppow(p, n - 1).get_si();
    const long deg = (p - 1) * step;
    std::vector<mpz_class> e(static_cast<std::size_t>(deg + 1), 0);
    for (long j = 0; j < p; ++j) {
        const long m = j * step;
        mpz_class b = 1;
        for (long i = 0; i <= m; ++i) {
            if (i > 0) {
                b *= (m - i + 1);
                mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(i));
            }
            e[static_cast<std::size_t>(i)] += b;
        }
    }
    return cache.emplace(key, std::move(e)).first->second;
}

long CyclotomicScalar::degree_of(int p, int n)
{
    require(n >= 1, ErrorKind::InvalidInput, "cyclotomic level must be >= 1");
    return (p - 1) * ppow(p, n - 1).get_si();
}

CyclotomicScalar CyclotomicScalar::zero(int p, int n, long absprec)
{
    CyclotomicScalar z;
    z.p_ = p;
    z.n_ = n;
    const long d = degree_of(p, n);
    z.c_.assign(static_cast<std::size_t>(d), Padic::zero(p));
    if (absprec < Padic::kInfinitePrecision)
        for (long i = 0; i < d; ++i) z.c_[static_cast<std::size_t>(i)] = Padic::zero(p, absprec);
    return z;
}

CyclotomicScalar CyclotomicScalar::from_padic(int n, const Padic& a)
{
    CyclotomicScalar z = zero(a.prime(), n);
    z.c_[0] = a;
    return z;
}

CyclotomicScalar CyclotomicScalar::from_coeffs(int p, int n, std::vector<Padic> coeffs)
{
    const long d = degree_of(p, n);
    require(static_cast<long>(coeffs.size()) == d, ErrorKind::InvalidInput,
            "cyclotomic element needs " + std::to_string(d) + " coefficients");
    for (const auto& a : coeffs)
        require(a.prime() == p, ErrorKind::InvalidInput, "coefficient prime mismatch");
    CyclotomicScalar z;
    z.p_ = p;
    z.n_ = n;
    z.c_ = std::move(coeffs);
    return z;
}

CyclotomicScalar CyclotomicScalar::pi(int p, int n, int relprec)
{
    CyclotomicScalar z = zero(p, n);
    if (z.degree() == 1) {
        // E_1 = x + p for p = 2
        z.c_[0] = Padic::from_integer(p, -eisenstein_coefficients(p, n)[0], relprec);
    } else {
        z.c_[1] = Padic::one(p, relprec);
    }
    return z;
}

CyclotomicScalar CyclotomicScalar::zeta_power(int p, int n, long a, int relprec)
{
    CyclotomicScalar z = pi(p, n, relprec);
    z.c_[0] += Padic::one(p, relprec);
    return z.pow(a);
}

bool CyclotomicScalar::is_zero() const
{
    return std::all_of(c_.begin(), c_.end(), [](const Padic& a) { return a.is_zero(); });
}

Rational CyclotomicScalar::valuation() const
{
    const long d = degree();
    Rational best;
    bool first = true;
    for (long i = 0; i < d; ++i) {
        const Padic& a = c_[static_cast<std::size_t>(i)];
        if (a.is_exact_zero()) continue;
        Rational v = Rational(a.valuation()) + frac(i, d);
        if (first || v < best) best = v;
        first = false;
    }
    if (first) return Rational(Padic::kInfinitePrecision);
    return best;
}

Rational CyclotomicScalar::absprec() const
{
    const long d = degree();
    Rational best(Padic::kInfinitePrecision);
    for (long i = 0; i < d; ++i) {
        const Padic& a = c_[static_cast<std::size_t>(i)];
        if (a.is_exact_zero() || a.absprec() >= Padic::kInfinitePrecision) continue;
        Rational v = Rational(a.absprec()) + frac(i, d);
        if (v < best) best = v;
    }
    return best;
}

bool CyclotomicScalar::is_rational() const
{
    for (std::size_t i = 1; i < c_.size(); ++i)
        if (!c_[i].is_zero()) return false;
    return true;
}

CyclotomicScalar CyclotomicScalar::operator-() const
{
    CyclotomicScalar z = *this;
    for (auto& a : z.c_) a = -a;
    return z;
}

CyclotomicScalar CyclotomicScalar::operator+(const CyclotomicScalar& b) const
{
    require(p_ == b.p_ && n_ == b.n_, ErrorKind::InvalidInput, "cyclotomic level mismatch");
    CyclotomicScalar z = *this;
    for (std::size_t i = 0; i < c_.size(); ++i) z.c_[i] += b.c_[i];
    return z;
}

CyclotomicScalar CyclotomicScalar::operator-(const CyclotomicScalar& b) const { return *this + (-b); }

CyclotomicScalar CyclotomicScalar::operator*(const Padic& b) const
{
    CyclotomicScalar z = *this;
    for (auto& a : z.c_) a *= b;
    return z;
}

CyclotomicScalar CyclotomicScalar::operator*(const CyclotomicScalar& b) const
{
    require(p_ == b.p_ && n_ == b.n_, ErrorKind::InvalidInput, "cyclotomic level mismatch");
    const long d = degree();
    if (d == 1) {
        CyclotomicScalar z = *this;
        z.c_[0] *= b.c_[0];
        return z;
    }
    std::vector<Padic> prod(static_cast<std::size_t>(2 * d - 1), Padic::zero(p_));
    for (long i = 0; i < d; ++i) {
        const Padic& ai = c_[static_cast<std::size_t>(i)];
        if (ai.is_exact_zero()) continue;
        for (long j = 0; j < d; ++j) {
            const Padic& bj = b.c_[static_cast<std::size_t>(j)];
            if (bj.is_exact_zero()) continue;
            prod[static_cast<std::size_t>(i + j)] += ai * bj;
        }
    }
    const auto& e = eisenstein_coefficients(p_, n_);
    for (long k = 2 * d - 2; k >= d; --k) {
        const Padic top = prod[static_cast<std::size_t>(k)];
        if (top.is_exact_zero()) continue;
        for (long i = 0; i < d; ++i) {
            const mpz_class& ei = e[static_cast<std::size_t>(i)];
            if (ei == 0) continue;
            prod[static_cast<std::size_t>(k - d + i)] -= mul_int(top, ei);
        }
    }
    prod.resize(static_cast<std::size_t>(d));
    CyclotomicScalar z;
    z.p_ = p_;
    z.n_ = n_;
    z.c_ = std::move(prod);
    return z;
}

CyclotomicScalar CyclotomicScalar::inverse() const
{
    if (is_zero()) fail(ErrorKind::DivisionByZeroAtPrecision, "inverting a cyclotomic value indistinguishable from 0");
    const long d = degree();
    if (d == 1) return from_padic(n_, c_[0].inverse());
    // Multiplication matrix: column j holds the coordinates of x * pi^j.
    std::vector<std::vector<Padic>> m(static_cast<std::size_t>(d), std::vector<Padic>(static_cast<std::size_t>(d + 1)));
    int rel = 1;
    for (const auto& a : c_) rel = std::max(rel, a.relprec());
    CyclotomicScalar col = *this;
    const CyclotomicScalar pin = pi(p_, n_, rel);
    for (long j = 0; j < d; ++j) {
        for (long i = 0; i < d; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = col.c_[static_cast<std::size_t>(i)];
        col = col * pin;
    }
    for (long i = 0; i < d; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] = (i == 0) ? Padic::one(p_, rel) : Padic::zero(p_);
    for (long k = 0; k < d; ++k) {
        long piv = -1;
        long best = 0;
        for (long i = k; i < d; ++i) {
            const Padic& a = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            if (a.is_zero()) continue;
            if (piv < 0 || a.valuation() < best) {
                piv = i;
                best = a.valuation();
            }
        }
        if (piv < 0) fail(ErrorKind::DivisionByZeroAtPrecision, "singular multiplication matrix");
        std::swap(m[static_cast<std::size_t>(k)], m[static_cast<std::size_t>(piv)]);
        const Padic inv = m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)].inverse();
        for (long i = 0; i < d; ++i) {
            if (i == k) continue;
            const Padic f = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * inv;
            if (f.is_exact_zero()) continue;
            for (long j = k; j <= d; ++j)
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= f * m[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        }
    }
    std::vector<Padic> y(static_cast<std::size_t>(d));
    for (long i = 0; i < d; ++i)
        y[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] / m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    return from_coeffs(p_, n_, std::move(y));
}

CyclotomicScalar CyclotomicScalar::pow(long e) const
{
    if (e < 0) return inverse().pow(-e);
    int rel = 1;
    for (const auto& a : c_) rel = std::max(rel, a.relprec());
    CyclotomicScalar result = from_padic(n_, Padic::one(p_, rel));
    CyclotomicScalar base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    return result;
}

CyclotomicScalar CyclotomicScalar::capped(const Rational& a) const
{
    CyclotomicScalar z = *this;
    const long d = degree();
    for (long i = 0; i < d; ++i)
        z.c_[static_cast<std::size_t>(i)] = z.c_[static_cast<std::size_t>(i)].capped(ceil_rational(a - frac(i, d)));
    return z;
}

std::string CyclotomicScalar::to_string() const
{
    if (is_zero()) {
        Rational a = absprec();
        if (a >= Padic::kInfinitePrecision) return "0";
        return "O(" + std::to_string(p_) + "^" + rational_to_string(a) + ")";
    }
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i].is_zero()) continue;
        std::string s = c_[i].to_string();
        if (!first) {
            if (s[0] == '-') {
                os << " - ";
                s.erase(0, 1);
            } else {
                os << " + ";
            }
        }
        first = false;
        if (i == 0) os << s;
        else if (s == "1") os << "pi" << (i > 1 ? "^" + std::to_string(i) : "");
        else os << s << "*pi" << (i > 1 ? "^" + std::to_string(i) : "");
    }
    return os.str();
}

CyclotomicScalar eval_at_pi(const std::vector<mpz_class>& poly, int p, int n, int relprec)
{
    CyclotomicScalar acc = CyclotomicScalar::zero(p, n);
    const CyclotomicScalar x = CyclotomicScalar::pi(p, n, relprec);
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
        acc = acc * x;
        if (*it != 0) acc += CyclotomicScalar::from_padic(n, Padic::from_integer(p, *it, relprec));
    }
    return acc;
}

namespace {
long floor_log(int p, long k)
{
    long e = 0;
    for (long x = k; x >= p; x /= p) ++e;
    return e;
}
} // namespace

CyclotomicScalar iwasawa_log(const CyclotomicScalar& x)
{
    if (x.is_zero()) fail(ErrorKind::ZeroInput, "log of zero");
    const int p = x.prime();
    const int n = x.level();
    const long d = x.degree();
    int rel = 1;
    for (const auto& a : x.coeffs()) rel = std::max(rel, a.relprec());
    const Rational v = x.valuation();
    const Rational vd = v * d;
    require(vd.get_den() == 1, ErrorKind::PrecisionExhausted, "valuation of log argument not determined");
    const long a = vd.get_num().get_si();

    CyclotomicScalar u = x.pow(d);
    std::vector<Padic> uc = u.coeffs();
    for (auto& c : uc) c = c.shift(-a);
    u = CyclotomicScalar::from_coeffs(p, n, std::move(uc));

    CyclotomicScalar y = u.pow(p - 1);
    const CyclotomicScalar one = CyclotomicScalar::from_padic(n, Padic::one(p, rel));
    CyclotomicScalar w = y - one;
    long m = 0;
    while (!w.is_zero() && w.valuation() <= 1 && m < 64) {
        w = (w + one).pow(p) - one;
        ++m;
    }
    CyclotomicScalar sum = CyclotomicScalar::zero(p, n);
    if (!w.is_zero()) {
        const Rational target = w.absprec();
        const Rational vw = w.valuation();
        CyclotomicScalar term = w;
        const long cap = 8L * rel + 64;
        for (long k = 1;; ++k) {
            if (k > cap) fail(ErrorKind::PrecisionExhausted, "log series did not reach the budget");
            sum += term * Padic::from_rational(p, Rational((k % 2 == 1) ? 1 : -1, k), rel);
            if (Rational(k + 1) * vw - floor_log(p, k + 1) > target) break;
            term = term * w;
        }
    } else {
        sum = CyclotomicScalar::zero(p, n, floor_rational(w.absprec()));
    }
    mpz_class D = ppow(p, m) * (p - 1) * d;
    return sum * Padic::from_rational(p, Rational(mpz_class(1), D), rel);
}

} // namespace robba
