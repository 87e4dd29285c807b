#include "robba/padic.hpp"

#include <algorithm>
#include <map>

namespace robba {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::DivisionByZeroAtPrecision: return "DivisionByZeroAtPrecision";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::WindowOverflow: return "WindowOverflow";
    case ErrorKind::LogDivergent: return "LogDivergent";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::SingularAtPrecision: return "SingularAtPrecision";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ZeroInput: return "ZeroInput";
    case ErrorKind::NotComposable: return "NotComposable";
    case ErrorKind::NotDivisible: return "NotDivisible";
    case ErrorKind::NotEtale: return "NotEtale";
    case ErrorKind::PositiveWeights: return "PositiveWeights";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::ValidationFailure: return "ValidationFailure";
    case ErrorKind::MismatchedTwist: return "MismatchedTwist";
    case ErrorKind::StabilityFailure: return "StabilityFailure";
    }
    return "Unknown";
}

int Error::exit_code() const noexcept
{
    switch (kind_) {
    case ErrorKind::DivisionByZeroAtPrecision:
    case ErrorKind::PrecisionExhausted:
    case ErrorKind::WindowOverflow:
    case ErrorKind::LogDivergent:
    case ErrorKind::IllConditioned:
    case ErrorKind::SingularAtPrecision:
        return 1;
    case ErrorKind::ValidationFailure:
    case ErrorKind::MismatchedTwist:
    case ErrorKind::StabilityFailure:
        return 3;
    default:
        return 2;
    }
}

// ---------------------------------------------------------------------------
// rationals

Rational parse_rational(const std::string& s)
{
    Rational q;
    if (s.empty() || q.set_str(s, 10) != 0) fail(ErrorKind::InvalidInput, "not a rational: '" + s + "'");
    if (q.get_den() == 0) fail(ErrorKind::InvalidInput, "zero denominator: '" + s + "'");
    q.canonicalize();
    return q;
}

std::string rational_to_string(const Rational& q) { return q.get_str(10); }

long floor_rational(const Rational& q)
{
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return f.get_si();
}

long ceil_rational(const Rational& q)
{
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return c.get_si();
}

void PrecisionBudget::validate() const
{
    require(digits > slack && slack >= 0, ErrorKind::InvalidInput, "budget requires N > slack >= 0");
    require(half_window > 0, ErrorKind::InvalidInput, "window half-width must be positive");
    require(t_order > 0, ErrorKind::InvalidInput, "t-order must be positive");
}

bool is_prime(long p)
{
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

const mpz_class& ppow(int p, long k)
{
    thread_local std::map<int, std::vector<mpz_class>> cache;
    auto& table = cache[p];
    if (table.empty()) table.emplace_back(1);
    while (static_cast<long>(table.size()) <= k) table.push_back(table.back() * p);
    return table[static_cast<std::size_t>(k)];
}

long valuation_of(int p, const mpz_class& n)
{
    if (n == 0) fail(ErrorKind::ZeroInput, "valuation of zero");
    mpz_class rest;
    mpz_class pp(p);
    return static_cast<long>(mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), pp.get_mpz_t()));
}

long valuation_of(int p, const Rational& q)
{
    if (q == 0) fail(ErrorKind::ZeroInput, "valuation of zero");
    return valuation_of(p, mpz_class(q.get_num())) - valuation_of(p, mpz_class(q.get_den()));
}

// ---------------------------------------------------------------------------
// Padic

namespace {

long sat_add(long a, long b)
{
    if (a >= Padic::kInfinitePrecision || b >= Padic::kInfinitePrecision) return Padic::kInfinitePrecision;
    return std::min(a + b, Padic::kInfinitePrecision);
}

mpz_class mod_positive(const mpz_class& a, const mpz_class& m)
{
    mpz_class r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

// Rational reconstruction with |a|, |b| <= bound.
bool reconstruct(const mpz_class& u, const mpz_class& m, const mpz_class& bound, mpz_class& a, mpz_class& b)
{
    mpz_class r0 = m, r1 = u, s0 = 0, s1 = 1;
    while (abs(r1) > bound) {
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), r0.get_mpz_t(), r1.get_mpz_t());
        mpz_class r2 = r0 - q * r1;
        mpz_class s2 = s0 - q * s1;
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    if (s1 == 0 || abs(s1) > bound) return false;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), s1.get_mpz_t(), m.get_mpz_t());
    if (g != 1) return false;
    a = r1;
    b = s1;
    if (b < 0) {
        a = -a;
        b = -b;
    }
    return true;
}

} // namespace

Padic Padic::zero(int p, long absprec)
{
    return Padic(p, true, std::min(absprec, kInfinitePrecision), 0, mpz_class(0));
}

Padic Padic::one(int p, int relprec) { return from_parts(p, 0, 1, relprec); }

Padic Padic::from_parts(int p, long val, const mpz_class& unit, int relprec)
{
    require(relprec > 0, ErrorKind::PrecisionExhausted, "nonpositive relative precision");
    if (unit == 0) return zero(p, val + relprec);
    mpz_class u = unit;
    long w = 0;
    if (mpz_divisible_ui_p(u.get_mpz_t(), static_cast<unsigned long>(p))) {
        mpz_class pp(p);
        w = static_cast<long>(mpz_remove(u.get_mpz_t(), u.get_mpz_t(), pp.get_mpz_t()));
    }
    return Padic(p, false, val + w, relprec, mod_positive(u, ppow(p, relprec)));
}

Padic Padic::from_integer(int p, const mpz_class& n, int relprec)
{
    if (n == 0) return zero(p);
    return from_parts(p, 0, n, relprec);
}

Padic Padic::from_rational(int p, const Rational& q, int relprec)
{
    if (q == 0) return zero(p);
    mpz_class num = q.get_num(), den = q.get_den();
    mpz_class pp(p);
    long vn = static_cast<long>(mpz_remove(num.get_mpz_t(), num.get_mpz_t(), pp.get_mpz_t()));
    long vd = static_cast<long>(mpz_remove(den.get_mpz_t(), den.get_mpz_t(), pp.get_mpz_t()));
    const mpz_class& m = ppow(p, relprec);
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t());
    return Padic(p, false, vn - vd, relprec, mod_positive(num * inv, m));
}

Padic Padic::operator-() const
{
    if (zero_) return *this;
    const mpz_class& m = ppow(p_, relprec_);
    return Padic(p_, false, val_, relprec_, unit_ == 0 ? mpz_class(0) : mpz_class(m - unit_));
}

Padic Padic::capped(long absprec) const
{
    if (zero_) return zero(p_, std::min(val_, absprec));
    if (val_ >= absprec) return zero(p_, absprec);
    long rel = std::min<long>(relprec_, absprec - val_);
    if (rel == relprec_) return *this;
    return Padic(p_, false, val_, static_cast<int>(rel), mod_positive(unit_, ppow(p_, rel)));
}

Padic Padic::with_relprec(int relprec) const
{
    if (zero_ || relprec >= relprec_) return *this;
    return capped(val_ + relprec);
}

Padic Padic::operator+(const Padic& b) const
{
    if (p_ != b.p_) {
        if (p_ == 0) return b;
        if (b.p_ == 0) return *this;
        fail(ErrorKind::InvalidInput, "mixing primes");
    }
    long abs = std::min(absprec(), b.absprec());
    if (zero_) return b.capped(abs);
    if (b.zero_) return capped(abs);
    long v = std::min(val_, b.val_);
    if (v >= abs) return zero(p_, abs);
    long k = abs - v;
    mpz_class s = 0;
    if (val_ - v < k) s += unit_ * ppow(p_, val_ - v);
    if (b.val_ - v < k) s += b.unit_ * ppow(p_, b.val_ - v);
    s = mod_positive(s, ppow(p_, k));
    if (s == 0) return zero(p_, abs);
    mpz_class pp(p_);
    long w = 0;
    if (mpz_divisible_ui_p(s.get_mpz_t(), static_cast<unsigned long>(p_)))
        w = static_cast<long>(mpz_remove(s.get_mpz_t(), s.get_mpz_t(), pp.get_mpz_t()));
    return Padic(p_, false, v + w, static_cast<int>(k - w), s);
}

Padic Padic::operator-(const Padic& b) const { return *this + (-b); }

Padic Padic::operator*(const Padic& b) const
{
    if (p_ != b.p_) {
        if (p_ == 0 || b.p_ == 0) fail(ErrorKind::InvalidInput, "uninitialized p-adic operand");
        fail(ErrorKind::InvalidInput, "mixing primes");
    }
    if (zero_ || b.zero_) return zero(p_, sat_add(val_, b.val_));
    int rel = std::min(relprec_, b.relprec_);
    return Padic(p_, false, val_ + b.val_, rel, mod_positive(unit_ * b.unit_, ppow(p_, rel)));
}

Padic Padic::inverse() const
{
    if (zero_) fail(ErrorKind::DivisionByZeroAtPrecision, "inverting a value indistinguishable from 0");
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), unit_.get_mpz_t(), ppow(p_, relprec_).get_mpz_t());
    return Padic(p_, false, -val_, relprec_, inv);
}

Padic Padic::operator/(const Padic& b) const { return *this * b.inverse(); }

Padic Padic::pow(long e) const
{
    if (e < 0) return inverse().pow(-e);
    if (e == 0) return one(p_, zero_ ? static_cast<int>(std::min<long>(std::max<long>(val_, 1), 1L << 20)) : relprec_);
    if (zero_) return zero(p_, val_ >= kInfinitePrecision ? kInfinitePrecision : val_ * e);
    mpz_class u;
    mpz_powm_ui(u.get_mpz_t(), unit_.get_mpz_t(), static_cast<unsigned long>(e), ppow(p_, relprec_).get_mpz_t());
    return Padic(p_, false, val_ * e, relprec_, u);
}

Padic Padic::shift(long k) const
{
    if (zero_) return is_exact_zero() ? *this : zero(p_, val_ + k);
    return Padic(p_, false, val_ + k, relprec_, unit_);
}

mpz_class Padic::lift() const
{
    if (zero_) return 0;
    if (val_ < 0) fail(ErrorKind::InvalidInput, "lift of a non-integral p-adic number");
    return unit_ * ppow(p_, val_);
}

Rational Padic::to_rational() const
{
    if (zero_) return 0;
    const mpz_class& m = ppow(p_, relprec_);
    mpz_class a, b;
    if (relprec_ >= 6) {
        mpz_class bound;
        mpz_root(bound.get_mpz_t(), m.get_mpz_t(), 3);
        if (reconstruct(unit_, m, bound, a, b)) {
            Rational q(a, b);
            q.canonicalize();
            if (val_ >= 0) q *= Rational(ppow(p_, val_));
            else q /= Rational(ppow(p_, -val_));
            return q;
        }
    }
    mpz_class bal = unit_;
    if (2 * bal > m) bal -= m;
    Rational q(bal);
    if (val_ >= 0) q *= Rational(ppow(p_, val_));
    else q /= Rational(ppow(p_, -val_));
    return q;
}

std::string Padic::to_string() const
{
    if (zero_) {
        if (is_exact_zero()) return "0";
        return "O(" + std::to_string(p_) + "^" + std::to_string(val_) + ")";
    }
    return rational_to_string(to_rational());
}

// ---------------------------------------------------------------------------

namespace {
long floor_log(int p, long k)
{
    long e = 0;
    for (long x = k; x >= p; x /= p) ++e;
    return e;
}
} // namespace

std::vector<Padic> padic_binomials(const Padic& c, long kmax)
{
    const int p = c.prime();
    require(c.is_integral(), ErrorKind::InvalidInput, "binomial requires c in Z_p");
    const long abs = std::min<long>(c.absprec(), Padic::kInfinitePrecision);
    require(abs < Padic::kInfinitePrecision, ErrorKind::InvalidInput, "binomial of an exact zero needs a precision");
    const mpz_class cn = c.lift();
    std::vector<Padic> out;
    out.reserve(static_cast<std::size_t>(kmax + 1));
    mpz_class b = 1;
    for (long k = 0; k <= kmax; ++k) {
        if (k > 0) {
            b *= (cn - (k - 1));
            mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(k));
        }
        long prec = abs - (k > 0 ? floor_log(p, k) : 0);
        if (prec <= 0) fail(ErrorKind::PrecisionExhausted, "binomial C(c," + std::to_string(k) + ") consumes the budget");
        mpz_class bm = mod_positive(b, ppow(p, prec));
        if (bm == 0)
            out.push_back(Padic::zero(p, prec));
        else
            out.push_back(Padic::from_integer(p, bm, static_cast<int>(prec)).capped(prec));
    }
    return out;
}

Padic padic_binomial(const Padic& c, long k)
{
    require(k >= 0, ErrorKind::InvalidInput, "binomial index must be nonnegative");
    return padic_binomials(c, k).back();
}

Padic teichmuller(int p, long a, int relprec)
{
    require(a % p != 0, ErrorKind::InvalidInput, "Teichmüller lift of 0 mod p");
    const mpz_class& m = ppow(p, relprec);
    mpz_class base = mod_positive(mpz_class(a), m), w;
    mpz_powm(w.get_mpz_t(), base.get_mpz_t(), ppow(p, relprec).get_mpz_t(), m.get_mpz_t());
    return Padic::from_parts(p, 0, w, relprec);
}

Padic iwasawa_log(const Padic& x)
{
    if (x.is_zero()) fail(ErrorKind::ZeroInput, "log of zero");
    const int p = x.prime();
    Padic u = Padic::from_parts(p, 0, x.unit(), x.relprec());
    const long torsion = (p == 2) ? 2 : p - 1;
    Padic z = u.pow(torsion);
    Padic y = z - Padic::one(p, x.relprec());
    const long target = y.absprec();
    Padic sum = Padic::zero(p, target);
    if (!y.is_zero()) {
        Padic term = y;
        const long cap = 8L * x.relprec() + 64;
        for (long k = 1;; ++k) {
            if (k > cap) fail(ErrorKind::LogDivergent, "log series cap reached");
            Padic contrib = term / Padic::from_integer(p, (k % 2 == 1) ? k : -k, x.relprec() + 8);
            sum += contrib;
            if ((k + 1) * y.valuation() - floor_log(p, k + 1) > target) break;
            term *= y;
            if (term.is_zero()) break;
        }
    }
    return sum / Padic::from_integer(p, torsion, x.relprec() + 8);
}

long gamma_generator(int p) { return p == 2 ? 5 : 1 + p; }

} // namespace robba
