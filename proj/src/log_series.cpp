#include "robba/log_series.hpp"

#include <algorithm>
#include <sstream>

namespace robba {

namespace {

std::size_t idx(long k) { return static_cast<std::size_t>(k); }

int relprec_of(const AnnulusSeries& f)
{
    int rel = 1;
    for (const auto& a : f.coeffs()) rel = std::max(rel, a.relprec());
    return rel;
}

AnnulusSeries scaled(const AnnulusSeries& f, long n)
{
    if (n == 1) return f;
    return f * Padic::from_integer(f.prime(), n, std::max(1, relprec_of(f) + 8));
}

} // namespace

bool is_zero_at_precision(const AnnulusSeries& f)
{
    if (f.empty()) return f.is_exact();
    return std::all_of(f.coeffs().begin(), f.coeffs().end(), [](const Padic& a) { return a.is_zero(); });
}

LogSeries::LogSeries(int p, const Rational& r, long width_cap) : p_(p), r_(r), cap_(width_cap) {}

LogSeries::LogSeries(const AnnulusSeries& a) : p_(a.prime()), r_(a.annulus()), cap_(a.width_cap()), c_{a} { normalize(); }

LogSeries::LogSeries(std::vector<AnnulusSeries> coeffs)
{
    require(!coeffs.empty(), ErrorKind::InvalidInput, "log series needs a coefficient");
    p_ = coeffs.front().prime();
    r_ = coeffs.front().annulus();
    cap_ = coeffs.front().width_cap();
    for (const auto& a : coeffs) {
        require(a.prime() == p_, ErrorKind::InvalidInput, "log series coefficients over different primes");
        r_ = std::max(r_, a.annulus());
        cap_ = std::max(cap_, a.width_cap());
    }
    for (auto& a : coeffs) a = a.with_annulus(r_);
    c_ = std::move(coeffs);
    normalize();
}

void LogSeries::normalize()
{
    while (!c_.empty() && is_zero_at_precision(c_.back())) c_.pop_back();
}

LogSeries LogSeries::ell(int p, const Rational& r, int relprec, long width_cap)
{
    LogSeries s(p, r, width_cap);
    s.c_ = {AnnulusSeries::zero(p, r, width_cap), AnnulusSeries::constant(Padic::one(p, relprec), r, width_cap)};
    return s;
}

AnnulusSeries LogSeries::coeff(long j) const
{
    if (j < 0 || j > degree()) return AnnulusSeries::zero(p_, r_, cap_);
    return c_[idx(j)];
}

LogSeries LogSeries::operator-() const
{
    LogSeries s = *this;
    for (auto& a : s.c_) a = -a;
    return s;
}

LogSeries LogSeries::operator+(const LogSeries& g) const
{
    require(p_ == g.p_, ErrorKind::InvalidInput, "log series over different primes");
    LogSeries s(p_, std::max(r_, g.r_), std::max(cap_, g.cap_));
    const long d = std::max(degree(), g.degree());
    for (long j = 0; j <= d; ++j) s.c_.push_back(coeff(j).with_annulus(s.r_) + g.coeff(j).with_annulus(s.r_));
    s.normalize();
    return s;
}

LogSeries LogSeries::operator-(const LogSeries& g) const { return *this + (-g); }

LogSeries LogSeries::operator*(const LogSeries& g) const
{
    require(p_ == g.p_, ErrorKind::InvalidInput, "log series over different primes");
    LogSeries s(p_, std::max(r_, g.r_), std::max(cap_, g.cap_));
    if (is_zero() || g.is_zero()) return s;
    const long d = degree() + g.degree();
    s.c_.assign(idx(d + 1), AnnulusSeries::zero(p_, s.r_, s.cap_));
    for (long i = 0; i <= degree(); ++i)
        for (long j = 0; j <= g.degree(); ++j) s.c_[idx(i + j)] += c_[idx(i)] * g.c_[idx(j)];
    s.normalize();
    return s;
}

LogSeries LogSeries::operator*(const AnnulusSeries& a) const
{
    LogSeries s(p_, std::max(r_, a.annulus()), std::max(cap_, a.width_cap()));
    for (const auto& c : c_) s.c_.push_back(c * a);
    s.normalize();
    return s;
}

LogSeries LogSeries::operator*(const Padic& a) const
{
    LogSeries s = *this;
    for (auto& c : s.c_) c = c * a;
    s.normalize();
    return s;
}

LogSeries LogSeries::with_annulus(const Rational& r) const
{
    LogSeries s = *this;
    s.r_ = r;
    for (auto& c : s.c_) c = c.with_annulus(r);
    return s;
}

std::string LogSeries::to_string(int max_terms) const
{
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (long j = 0; j <= degree(); ++j) {
        if (is_zero_at_precision(c_[idx(j)])) continue;
        if (!first) os << " + ";
        first = false;
        os << "(" << c_[idx(j)].to_string(max_terms) << ")";
        if (j == 1) os << "*l";
        if (j > 1) os << "*l^" << j;
    }
    if (first) os << "0";
    return os.str();
}

long residual_valuation(const LogSeries& f, const LogSeries& g)
{
    long best = Padic::kInfinitePrecision;
    const long d = std::max(f.degree(), g.degree());
    for (long j = 0; j <= d; ++j) best = std::min(best, residual_valuation(f.coeff(j), g.coeff(j)));
    return best;
}

Rational gauss_residual(const LogSeries& f, const LogSeries& g, const Rational& s)
{
    Rational best = infinite_valuation();
    const long d = std::max(f.degree(), g.degree());
    for (long j = 0; j <= d; ++j) best = std::min(best, gauss_residual(f.coeff(j), g.coeff(j), s));
    return best;
}

AnnulusSeries dlog_T(int p, const Rational& r, int relprec, long width_cap)
{
    return AnnulusSeries::from_coeffs(p, r, -1, {Padic::one(p, relprec), Padic::one(p, relprec)}, width_cap);
}

LogSeries log_partial(const LogSeries& f)
{
    if (f.is_zero()) return f;
    const int p = f.prime();
    LogSeries out(p, f.annulus(), f.width_cap());
    std::vector<AnnulusSeries> c;
    for (long j = 0; j <= f.degree(); ++j) {
        AnnulusSeries a = partial(f.coeff(j));
        if (j + 1 <= f.degree()) {
            const AnnulusSeries& b = f.coeffs()[idx(j + 1)];
            a += scaled(b, j + 1) * dlog_T(p, f.annulus(), relprec_of(b), f.width_cap());
        }
        c.push_back(a);
    }
    return LogSeries(std::move(c));
}

LogSeries log_nabla(const LogSeries& f, const PrecisionBudget& budget)
{
    if (f.is_zero()) return f;
    const AnnulusSeries t = special_t(f.prime(), budget, f.annulus());
    return log_partial(f) * t;
}

LogSeries monodromy_N(const LogSeries& f)
{
    if (f.degree() <= 0) return LogSeries(f.prime(), f.annulus(), f.width_cap());
    std::vector<AnnulusSeries> c;
    for (long j = 1; j <= f.degree(); ++j) c.push_back(-scaled(f.coeffs()[idx(j)], j));
    return LogSeries(std::move(c));
}

namespace {

// Lower bound for min over k > K of v(L_k) - k/s where v(L_k) >= m - floor(log_p m), m = ceil(k/(p-1)).
Rational phi_correction_tail(int p, const Rational& s, long K)
{
    auto value = [&](const mpz_class& m) {
        long e = 0;
        mpz_class x = p;
        while (x <= m) {
            x *= p;
            ++e;
        }
        return Rational(Rational(m) - e - Rational(m * (p - 1)) / s);
    };
    const long mK = (K + 1 + p - 2) / (p - 1);
    Rational best = value(mpz_class(mK));
    mpz_class pe = 1;
    const Rational gain = 1 - Rational(p - 1) / s;
    for (long e = 0; e < 200; ++e, pe *= p) {
        if (pe <= mK) continue;
        best = std::min(best, value(pe));
        if (Rational(pe) * gain - e > best + 2) break;
    }
    return best;
}

} // namespace

AnnulusSeries log_phi_correction(int p, const Rational& r, const PrecisionBudget& budget)
{
    const Rational s = r * p;
    require(s > p - 1, ErrorKind::InvalidInput, "log(phi(T)/T^p) needs a larger annulus index");
    const int rel = budget.working();
    long K = budget.window();
    while (phi_correction_tail(p, s, K) < rel) {
        K += 8;
        if (K > 64L * budget.window()) fail(ErrorKind::LogDivergent, "log(phi(T)/T^p) needs too many terms");
    }
    // w(X) = sum_{j=1}^{p-1} C(p,j) X^j with X = 1/T; L' = w'/(1+w)
    std::vector<Rational> w(idx(p));
    {
        mpz_class b = 1;
        for (int j = 1; j < p; ++j) {
            b *= (p - j + 1);
            mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(j));
            w[idx(j)] = Rational(b);
        }
    }
    std::vector<Rational> L(idx(K + 1), Rational(0));
    for (long k = 1; k <= K; ++k) {
        Rational acc = (k < p) ? w[idx(k)] * k : Rational(0);
        for (long j = 1; j < p && j < k; ++j) acc -= w[idx(j)] * (k - j) * L[idx(k - j)];
        L[idx(k)] = acc / k;
    }
    std::vector<Padic> c;
    c.reserve(idx(K));
    for (long k = K; k >= 1; --k) c.push_back(Padic::from_rational(p, L[idx(k)], rel));
    return AnnulusSeries::from_coeffs(p, s, -K, std::move(c), std::max<long>(budget.window(), K), false, true,
                                      phi_correction_tail(p, s, K));
}

AnnulusSeries log_gamma_correction(const Padic& c, const Rational& r, const PrecisionBudget& budget)
{
    const int p = c.prime();
    require(!c.is_zero() && c.valuation() == 0, ErrorKind::InvalidInput, "gamma needs c in Z_p^*");
    long D = budget.window();
    while (log_tail_bound(p, r, D) < budget.working()) {
        D += 8;
        if (D > 64L * budget.window()) fail(ErrorKind::LogDivergent, "log(gamma(T)/T) needs too many terms");
    }
    const std::vector<Padic> bin = padic_binomials(c, D + 1);
    const Padic ci = c.inverse();
    std::vector<Padic> w(idx(D + 1), Padic::zero(p));
    for (long k = 1; k <= D; ++k) w[idx(k)] = bin[idx(k + 1)] * ci;
    std::vector<Padic> L(idx(D + 1), Padic::zero(p));
    L[0] = iwasawa_log(c);
    for (long k = 1; k <= D; ++k) {
        Padic acc = mul_int(w[idx(k)], mpz_class(k));
        for (long j = 1; j < k; ++j) {
            if (w[idx(j)].is_exact_zero() || L[idx(k - j)].is_exact_zero()) continue;
            acc -= mul_int(w[idx(j)] * L[idx(k - j)], mpz_class(k - j));
        }
        L[idx(k)] = acc / Padic::from_integer(p, k, c.relprec() + 8);
    }
    return AnnulusSeries::from_coeffs(p, r, 0, std::move(L), std::max<long>(budget.window(), D), true, false,
                                      log_tail_bound(p, r, D));
}

LogSeries log_frobenius(const LogSeries& f, const PrecisionBudget& budget)
{
    const int p = f.prime();
    const Rational s = f.annulus() * p;
    LogSeries out(p, s, f.width_cap());
    if (f.is_zero()) return out;
    int rel = 1;
    for (const auto& a : f.coeffs()) rel = std::max(rel, relprec_of(a));
    LogSeries L = LogSeries::ell(p, s, rel, f.width_cap()) * Padic::from_integer(p, p, rel) +
                  LogSeries(log_phi_correction(p, f.annulus(), budget));
    LogSeries pw(AnnulusSeries::constant(Padic::one(p, rel), s, f.width_cap()));
    for (long j = 0; j <= f.degree(); ++j) {
        out += pw * frobenius(f.coeffs()[idx(j)]);
        if (j < f.degree()) pw = pw * L;
    }
    return out;
}

LogSeries log_gamma(const LogSeries& f, const Padic& c, const PrecisionBudget& budget)
{
    const int p = f.prime();
    const Rational& r = f.annulus();
    LogSeries out(p, r, f.width_cap());
    if (f.is_zero()) return out;
    int rel = 1;
    for (const auto& a : f.coeffs()) rel = std::max(rel, relprec_of(a));
    LogSeries L = LogSeries::ell(p, r, rel, f.width_cap());
    if (f.degree() > 0) L += LogSeries(log_gamma_correction(c, r, budget));
    LogSeries pw(AnnulusSeries::constant(Padic::one(p, rel), r, f.width_cap()));
    for (long j = 0; j <= f.degree(); ++j) {
        out += pw * gamma_action(f.coeffs()[idx(j)], c);
        if (j < f.degree()) pw = pw * L;
    }
    return out;
}

namespace {

struct Step {
    AnnulusSeries primitive;
    Padic residue;
};

// H and a with d(H) + a (1+T)/T = h.
Step antiderivative0(const AnnulusSeries& h)
{
    const int p = h.prime();
    const Rational& r = h.annulus();
    if (is_zero_at_precision(h)) return {AnnulusSeries::zero(p, r, h.width_cap()), Padic::zero(p)};
    const AnnulusSeries u = AnnulusSeries::from_coeffs(p, r, 0, {Padic::one(p, relprec_of(h)), Padic::one(p, relprec_of(h))},
                                                       h.width_cap());
    const AnnulusSeries g = h * u.inverse();
    if (g.empty()) fail(ErrorKind::WindowOverflow, "window too short for the antiderivative");
    Padic residue = Padic::zero(p);
    if (g.kmin() <= -1 && g.kmax() >= -1) residue = g.coeff(-1);
    else if (!g.known(-1)) fail(ErrorKind::WindowOverflow, "coefficient of 1/T is not in the window");
    std::vector<Padic> c;
    c.reserve(g.coeffs().size());
    for (long k = g.kmin(); k <= g.kmax(); ++k) {
        if (k == -1) {
            c.push_back(Padic::zero(p));
            continue;
        }
        const Padic& b = g.coeffs()[idx(k - g.kmin())];
        c.push_back(b.is_exact_zero() ? b : b / Padic::from_integer(p, k + 1, b.relprec() + 8));
    }
    return {AnnulusSeries::from_coeffs(p, r, g.kmin() + 1, std::move(c), g.width_cap(), g.lower_exact(), g.upper_exact(),
                                       std::nullopt),
            residue};
}

} // namespace

Antiderivative antiderivative(const LogSeries& f)
{
    const int p = f.prime();
    const Rational& r = f.annulus();
    if (f.is_zero()) return {f, Padic::zero(p)};
    const long d = f.degree();
    std::vector<AnnulusSeries> g(idx(d + 2), AnnulusSeries::zero(p, r, f.width_cap()));
    Padic top_residue = Padic::zero(p);
    for (long j = d; j >= 0; --j) {
        AnnulusSeries h = f.coeffs()[idx(j)];
        const AnnulusSeries& above = g[idx(j + 1)];
        if (!is_zero_at_precision(above))
            h -= scaled(above, j + 1) * dlog_T(p, r, std::max(relprec_of(h), relprec_of(above)), f.width_cap());
        Step s = antiderivative0(h);
        g[idx(j)] = s.primitive;
        if (!s.residue.is_zero()) {
            const Padic shift = s.residue / Padic::from_integer(p, j + 1, s.residue.relprec() + 8);
            g[idx(j + 1)] += AnnulusSeries::constant(shift, r, f.width_cap());
        }
        if (j == 0) top_residue = s.residue;
    }
    // the l^1 part carries the residue of the degree-0 step
    g[1] -= AnnulusSeries::constant(top_residue, r, f.width_cap());
    return {LogSeries(std::move(g)), top_residue};
}

} // namespace robba
