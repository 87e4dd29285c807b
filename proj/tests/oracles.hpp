#pragma once

#include <gmpxx.h>

#include <vector>

namespace oracle {

using Q = mpq_class;
using Poly = std::vector<Q>;

inline Q binom(long n, long k)
{
    if (k < 0 || k > n) return 0;
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Q(b);
}

inline Poly mul(const Poly& a, const Poly& b)
{
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, Q(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

inline Poly add(Poly a, const Poly& b)
{
    if (a.size() < b.size()) a.resize(b.size(), Q(0));
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

/// (1+T)^j expanded.
inline Poly one_plus_T_pow(long j)
{
    Poly c(static_cast<std::size_t>(j + 1));
    for (long i = 0; i <= j; ++i) c[static_cast<std::size_t>(i)] = binom(j, i);
    return c;
}

/// Average of f(zeta(1+T)-1) over zeta^p = 1, for a polynomial f.
/// Expanding (zeta(1+T)-1)^k binomially, the average of zeta^j is 1 when p | j and 0 otherwise.
inline Poly conjugate_average(const Poly& f, int p)
{
    Poly out;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k] == 0) continue;
        for (long j = 0; j <= static_cast<long>(k); j += p) {
            Q s = f[k] * binom(static_cast<long>(k), j) * (((static_cast<long>(k) - j) % 2) ? -1 : 1);
            Poly term = one_plus_T_pow(j);
            for (auto& x : term) x *= s;
            out = add(out, term);
        }
    }
    return out;
}

/// f((1+T)^p - 1) for a polynomial f.
inline Poly phi(const Poly& f, int p)
{
    Poly g = one_plus_T_pow(p);
    g[0] = 0;
    Poly out, pw{Q(1)};
    for (std::size_t k = 0; k < f.size(); ++k) {
        Poly term = pw;
        for (auto& x : term) x *= f[k];
        out = add(out, term);
        pw = mul(pw, g);
    }
    return out;
}

/// p-adic valuation of a nonzero rational.
inline long vp(const Q& q, int p)
{
    long v = 0;
    mpz_class n = q.get_num(), d = q.get_den();
    while (n % p == 0) { n /= p; ++v; }
    while (d % p == 0) { d /= p; --v; }
    return v;
}

/// Determinant over Q by elimination.
inline Q det(std::vector<std::vector<Q>> a)
{
    const std::size_t n = a.size();
    Q d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t r = c;
        while (r < n && a[r][c] == 0) ++r;
        if (r == n) return 0;
        if (r != c) {
            std::swap(a[r], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            const Q f = a[i][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    return d;
}

/// Rank over Q by elimination.
inline long rank(std::vector<std::vector<Q>> a)
{
    if (a.empty()) return 0;
    const std::size_t rows = a.size(), cols = a.front().size();
    long rk = 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (a[i][c] == 0) continue;
            const Q f = a[i][c] / a[r][c];
            for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        ++r;
        ++rk;
    }
    return rk;
}

/// C(n, k) / n - (-1)^{k-1} / k: the T^k-coefficient of ((1+T)^n - 1)/n - log(1+T).
inline Q binomial_minus_log(const mpz_class& n, long k)
{
    mpz_class b;
    mpz_bin_ui(b.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned long>(k));
    Q d = Q(b) / Q(n) - Q(k % 2 ? 1 : -1, k);
    d.canonicalize();
    return d;
}

} // namespace oracle
