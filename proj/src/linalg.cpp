#include "robba/linalg.hpp"

#include <algorithm>

namespace robba {

namespace {

int relprec_of(const CyclotomicScalar& a)
{
    int rel = 0;
    for (const auto& c : a.coeffs()) rel = std::max(rel, c.relprec());
    return rel;
}

int relprec_of(const AnnulusSeries& a)
{
    int rel = 0;
    for (const auto& c : a.coeffs()) rel = std::max(rel, c.relprec());
    return rel;
}

int relprec_of(const TPowerSeries& a)
{
    int rel = 0;
    for (const auto& c : a.coeffs()) rel = std::max(rel, relprec_of(c));
    return rel;
}

} // namespace

CyclotomicScalar one_like(const CyclotomicScalar& a)
{
    return CyclotomicScalar::from_padic(a.level(), Padic::one(a.prime(), std::max(64, relprec_of(a) + 8)));
}

TPowerSeries one_like(const TPowerSeries& a)
{
    const CyclotomicScalar one =
        CyclotomicScalar::from_padic(a.level(), Padic::one(a.prime(), std::max(64, relprec_of(a) + 8)));
    return TPowerSeries::constant(one, a.order());
}

AnnulusSeries one_like(const AnnulusSeries& a)
{
    return AnnulusSeries::constant(Padic::one(a.prime(), std::max(64, relprec_of(a) + 8)), a.annulus(), a.width_cap());
}

Rational valuation_or_precision(const Padic& a)
{
    if (a.is_zero()) return Rational(std::min(a.absprec(), Padic::kInfinitePrecision));
    return Rational(a.valuation());
}

Rational valuation_or_precision(const CyclotomicScalar& a) { return a.valuation(); }

Padic times_p_power(const Padic& a, long k) { return a.shift(k); }

CyclotomicScalar times_p_power(const CyclotomicScalar& a, long k)
{
    std::vector<Padic> c = a.coeffs();
    for (auto& x : c) x = x.shift(k);
    return CyclotomicScalar::from_coeffs(a.prime(), a.level(), std::move(c));
}

namespace {

template <class T>
bool negligible(const T& x, const Rational& tol)
{
    return x.is_zero() || valuation_or_precision(x) >= tol;
}

template <class T>
void normalize_rows(Matrix<T>& A, std::vector<T>* b)
{
    for (long i = 0; i < A.rows(); ++i) {
        Rational m = infinite_valuation();
        for (long j = 0; j < A.cols(); ++j)
            if (!A(i, j).is_zero()) m = std::min(m, valuation_or_precision(A(i, j)));
        if (b && !(*b)[static_cast<std::size_t>(i)].is_zero())
            m = std::min(m, valuation_or_precision((*b)[static_cast<std::size_t>(i)]));
        if (is_infinite(m)) continue;
        const long k = -floor_rational(m);
        if (k <= 0) continue;
        for (long j = 0; j < A.cols(); ++j) A(i, j) = times_p_power(A(i, j), k);
        if (b) (*b)[static_cast<std::size_t>(i)] = times_p_power((*b)[static_cast<std::size_t>(i)], k);
    }
}

struct Elimination {
    long rank = 0;
    std::vector<long> colperm;
    Rational largest_pivot = -infinite_valuation();
    bool ill = false;
};

// Reduced row echelon form in place with full pivoting; pivots are scaled to 1.
template <class T>
Elimination eliminate(Matrix<T>& A, std::vector<T>* b, const LinalgOptions& opt)
{
    const long m = A.rows(), n = A.cols();
    Elimination e;
    e.colperm.resize(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) e.colperm[static_cast<std::size_t>(j)] = j;
    long r = 0;
    while (r < std::min(m, n)) {
        long bi = -1, bj = -1;
        Rational best = infinite_valuation();
        for (long i = r; i < m; ++i)
            for (long j = r; j < n; ++j) {
                if (A(i, j).is_zero()) continue;
                const Rational v = valuation_or_precision(A(i, j));
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (bi < 0 || best >= opt.tol) break;
        if (best > opt.tol - opt.slack) {
            e.ill = true;
            if (opt.strict) fail(ErrorKind::IllConditioned, "pivot valuation " + rational_to_string(best) + " is within the slack of the tolerance");
        }
        e.largest_pivot = std::max(e.largest_pivot, best);
        A.swap_rows(r, bi);
        if (b) std::swap((*b)[static_cast<std::size_t>(r)], (*b)[static_cast<std::size_t>(bi)]);
        A.swap_cols(r, bj);
        std::swap(e.colperm[static_cast<std::size_t>(r)], e.colperm[static_cast<std::size_t>(bj)]);
        const T inv = A(r, r).inverse();
        for (long j = 0; j < n; ++j) A(r, j) = A(r, j) * inv;
        if (b) (*b)[static_cast<std::size_t>(r)] = (*b)[static_cast<std::size_t>(r)] * inv;
        for (long i = 0; i < m; ++i) {
            if (i == r || A(i, r).is_zero()) continue;
            const T f = A(i, r);
            for (long j = 0; j < n; ++j) A(i, j) = A(i, j) - f * A(r, j);
            if (b) (*b)[static_cast<std::size_t>(i)] = (*b)[static_cast<std::size_t>(i)] - f * (*b)[static_cast<std::size_t>(r)];
        }
        ++r;
    }
    e.rank = r;
    return e;
}

template <class T>
Rational apply_residual(const Matrix<T>& A, const std::vector<T>& x, const std::vector<T>* b)
{
    Rational best = infinite_valuation();
    for (long i = 0; i < A.rows(); ++i) {
        T s = zero_like(A(i, 0));
        for (long j = 0; j < A.cols(); ++j) s = s + A(i, j) * x[static_cast<std::size_t>(j)];
        if (b) s = s - (*b)[static_cast<std::size_t>(i)];
        if (s.is_zero() && s.absprec() >= Padic::kInfinitePrecision) continue;
        best = std::min(best, valuation_or_precision(s));
    }
    return best;
}

template <class T>
KernelResult<T> kernel_impl(const Matrix<T>& A0, const LinalgOptions& opt)
{
    KernelResult<T> res;
    res.residual = infinite_valuation();
    if (A0.cols() == 0) return res;
    Matrix<T> A = A0;
    normalize_rows<T>(A, nullptr);
    const Elimination e = eliminate<T>(A, nullptr, opt);
    res.rank = e.rank;
    res.smallest_pivot = e.largest_pivot;
    res.ill_conditioned = e.ill;
    const long n = A.cols();
    for (long k = 0; k < e.rank; ++k) res.pivot_cols.push_back(e.colperm[static_cast<std::size_t>(k)]);
    const T zero = zero_like(A0(0, 0));
    const T one = one_like(A0(0, 0));
    for (long f = e.rank; f < n; ++f) {
        std::vector<T> x(static_cast<std::size_t>(n), zero);
        x[static_cast<std::size_t>(e.colperm[static_cast<std::size_t>(f)])] = one;
        for (long k = 0; k < e.rank; ++k) x[static_cast<std::size_t>(e.colperm[static_cast<std::size_t>(k)])] = -A(k, f);
        res.residual = std::min(res.residual, apply_residual<T>(A0, x, nullptr));
        res.basis.push_back(std::move(x));
    }
    return res;
}

template <class T>
SolveResult<T> solve_impl(const Matrix<T>& A0, const std::vector<T>& b0, const LinalgOptions& opt)
{
    require(static_cast<long>(b0.size()) == A0.rows(), ErrorKind::InvalidInput, "right-hand side has the wrong length");
    Matrix<T> A = A0;
    std::vector<T> b = b0;
    normalize_rows<T>(A, &b);
    const Elimination e = eliminate<T>(A, &b, opt);
    const long n = A.cols();
    if (e.rank < n) fail(ErrorKind::SingularAtPrecision, "matrix is singular at precision");
    for (long i = e.rank; i < A.rows(); ++i)
        if (!negligible(b[static_cast<std::size_t>(i)], opt.tol))
            fail(ErrorKind::SingularAtPrecision, "system is inconsistent at precision");
    SolveResult<T> res;
    res.x.assign(static_cast<std::size_t>(n), zero_like(A0(0, 0)));
    for (long k = 0; k < n; ++k) res.x[static_cast<std::size_t>(e.colperm[static_cast<std::size_t>(k)])] = b[static_cast<std::size_t>(k)];
    res.residual = apply_residual<T>(A0, res.x, &b0);
    return res;
}

} // namespace

KernelResult<Padic> kernel(const Matrix<Padic>& A, const LinalgOptions& opt) { return kernel_impl(A, opt); }
KernelResult<CyclotomicScalar> kernel(const Matrix<CyclotomicScalar>& A, const LinalgOptions& opt) { return kernel_impl(A, opt); }

SolveResult<Padic> solve(const Matrix<Padic>& A, const std::vector<Padic>& b, const LinalgOptions& opt)
{
    return solve_impl(A, b, opt);
}

SolveResult<CyclotomicScalar> solve(const Matrix<CyclotomicScalar>& A, const std::vector<CyclotomicScalar>& b,
                                    const LinalgOptions& opt)
{
    return solve_impl(A, b, opt);
}

namespace {

long tval(const TPowerSeries& x) { return x.valuation(); }
bool tzero(const TPowerSeries& x) { return x.is_zero(); }
long tval(const Padic& x) { return x.valuation(); }
bool tzero(const Padic& x) { return x.is_zero(); }

Padic quotient(const Padic& a, const Padic& b) { return a / b; }
TPowerSeries quotient(const TPowerSeries& a, const TPowerSeries& b) { return divide(a, b); }

// The unit part of a pivot and its exponent: x = base^e * u.
Padic unit_part(const Padic& x) { return Padic::from_parts(x.prime(), 0, x.unit(), x.relprec()); }
TPowerSeries unit_part(const TPowerSeries& x) { return x.shift(-x.valuation()); }

template <class T>
SnfResult<T> snf_impl(const Matrix<T>& A)
{
    const long m = A.rows(), n = A.cols();
    require(m > 0 && n > 0, ErrorKind::InvalidInput, "empty matrix");
    const T zero = zero_like(A(0, 0));
    const T one = one_like(A(0, 0));
    SnfResult<T> res{Matrix<T>::identity(m, zero, one), A, Matrix<T>::identity(n, zero, one), {}};
    Matrix<T>& U = res.U;
    Matrix<T>& D = res.D;
    Matrix<T>& V = res.V;
    for (long k = 0; k < std::min(m, n); ++k) {
        long bi = -1, bj = -1, best = 0;
        for (long i = k; i < m; ++i)
            for (long j = k; j < n; ++j) {
                if (tzero(D(i, j))) continue;
                const long v = tval(D(i, j));
                if (bi < 0 || v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (bi < 0) {
            for (long r = k; r < std::min(m, n); ++r) res.exponents.push_back(std::nullopt);
            break;
        }
        D.swap_rows(k, bi);
        U.swap_rows(k, bi);
        D.swap_cols(k, bj);
        V.swap_cols(k, bj);
        const T piv = D(k, k);
        for (long i = k + 1; i < m; ++i) {
            if (tzero(D(i, k))) continue;
            const T f = quotient(D(i, k), piv);
            for (long j = 0; j < n; ++j) D(i, j) = D(i, j) - f * D(k, j);
            for (long j = 0; j < m; ++j) U(i, j) = U(i, j) - f * U(k, j);
        }
        for (long j = k + 1; j < n; ++j) {
            if (tzero(D(k, j))) continue;
            const T f = quotient(D(k, j), piv);
            for (long i = 0; i < m; ++i) D(i, j) = D(i, j) - f * D(i, k);
            for (long i = 0; i < n; ++i) V(i, j) = V(i, j) - f * V(i, k);
        }
        const T ui = unit_part(piv).inverse();
        for (long j = 0; j < n; ++j) D(k, j) = D(k, j) * ui;
        for (long j = 0; j < m; ++j) U(k, j) = U(k, j) * ui;
        res.exponents.push_back(best);
    }
    return res;
}

} // namespace

SnfResult<Padic> snf_local(const Matrix<Padic>& A) { return snf_impl(A); }
SnfResult<TPowerSeries> snf_local(const Matrix<TPowerSeries>& A) { return snf_impl(A); }

Rational matrix_residual(const Matrix<Padic>& A, const Matrix<Padic>& B)
{
    Rational best = infinite_valuation();
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) {
            const Padic d = A(i, j) - B(i, j);
            if (d.is_exact_zero()) continue;
            best = std::min(best, valuation_or_precision(d));
        }
    return best;
}

Rational matrix_residual(const Matrix<CyclotomicScalar>& A, const Matrix<CyclotomicScalar>& B)
{
    Rational best = infinite_valuation();
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) best = std::min(best, valuation_or_precision(A(i, j) - B(i, j)));
    return best;
}

long matrix_residual(const Matrix<TPowerSeries>& A, const Matrix<TPowerSeries>& B)
{
    long best = Padic::kInfinitePrecision;
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) best = std::min(best, (A(i, j) - B(i, j)).valuation());
    return best;
}

} // namespace robba
