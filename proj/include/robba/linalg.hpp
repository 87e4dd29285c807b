#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robba/cyclotomic.hpp"
#include "robba/localization.hpp"
#include "robba/padic.hpp"
#include "robba/series.hpp"

namespace robba {

// Ring helpers used by the generic algorithms.
inline Padic zero_like(const Padic& a) { return Padic::zero(a.prime()); }
inline Padic one_like(const Padic& a) { return Padic::one(a.prime(), std::max(1, a.is_zero() ? 64 : a.relprec() + 8)); }
inline CyclotomicScalar zero_like(const CyclotomicScalar& a) { return CyclotomicScalar::zero(a.prime(), a.level()); }
CyclotomicScalar one_like(const CyclotomicScalar& a);
inline TPowerSeries zero_like(const TPowerSeries& a) { return TPowerSeries::zero(a.prime(), a.level(), a.order()); }
TPowerSeries one_like(const TPowerSeries& a);
inline AnnulusSeries zero_like(const AnnulusSeries& a) { return AnnulusSeries::zero(a.prime(), a.annulus(), a.width_cap()); }
AnnulusSeries one_like(const AnnulusSeries& a);

/// Dense row-major matrix over a commutative ring.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(long rows, long cols, const T& zero)
        : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), zero), zero_(zero)
    {
    }
    static Matrix identity(long n, const T& zero, const T& one)
    {
        Matrix m(n, n, zero);
        for (long i = 0; i < n; ++i) m(i, i) = one;
        return m;
    }
    static Matrix from_rows(const std::vector<std::vector<T>>& rows, const T& zero)
    {
        const long r = static_cast<long>(rows.size());
        const long c = r == 0 ? 0 : static_cast<long>(rows.front().size());
        Matrix m(r, c, zero);
        for (long i = 0; i < r; ++i) {
            require(static_cast<long>(rows[static_cast<std::size_t>(i)].size()) == c, ErrorKind::InvalidInput, "ragged matrix");
            for (long j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        return m;
    }

    long rows() const { return rows_; }
    long cols() const { return cols_; }
    const T& zero() const { return zero_; }
    T& operator()(long i, long j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
    const T& operator()(long i, long j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

    Matrix operator+(const Matrix& b) const
    {
        require(rows_ == b.rows_ && cols_ == b.cols_, ErrorKind::InvalidInput, "matrix shapes differ");
        Matrix m = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] + b.a_[i];
        return m;
    }
    Matrix operator-(const Matrix& b) const
    {
        require(rows_ == b.rows_ && cols_ == b.cols_, ErrorKind::InvalidInput, "matrix shapes differ");
        Matrix m = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] - b.a_[i];
        return m;
    }
    Matrix operator*(const Matrix& b) const
    {
        require(cols_ == b.rows_, ErrorKind::InvalidInput, "matrix shapes do not compose");
        Matrix m(rows_, b.cols_, zero_);
        for (long i = 0; i < rows_; ++i)
            for (long j = 0; j < b.cols_; ++j) {
                T s = zero_;
                for (long k = 0; k < cols_; ++k) s = s + (*this)(i, k) * b(k, j);
                m(i, j) = s;
            }
        return m;
    }
    template <class S>
    Matrix scaled(const S& s) const
    {
        Matrix m = *this;
        for (auto& x : m.a_) x = x * s;
        return m;
    }
    Matrix transpose() const
    {
        Matrix m(cols_, rows_, zero_);
        for (long i = 0; i < rows_; ++i)
            for (long j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }
    Matrix map(const std::function<T(const T&)>& f) const
    {
        Matrix m = *this;
        for (auto& x : m.a_) x = f(x);
        return m;
    }
    void swap_rows(long i, long j)
    {
        for (long k = 0; k < cols_; ++k) std::swap((*this)(i, k), (*this)(j, k));
    }
    void swap_cols(long i, long j)
    {
        for (long k = 0; k < rows_; ++k) std::swap((*this)(k, i), (*this)(k, j));
    }

private:
    long rows_ = 0;
    long cols_ = 0;
    std::vector<T> a_;
    T zero_;
};

/// Coefficients of det(x I - A), leading coefficient first (division-free Berkowitz).
template <class T>
std::vector<T> char_poly(const Matrix<T>& A)
{
    require(A.rows() == A.cols(), ErrorKind::InvalidInput, "characteristic polynomial needs a square matrix");
    const long n = A.rows();
    const T zero = A.zero();
    if (n == 0) return {one_like(zero)};
    const T one = one_like(A(0, 0));
    std::vector<T> C{one, -A(0, 0)};
    for (long r = 1; r < n; ++r) {
        // A_{r+1} = [[A_r, col], [row, a]]
        std::vector<T> t(static_cast<std::size_t>(r + 2), zero);
        t[0] = one;
        t[1] = -A(r, r);
        std::vector<T> v(static_cast<std::size_t>(r), zero);
        for (long i = 0; i < r; ++i) v[static_cast<std::size_t>(i)] = A(i, r);
        for (long k = 0; k < r; ++k) {
            T s = zero;
            for (long i = 0; i < r; ++i) s = s + A(r, i) * v[static_cast<std::size_t>(i)];
            t[static_cast<std::size_t>(k + 2)] = -s;
            std::vector<T> w(static_cast<std::size_t>(r), zero);
            for (long i = 0; i < r; ++i) {
                T x = zero;
                for (long j = 0; j < r; ++j) x = x + A(i, j) * v[static_cast<std::size_t>(j)];
                w[static_cast<std::size_t>(i)] = x;
            }
            v = std::move(w);
        }
        std::vector<T> D(static_cast<std::size_t>(r + 2), zero);
        for (long i = 0; i < r + 2; ++i)
            for (long j = 0; j <= std::min(i, r); ++j)
                D[static_cast<std::size_t>(i)] = D[static_cast<std::size_t>(i)] + t[static_cast<std::size_t>(i - j)] * C[static_cast<std::size_t>(j)];
        C = std::move(D);
    }
    return C;
}

template <class T>
T det(const Matrix<T>& A)
{
    const std::vector<T> c = char_poly(A);
    T d = c.back();
    return (A.rows() % 2) ? -d : d;
}

/// Adjugate through Cayley-Hamilton: adj(A) = (-1)^{n+1} (A^{n-1} + c_1 A^{n-2} + ... + c_{n-1} I).
template <class T>
Matrix<T> adjugate(const Matrix<T>& A)
{
    const long n = A.rows();
    const std::vector<T> c = char_poly(A);
    const T one = one_like(A(0, 0));
    Matrix<T> acc = Matrix<T>::identity(n, A.zero(), one);
    for (long k = 1; k < n; ++k) {
        acc = A * acc;
        for (long i = 0; i < n; ++i) acc(i, i) = acc(i, i) + c[static_cast<std::size_t>(k)];
    }
    if (n % 2 == 0) acc = acc.map([](const T& x) { return -x; });
    return acc;
}

/// Normalized valuation, or absolute precision for zero at precision.
Rational valuation_or_precision(const Padic& a);
Rational valuation_or_precision(const CyclotomicScalar& a);
/// Multiply by p^k.
Padic times_p_power(const Padic& a, long k);
CyclotomicScalar times_p_power(const CyclotomicScalar& a, long k);

struct LinalgOptions {
    Rational tol = 24;  // entries of valuation >= tol are zero
    long slack = 8;     // pivots closer than this to tol are ambiguous
    bool strict = false;
};

template <class T>
struct KernelResult {
    std::vector<std::vector<T>> basis;
    long rank = 0;
    std::vector<long> pivot_cols;
    Rational residual;          // min valuation of A x over the basis
    Rational smallest_pivot;    // largest pivot valuation used
    bool ill_conditioned = false;
};

/// Kernel over a field at precision (full pivoting by smallest valuation, rows normalized first).
KernelResult<Padic> kernel(const Matrix<Padic>& A, const LinalgOptions& opt);
KernelResult<CyclotomicScalar> kernel(const Matrix<CyclotomicScalar>& A, const LinalgOptions& opt);

template <class T>
struct SolveResult {
    std::vector<T> x;
    Rational residual;
};

SolveResult<Padic> solve(const Matrix<Padic>& A, const std::vector<Padic>& b, const LinalgOptions& opt);
SolveResult<CyclotomicScalar> solve(const Matrix<CyclotomicScalar>& A, const std::vector<CyclotomicScalar>& b,
                                    const LinalgOptions& opt);

template <class T>
struct SnfResult {
    Matrix<T> U;
    Matrix<T> D;
    Matrix<T> V;
    /// Exponents of the diagonal entries (p-adic or t-adic); nullopt for entries zero at precision.
    std::vector<std::optional<long>> exponents;
};

/// Smith form over Z_p: U A V = D = diag(p^{e_1}, p^{e_2}, ...) with e_1 <= e_2 <= ...
SnfResult<Padic> snf_local(const Matrix<Padic>& A);
/// Smith form over K_n[[t]] modulo t^order: D = diag(t^{e_1}, ...).
SnfResult<TPowerSeries> snf_local(const Matrix<TPowerSeries>& A);

/// min valuation_or_precision over the entries of A - B.
Rational matrix_residual(const Matrix<Padic>& A, const Matrix<Padic>& B);
Rational matrix_residual(const Matrix<CyclotomicScalar>& A, const Matrix<CyclotomicScalar>& B);
/// Smallest t-order at which A - B has a nonzero coefficient (the common order when none does).
long matrix_residual(const Matrix<TPowerSeries>& A, const Matrix<TPowerSeries>& B);

} // namespace robba
