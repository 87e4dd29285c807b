#include "robba/hodge.hpp"

#include <algorithm>
#include <map>

namespace robba {

namespace {

std::size_t idx(long i) { return static_cast<std::size_t>(i); }

Rational kernel_tol(const PrecisionBudget& B) { return Rational(B.digits - 2 * B.slack); }

Padic padic_power(const Padic& c, long j) { return j >= 0 ? c.pow(j) : c.inverse().pow(-j); }

LogSeries lattice_monomial(int p, const Rational& r, long k, long m, int rel, long cap)
{
    std::vector<AnnulusSeries> c(idx(m + 1), AnnulusSeries::zero(p, r, cap));
    c[idx(m)] = AnnulusSeries::monomial(Padic::one(p, rel), k, r, cap);
    return LogSeries(c);
}

using LogVector = std::vector<LogSeries>;

LogVector apply(const SeriesMatrix& G, const LogVector& x, int p, const Rational& r, long cap)
{
    LogVector out;
    for (long l = 0; l < G.rows(); ++l) {
        LogSeries s(p, r, cap);
        for (long i = 0; i < G.cols(); ++i) s = s + x[idx(i)] * G(l, i);
        out.push_back(s);
    }
    return out;
}

// gamma_c(t^j x) / t^j.
LogVector gamma_vector(const PhiGammaModule& M, const GammaGenerator& g, long j, const LogVector& x)
{
    LogVector gx;
    for (const auto& xi : x) gx.push_back(log_gamma(xi, g.c, M.budget()));
    LogVector out = apply(g.G, gx, M.prime(), M.annulus(), M.budget().window());
    const Padic cj = padic_power(g.c, j);
    for (auto& y : out) y = y * cj;
    return out;
}

// phi(t^j x) / t^j.
LogVector phi_vector(const PhiGammaModule& M, long j, const LogVector& x)
{
    LogVector fx;
    for (const auto& xi : x) fx.push_back(log_frobenius(xi, M.budget()));
    const Rational r = fx.front().annulus();
    LogVector out = apply(M.P().map([&](const AnnulusSeries& a) { return a.with_annulus(r); }), fx, M.prime(), r,
                          M.budget().window());
    const Padic pj = padic_power(Padic::from_integer(M.prime(), M.prime(), M.budget().working() + 8), j);
    for (auto& y : out) y = y * pj;
    return out;
}

long residual(const LogVector& a, const LogVector& b)
{
    long best = Padic::kInfinitePrecision;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::min(best, residual_valuation(a[i], b[i]));
    return best;
}

Rational invariance_residual(const PhiGammaModule& M, const LatticeVector& v)
{
    long best = Padic::kInfinitePrecision;
    for (const auto& g : M.gammas()) best = std::min(best, residual(gamma_vector(M, g, v.t_power, v.coords), v.coords));
    return Rational(best);
}

struct Window {
    long lo = 0;
    long hi = -1;
};

Window support(const LogVector& v)
{
    Window w{0, -1};
    bool first = true;
    for (const auto& x : v)
        for (const auto& c : x.coeffs()) {
            if (c.empty()) continue;
            if (first || c.kmin() < w.lo) w.lo = c.kmin();
            if (first || c.kmax() > w.hi) w.hi = c.kmax();
            first = false;
        }
    return w;
}

long max_degree(const LogVector& v)
{
    long d = 0;
    for (const auto& x : v) d = std::max(d, x.degree());
    return d;
}

// Rows of a coefficient system: each column is a LogVector, rows run over (component, l-power, T-power)
// wherever every column knows the coefficient.
Matrix<Padic> coefficient_rows(const std::vector<LogVector>& cols, int p, long klo, long khi, std::vector<long>* kept_k = nullptr)
{
    std::vector<std::vector<Padic>> rows;
    const std::size_t ncomp = cols.front().size();
    long mdeg = 0;
    for (const auto& c : cols) mdeg = std::max(mdeg, max_degree(c));
    for (std::size_t l = 0; l < ncomp; ++l)
        for (long m = 0; m <= mdeg; ++m)
            for (long k = klo; k <= khi; ++k) {
                std::vector<Padic> row;
                bool ok = true, nonzero = false;
                for (const auto& c : cols) {
                    const AnnulusSeries a = c[l].coeff(m);
                    if (!a.known(k)) {
                        ok = false;
                        break;
                    }
                    row.push_back(a.coeff(k));
                    if (!row.back().is_exact_zero()) nonzero = true;
                }
                if (ok && nonzero) {
                    rows.push_back(std::move(row));
                    if (kept_k) kept_k->push_back(k);
                }
            }
    Matrix<Padic> A(static_cast<long>(rows.size()), static_cast<long>(cols.size()), Padic::zero(p));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) A(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    return A;
}

// Coordinates of target in the span of basis, over the coefficients known in all of them.
std::optional<std::vector<Padic>> express(const LogVector& target, const std::vector<LogVector>& basis, int p,
                                          const PrecisionBudget& B)
{
    if (basis.empty()) return std::nullopt;
    Window w = support(target);
    for (const auto& b : basis) {
        const Window s = support(b);
        w.lo = std::min(w.lo, s.lo);
        w.hi = std::max(w.hi, s.hi);
    }
    w.hi = std::min(w.hi, w.lo + 4 * B.window());
    std::vector<LogVector> cols = basis;
    cols.push_back(target);
    const Matrix<Padic> all = coefficient_rows(cols, p, w.lo, w.hi);
    const long nb = static_cast<long>(basis.size());
    if (all.rows() == 0) return std::vector<Padic>(idx(nb), Padic::zero(p));
    Matrix<Padic> A(all.rows(), nb, Padic::zero(p));
    std::vector<Padic> rhs;
    for (long i = 0; i < all.rows(); ++i) {
        for (long j = 0; j < nb; ++j) A(i, j) = all(i, j);
        rhs.push_back(all(i, nb));
    }
    bool any_lhs = false;
    for (long i = 0; i < A.rows() && !any_lhs; ++i)
        for (long j = 0; j < nb; ++j)
            if (!A(i, j).is_zero()) any_lhs = true;
    if (!any_lhs) {
        for (const auto& x : rhs)
            if (!x.is_zero() && x.valuation() < kernel_tol(B)) return std::nullopt;
        return std::vector<Padic>(idx(nb), Padic::zero(p));
    }
    try {
        LinalgOptions opt;
        opt.tol = kernel_tol(B);
        opt.slack = B.slack;
        return solve(A, rhs, opt).x;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularAtPrecision) throw;
        return std::nullopt;
    }
}

} // namespace

InvariantSpace gamma_invariants(const PhiGammaModule& M, const LatticeSearch& S)
{
    require(S.tmin <= S.tmax && S.kmin <= S.kmax && S.ell_max >= 0, ErrorKind::InvalidInput, "empty search lattice");
    const int p = M.prime();
    const Rational& r = M.annulus();
    const PrecisionBudget& B = M.budget();
    const long d = M.rank();
    const long cap = B.window();
    const int rel = B.working() + 8;
    InvariantSpace out;
    out.search = S;

    struct Col {
        long i, k, m;
    };
    std::vector<Col> cols;
    for (long i = 0; i < d; ++i)
        for (long k = S.kmin; k <= S.kmax; ++k)
            for (long m = 0; m <= S.ell_max; ++m) cols.push_back({i, k, m});

    // G gamma(T^k l^m e_i), per generator and column
    std::vector<std::vector<LogVector>> images(M.gammas().size());
    std::vector<LogVector> plain;
    for (const auto& c : cols) {
        LogVector x(idx(d), LogSeries(p, r, cap));
        x[idx(c.i)] = lattice_monomial(p, r, c.k, c.m, rel, cap);
        plain.push_back(x);
    }
    for (std::size_t g = 0; g < M.gammas().size(); ++g) {
        const auto& gen = M.gammas()[g];
        std::map<std::pair<long, long>, LogSeries> mono_images;
        for (const auto& c : cols) {
            const auto key = std::make_pair(c.k, c.m);
            auto it = mono_images.find(key);
            if (it == mono_images.end())
                it = mono_images.emplace(key, log_gamma(lattice_monomial(p, r, c.k, c.m, rel, cap), gen.c, B)).first;
            LogVector x(idx(d), LogSeries(p, r, cap));
            x[idx(c.i)] = it->second;
            images[g].push_back(apply(gen.G, x, p, r, cap));
        }
    }

    LinalgOptions opt;
    opt.tol = kernel_tol(B);
    opt.slack = B.slack;
    out.invariance_residual = infinite_valuation();
    const long khi = S.kmax + 2 * cap;
    for (long j = S.tmin; j <= S.tmax; ++j) {
        std::vector<std::vector<Padic>> rows;
        for (std::size_t g = 0; g < M.gammas().size(); ++g) {
            const Padic cj = padic_power(M.gammas()[g].c, j);
            std::vector<LogVector> vecs;
            for (std::size_t a = 0; a < cols.size(); ++a) {
                LogVector v = images[g][a];
                for (std::size_t l = 0; l < v.size(); ++l) v[l] = v[l] * cj - plain[a][l];
                vecs.push_back(std::move(v));
            }
            const Matrix<Padic> A = coefficient_rows(vecs, p, S.kmin, std::min(khi, S.kmax + 24));
            for (long i = 0; i < A.rows(); ++i) {
                rows.emplace_back();
                for (long c = 0; c < A.cols(); ++c) rows.back().push_back(A(i, c));
            }
        }
        std::vector<std::vector<Padic>> basis;
        if (rows.empty()) {
            for (std::size_t a = 0; a < cols.size(); ++a) {
                std::vector<Padic> e(cols.size(), Padic::zero(p));
                e[a] = Padic::one(p, rel);
                basis.push_back(e);
            }
        } else {
            const auto A = Matrix<Padic>::from_rows(rows, Padic::zero(p));
            auto K = kernel(A, opt);
            if (K.ill_conditioned) out.diagnostics.push_back("t^" + std::to_string(j) + ": pivot close to the kernel tolerance");
            basis = K.basis;
        }
        for (const auto& x : basis) {
            LatticeVector v;
            v.t_power = j;
            v.coords.assign(idx(d), LogSeries(p, r, cap));
            bool edge = (j == S.tmin || j == S.tmax);
            for (std::size_t a = 0; a < cols.size(); ++a) {
                if (x[a].is_zero() || x[a].valuation() >= opt.tol) continue;
                v.coords[idx(cols[a].i)] = v.coords[idx(cols[a].i)] + lattice_monomial(p, r, cols[a].k, cols[a].m, rel, cap) * x[a];
                if (cols[a].k == S.kmin || cols[a].k == S.kmax) edge = true;
                if (cols[a].m == S.ell_max && S.ell_max < d - 1) edge = true;
            }
            if (edge) {
                out.boundary_hit = true;
                out.diagnostics.push_back("invariant at t^" + std::to_string(j) + " touches the lattice boundary");
            }
            const Rational res = invariance_residual(M, v);
            out.invariance_residual = std::min(out.invariance_residual, res);
            out.basis.push_back(std::move(v));
        }
    }
    out.dim = static_cast<long>(out.basis.size());
    if (out.dim > 0) out.twist_exponent = out.basis.front().t_power;

    const Padic zero = Padic::zero(p);
    out.phi = Matrix<Padic>(out.dim, out.dim, zero);
    out.N = Matrix<Padic>(out.dim, out.dim, zero);
    for (long b = 0; b < out.dim; ++b) {
        const auto& xb = out.basis[idx(b)];
        std::vector<long> same;
        std::vector<LogVector> sub;
        for (long a = 0; a < out.dim; ++a)
            if (out.basis[idx(a)].t_power == xb.t_power) {
                same.push_back(a);
                sub.push_back(out.basis[idx(a)].coords);
            }
        const auto fphi = express(phi_vector(M, xb.t_power, xb.coords), sub, p, B);
        if (fphi) {
            for (std::size_t a = 0; a < same.size(); ++a) out.phi(same[a], b) = (*fphi)[a];
        } else {
            out.diagnostics.push_back("phi of basis vector " + std::to_string(b) + " is not in the span");
        }
        LogVector nx;
        for (const auto& c : xb.coords) nx.push_back(monodromy_N(c));
        const auto fN = express(nx, sub, p, B);
        if (fN) {
            for (std::size_t a = 0; a < same.size(); ++a) out.N(same[a], b) = (*fN)[a];
        } else {
            out.diagnostics.push_back("N of basis vector " + std::to_string(b) + " is not in the span");
        }
    }
    const Padic pp = Padic::from_integer(p, p, B.working());
    out.n_phi_residual = out.dim == 0 ? infinite_valuation() : matrix_residual(out.N * out.phi, (out.phi * out.N).scaled(pp));
    return out;
}

InvariantSpace dcris(const PhiGammaModule& M, LatticeSearch search)
{
    search.ell_max = 0;
    return gamma_invariants(M, search);
}

InvariantSpace dst(const PhiGammaModule& M, LatticeSearch search)
{
    search.ell_max = M.rank() - 1;
    return gamma_invariants(M, search);
}

ComparisonReport comparison_residual(const PhiGammaModule& M, const LatticeVector& v)
{
    require(M.rank() == 1 && v.coords.size() == 1, ErrorKind::InvalidInput, "comparison needs rank one");
    ComparisonReport rep;
    rep.r = v.t_power;
    if (M.meta().twist && rep.r != -*M.meta().twist)
        fail(ErrorKind::MismatchedTwist, "invariant carries t^" + std::to_string(rep.r) + " but the module twist is " +
                                             std::to_string(*M.meta().twist));
    const LogSeries& x = v.coords[0];
    if (x.degree() > 0) {
        rep.note = "coefficient involves log(T)";
        return rep;
    }
    const AnnulusSeries lam = x.coeff(0);
    rep.lambda_bounded = is_bounded(lam).bounded;
    rep.lambda_constant = lam.is_exact() && (lam.empty() || (lam.kmin() == 0 && lam.kmax() == 0));
    rep.invariance_residual = invariance_residual(M, v);
    rep.ok = rep.lambda_bounded && !lam.empty();
    if (!rep.lambda_constant) rep.note = rep.lambda_bounded ? "lambda is bounded but not constant" : "lambda is not bounded";
    return rep;
}

ComparisonReport comparison_residual(const PhiGammaModule& M, const InvariantSpace& inv)
{
    require(inv.dim == 1, ErrorKind::InvalidInput, "comparison needs a one-dimensional invariant space");
    return comparison_residual(M, inv.basis.front());
}

Matrix<TPowerSeries> ddif_system(const PhiGammaModule& M, int n, long w)
{
    const int p = M.prime();
    require(n >= 1 && r_n(p, n) >= M.annulus(), ErrorKind::InvalidInput, "level is below the annulus of the module");
    const Localizer L(p, n, w, M.budget().working());
    const SeriesMatrix& A = M.nabla().A;
    Matrix<TPowerSeries> C(A.rows(), A.cols(), TPowerSeries::zero(p, n, w));
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            if (!is_zero_at_precision(A(i, j))) C(i, j) = L.iota(A(i, j));
    return C;
}

namespace {

CyclotomicScalar eval_poly(const std::vector<CyclotomicScalar>& c, const Padic& x)
{
    CyclotomicScalar s = c.front();
    for (std::size_t i = 1; i < c.size(); ++i) s = s * x + c[i];
    return s;
}

bool negligible(const CyclotomicScalar& a, const Rational& tol) { return a.is_zero() || a.valuation() >= tol; }

// Integer roots of a polynomial (leading coefficient first) with multiplicity; the cofactor is left in c.
std::vector<long> integer_roots(std::vector<CyclotomicScalar>& c, const Rational& tol, long range, int rel)
{
    std::vector<long> roots;
    const int p = c.front().prime();
    for (long lam = -range; lam <= range && c.size() > 1; ++lam) {
        const Padic x = Padic::from_integer(p, lam, rel);
        while (c.size() > 1 && negligible(eval_poly(c, x), tol)) {
            std::vector<CyclotomicScalar> q;
            CyclotomicScalar acc = c.front();
            q.push_back(acc);
            for (std::size_t i = 1; i + 1 < c.size(); ++i) {
                acc = acc * x + c[i];
                q.push_back(acc);
            }
            c = q;
            roots.push_back(lam);
        }
    }
    return roots;
}

CyclotomicScalar cyclo_int(int p, int n, long v, int rel) { return CyclotomicScalar::from_padic(n, Padic::from_integer(p, v, rel)); }

} // namespace

std::vector<SenWeight> sen_weights(const Matrix<CyclotomicScalar>& S, const PrecisionBudget& B)
{
    const long d = S.rows();
    const int p = S(0, 0).prime();
    const int n = S(0, 0).level();
    const int rel = B.working();
    std::vector<CyclotomicScalar> cp = char_poly(S);
    const std::vector<long> roots = integer_roots(cp, kernel_tol(B), 64, rel);
    std::vector<SenWeight> out;
    for (long lam : roots) out.push_back({cyclo_int(p, n, lam, rel), true, lam, infinite_valuation()});
    const long rest = d - static_cast<long>(roots.size());
    if (rest > 0) {
        CyclotomicScalar tr = CyclotomicScalar::zero(p, n);
        for (long i = 0; i < d; ++i) tr = tr + S(i, i);
        for (long lam : roots) tr = tr - cyclo_int(p, n, lam, rel);
        const CyclotomicScalar avg = tr * Padic::from_integer(p, rest, rel).inverse();
        Rational best = -infinite_valuation();
        for (long k = -64; k <= 64; ++k) {
            const CyclotomicScalar diff = avg - cyclo_int(p, n, k, rel);
            best = std::max(best, diff.is_zero() ? diff.absprec() : diff.valuation());
        }
        for (long i = 0; i < rest; ++i) out.push_back({avg, false, std::nullopt, best});
    }
    return out;
}

HorizontalResult horizontal_sections(const Matrix<TPowerSeries>& C, const PrecisionBudget& B)
{
    HorizontalResult res;
    const long d = C.rows();
    require(d > 0 && C.cols() == d, ErrorKind::InvalidInput, "connection matrix must be square");
    const int p = C(0, 0).prime();
    const int n = C(0, 0).level();
    long w = C(0, 0).order();
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) w = std::min(w, C(i, j).order());
    require(w >= 1, ErrorKind::InvalidInput, "connection needs t-order >= 1");
    const Rational tol = kernel_tol(B);
    const int rel = B.working();
    const CyclotomicScalar zero = CyclotomicScalar::zero(p, n);

    Matrix<CyclotomicScalar> C0(d, d, zero);
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) C0(i, j) = C(i, j).coeff(0);
    std::vector<CyclotomicScalar> cp = char_poly(C0);
    res.exponents = integer_roots(cp, tol, 4 * w, rel);
    res.integral_exponents = static_cast<long>(res.exponents.size()) == d;
    res.residual = infinite_valuation();
    if (res.exponents.empty()) {
        res.obstructions.push_back({0, d, 0, "no integer exponent"});
        return res;
    }
    const long e_lo = -*std::max_element(res.exponents.begin(), res.exponents.end());
    const long e_need = -*std::min_element(res.exponents.begin(), res.exponents.end());
    const long E = e_lo + w - 1;
    if (e_need > E) res.obstructions.push_back({-e_need, 0, 0, "exponent gap exceeds the t-order"});

    const long nU = w * d;
    auto col = [&](long e, long i) { return (e - e_lo) * d + i; };
    Matrix<CyclotomicScalar> Sys(nU, nU, zero);
    for (long e = e_lo; e <= E; ++e)
        for (long l = 0; l < d; ++l)
            for (long i = 0; i < d; ++i) {
                CyclotomicScalar v = C0(l, i);
                if (l == i) v = v + cyclo_int(p, n, e, rel);
                Sys(col(e, l), col(e, i)) = v;
                for (long j = 1; j <= e - e_lo; ++j) Sys(col(e, l), col(e - j, i)) = C(l, i).coeff(j);
            }
    LinalgOptions opt;
    opt.tol = tol;
    opt.slack = B.slack;

    // dimension of the solutions with y_e' = 0 for e' < e
    auto filtered_dim = [&](long e) {
        if (e > E) return 0L;
        const long first = col(e, 0);
        Matrix<CyclotomicScalar> sub(nU, nU - first, zero);
        for (long a = 0; a < nU; ++a)
            for (long b = first; b < nU; ++b) sub(a, b - first) = Sys(a, b);
        return static_cast<long>(kernel(sub, opt).basis.size());
    };

    const auto K = kernel(Sys, opt);
    res.rank = static_cast<long>(K.basis.size());
    for (const auto& x : K.basis) {
        long first = -1;
        for (long u = 0; u < nU && first < 0; ++u)
            if (!negligible(x[idx(u)], tol)) first = u / d;
        if (first < 0) continue;
        HorizontalSection h;
        h.lambda = -(e_lo + first);
        for (long k = first; k < w; ++k) {
            h.coeffs.emplace_back();
            for (long i = 0; i < d; ++i) h.coeffs.back().push_back(x[idx(k * d + i)]);
        }
        // t Y' + C Y with Y = t^{e_lo} Z
        std::vector<TPowerSeries> Z;
        for (long i = 0; i < d; ++i) {
            std::vector<CyclotomicScalar> z;
            for (long k = 0; k < w; ++k) z.push_back(x[idx(k * d + i)]);
            Z.push_back(TPowerSeries::from_coeffs(p, n, z));
        }
        for (long l = 0; l < d; ++l) {
            TPowerSeries R = tderiv(Z[idx(l)]) + Z[idx(l)] * Padic::from_integer(p, e_lo, rel);
            for (long i = 0; i < d; ++i) R = R + C(l, i) * Z[idx(i)];
            for (long k = 0; k + 1 < std::min(w, R.order()); ++k) {
                const CyclotomicScalar& a = R.coeff(k);
                res.residual = std::min(res.residual, a.is_zero() ? a.absprec() : a.valuation());
            }
        }
        res.basis.push_back(std::move(h));
    }
    std::sort(res.basis.begin(), res.basis.end(), [](const HorizontalSection& a, const HorizontalSection& b) { return a.lambda > b.lambda; });

    std::map<long, long> mult;
    for (long lam : res.exponents) ++mult[lam];
    for (const auto& [lam, m] : mult) {
        const long found = filtered_dim(-lam) - filtered_dim(-lam + 1);
        if (found < m)
            res.obstructions.push_back({lam, m, found,
                                        "resonance at exponent " + std::to_string(lam) + ": " + std::to_string(m - found) +
                                            " solution(s) need log t"});
    }
    return res;
}

ClassificationReport classify(const PhiGammaModule& M, const ClassifyParams& params)
{
    ClassificationReport rep;
    const PrecisionBudget& B = M.budget();
    const long d = M.rank();
    const Rational tol = kernel_tol(B);
    rep.level = params.n > 0 ? params.n : minimal_level(M.prime(), M.annulus());

    const Matrix<CyclotomicScalar> S = sen_matrix(M, rep.level);
    rep.cp_admissible = true;
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j)
            if (!negligible(S(i, j), tol)) rep.cp_admissible = false;
    rep.sen_weights = sen_weights(S, B);
    const bool integral = std::all_of(rep.sen_weights.begin(), rep.sen_weights.end(), [](const SenWeight& w) { return w.integral; });
    rep.semisimple = integral;
    if (integral) {
        std::map<long, long> mult;
        for (const auto& w : rep.sen_weights) ++mult[*w.integer];
        LinalgOptions opt;
        opt.tol = tol;
        opt.slack = B.slack;
        for (const auto& [lam, m] : mult) {
            Matrix<CyclotomicScalar> T = S;
            for (long i = 0; i < d; ++i) T(i, i) = T(i, i) - cyclo_int(M.prime(), rep.level, lam, B.working());
            const long geo = static_cast<long>(kernel(T, opt).basis.size());
            if (geo != m) {
                rep.semisimple = false;
                rep.diagnostics.push_back("Sen operator is not semisimple at weight " + std::to_string(lam));
            }
        }
    } else {
        for (const auto& w : rep.sen_weights)
            if (!w.integral)
                rep.diagnostics.push_back("non-integral Sen weight at distance p^-" + rational_to_string(w.distance) + " from Z");
    }
    rep.hodge_tate = integral && rep.semisimple;

    const HorizontalResult hs = horizontal_sections(ddif_system(M, rep.level, params.w), B);
    rep.ddr = hs.rank;
    rep.de_rham = hs.rank == d;
    for (const auto& o : hs.obstructions) rep.diagnostics.push_back(o.message);

    const InvariantSpace Dc = dcris(M, params.search);
    const InvariantSpace Ds = dst(M, params.search);
    rep.dcris = Dc.dim;
    rep.dst = Ds.dim;
    rep.crystalline = Dc.dim == d;
    rep.semistable = Ds.dim == d;
    for (const auto* D : {&Dc, &Ds})
        for (const auto& s : D->diagnostics) rep.diagnostics.push_back(s);
    rep.diagnostics.push_back("semistability verdict is potentially-after-finite-cyclotomic-twist, from invariance under the stored generators");

    bool weights_zero = true;
    for (const auto& w : rep.sen_weights)
        if (!w.integer || *w.integer != 0) weights_zero = false;
    rep.monotone = (!rep.crystalline || rep.semistable) && (!rep.semistable || rep.de_rham) &&
                   (!rep.cp_admissible || (rep.hodge_tate && weights_zero)) && rep.dcris <= rep.dst && rep.dst <= d;
    if (!rep.monotone) rep.diagnostics.push_back("flag monotonicity violated");
    return rep;
}

namespace {

// a / t^m, or nullopt when a is not divisible.
std::optional<AnnulusSeries> divide_by_t_power(AnnulusSeries a, long m, const PrecisionBudget& B)
{
    for (long i = 0; i < m; ++i) {
        if (is_zero_at_precision(a)) return a;
        try {
            a = divide_by_t(a, B);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotDivisible) throw;
            return std::nullopt;
        }
    }
    return a;
}

SeriesMatrix inverse_matrix(const SeriesMatrix& F)
{
    const AnnulusSeries dF = det(F);
    const AnnulusSeries inv = dF.inverse();
    return adjugate(F).map([&](const AnnulusSeries& x) { return x * inv; });
}

} // namespace

NdrReport verify_ndr(const PhiGammaModule& M, const NdrCandidate& Bc)
{
    const long d = M.rank();
    const PrecisionBudget& B = M.budget();
    require(Bc.F.rows() == d && Bc.F.cols() == d && static_cast<long>(Bc.t_powers.size()) == d, ErrorKind::InvalidInput,
            "candidate basis has the wrong shape");
    NdrReport rep;
    const SeriesMatrix Finv = inverse_matrix(Bc.F);
    const SeriesMatrix& A = M.nabla().A;
    const SeriesMatrix nF = Bc.F.map([&](const AnnulusSeries& x) { return nabla_series(x, B); });
    const SeriesMatrix S = Finv * (nF + A * Bc.F);
    rep.integral = true;
    for (long a = 0; a < d; ++a)
        for (long b = 0; b < d; ++b) {
            AnnulusSeries X = S(a, b);
            long e = Bc.t_powers[idx(b)] - Bc.t_powers[idx(a)] - 1;
            if (a == b) {
                X = X + AnnulusSeries::constant(Padic::from_integer(M.prime(), Bc.t_powers[idx(a)], B.working()), X.annulus(),
                                                X.width_cap());
                e = -1;
            }
            if (e >= 0 || is_zero_at_precision(X)) continue;
            if (!divide_by_t_power(X, -e, B)) {
                rep.integral = false;
                rep.flags.push_back("partial_V[" + std::to_string(a) + "," + std::to_string(b) + "] has a t^" + std::to_string(e) + " pole");
            }
        }

    const AnnulusSeries dF = det(Bc.F);
    long sum = 0;
    for (long k : Bc.t_powers) sum += k;
    rep.det_exponent = sum;
    rep.det_unit = is_bounded(dF).bounded && is_bounded(dF.inverse()).bounded;
    const int level = minimal_level(M.prime(), M.annulus());
    long weights = 0;
    bool integral = true;
    for (const auto& w : sen_weights(sen_matrix(M, level), B)) {
        if (w.integer) weights += *w.integer;
        else integral = false;
    }
    rep.expected_exponent = -weights;
    rep.det_ok = integral && rep.det_unit && rep.det_exponent == rep.expected_exponent;
    if (rep.det_exponent > rep.expected_exponent) rep.notes.push_back("determinant exponent exceeds -sum(weights): the basis is over-twisted");
    if (rep.det_exponent < rep.expected_exponent) rep.notes.push_back("determinant exponent is below -sum(weights)");
    if (!rep.det_unit) rep.notes.push_back("det F is not a unit of the bounded ring");

    const SeriesMatrix FP = Finv.map([&](const AnnulusSeries& x) { return x.with_annulus(x.annulus() * M.prime()); }) *
                            M.P().map([&](const AnnulusSeries& x) { return x.with_annulus(x.annulus() * M.prime()); }) *
                            frobenius(Bc.F);
    rep.phi_stable = true;
    for (long a = 0; a < d; ++a)
        for (long b = 0; b < d; ++b) {
            const long e = Bc.t_powers[idx(b)] - Bc.t_powers[idx(a)];
            if (e >= 0 || is_zero_at_precision(FP(a, b))) continue;
            if (!divide_by_t_power(FP(a, b), -e, B)) {
                rep.phi_stable = false;
                rep.flags.push_back("phi[" + std::to_string(a) + "," + std::to_string(b) + "] leaves the span");
            }
        }
    rep.ok = rep.integral && rep.det_ok && rep.phi_stable;
    return rep;
}

NdrResult ndr_rank1(const Padic& c0, long r, const PrecisionBudget& B)
{
    require(r <= 0, ErrorKind::PositiveWeights, "N_dR needs nonpositive weights, got r = " + std::to_string(r));
    PhiGammaModule M = build_rank1(c0, r, B);
    NdrCandidate cand{identity_series_matrix(M.prime(), M.annulus(), 1, B.working(), B.window()), {-r}};
    NdrReport rep = verify_ndr(M, cand);
    return {std::move(M), std::move(cand), std::move(rep)};
}

} // namespace robba
