#include "robba/phigamma.hpp"

#include <algorithm>
#include <cstdlib>

namespace robba {

namespace {

std::size_t idx(long i) { return static_cast<std::size_t>(i); }

long log_series_cap(const PrecisionBudget& B)
{
    long cap = 8L * B.digits;
    if (const char* env = std::getenv("ROBBA_LAB_MAX_TERMS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) cap = std::min(cap, v);
    }
    return cap;
}

Padic inv_int(int p, long k, int relprec) { return Padic::from_rational(p, frac(1, k), relprec); }

AnnulusSeries zero_series(int p, const Rational& r, long cap) { return AnnulusSeries::zero(p, r, cap); }

SeriesMatrix zero_matrix(long rows, long cols, int p, const Rational& r, long cap)
{
    return SeriesMatrix(rows, cols, zero_series(p, r, cap));
}

SeriesMatrix scale(const SeriesMatrix& M, const Padic& a)
{
    return M.map([&](const AnnulusSeries& x) { return x * a; });
}

bool matrix_zero_at_precision(const SeriesMatrix& M)
{
    for (long i = 0; i < M.rows(); ++i)
        for (long j = 0; j < M.cols(); ++j)
            if (!is_zero_at_precision(M(i, j))) return false;
    return true;
}

std::string entry_name(const std::string& law, long i, long j) { return law + "[" + std::to_string(i) + "," + std::to_string(j) + "]"; }

// Worst entry of A - B by residual_valuation.
LawCheck compare(const std::string& law, const SeriesMatrix& A, const SeriesMatrix& B)
{
    LawCheck c{law, infinite_valuation(), ""};
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) {
            const Rational v(residual_valuation(A(i, j), B(i, j)));
            if (v < c.residual) {
                c.residual = v;
                c.entry = entry_name(law, i, j);
            }
        }
    return c;
}

} // namespace

PhiGammaModule::PhiGammaModule(int p, const Rational& r, const PrecisionBudget& budget, SeriesMatrix P,
                               std::vector<GammaGenerator> gammas, ModuleMeta meta)
    : p_(p), r_(r), budget_(budget), P_(std::move(P)), gammas_(std::move(gammas)), meta_(std::move(meta))
{
    require(P_.rows() == P_.cols() && P_.rows() > 0, ErrorKind::InvalidInput, "P must be a nonempty square matrix");
    require(!gammas_.empty(), ErrorKind::InvalidInput, "at least one Gamma generator is needed");
    for (const auto& g : gammas_)
        require(g.G.rows() == P_.rows() && g.G.cols() == P_.rows(), ErrorKind::InvalidInput, "G has the wrong shape");
}

const GammaGenerator& PhiGammaModule::main_generator() const
{
    for (const auto& g : gammas_)
        if (g.torsion_order == 0) return g;
    fail(ErrorKind::LogDivergent, "no generator of infinite order is stored");
}

const ConnectionMatrix& PhiGammaModule::nabla() const
{
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        if (cache_->nabla) return *cache_->nabla;
    }
    auto computed = std::make_shared<const ConnectionMatrix>(nabla_V(*this));
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->nabla) cache_->nabla = computed;
    return *cache_->nabla;
}

SeriesMatrix series_matrix(int p, const Rational& r, long width_cap, const std::vector<std::vector<Padic>>& rows)
{
    std::vector<std::vector<AnnulusSeries>> s;
    for (const auto& row : rows) {
        s.emplace_back();
        for (const auto& a : row) s.back().push_back(AnnulusSeries::constant(a, r, width_cap));
    }
    return SeriesMatrix::from_rows(s, zero_series(p, r, width_cap));
}

SeriesMatrix identity_series_matrix(int p, const Rational& r, long d, int relprec, long width_cap)
{
    SeriesMatrix M = zero_matrix(d, d, p, r, width_cap);
    for (long i = 0; i < d; ++i) M(i, i) = AnnulusSeries::constant(Padic::one(p, relprec), r, width_cap);
    return M;
}

SeriesMatrix frobenius(const SeriesMatrix& M)
{
    return M.map([](const AnnulusSeries& x) { return frobenius(x); });
}

SeriesMatrix gamma_action(const SeriesMatrix& M, const Padic& c)
{
    return M.map([&](const AnnulusSeries& x) { return gamma_action(x, c); });
}

SeriesVector gamma_action(const SeriesVector& v, const Padic& c)
{
    SeriesVector out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(gamma_action(x, c));
    return out;
}

SeriesVector apply(const SeriesMatrix& M, const SeriesVector& v)
{
    require(static_cast<long>(v.size()) == M.cols(), ErrorKind::InvalidInput, "vector has the wrong length");
    SeriesVector out;
    for (long i = 0; i < M.rows(); ++i) {
        AnnulusSeries s = M.zero();
        for (long j = 0; j < M.cols(); ++j) s = s + M(i, j) * v[idx(j)];
        out.push_back(s);
    }
    return out;
}

long residual_valuation(const SeriesMatrix& A, const SeriesMatrix& B)
{
    long best = Padic::kInfinitePrecision;
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) best = std::min(best, residual_valuation(A(i, j), B(i, j)));
    return best;
}

long residual_valuation(const SeriesVector& a, const SeriesVector& b)
{
    long best = Padic::kInfinitePrecision;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::min(best, residual_valuation(a[i], b[i]));
    return best;
}

Rational gauss_residual(const SeriesMatrix& A, const SeriesMatrix& B, const Rational& s)
{
    Rational best = infinite_valuation();
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) best = std::min(best, gauss_residual(A(i, j), B(i, j), s));
    return best;
}

Rational gauss_residual(const SeriesVector& a, const SeriesVector& b, const Rational& s)
{
    Rational best = infinite_valuation();
    for (std::size_t i = 0; i < a.size(); ++i) best = std::min(best, gauss_residual(a[i], b[i], s));
    return best;
}

Rational gauss_valuation(const SeriesMatrix& A, const Rational& s)
{
    Rational best = infinite_valuation();
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            if (!A(i, j).empty()) best = std::min(best, gauss_valuation(A(i, j), s));
    return best;
}

Rational gauss_valuation(const SeriesVector& a, const Rational& s)
{
    Rational best = infinite_valuation();
    for (const auto& x : a)
        if (!x.empty()) best = std::min(best, gauss_valuation(x, s));
    return best;
}

Padic main_gamma_unit(int p, int relprec) { return Padic::from_integer(p, gamma_generator(p), relprec); }

Padic torsion_gamma_unit(int p, int relprec)
{
    if (p == 2) return Padic::from_integer(p, -1, relprec);
    long g = 2;
    for (; g < p; ++g) {
        long x = 1;
        long ord = 0;
        do {
            x = x * g % p;
            ++ord;
        } while (x != 1);
        if (ord == p - 1) break;
    }
    return teichmuller(p, g, relprec);
}

long torsion_order(int p) { return p == 2 ? 2 : p - 1; }

SeriesMatrix cocycle_power(const SeriesMatrix& G, const Padic& c, long m)
{
    require(m >= 1, ErrorKind::InvalidInput, "cocycle power needs m >= 1");
    SeriesMatrix acc = G;
    SeriesMatrix cur = G;
    for (long i = 1; i < m; ++i) {
        cur = gamma_action(cur, c);
        acc = acc * cur;
    }
    return acc;
}

ValidationReport validation_report(const PhiGammaModule& M)
{
    ValidationReport rep;
    rep.threshold = M.budget().tolerance();
    const SeriesMatrix& P = M.P();
    const auto& gs = M.gammas();
    for (std::size_t a = 0; a < gs.size(); ++a) {
        const auto& g = gs[a];
        const std::string tag = "c=" + g.c.to_string();
        rep.checks.push_back(compare("phi " + tag, g.G * gamma_action(P, g.c), P * frobenius(g.G)));
        for (std::size_t b = a + 1; b < gs.size(); ++b) {
            const auto& h = gs[b];
            rep.checks.push_back(compare("pair " + tag + " c'=" + h.c.to_string(), g.G * gamma_action(h.G, g.c),
                                         h.G * gamma_action(g.G, h.c)));
        }
        if (g.torsion_order > 0) {
            const SeriesMatrix I = identity_series_matrix(M.prime(), M.annulus(), M.rank(), M.budget().working() + 8,
                                                          P.zero().width_cap());
            rep.checks.push_back(compare("torsion " + tag, cocycle_power(g.G, g.c, g.torsion_order), I));
        }
    }
    rep.residual = infinite_valuation();
    for (const auto& c : rep.checks) rep.residual = std::min(rep.residual, c.residual);
    rep.ok = rep.residual >= rep.threshold;
    return rep;
}

ValidationReport validate(const PhiGammaModule& M)
{
    ValidationReport rep = validation_report(M);
    if (!rep.ok) {
        const LawCheck* worst = &rep.checks.front();
        for (const auto& c : rep.checks)
            if (c.residual < worst->residual) worst = &c;
        fail(ErrorKind::ValidationFailure, "commutation law fails at " + worst->entry + " with residual " + rational_to_string(worst->residual));
    }
    return rep;
}

namespace {

std::vector<GammaGenerator> rank1_gammas(const Padic& r_power_base_c, long r, const PrecisionBudget& B, const Rational& ann,
                                         long cap)
{
    const int p = r_power_base_c.prime();
    std::vector<GammaGenerator> gs;
    for (int which = 0; which < 2; ++which) {
        const Padic c = which == 0 ? main_gamma_unit(p, B.working() + 8) : torsion_gamma_unit(p, B.working() + 8);
        const Padic cr = r >= 0 ? c.pow(r) : c.inverse().pow(-r);
        gs.push_back({c, series_matrix(p, ann, cap, {{cr.with_relprec(B.working())}}), which == 0 ? 0 : torsion_order(p)});
    }
    return gs;
}

Rational default_annulus(int p) { return r_n(p, 1); }

} // namespace

PhiGammaModule build_rank1(const Padic& c0, long r, const PrecisionBudget& B)
{
    require(!c0.is_zero() && c0.valuation() == 0, ErrorKind::NotEtale, "c0 must be a p-adic unit");
    const int p = c0.prime();
    const Rational ann = default_annulus(p);
    const long cap = B.window();
    ModuleMeta meta;
    meta.name = "rank1(" + c0.to_string() + "," + std::to_string(r) + ")";
    meta.twist = r;
    return PhiGammaModule(p, ann, B, series_matrix(p, ann, cap, {{c0}}), rank1_gammas(c0, r, B, ann, cap), meta);
}

PhiGammaModule build_rank1(int p, long c0, long r, const PrecisionBudget& B)
{
    return build_rank1(Padic::from_integer(p, c0, B.working()), r, B);
}

PhiGammaModule build_test_extension(int p, TestExtension kind, const PrecisionBudget& B)
{
    const Rational ann = default_annulus(p);
    const long cap = B.window();
    const int rel = B.working();
    const Padic one = Padic::one(p, rel);
    const Padic zero = Padic::zero(p);
    std::vector<GammaGenerator> gs;
    ModuleMeta meta;
    for (int which = 0; which < 2; ++which) {
        const Padic c = which == 0 ? main_gamma_unit(p, rel + 8) : torsion_gamma_unit(p, rel + 8);
        const Padic L = kind == TestExtension::CyclotomicCocycle ? iwasawa_log(c).with_relprec(rel) : zero;
        gs.push_back({c, series_matrix(p, ann, cap, {{one, L}, {zero, one}}), which == 0 ? 0 : torsion_order(p)});
    }
    if (kind == TestExtension::CyclotomicCocycle) {
        meta.name = "cyclotomic_cocycle";
    } else {
        meta.name = "unipotent_demo";
        SeriesMatrix D(2, 2, zero_series(p, ann, cap));
        D(0, 1) = dlog_T(p, ann, rel, cap);
        meta.synthetic_partial = D;
    }
    return PhiGammaModule(p, ann, B, identity_series_matrix(p, ann, 2, rel, cap), gs, meta);
}

AnnulusSeries log_gamma_operator(const AnnulusSeries& f, const Padic& c, const PrecisionBudget& B)
{
    const int p = f.prime();
    const Padic L = iwasawa_log(c);
    require(!L.is_zero(), ErrorKind::LogDivergent, "log of the generator vanishes");
    const Rational& r = f.annulus();
    const long cap = log_series_cap(B);
    AnnulusSeries Y = f, S = AnnulusSeries::zero(p, r, f.width_cap());
    for (long k = 1;; ++k) {
        if (k > cap) fail(ErrorKind::LogDivergent, "logarithm series did not converge within " + std::to_string(cap) + " terms");
        Y = Y - gamma_action(Y, c);
        const AnnulusSeries term = Y * inv_int(p, k, B.working());
        S = S + term;
        if (is_zero_at_precision(Y)) break;
        if (gauss_valuation(term, r) - L.valuation() > B.digits) break;
    }
    return S * (-L.inverse());
}

namespace {

struct LogSum {
    SeriesMatrix S;
    long terms = 0;
};

// sum_k Delta^k(Y0)/k with Delta(Y) = Y - G gamma_c(Y), columnwise.
LogSum delta_log_sum(const SeriesMatrix& Y0, const SeriesMatrix& G, const Padic& c, const Padic& L, const Rational& r,
                     const PrecisionBudget& B)
{
    const int p = c.prime();
    const long cap = log_series_cap(B);
    SeriesMatrix Y = Y0;
    LogSum out{zero_matrix(Y0.rows(), Y0.cols(), p, r, Y0.zero().width_cap()), 0};
    for (long k = 1;; ++k) {
        if (k > cap) fail(ErrorKind::LogDivergent, "logarithm series did not converge within " + std::to_string(cap) + " terms");
        Y = Y - G * gamma_action(Y, c);
        const SeriesMatrix term = scale(Y, inv_int(p, k, B.working()));
        out.S = out.S + term;
        out.terms = k;
        if (matrix_zero_at_precision(Y)) break;
        if (gauss_valuation(term, r) - L.valuation() > B.digits) break;
    }
    return out;
}

struct Choice {
    Padic c;
    SeriesMatrix G;
};

// c' = c^{p^b}, smallest b whose basis gain passes and with v(c'-1) >= min_vc.
Choice choose_generator(const PhiGammaModule& M, long min_vc)
{
    const int p = M.prime();
    const GammaGenerator& g = M.main_generator();
    const SeriesMatrix I =
        identity_series_matrix(p, M.annulus(), M.rank(), M.budget().working() + 8, M.P().zero().width_cap());
    Padic c = g.c;
    SeriesMatrix G = g.G;
    for (int b = 0; b <= 4; ++b) {
        const Padic d = c - Padic::one(p, c.relprec());
        const bool vc_ok = d.is_zero() || d.valuation() >= min_vc;
        if (vc_ok && gauss_valuation(I - G, M.annulus()) >= 1) return {c, G};
        G = cocycle_power(G, c, p);
        c = c.pow(p);
    }
    fail(ErrorKind::LogDivergent, "no power of the stored generator passes the valuation-gain test");
}

long min_vc(int p) { return p == 2 ? 2 : 1; }

} // namespace

ConnectionMatrix nabla_V(const PhiGammaModule& M)
{
    const int p = M.prime();
    const PrecisionBudget& B = M.budget();
    const Rational& r = M.annulus();
    const Choice ch = choose_generator(M, min_vc(p));
    const SeriesMatrix I = identity_series_matrix(p, r, M.rank(), B.working() + 8, M.P().zero().width_cap());
    const Padic L = iwasawa_log(ch.c);
    const LogSum s = delta_log_sum(I, ch.G, ch.c, L, r, B);
    ConnectionMatrix out;
    out.A = scale(s.S, -L.inverse()).map([&](const AnnulusSeries& a) { return a.capped(B.digits); });
    out.generator = ch.c;
    out.terms = s.terms;
    const Padic c2 = ch.c * ch.c;
    const SeriesMatrix G2 = cocycle_power(ch.G, ch.c, 2);
    const Padic L2 = iwasawa_log(c2);
    const LogSum s2 = delta_log_sum(I, G2, c2, L2, r, B);
    out.independence_residual = gauss_residual(out.A, scale(s2.S, -L2.inverse()), r);
    return out;
}

SeriesVector nabla_apply(const PhiGammaModule& M, const SeriesVector& x)
{
    const int p = M.prime();
    const PrecisionBudget& B = M.budget();
    const Choice ch = choose_generator(M, min_vc(p) + 1);
    const Padic L = iwasawa_log(ch.c);
    SeriesMatrix X(static_cast<long>(x.size()), 1, M.P().zero());
    for (std::size_t i = 0; i < x.size(); ++i) X(static_cast<long>(i), 0) = x[i];
    const LogSum s = delta_log_sum(X, ch.G, ch.c, L, M.annulus(), B);
    SeriesVector out;
    for (long i = 0; i < s.S.rows(); ++i) out.push_back(s.S(i, 0) * (-L.inverse()));
    return out;
}

AnnulusSeries nabla_series(const AnnulusSeries& f, const PrecisionBudget& B)
{
    if (f.empty() && f.is_exact()) return f;
    return special_t(f.prime(), B, f.annulus()) * partial(f);
}

SeriesVector nabla_assemble(const PhiGammaModule& M, const SeriesVector& x)
{
    const SeriesVector Ax = apply(M.nabla().A, x);
    SeriesVector out;
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back(nabla_series(x[i], M.budget()) + Ax[i]);
    return out;
}

Rational nabla_phi_residual(const PhiGammaModule& M)
{
    const SeriesMatrix& P = M.P();
    const SeriesMatrix& A = M.nabla().A;
    const SeriesMatrix nP = P.map([&](const AnnulusSeries& x) { return nabla_series(x, M.budget()); });
    return gauss_residual(nP + A * P, P * frobenius(A), M.annulus() * M.prime());
}

int minimal_level(int p, const Rational& r)
{
    int n = 1;
    while (r_n(p, n) < r) ++n;
    return n;
}

Matrix<CyclotomicScalar> sen_matrix(const PhiGammaModule& M, int n)
{
    const int p = M.prime();
    require(n >= 1 && r_n(p, n) >= M.annulus(), ErrorKind::InvalidInput,
            "level " + std::to_string(n) + " is below the annulus of the module");
    const SeriesMatrix& A = M.nabla().A;
    Matrix<CyclotomicScalar> S(A.rows(), A.cols(), CyclotomicScalar::zero(p, n));
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            S(i, j) = A(i, j).empty() && A(i, j).is_exact() ? CyclotomicScalar::zero(p, n) : evaluate_at_pi(A(i, j), n);
    return S;
}

ConnectionMatrix partial_V(const PhiGammaModule& M)
{
    const ConnectionMatrix& nb = M.nabla();
    ConnectionMatrix out = nb;
    out.tag = ConnectionMatrix::Tag::Partial;
    const long d = nb.A.rows();
    out.t_inverse.assign(idx(d), std::vector<bool>(idx(d), false));
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) {
            const AnnulusSeries& a = nb.A(i, j);
            if (is_zero_at_precision(a)) {
                out.A(i, j) = nb.A.zero();
                continue;
            }
            try {
                out.A(i, j) = divide_by_t(a, M.budget());
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NotDivisible) throw;
                out.A(i, j) = a;
                out.t_inverse[idx(i)][idx(j)] = true;
            }
        }
    return out;
}

} // namespace robba
