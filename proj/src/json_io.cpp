#include "robba/json_io.hpp"

#include <fstream>
#include <sstream>

namespace robba {

namespace {

[[noreturn]] void schema(const std::string& what) { fail(ErrorKind::SchemaMismatch, what); }

const Json& field(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) schema(std::string("missing field '") + key + "'");
    return j.at(key);
}

long get_long(const Json& j, const char* key)
{
    const Json& v = field(j, key);
    if (!v.is_number_integer()) schema(std::string("field '") + key + "' is not an integer");
    return v.get<long>();
}

bool get_bool(const Json& j, const char* key)
{
    const Json& v = field(j, key);
    if (!v.is_boolean()) schema(std::string("field '") + key + "' is not a boolean");
    return v.get<bool>();
}

int get_prime(const Json& j)
{
    const long p = get_long(j, "p");
    require(is_prime(p), ErrorKind::InvalidInput, "p = " + std::to_string(p) + " is not prime");
    return static_cast<int>(p);
}

const Json& get_array(const Json& j, const char* key)
{
    const Json& v = field(j, key);
    if (!v.is_array()) schema(std::string("field '") + key + "' is not an array");
    return v;
}

Json rows_json(long rows, long cols, const std::function<Json(long, long)>& f)
{
    Json out = Json::array();
    for (long i = 0; i < rows; ++i) {
        Json row = Json::array();
        for (long j = 0; j < cols; ++j) row.push_back(f(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

template <class T>
Json matrix_json(const char* ring, const Matrix<T>& m)
{
    Json j;
    j["ring"] = ring;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["entries"] = rows_json(m.rows(), m.cols(), [&](long a, long b) { return to_json(m(a, b)); });
    return j;
}

template <class T, class F>
Matrix<T> matrix_from(const Json& j, const char* ring, F&& entry)
{
    if (j.is_object()) {
        if (j.contains("ring") && j.at("ring") != ring) schema(std::string("expected a matrix over ") + ring);
        return matrix_from<T>(field(j, "entries"), ring, entry);
    }
    if (!j.is_array()) schema("matrix is not an array of rows");
    std::vector<std::vector<T>> rows;
    for (const Json& r : j) {
        if (!r.is_array()) schema("matrix row is not an array");
        rows.emplace_back();
        for (const Json& x : r) rows.back().push_back(entry(x));
    }
    if (rows.empty() || rows.front().empty()) schema("empty matrix");
    return Matrix<T>::from_rows(rows, zero_like(rows.front().front()));
}

Json residual_json(const Rational& q)
{
    if (is_infinite(q)) return "inf";
    return rational_to_string(q);
}

std::string scalar_label(const CyclotomicScalar& a)
{
    if (a.is_rational()) return a.coeff(0).to_string();
    return a.to_string();
}

long torsion_order_of(const Padic& c)
{
    const int p = c.prime();
    const long m = p == 2 ? 2 : p - 1;
    if (c.valuation() != 0 || c.is_zero()) return 0;
    if ((c - Padic::one(p, c.relprec())).is_zero()) return 0;
    Padic x = c;
    for (long k = 1; k <= m; ++k) {
        if ((x - Padic::one(p, c.relprec())).is_zero()) return k;
        x = x * c;
    }
    return 0;
}

} // namespace

Json residual_to_json(const Rational& q) { return residual_json(q); }

Json envelope(const std::string& kind, const Json& payload)
{
    Json j;
    j["version"] = kSchemaVersion;
    j["kind"] = kind;
    for (auto it = payload.begin(); it != payload.end(); ++it) {
        if (it.key() == "version" || it.key() == "kind") continue;
        j[it.key()] = it.value();
    }
    return j;
}

void check_envelope(const Json& j, const std::string& kind)
{
    if (!j.is_object() || !j.contains("version")) schema("document has no version field");
    const Json& v = j.at("version");
    if (!v.is_number_integer() || v.get<long>() != kSchemaVersion)
        schema("unsupported version " + v.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
    if (!kind.empty() && j.contains("kind") && j.at("kind") != kind)
        schema("document kind " + j.at("kind").dump() + " where \"" + kind + "\" was expected");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("malformed JSON: ") + e.what());
    }
}

void persist(const Json& j, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::InvalidInput, "cannot write " + path);
    out << dump(j);
    require(static_cast<bool>(out), ErrorKind::InvalidInput, "write failed for " + path);
}

Json load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::InvalidInput, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

// ---------------------------------------------------------------------------

Json to_json(const Rational& q) { return rational_to_string(q); }

Rational rational_from_json(const Json& j)
{
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
    schema("expected a rational string, got " + j.dump());
}

Json to_json(const Padic& a)
{
    Json j;
    j["p"] = a.prime();
    if (a.is_zero()) {
        j["val"] = nullptr;
        if (a.is_exact_zero())
            j["absprec"] = nullptr;
        else
            j["absprec"] = a.absprec();
        return j;
    }
    j["val"] = a.valuation();
    j["unit"] = a.unit().get_str(10);
    j["relprec"] = a.relprec();
    return j;
}

Padic padic_from_json(const Json& j, int p, int relprec)
{
    if (j.is_string() || j.is_number_integer()) {
        require(p != 0, ErrorKind::InvalidInput, "a rational scalar needs a prime from its context");
        return Padic::from_rational(p, rational_from_json(j), relprec);
    }
    const int q = get_prime(j);
    require(p == 0 || q == p, ErrorKind::InvalidInput, "scalar over p = " + std::to_string(q) + " in a p = " + std::to_string(p) + " context");
    const Json& v = field(j, "val");
    if (v.is_null()) {
        const Json& a = field(j, "absprec");
        if (a.is_null()) return Padic::zero(q);
        if (!a.is_number_integer()) schema("absprec is not an integer");
        return Padic::zero(q, a.get<long>());
    }
    if (!v.is_number_integer()) schema("val is not an integer");
    const Json& u = field(j, "unit");
    if (!u.is_string()) schema("unit is not a decimal string");
    mpz_class unit;
    if (unit.set_str(u.get<std::string>(), 10) != 0) schema("unit is not a decimal string");
    const long rel = get_long(j, "relprec");
    require(rel > 0 && rel < (1L << 20), ErrorKind::InvalidInput, "relprec out of range");
    require(unit != 0 && mpz_divisible_ui_p(unit.get_mpz_t(), static_cast<unsigned long>(q)) == 0, ErrorKind::InvalidInput,
            "unit must be prime to p");
    return Padic::from_parts(q, v.get<long>(), unit, static_cast<int>(rel));
}

Json to_json(const CyclotomicScalar& a)
{
    Json j;
    j["p"] = a.prime();
    j["level"] = a.level();
    Json c = Json::array();
    for (const auto& x : a.coeffs()) c.push_back(to_json(x));
    j["coeffs"] = std::move(c);
    return j;
}

CyclotomicScalar cyclotomic_from_json(const Json& j)
{
    const int p = get_prime(j);
    const long n = get_long(j, "level");
    require(n >= 1 && n <= 8, ErrorKind::InvalidInput, "level out of range");
    std::vector<Padic> c;
    for (const Json& x : get_array(j, "coeffs")) c.push_back(padic_from_json(x, p, 64));
    require(static_cast<long>(c.size()) == CyclotomicScalar::degree_of(p, static_cast<int>(n)), ErrorKind::InvalidInput,
            "coefficient count differs from the degree of K_n");
    return CyclotomicScalar::from_coeffs(p, static_cast<int>(n), std::move(c));
}

Json to_json(const AnnulusSeries& f)
{
    Json j;
    j["p"] = f.prime();
    j["r"] = rational_to_string(f.annulus());
    j["kmin"] = f.kmin();
    j["kmax"] = f.kmax();
    Json c = Json::array();
    for (const auto& x : f.coeffs()) c.push_back(to_json(x));
    j["coeffs"] = std::move(c);
    j["tailbound"] = f.tailbound() ? Json(rational_to_string(*f.tailbound())) : Json(nullptr);
    j["lower_exact"] = f.lower_exact();
    j["upper_exact"] = f.upper_exact();
    j["width_cap"] = f.width_cap();
    return j;
}

AnnulusSeries series_from_json(const Json& j, int p, const Rational& r, int relprec, long width_cap)
{
    if (j.is_string() || j.is_number_integer())
        return AnnulusSeries::from_rationals(p, r, 0, {rational_from_json(j)}, relprec, width_cap);
    const int q = get_prime(j);
    require(p == 0 || q == p, ErrorKind::InvalidInput, "series over the wrong prime");
    const Rational rr = rational_from_json(field(j, "r"));
    require(rr > 0, ErrorKind::InvalidInput, "annulus index must be positive");
    const long kmin = get_long(j, "kmin");
    std::vector<Padic> c;
    for (const Json& x : get_array(j, "coeffs")) c.push_back(padic_from_json(x, q, relprec));
    if (j.contains("kmax") && !c.empty())
        require(get_long(j, "kmax") == kmin + static_cast<long>(c.size()) - 1, ErrorKind::InvalidInput, "kmax does not match the coefficients");
    std::optional<Rational> tail;
    if (j.contains("tailbound") && !j.at("tailbound").is_null()) tail = rational_from_json(j.at("tailbound"));
    const bool lo = j.contains("lower_exact") ? get_bool(j, "lower_exact") : true;
    const bool hi = j.contains("upper_exact") ? get_bool(j, "upper_exact") : true;
    const long cap = j.contains("width_cap") ? get_long(j, "width_cap") : width_cap;
    require(cap > 0 && cap <= (1L << 16), ErrorKind::InvalidInput, "width_cap out of range");
    return AnnulusSeries::from_coeffs(q, rr, kmin, std::move(c), cap, lo, hi, tail);
}

Json to_json(const LogSeries& f)
{
    Json j;
    j["p"] = f.prime();
    j["r"] = rational_to_string(f.annulus());
    j["width_cap"] = f.width_cap();
    Json c = Json::array();
    for (const auto& x : f.coeffs()) c.push_back(to_json(x));
    j["ellcoeffs"] = std::move(c);
    return j;
}

LogSeries log_series_from_json(const Json& j)
{
    const int p = get_prime(j);
    const Rational r = rational_from_json(field(j, "r"));
    const long cap = get_long(j, "width_cap");
    std::vector<AnnulusSeries> c;
    for (const Json& x : get_array(j, "ellcoeffs")) c.push_back(series_from_json(x, p, r, 64, cap));
    if (c.empty()) return LogSeries(p, r, cap);
    return LogSeries(std::move(c));
}

Json to_json(const TPowerSeries& f)
{
    Json j;
    j["p"] = f.prime();
    j["level"] = f.level();
    j["order"] = f.order();
    Json c = Json::array();
    for (const auto& x : f.coeffs()) c.push_back(to_json(x));
    j["coeffs"] = std::move(c);
    return j;
}

TPowerSeries tseries_from_json(const Json& j)
{
    const int p = get_prime(j);
    const long n = get_long(j, "level");
    std::vector<CyclotomicScalar> c;
    for (const Json& x : get_array(j, "coeffs")) {
        c.push_back(cyclotomic_from_json(x));
        require(c.back().prime() == p && c.back().level() == n, ErrorKind::InvalidInput, "coefficient over another field");
    }
    if (j.contains("order")) require(get_long(j, "order") == static_cast<long>(c.size()), ErrorKind::InvalidInput, "order does not match");
    require(!c.empty(), ErrorKind::InvalidInput, "t-series of order 0");
    return TPowerSeries::from_coeffs(p, static_cast<int>(n), std::move(c));
}

Json to_json(const PrecisionBudget& B)
{
    Json j;
    j["digits"] = B.digits;
    j["half_window"] = B.half_window;
    j["t_order"] = B.t_order;
    j["slack"] = B.slack;
    return j;
}

PrecisionBudget budget_from_json(const Json& j)
{
    PrecisionBudget B;
    B.digits = static_cast<int>(get_long(j, "digits"));
    B.half_window = static_cast<int>(get_long(j, "half_window"));
    B.t_order = static_cast<int>(get_long(j, "t_order"));
    B.slack = static_cast<int>(get_long(j, "slack"));
    B.validate();
    return B;
}

Json to_json(const Matrix<Padic>& m) { return matrix_json("padic", m); }
Json to_json(const Matrix<CyclotomicScalar>& m) { return matrix_json("cyclotomic", m); }
Json to_json(const Matrix<TPowerSeries>& m) { return matrix_json("tseries", m); }
Json to_json(const SeriesMatrix& m) { return matrix_json("series", m); }

Matrix<Padic> padic_matrix_from_json(const Json& j)
{
    return matrix_from<Padic>(j, "padic", [](const Json& x) { return padic_from_json(x, 0, 64); });
}

Matrix<CyclotomicScalar> cyclotomic_matrix_from_json(const Json& j)
{
    return matrix_from<CyclotomicScalar>(j, "cyclotomic", [](const Json& x) { return cyclotomic_from_json(x); });
}

Matrix<TPowerSeries> tseries_matrix_from_json(const Json& j)
{
    return matrix_from<TPowerSeries>(j, "tseries", [](const Json& x) { return tseries_from_json(x); });
}

SeriesMatrix series_matrix_from_json(const Json& j, int p, const Rational& r, int relprec, long width_cap)
{
    return matrix_from<AnnulusSeries>(j, "series", [&](const Json& x) { return series_from_json(x, p, r, relprec, width_cap); });
}

// ---------------------------------------------------------------------------

Json to_json(const PhiGammaModule& M)
{
    Json j;
    j["p"] = M.prime();
    j["annulus"] = rational_to_string(M.annulus());
    j["rank"] = M.rank();
    j["P"] = to_json(M.P());
    Json gs = Json::array();
    for (const auto& g : M.gammas()) {
        Json e;
        e["c"] = to_json(g.c);
        e["torsion_order"] = g.torsion_order;
        e["G"] = to_json(g.G);
        gs.push_back(std::move(e));
    }
    j["gammas"] = std::move(gs);
    Json meta;
    meta["name"] = M.meta().name;
    meta["twist"] = M.meta().twist ? Json(*M.meta().twist) : Json(nullptr);
    meta["synthetic_partial"] = M.meta().synthetic_partial ? to_json(*M.meta().synthetic_partial) : Json(nullptr);
    j["meta"] = std::move(meta);
    return envelope("module", j);
}

PhiGammaModule module_from_json(const Json& j, const PrecisionBudget& B)
{
    check_envelope(j, "module");
    const int p = get_prime(j);
    const Rational r = j.contains("annulus") ? rational_from_json(j.at("annulus")) : r_n(p, 1);
    require(r > 0, ErrorKind::InvalidInput, "annulus index must be positive");
    const int rel = B.working();
    const long cap = B.window();
    SeriesMatrix P = series_matrix_from_json(field(j, "P"), p, r, rel, cap);
    const long d = j.contains("rank") ? get_long(j, "rank") : P.rows();
    require(d >= 1 && P.rows() == d && P.cols() == d, ErrorKind::InvalidInput, "P is not a square matrix of the stated rank");
    std::vector<GammaGenerator> gammas;
    for (const Json& g : get_array(j, "gammas")) {
        GammaGenerator gen;
        gen.c = padic_from_json(field(g, "c"), p, rel);
        require(!gen.c.is_zero() && gen.c.valuation() == 0, ErrorKind::InvalidInput, "gamma parameter must be a unit");
        gen.G = series_matrix_from_json(field(g, "G"), p, r, rel, cap);
        require(gen.G.rows() == d && gen.G.cols() == d, ErrorKind::InvalidInput, "G has the wrong shape");
        gen.torsion_order = g.contains("torsion_order") ? get_long(g, "torsion_order") : torsion_order_of(gen.c);
        gammas.push_back(std::move(gen));
    }
    require(!gammas.empty(), ErrorKind::InvalidInput, "module has no gamma generators");
    ModuleMeta meta;
    if (j.contains("meta") && j.at("meta").is_object()) {
        const Json& m = j.at("meta");
        if (m.contains("name") && m.at("name").is_string()) meta.name = m.at("name").get<std::string>();
        if (m.contains("twist") && !m.at("twist").is_null()) meta.twist = get_long(m, "twist");
        if (m.contains("synthetic_partial") && !m.at("synthetic_partial").is_null())
            meta.synthetic_partial = series_matrix_from_json(m.at("synthetic_partial"), p, r, rel, cap);
    }
    return PhiGammaModule(p, r, B, std::move(P), std::move(gammas), std::move(meta));
}

// ---------------------------------------------------------------------------

Json to_json(const ValidationReport& r)
{
    Json j;
    j["ok"] = r.ok;
    j["residual"] = residual_json(r.residual);
    j["threshold"] = residual_json(r.threshold);
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(Json{{"law", c.name}, {"residual", residual_json(c.residual)}, {"entry", c.entry}});
    j["checks"] = std::move(checks);
    return j;
}

Json to_json(const ConnectionMatrix& c)
{
    Json j;
    j["tag"] = c.tag == ConnectionMatrix::Tag::Nabla ? "nabla" : "partial";
    j["generator"] = c.generator.to_string();
    j["terms"] = c.terms;
    j["independence_residual"] = residual_json(c.independence_residual);
    j["A"] = to_json(c.A);
    if (!c.t_inverse.empty()) j["t_inverse"] = c.t_inverse;
    return j;
}

Json to_json(const InvariantSpace& s)
{
    Json j;
    j["dim"] = s.dim;
    j["twist_exponent"] = s.twist_exponent;
    j["boundary_hit"] = s.boundary_hit;
    j["invariance_residual"] = residual_json(s.invariance_residual);
    j["n_phi_residual"] = residual_json(s.n_phi_residual);
    j["search"] = Json{{"tmin", s.search.tmin}, {"tmax", s.search.tmax}, {"kmin", s.search.kmin}, {"kmax", s.search.kmax}, {"ell_max", s.search.ell_max}};
    if (s.dim > 0) {
        j["phi"] = to_json(s.phi);
        j["N"] = to_json(s.N);
    }
    Json basis = Json::array();
    for (const auto& v : s.basis) {
        Json b;
        b["t_power"] = v.t_power;
        Json c = Json::array();
        for (const auto& x : v.coords) c.push_back(to_json(x));
        b["coords"] = std::move(c);
        basis.push_back(std::move(b));
    }
    j["basis"] = std::move(basis);
    j["diagnostics"] = s.diagnostics;
    return j;
}

Json to_json(const ComparisonReport& r)
{
    return Json{{"ok", r.ok}, {"r", r.r}, {"lambda_bounded", r.lambda_bounded}, {"lambda_constant", r.lambda_constant},
                {"invariance_residual", residual_json(r.invariance_residual)}, {"note", r.note}};
}

Json to_json(const SenWeight& w)
{
    Json j;
    j["value"] = w.integer ? std::to_string(*w.integer) : scalar_label(w.value);
    j["integral"] = w.integral;
    if (!w.integer) j["distance"] = residual_json(w.distance);
    return j;
}

Json to_json(const HorizontalResult& h)
{
    Json j;
    j["rank"] = h.rank;
    j["exponents"] = h.exponents;
    j["integral_exponents"] = h.integral_exponents;
    j["residual"] = residual_json(h.residual);
    Json basis = Json::array();
    for (const auto& s : h.basis) {
        Json c = Json::array();
        for (const auto& row : s.coeffs) {
            Json r = Json::array();
            for (const auto& x : row) r.push_back(scalar_label(x));
            c.push_back(std::move(r));
        }
        basis.push_back(Json{{"lambda", s.lambda}, {"coeffs", std::move(c)}});
    }
    j["basis"] = std::move(basis);
    Json obs = Json::array();
    for (const auto& o : h.obstructions)
        obs.push_back(Json{{"lambda", o.lambda}, {"multiplicity", o.multiplicity}, {"found", o.found}, {"message", o.message}});
    j["obstructions"] = std::move(obs);
    return j;
}

Json to_json(const ClassificationReport& r)
{
    Json j;
    j["flags"] = Json{{"cp_admissible", r.cp_admissible}, {"hodge_tate", r.hodge_tate}, {"de_rham", r.de_rham},
                      {"crystalline", r.crystalline}, {"semistable", r.semistable}, {"semisimple", r.semisimple},
                      {"monotone", r.monotone}};
    Json w = Json::array();
    for (const auto& x : r.sen_weights) w.push_back(to_json(x));
    j["sen_weights"] = std::move(w);
    j["dims"] = Json{{"dcris", r.dcris}, {"dst", r.dst}, {"ddr", r.ddr}};
    j["level"] = r.level;
    j["weight_convention"] = "the Sen weight of the rank one module of twist r is r";
    j["diagnostics"] = r.diagnostics;
    return j;
}

Json to_json(const NdrReport& r)
{
    return Json{{"ok", r.ok}, {"integral", r.integral}, {"phi_stable", r.phi_stable}, {"det_ok", r.det_ok},
                {"det_unit", r.det_unit}, {"det_exponent", r.det_exponent}, {"expected_exponent", r.expected_exponent},
                {"flags", r.flags}, {"notes", r.notes}};
}

} // namespace robba
