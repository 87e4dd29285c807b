#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "criteria.hpp"
#include "robba/hodge.hpp"
#include "robba/identities.hpp"
#include "robba/json_io.hpp"
#include "robba/localization.hpp"

using namespace robba;

namespace {

struct RunConfig {
    std::string command;
    int p = 2;
    PrecisionBudget budget;
    std::string annulus;
    std::uint64_t seed = 1;
    std::string input;
    std::string out;
    std::optional<long> max_terms;
    // command parameters
    int n = 0;
    int m = 1;
    long cases = 10;
    std::string c0 = "1";
    long r = 0;
    std::string family = "rank1";
    int only = 0;
};

/// Summary text and the JSON payload of one command.
struct Outcome {
    int exit_code = 0;
    std::ostringstream text;
    Json payload = Json::object();
};

Json config_json(const RunConfig& c)
{
    Json j;
    j["command"] = c.command;
    j["p"] = c.p;
    j["budget"] = to_json(c.budget);
    j["annulus"] = c.annulus.empty() ? Json(nullptr) : Json(c.annulus);
    j["seed"] = c.seed;
    j["input"] = c.input.empty() ? Json(nullptr) : Json(c.input);
    j["max_terms"] = c.max_terms ? Json(*c.max_terms) : Json(nullptr);
    Json params;
    if (c.command == "identities") params["cases"] = c.cases;
    if (c.command.rfind("localize", 0) == 0 || c.command.rfind("module", 0) == 0) params["n"] = c.n;
    if (c.command == "localize partunit") params["m"] = c.m;
    if (c.command == "ndr" || c.command == "module build") {
        params["c0"] = c.c0;
        params["r"] = c.r;
    }
    if (c.command == "module build") params["family"] = c.family;
    if (c.command == "selftest") params["only"] = c.only;
    j["params"] = params.is_null() ? Json::object() : params;
    return j;
}

void validate_config(RunConfig& c)
{
    require(c.p >= 2 && is_prime(c.p), ErrorKind::InvalidInput, "--p must be prime, got " + std::to_string(c.p));
    if (const char* env = std::getenv("ROBBA_LAB_MAX_TERMS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        require(end != env && *end == '\0' && v >= 4, ErrorKind::InvalidInput, std::string("ROBBA_LAB_MAX_TERMS must be an integer >= 4, got ") + env);
        c.max_terms = v;
        c.budget.half_window = static_cast<int>(std::min<long>(c.budget.half_window, v / 2));
    }
    c.budget.validate();
    if (!c.annulus.empty()) require(parse_rational(c.annulus) > 0, ErrorKind::InvalidInput, "--annulus must be positive");
    require(c.n >= 0 && c.n <= 6, ErrorKind::InvalidInput, "--n must lie in 0..6");
    require(c.m >= 1 && c.m <= 6, ErrorKind::InvalidInput, "--m must lie in 1..6");
    require(c.cases >= 1, ErrorKind::InvalidInput, "--cases must be positive");
}

Rational annulus_or(const RunConfig& c, const Rational& dflt) { return c.annulus.empty() ? dflt : parse_rational(c.annulus); }

std::string label(const Rational& q) { return is_infinite(q) ? std::string("inf") : rational_to_string(q); }

std::string label(const CyclotomicScalar& a)
{
    if (a.is_zero()) return "0";
    if (a.is_rational()) return rational_to_string(a.coeff(0).to_rational());
    return a.to_string();
}

PhiGammaModule read_module(const RunConfig& c)
{
    require(!c.input.empty(), ErrorKind::InvalidInput, "module commands need --input");
    Json j = load(c.input);
    if (!c.annulus.empty()) j["annulus"] = c.annulus;
    return module_from_json(j, c.budget);
}

/// The module file fixes the prime; an explicit --p must agree with it.
void adopt_prime(RunConfig& c, const PhiGammaModule& M, bool explicit_p)
{
    require(!explicit_p || c.p == M.prime(), ErrorKind::InvalidInput,
            "--p " + std::to_string(c.p) + " disagrees with the module file (p = " + std::to_string(M.prime()) + ")");
    c.p = M.prime();
}

int level_for(const RunConfig& c, const PhiGammaModule& M)
{
    const int lo = minimal_level(M.prime(), M.annulus());
    if (c.n == 0) return lo;
    require(c.n >= lo, ErrorKind::InvalidInput, "--n " + std::to_string(c.n) + " is below the smallest level " + std::to_string(lo) + " for this annulus");
    return c.n;
}

// ---------------------------------------------------------------------------

void cmd_identities(const RunConfig& c, Outcome& o)
{
    IdentityConfig ic;
    ic.p = c.p;
    ic.budget = c.budget;
    ic.annulus = annulus_or(c, 0);
    ic.seed = c.seed;
    ic.cases = c.cases;
    Json list = Json::array();
    long failed = 0;
    for (const auto& r : run_identities(ic)) {
        list.push_back(Json{{"name", r.name},
                            {"module", r.module},
                            {"cases", r.cases},
                            {"residual", residual_to_json(r.residual)},
                            {"threshold", residual_to_json(r.threshold)},
                            {"pass", r.pass},
                            {"detail", r.detail}});
        failed += !r.pass;
        o.text << std::left << std::setw(6) << (r.pass ? "ok" : "FAIL") << std::setw(44) << r.name << " residual " << std::setw(6) << label(r.residual)
               << " threshold " << label(r.threshold) << "\n";
    }
    Json conv = Json::array();
    for (const auto& v : convergence_to_t(c.p, 12, 12)) conv.push_back(residual_to_json(v));
    o.payload["identities"] = std::move(list);
    o.payload["convergence_to_t"] = Json{{"kmax", 12}, {"valuations_by_m", std::move(conv)}};
    o.text << (failed ? std::to_string(failed) + " identities fail" : std::string("all identities hold")) << "\n";
    o.exit_code = failed ? 3 : 0;
}

void cmd_localize_table(const RunConfig& c, Outcome& o)
{
    const auto& B = c.budget;
    const int nmax = c.n == 0 ? 2 : c.n;
    Json levels = Json::array();
    for (int n = 1; n <= nmax; ++n) {
        Localizer L(c.p, n, B.t_order, B.working());
        const Rational r = annulus_or(c, r_n(c.p, n));
        Json lv;
        lv["n"] = n;
        lv["annulus"] = rational_to_string(r);
        lv["iota_T"] = to_json(L.iota_T());
        lv["theta_iota_T"] = to_json(L.theta(AnnulusSeries::monomial(Padic::one(c.p, B.working()), 1, r, B.window())));
        Json qs = Json::array();
        for (int k = n; k <= nmax + 1; ++k) {
            const auto v = L.theta(special_qn(c.p, k, B.working(), r, B.window()));
            qs.push_back(Json{{"k", k}, {"value", to_json(v)}, {"label", label(v)}});
            o.text << "theta iota_" << n << "(q_" << k << ") = " << label(v) << "\n";
        }
        lv["theta_iota_q"] = std::move(qs);
        if (!c.input.empty()) {
            const auto f = series_from_json(load(c.input), c.p, r, B.working(), B.window());
            lv["input_iota"] = to_json(L.iota(f));
            lv["input_theta"] = to_json(L.theta(f));
            o.text << "theta iota_" << n << "(input) = " << label(L.theta(f)) << "\n";
        }
        levels.push_back(std::move(lv));
    }
    Json pu = Json::array();
    for (int m = 1; m <= nmax; ++m)
        for (int n = 1; n <= nmax; ++n) {
            const auto v = partunit_value(c.p, m, n, B.t_order, B.working());
            pu.push_back(Json{{"m", m}, {"n", n}, {"value", to_json(v)}, {"label", label(v)}});
            o.text << "partunit m=" << m << " n=" << n << ": " << label(v) << "\n";
        }
    o.payload["levels"] = std::move(levels);
    o.payload["partunit"] = std::move(pu);
}

void cmd_localize_partunit(const RunConfig& c, Outcome& o)
{
    const int n = c.n == 0 ? 1 : c.n;
    const auto v = partunit_value(c.p, c.m, n, c.budget.t_order, c.budget.working());
    o.payload["m"] = c.m;
    o.payload["n"] = n;
    o.payload["value"] = to_json(v);
    o.payload["label"] = label(v);
    o.text << label(v) << "\n";
}

void cmd_module(const std::string& sub, RunConfig& c, bool explicit_p, Outcome& o)
{
    const PhiGammaModule M = read_module(c);
    adopt_prime(c, M, explicit_p);
    o.payload["module"] = Json{{"name", M.meta().name}, {"p", M.prime()}, {"rank", M.rank()}, {"annulus", rational_to_string(M.annulus())}};
    if (sub == "validate") {
        const auto rep = validation_report(M);
        o.payload["validation"] = to_json(rep);
        for (const auto& k : rep.checks) o.text << std::left << std::setw(40) << k.name << " residual " << label(k.residual) << "\n";
        o.text << (rep.ok ? "valid" : "INVALID") << " (threshold " << label(rep.threshold) << ")\n";
        o.exit_code = rep.ok ? 0 : 3;
    } else if (sub == "classify") {
        const auto rep = classify(M, {level_for(c, M), c.budget.t_order, {}});
        o.payload["classification"] = to_json(rep);
        auto yn = [](bool b) { return b ? "yes" : "no"; };
        o.text << "C_p-admissible " << yn(rep.cp_admissible) << "\nHodge-Tate     " << yn(rep.hodge_tate) << "\nde Rham        " << yn(rep.de_rham)
               << "\ncrystalline    " << yn(rep.crystalline) << "\nsemistable     " << yn(rep.semistable) << "\nSen weights   ";
        for (const auto& w : rep.sen_weights) o.text << " " << (w.integer ? std::to_string(*w.integer) : label(w.value));
        o.text << "\ndims cris/st/dR " << rep.dcris << "/" << rep.dst << "/" << rep.ddr << " at level " << rep.level << "\n";
        for (const auto& d : rep.diagnostics) o.text << "note: " << d << "\n";
        if (!rep.monotone) {
            o.text << "dimension chain dim D_cris <= dim D_st <= dim D_dR <= rank is violated\n";
            o.exit_code = 3;
        }
    } else if (sub == "dcris" || sub == "dst") {
        const auto inv = sub == "dcris" ? dcris(M) : dst(M);
        o.payload[sub] = to_json(inv);
        o.text << sub << " dimension " << inv.dim << "\n";
        if (inv.dim) {
            o.text << "phi:";
            for (long i = 0; i < inv.phi.rows(); ++i)
                for (long j = 0; j < inv.phi.cols(); ++j) o.text << " " << rational_to_string(inv.phi(i, j).to_rational());
            o.text << "\n";
        }
        if (inv.boundary_hit) o.text << "note: the search lattice boundary was reached\n";
    } else if (sub == "sen") {
        const int n = level_for(c, M);
        const auto S = sen_matrix(M, n);
        o.payload["level"] = n;
        o.payload["sen_matrix"] = to_json(S);
        Json ws = Json::array();
        o.text << "Sen weights at level " << n << ":";
        for (const auto& w : sen_weights(S, c.budget)) {
            ws.push_back(to_json(w));
            o.text << " " << (w.integer ? std::to_string(*w.integer) : label(w.value));
        }
        o.payload["sen_weights"] = std::move(ws);
        o.text << "\n";
    } else if (sub == "ddr") {
        const int n = level_for(c, M);
        const auto C = ddif_system(M, n, c.budget.t_order);
        const auto h = horizontal_sections(C, c.budget);
        o.payload["level"] = n;
        o.payload["system"] = to_json(C);
        o.payload["horizontal"] = to_json(h);
        o.text << "horizontal sections at level " << n << ": rank " << h.rank << " of " << M.rank() << ", exponents";
        for (const auto& s : h.basis) o.text << " " << s.lambda;
        o.text << ", residual " << label(h.residual) << "\n";
        for (const auto& ob : h.obstructions) o.text << "obstruction at " << ob.lambda << ": " << ob.message << "\n";
    }
}

void cmd_module_build(const RunConfig& c, Outcome& o)
{
    PhiGammaModule M;
    if (c.family == "rank1")
        M = build_rank1(Padic::from_rational(c.p, parse_rational(c.c0), c.budget.working()), c.r, c.budget);
    else if (c.family == "cocycle")
        M = build_test_extension(c.p, TestExtension::CyclotomicCocycle, c.budget);
    else if (c.family == "unipotent")
        M = build_test_extension(c.p, TestExtension::UnipotentDemo, c.budget);
    else
        fail(ErrorKind::InvalidInput, "unknown family " + c.family);
    o.payload["module"] = to_json(M);
    o.text << "built " << M.meta().name << " of rank " << M.rank() << " at p = " << M.prime() << "\n";
}

void cmd_ndr(const RunConfig& c, Outcome& o)
{
    const auto res = ndr_rank1(Padic::from_rational(c.p, parse_rational(c.c0), c.budget.working()), c.r, c.budget);
    o.payload["ndr"] = to_json(res.report);
    o.payload["t_powers"] = res.basis.t_powers;
    o.text << "N_dR = t^" << res.basis.t_powers.at(0) << " D: integral " << (res.report.integral ? "yes" : "no") << ", phi-stable " << (res.report.phi_stable ? "yes" : "no")
           << ", det exponent " << res.report.det_exponent << " (expected " << res.report.expected_exponent << ")\n";
    if (c.r < 0) {
        const auto plain = verify_ndr(res.module, NdrCandidate{res.basis.F, {0}});
        o.payload["untwisted"] = to_json(plain);
        o.text << "untwisted basis: integral " << (plain.integral ? "yes" : "no");
        for (const auto& f : plain.flags) o.text << "; " << f;
        o.text << "\n";
    }
    o.exit_code = res.report.ok ? 0 : 3;
}

void cmd_selftest(const RunConfig& c, Outcome& o)
{
    acceptance::Options opt;
    opt.budget = c.budget;
    opt.seed = c.seed;
    std::vector<acceptance::Result> results;
    if (c.only)
        results.push_back(acceptance::run(c.only, opt));
    else
        results = acceptance::run_all(opt);
    Json list = Json::array();
    long passed = 0;
    for (const auto& r : results) {
        passed += r.pass;
        list.push_back(Json{{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"measured", r.measured}, {"required", r.required}, {"failures", r.failures}});
        o.text << acceptance::format_line(r) << "\n";
    }
    o.payload["criteria"] = std::move(list);
    o.payload["passed"] = passed;
    o.text << passed << "/" << results.size() << " criteria pass\n";
    o.exit_code = passed == static_cast<long>(results.size()) ? 0 : 3;
}

void emit(const RunConfig& c, const std::string& kind, Json payload)
{
    if (c.out.empty()) return;
    Json body;
    body["config"] = config_json(c);
    for (auto& [k, v] : payload.items()) body[k] = std::move(v);
    persist(envelope(kind, body), c.out);
}

} // namespace

int main(int argc, char** argv)
{
    RunConfig cfg;
    CLI::App app{"robba-lab: the cyclotomic Robba ring and (phi, Gamma)-module invariants"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--p", cfg.p, "prime")->capture_default_str();
    app.add_option("--prec", cfg.budget.digits, "retained p-adic digits N")->capture_default_str();
    app.add_option("--window", cfg.budget.half_window, "Laurent window half-width M")->capture_default_str();
    app.add_option("--t-order", cfg.budget.t_order, "t-adic order w")->capture_default_str();
    app.add_option("--slack", cfg.budget.slack, "digit loss allowed per composite operation")->capture_default_str();
    app.add_option("--annulus", cfg.annulus, "annulus index r (rational)");
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--input", cfg.input, "input JSON file");
    app.add_option("--out", cfg.out, "output JSON file");

    auto* identities = app.add_subcommand("identities", "window and log ring identities on random inputs");
    identities->add_option("--cases", cfg.cases, "random cases per identity")->capture_default_str();

    auto* localize = app.add_subcommand("localize", "iota_n and theta o iota_n tables");
    localize->add_option("--n", cfg.n, "level (0: levels 1 and 2)");
    auto* partunit = localize->add_subcommand("partunit", "theta o iota_m (p^n t / q_n)");
    partunit->add_option("--m", cfg.m, "evaluation level")->capture_default_str();
    partunit->add_option("--n", cfg.n, "index of q_n");

    auto* module = app.add_subcommand("module", "invariants of a (phi, Gamma)-module file");
    module->require_subcommand(1);
    std::vector<CLI::App*> module_subs;
    for (const char* s : {"validate", "classify", "dcris", "dst", "sen", "ddr"}) {
        auto* sub = module->add_subcommand(s);
        sub->add_option("--n", cfg.n, "level (0: smallest allowed)");
        module_subs.push_back(sub);
    }
    module_subs[0]->description("check the phi and Gamma commutation laws");
    module_subs[1]->description("C_p-admissible, Hodge-Tate, de Rham, crystalline, semistable");
    module_subs[2]->description("phi-module of Gamma-invariants without log");
    module_subs[3]->description("(phi, N)-module of Gamma-invariants with log");
    module_subs[4]->description("Sen operator and weights");
    module_subs[5]->description("horizontal sections of the localized connection");
    auto* build = module->add_subcommand("build", "write a built-in module family to --out");
    build->add_option("--family", cfg.family, "rank1, cocycle or unipotent")->capture_default_str();
    build->add_option("--c0", cfg.c0, "Frobenius constant (rational)")->capture_default_str();
    build->add_option("--r", cfg.r, "twist")->capture_default_str();

    auto* ndr = app.add_subcommand("ndr", "N_dR of a rank one module and the lattice verifier");
    ndr->add_option("--c0", cfg.c0, "Frobenius constant (rational)")->capture_default_str();
    ndr->add_option("--r", cfg.r, "twist, r <= 0")->capture_default_str();

    auto* selftest = app.add_subcommand("selftest", "acceptance criteria");
    selftest->add_option("--only", cfg.only, "single criterion")->check(CLI::Range(0, acceptance::kCriteria));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string kind;
    Outcome o;
    try {
        if (identities->parsed()) cfg.command = kind = "identities";
        if (localize->parsed()) {
            cfg.command = partunit->parsed() ? "localize partunit" : "localize";
            kind = partunit->parsed() ? "partunit" : "localization";
        }
        if (ndr->parsed()) cfg.command = kind = "ndr";
        if (selftest->parsed()) cfg.command = kind = "selftest";
        std::string msub;
        if (module->parsed()) {
            for (auto* s : module_subs)
                if (s->parsed()) msub = s->get_name();
            if (build->parsed()) msub = "build";
            cfg.command = "module " + msub;
            kind = msub == "build" ? "module" : "module_" + msub;
        }
        validate_config(cfg);

        if (cfg.command == "identities") cmd_identities(cfg, o);
        else if (cfg.command == "localize") cmd_localize_table(cfg, o);
        else if (cfg.command == "localize partunit") cmd_localize_partunit(cfg, o);
        else if (cfg.command == "module build") cmd_module_build(cfg, o);
        else if (!msub.empty()) cmd_module(msub, cfg, app.count("--p") > 0, o);
        else if (cfg.command == "ndr") cmd_ndr(cfg, o);
        else if (cfg.command == "selftest") cmd_selftest(cfg, o);

        if (kind == "module") {
            // the module file itself, so that it loads back with module_from_json
            o.payload["module"]["config"] = config_json(cfg);
            if (!cfg.out.empty()) persist(o.payload["module"], cfg.out);
        } else {
            emit(cfg, kind, std::move(o.payload));
        }
        std::cout << o.text.str();
        return o.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        try {
            emit(cfg, "error", Json{{"error", Json{{"kind", to_string(e.kind())}, {"message", e.what()}, {"exit_code", e.exit_code()}}}});
        } catch (const std::exception&) {
        }
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
