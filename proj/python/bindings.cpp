#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robba/hodge.hpp"
#include "robba/identities.hpp"
#include "robba/json_io.hpp"
#include "robba/localization.hpp"

namespace py = pybind11;
using namespace robba;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) { return parse_json(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

Rational q(const py::object& o)
{
    if (py::isinstance<py::int_>(o)) return Rational(mpz_class(py::str(o).cast<std::string>()));
    return parse_rational(py::str(o).cast<std::string>());
}

std::vector<Rational> qs(const py::sequence& s)
{
    std::vector<Rational> out;
    for (const auto& x : s) out.push_back(q(py::reinterpret_borrow<py::object>(x)));
    return out;
}

std::string label(const Rational& v) { return is_infinite(v) ? std::string("inf") : rational_to_string(v); }

std::string label(const CyclotomicScalar& a)
{
    if (a.is_zero()) return "0";
    if (a.is_rational()) return rational_to_string(a.coeff(0).to_rational());
    return a.to_string();
}

} // namespace

PYBIND11_MODULE(robba, m)
{
    m.doc() = "Cyclotomic Robba ring, (phi, Gamma)-modules and their p-adic Hodge invariants";

    py::register_exception_translator([](std::exception_ptr e) {
        try {
            if (e) std::rethrow_exception(e);
        } catch (const Error& err) {
            PyErr_SetString(PyExc_ValueError, err.what());
        }
    });

    py::class_<PrecisionBudget>(m, "PrecisionBudget")
        .def(py::init([](int digits, int half_window, int t_order, int slack) {
                 PrecisionBudget B{digits, half_window, t_order, slack};
                 B.validate();
                 return B;
             }),
             py::arg("digits") = 40, py::arg("half_window") = 48, py::arg("t_order") = 16, py::arg("slack") = 8)
        .def_readwrite("digits", &PrecisionBudget::digits)
        .def_readwrite("half_window", &PrecisionBudget::half_window)
        .def_readwrite("t_order", &PrecisionBudget::t_order)
        .def_readwrite("slack", &PrecisionBudget::slack)
        .def_property_readonly("window", &PrecisionBudget::window)
        .def_property_readonly("working", &PrecisionBudget::working)
        .def_property_readonly("tolerance", &PrecisionBudget::tolerance)
        .def("__repr__", [](const PrecisionBudget& B) { return "PrecisionBudget(" + to_json(B).dump() + ")"; });

    py::class_<Padic>(m, "Padic")
        .def(py::init([](int p, const py::object& x, int relprec) { return Padic::from_rational(p, q(x), relprec); }), py::arg("p"), py::arg("value"),
             py::arg("relprec") = 40)
        .def_property_readonly("p", &Padic::prime)
        .def_property_readonly("valuation", &Padic::valuation)
        .def_property_readonly("absprec", &Padic::absprec)
        .def_property_readonly("relprec", &Padic::relprec)
        .def("is_zero", &Padic::is_zero)
        .def("to_rational", [](const Padic& a) { return rational_to_string(a.to_rational()); })
        .def("to_json", [](const Padic& a) { return to_py(to_json(a)); })
        .def(py::self + py::self)
        .def(py::self - py::self)
        .def(py::self * py::self)
        .def(py::self / py::self)
        .def(-py::self)
        .def("__pow__", &Padic::pow)
        .def("__repr__", &Padic::to_string);

    py::class_<AnnulusSeries>(m, "AnnulusSeries")
        .def(py::init([](int p, const py::object& r, long kmin, const py::sequence& coeffs, int relprec, long width_cap) {
                 return AnnulusSeries::from_rationals(p, q(r), kmin, qs(coeffs), relprec, width_cap);
             }),
             py::arg("p"), py::arg("r"), py::arg("kmin"), py::arg("coeffs"), py::arg("relprec") = 56, py::arg("width_cap") = 96)
        .def_static("from_json", [](const py::object& j) { return series_from_json(from_py(j), 0, 1, 0, 0); })
        .def_property_readonly("p", &AnnulusSeries::prime)
        .def_property_readonly("annulus", [](const AnnulusSeries& f) { return rational_to_string(f.annulus()); })
        .def_property_readonly("kmin", &AnnulusSeries::kmin)
        .def_property_readonly("kmax", &AnnulusSeries::kmax)
        .def("coeff", [](const AnnulusSeries& f, long k) { return f.coeff(k); })
        .def("to_json", [](const AnnulusSeries& f) { return to_py(to_json(f)); })
        .def("gauss_valuation", [](const AnnulusSeries& f, const py::object& s) { return label(gauss_valuation(f, q(s))); })
        .def("interval_valuation", [](const AnnulusSeries& f, const py::object& s1, const py::object& s2) { return label(interval_valuation(f, q(s1), q(s2))); })
        .def("residual", [](const AnnulusSeries& f, const AnnulusSeries& g) { return residual_valuation(f, g); })
        .def("phi", [](const AnnulusSeries& f) { return frobenius(f); })
        .def("psi", [](const AnnulusSeries& f) { return psi(f); })
        .def("partial", [](const AnnulusSeries& f) { return partial(f); })
        .def("gamma", [](const AnnulusSeries& f, const py::object& c, int relprec) { return gamma_action(f, Padic::from_rational(f.prime(), q(c), relprec)); },
             py::arg("c"), py::arg("relprec") = 56)
        .def(py::self + py::self)
        .def(py::self - py::self)
        .def(py::self * py::self)
        .def(-py::self)
        .def("__repr__", [](const AnnulusSeries& f) { return f.to_string(); });

    m.def("r_n", [](int p, int n) { return rational_to_string(r_n(p, n)); });
    m.def("special_t", [](int p, const PrecisionBudget& B, const py::object& r) { return special_t(p, B, q(r)); }, py::arg("p"), py::arg("budget"),
          py::arg("r"));
    m.def("partunit", [](int p, int mm, int n, long order, int relprec) { return label(partunit_value(p, mm, n, order, relprec)); }, py::arg("p"),
          py::arg("m"), py::arg("n"), py::arg("order") = 16, py::arg("relprec") = 56, "theta o iota_m (p^n t / q_n) as a label");

    m.def(
        "run_identities",
        [](int p, const PrecisionBudget& B, std::uint64_t seed, long cases) {
            IdentityConfig c;
            c.p = p;
            c.budget = B;
            c.seed = seed;
            c.cases = cases;
            py::list out;
            for (const auto& r : run_identities(c)) {
                py::dict d;
                d["name"] = r.name;
                d["module"] = r.module;
                d["residual"] = label(r.residual);
                d["threshold"] = label(r.threshold);
                d["pass"] = r.pass;
                out.append(d);
            }
            return out;
        },
        py::arg("p") = 2, py::arg("budget") = PrecisionBudget{}, py::arg("seed") = 1, py::arg("cases") = 10);
    m.def("convergence_to_t", [](int p, long kmax, long mmax) {
        std::vector<std::string> out;
        for (const auto& v : convergence_to_t(p, kmax, mmax)) out.push_back(label(v));
        return out;
    });

    py::class_<PhiGammaModule>(m, "PhiGammaModule")
        .def_static("from_json", [](const py::object& j, const PrecisionBudget& B) { return module_from_json(from_py(j), B); }, py::arg("data"),
                    py::arg("budget") = PrecisionBudget{})
        .def_static("rank1", [](int p, const py::object& c0, long r, const PrecisionBudget& B) {
            return build_rank1(Padic::from_rational(p, q(c0), B.working()), r, B);
        }, py::arg("p"), py::arg("c0"), py::arg("r"), py::arg("budget") = PrecisionBudget{})
        .def_static("cocycle", [](int p, const PrecisionBudget& B) { return build_test_extension(p, TestExtension::CyclotomicCocycle, B); }, py::arg("p"),
                    py::arg("budget") = PrecisionBudget{})
        .def_property_readonly("p", &PhiGammaModule::prime)
        .def_property_readonly("rank", &PhiGammaModule::rank)
        .def_property_readonly("annulus", [](const PhiGammaModule& M) { return rational_to_string(M.annulus()); })
        .def("to_json", [](const PhiGammaModule& M) { return to_py(to_json(M)); })
        .def("validate", [](const PhiGammaModule& M) { return to_py(to_json(validation_report(M))); })
        .def("classify", [](const PhiGammaModule& M, int n) { return to_py(to_json(classify(M, {n, M.budget().t_order, {}}))); }, py::arg("n") = 0)
        .def("dcris", [](const PhiGammaModule& M) { return to_py(to_json(dcris(M))); })
        .def("dst", [](const PhiGammaModule& M) { return to_py(to_json(dst(M))); })
        .def("sen_weights", [](const PhiGammaModule& M, int n) {
            py::list out;
            for (const auto& w : sen_weights(sen_matrix(M, n == 0 ? minimal_level(M.prime(), M.annulus()) : n), M.budget())) out.append(to_py(to_json(w)));
            return out;
        }, py::arg("n") = 0);

    m.def("ndr_rank1", [](int p, const py::object& c0, long r, const PrecisionBudget& B) {
        return to_py(to_json(ndr_rank1(Padic::from_rational(p, q(c0), B.working()), r, B).report));
    }, py::arg("p"), py::arg("c0"), py::arg("r"), py::arg("budget") = PrecisionBudget{});
}
