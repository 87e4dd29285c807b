#pragma once

#include <json.hpp>

#include <string>

#include "robba/hodge.hpp"
#include "robba/phigamma.hpp"

namespace robba {

/// Key order follows insertion, so equal values dump to identical bytes.
using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

/// {"version":1,"kind":kind} followed by the payload's fields.
Json envelope(const std::string& kind, const Json& payload);
/// Checks the version (and the kind when nonempty); SchemaMismatch otherwise.
void check_envelope(const Json& j, const std::string& kind = "");

std::string dump(const Json& j);
Json parse_json(const std::string& text);
void persist(const Json& j, const std::string& path);
Json load(const std::string& path);

Json to_json(const Rational& q);
/// A residual valuation: rational string, or "inf" when nothing is left at precision.
Json residual_to_json(const Rational& q);
Json to_json(const Padic& a);
Json to_json(const CyclotomicScalar& a);
Json to_json(const AnnulusSeries& f);
Json to_json(const LogSeries& f);
Json to_json(const TPowerSeries& f);
Json to_json(const PrecisionBudget& B);
Json to_json(const Matrix<Padic>& m);
Json to_json(const Matrix<CyclotomicScalar>& m);
Json to_json(const Matrix<TPowerSeries>& m);
Json to_json(const SeriesMatrix& m);

Rational rational_from_json(const Json& j);
/// A scalar object, or a rational string / integer read at relprec.
Padic padic_from_json(const Json& j, int p, int relprec);
CyclotomicScalar cyclotomic_from_json(const Json& j);
/// A series object, or a rational string / integer read as an exact constant.
AnnulusSeries series_from_json(const Json& j, int p, const Rational& r, int relprec, long width_cap);
LogSeries log_series_from_json(const Json& j);
TPowerSeries tseries_from_json(const Json& j);
PrecisionBudget budget_from_json(const Json& j);
Matrix<Padic> padic_matrix_from_json(const Json& j);
Matrix<CyclotomicScalar> cyclotomic_matrix_from_json(const Json& j);
Matrix<TPowerSeries> tseries_matrix_from_json(const Json& j);
SeriesMatrix series_matrix_from_json(const Json& j, int p, const Rational& r, int relprec, long width_cap);

/// Module file: {"version":1,"kind":"module","p","annulus","rank","P","gammas":[{"c","G"}],"meta"}.
Json to_json(const PhiGammaModule& M);
/// Entries may be series objects or rational strings; the budget sets their precision.
PhiGammaModule module_from_json(const Json& j, const PrecisionBudget& budget);

Json to_json(const ValidationReport& r);
Json to_json(const ConnectionMatrix& c);
Json to_json(const InvariantSpace& s);
Json to_json(const ComparisonReport& r);
Json to_json(const SenWeight& w);
Json to_json(const HorizontalResult& h);
/// {"flags":{...},"sen_weights":[{"value","integral"}],"dims":{...},"diagnostics":[...]}.
Json to_json(const ClassificationReport& r);
Json to_json(const NdrReport& r);

} // namespace robba
