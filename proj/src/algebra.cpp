#include "cqms/algebra.hpp"

namespace cqms {

double rapid_decay_ratio(const AlgebraElement& f, double r, double norm_upper, const WordMetric& metric) {
  if (f.empty()) throw ParameterError("rapid decay ratio of the zero element");
  double s = 0;
  for (const auto& [g, c] : f.terms())
    s += std::norm(c) * std::pow(1.0 + static_cast<double>(metric.length(g)), 2.0 * r);
  return norm_upper / std::sqrt(s);
}

AlgebraElement to_float(const ExactAlgebraElement& f) {
  AlgebraElement out(f.group());
  for (const auto& [g, c] : f.terms()) out.add(g, to_complex(c));
  return out;
}

nlohmann::json to_json(const AlgebraElement& f) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& [g, c] : f.terms())
    support.push_back({{"g", f.group()->element_to_json(g)}, {"re", c.real()}, {"im", c.imag()}});
  return {{"support", support}};
}

AlgebraElement algebra_element_from_json(GroupPtr group, const nlohmann::json& j) {
  AlgebraElement f(group);
  for (const auto& term : j.at("support"))
    f.add(group->element_from_json(term.at("g")),
          {term.at("re").get<double>(), term.value("im", 0.0)});
  return f;
}

namespace {

std::string rational_string(const Rational& q) { return q.str(); }

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) {
    try {
      return Rational(j.get<std::string>());
    } catch (const std::runtime_error&) {
      throw ParameterError("malformed rational '" + j.get<std::string>() + "'");
    }
  }
  throw ParameterError("exact coefficients must be integers or \"p/q\" strings");
}

}  // namespace

nlohmann::json to_json(const ExactAlgebraElement& f) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& [g, c] : f.terms())
    support.push_back(
        {{"g", f.group()->element_to_json(g)}, {"re", rational_string(c.re)}, {"im", rational_string(c.im)}});
  return {{"support", support}};
}

ExactAlgebraElement exact_algebra_element_from_json(GroupPtr group, const nlohmann::json& j) {
  ExactAlgebraElement f(group);
  for (const auto& term : j.at("support")) {
    const Rational im = term.contains("im") ? rational_from_json(term.at("im")) : Rational(0);
    f.add(group->element_from_json(term.at("g")), ComplexRational(rational_from_json(term.at("re")), im));
  }
  return f;
}

}  // namespace cqms
