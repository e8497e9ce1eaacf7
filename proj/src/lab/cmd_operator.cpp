// leibniz and seminorm commands.

#include <algorithm>
#include <cmath>

#include "context.hpp"
#include "cqms/algebra.hpp"
#include "cqms/errors.hpp"
#include "cqms/operator.hpp"

namespace cqms::lab::detail {

namespace {

std::vector<std::uint64_t> u64_list(const json& j) { return j.get<std::vector<std::uint64_t>>(); }
std::vector<unsigned> uint_list(const json& j) { return j.get<std::vector<unsigned>>(); }

SamplingOptions sampling_from(const json& s) {
  SamplingOptions opt;
  opt.max_support = s.value("max_support", opt.max_support);
  opt.coefficient_range = s.value("coefficient_range", opt.coefficient_range);
  opt.real_coefficients = s.value("real_coefficients", opt.real_coefficients);
  return opt;
}

// Tolerance for comparisons between independently rounded double quantities.
bool leq(double a, double b) { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); }

std::string join(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

void delta_scenario(Context& ctx, CommandResult& out, Scenario& sc, const GroupPtr& g, WordMetric& metric) {
  const auto& s = sc.spec();
  const auto ball = metric.ball(s.at("radius").get<std::uint64_t>());
  const auto samples = s.at("samples").get<std::size_t>();
  const auto ks = uint_list(s.at("k_values"));
  const auto schedule = u64_list(s.value("schedule", json::array({1})));
  auto rng = ctx.rng(sc.name(), "elements");
  std::uniform_int_distribution<std::size_t> pick(0, ball.size() - 1);

  std::size_t mismatches = 0, checks = 0;
  json first_bad = nullptr;
  Table table{"delta_" + sc.name(), {"element", "length", "k", "lower", "upper", "expected"}, {}};
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t idx = pick(rng);
    const auto& el = ball.elements[idx];
    const std::uint64_t len = ball.lengths[idx];
    const auto f = AlgebraElement::delta(g, el);
    for (unsigned k : ks) {
      double expected = 1;
      for (unsigned j = 0; j < k; ++j) expected *= static_cast<double>(len);
      const auto est = seminorm_sandwich(f, k, schedule, metric, ctx.iteration_limits());
      ++checks;
      if (!(est.lower.value == expected && est.upper.value == expected)) {
        ++mismatches;
        if (first_bad.is_null())
          first_bad = json{{"element", g->format(el)}, {"k", k}, {"lower", est.lower.value}, {"upper", est.upper.value}};
      }
      table.rows.push_back({g->format(el), std::to_string(len), std::to_string(k), format_number(est.lower.value),
                            format_number(est.upper.value), format_number(expected)});
    }
  }
  out.tables.push_back(std::move(table));
  sc.block()["checks"] = checks;
  sc.block()["mismatches"] = tagged(mismatches, "exact: lower and upper compared with l(g)^k by equality");
  sc.verdict("lower = upper = l(g)^k", mismatches == 0, json{{"mismatches", mismatches}}, json{{"checks", checks}},
             first_bad.is_null() ? "" : first_bad.dump());
}

void ordering_scenario(Context& ctx, CommandResult& out, Scenario& sc, const GroupPtr& g, WordMetric& metric) {
  const auto& s = sc.spec();
  const auto ball = metric.ball(s.at("support_radius").get<std::uint64_t>());
  const auto samples = s.at("samples").get<std::size_t>();
  const auto ks = uint_list(s.at("k_values"));
  const auto schedule = u64_list(s.at("schedule"));
  const auto sampling = sampling_from(s);
  auto rng = ctx.rng(sc.name(), "elements");

  std::size_t below_l2 = 0, above_l1 = 0, not_monotone = 0, unconverged = 0;
  double worst_l2_ratio = 0, worst_l1_ratio = 0;
  std::vector<std::string> header{"sample", "k", "weighted_l2"};
  for (auto n : schedule) header.push_back("compressed_" + std::to_string(n));
  header.push_back("weighted_l1");
  Table table{"ordering_" + sc.name(), header, {}};
  for (std::size_t i = 0; i < samples; ++i) {
    const auto f = sample_element<std::complex<double>>(g, ball, rng, sampling);
    const unsigned k = ks[i % ks.size()];
    const auto est = seminorm_sandwich(f, k, schedule, metric, ctx.iteration_limits());
    const double l1 = est.upper.value;
    std::vector<std::string> row{std::to_string(i), std::to_string(k), format_number(est.weighted_l2)};
    double prev = -1;
    bool monotone = true;
    for (const auto& [n, c] : est.compressions) {
      if (!leq(est.weighted_l2, c.value)) ++below_l2;
      if (!leq(c.value, l1)) ++above_l1;
      if (c.value < prev) monotone = false;
      if (!c.converged) ++unconverged;
      prev = c.value;
      if (c.value > 0) worst_l2_ratio = std::max(worst_l2_ratio, est.weighted_l2 / c.value);
      if (l1 > 0) worst_l1_ratio = std::max(worst_l1_ratio, c.value / l1);
      row.push_back(format_number(c.value));
    }
    if (!monotone) ++not_monotone;
    row.push_back(format_number(l1));
    table.rows.push_back(std::move(row));
  }
  out.tables.push_back(std::move(table));
  auto& b = sc.block();
  b["samples"] = samples;
  b["schedule"] = schedule;
  b["max_weightedL2_over_compressed"] = tagged(worst_l2_ratio, "lower: column norm / power iteration on compressions");
  b["max_compressed_over_weightedL1"] = tagged(worst_l1_ratio, "upper: triangle inequality");
  b["unconverged_power_iterations"] = unconverged;
  const json bound{{"samples", samples}, {"relative_tolerance", 1e-12}};
  sc.verdict("weightedL2 <= compressed", below_l2 == 0, json{{"violations", below_l2}, {"max_ratio", worst_l2_ratio}},
             bound);
  sc.verdict("compressed <= weightedL1", above_l1 == 0, json{{"violations", above_l1}, {"max_ratio", worst_l1_ratio}},
             bound);
  sc.verdict("compressions nondecreasing in N", not_monotone == 0, json{{"violations", not_monotone}},
             json{{"schedule", schedule}});
}

void dft_scenario(Context& ctx, CommandResult& out, Scenario& sc, const GroupPtr& g, WordMetric& metric) {
  const auto& s = sc.spec();
  const auto ball = metric.ball(s.at("support_radius").get<std::uint64_t>());
  const auto samples = s.at("samples").get<std::size_t>();
  const auto n = s.at("truncation").get<std::uint64_t>();
  const auto grid = s.at("grid_density").get<std::uint64_t>();
  const double slack = s.at("lower_slack").get<double>();
  const double max_gap = s.at("max_gap").get<double>();
  const auto sampling = sampling_from(s);
  auto rng = ctx.rng(sc.name(), "elements");

  std::size_t low = 0, high = 0, wide = 0;
  double worst_deficit = -1e300, worst_excess = -1e300, worst_gap = 0;
  Table table{"dft_" + sc.name(), {"sample", "compressed", "dft_lower", "dft_upper"}, {}};
  for (std::size_t i = 0; i < samples; ++i) {
    auto f = sample_element<std::complex<double>>(g, ball, rng, sampling);
    f = f.scaled(1.0 / weighted_l1(f, 0, metric));  // unit l1 mass
    const auto c = compressed_norm_lower(f, 0, n, metric, ctx.iteration_limits());
    const auto dft = dft_norm_oracle(f, grid);
    worst_deficit = std::max(worst_deficit, dft.lower - c.value);
    worst_excess = std::max(worst_excess, c.value - dft.upper);
    worst_gap = std::max(worst_gap, dft.upper - c.value);
    if (c.value < dft.lower - slack) ++low;
    if (c.value > dft.upper) ++high;
    if (dft.upper - c.value > max_gap) ++wide;
    table.rows.push_back(
        {std::to_string(i), format_number(c.value), format_number(dft.lower), format_number(dft.upper)});
  }
  out.tables.push_back(std::move(table));
  auto& b = sc.block();
  b["samples"] = samples;
  b["normalization"] = "sum |a_g| = 1";
  b["max_dft_lower_minus_compressed"] = tagged(worst_deficit, "numeric: grid maximum of the symbol minus compression");
  b["max_compressed_minus_dft_upper"] = tagged(worst_excess, "rigorous: grid maximum plus gradient bound");
  b["max_gap_to_dft_upper"] = tagged(worst_gap, "numeric");
  sc.verdict("compressed >= dft lower - slack", low == 0, json{{"violations", low}, {"max_deficit", worst_deficit}},
             json{{"slack", slack}, {"truncation", n}});
  sc.verdict("compressed <= dft upper", high == 0, json{{"violations", high}, {"max_excess", worst_excess}},
             json{{"grid_density", grid}});
  sc.verdict("gap to dft sup", wide == 0, json{{"violations", wide}, {"max_gap", worst_gap}},
             json{{"at_most", max_gap}});
}

void explicit_scenario(Context& ctx, Scenario& sc, const GroupPtr& g, WordMetric& metric) {
  const auto& s = sc.spec();
  const auto f = algebra_element_from_json(g, s.at("element"));
  const auto k = s.at("k").get<unsigned>();
  const auto schedule = u64_list(s.at("schedule"));
  const auto est = seminorm_sandwich(f, k, schedule, metric, ctx.iteration_limits());
  auto& b = sc.block();
  b["element"] = to_json(f);
  b["k"] = k;
  b["lower"] = tagged(est.lower.value, est.lower.method);
  b["upper"] = tagged(est.upper.value, est.upper.method);
  json comps = json::array();
  for (const auto& [n, c] : est.compressions)
    comps.push_back({{"N", n}, {"value", c.value}, {"iterations", c.iterations}, {"status", c.status}});
  b["compressions"] = comps;
  const auto& e = s.at("expect");
  if (e.contains("lower_at_least")) {
    const double v = e["lower_at_least"].get<double>();
    sc.verdict("lower bound", est.lower.value >= v, est.lower.value, json{{"at_least", v}});
  }
  if (e.contains("exact")) {
    const double v = e["exact"].get<double>();
    sc.verdict("lower = upper = value", est.lower.value == v && est.upper.value == v,
               json{{"lower", est.lower.value}, {"upper", est.upper.value}}, v);
  }
}

void ad_scenario(Context& ctx, CommandResult& out, Scenario& sc, const GroupPtr& g, WordMetric& metric) {
  const auto& s = sc.spec();
  const auto radius = s.at("radius").get<std::uint64_t>();
  const auto ball = metric.ball(radius);
  const auto samples = s.at("samples").get<std::size_t>();
  const auto ks = uint_list(s.at("k_values"));
  const auto schedule = u64_list(s.at("schedule"));
  const auto sampling = sampling_from(s);
  auto rng = ctx.rng(sc.name(), "elements");
  std::uniform_int_distribution<std::size_t> pick(0, ball.size() - 1);

  std::size_t failures = 0;
  double min_slack = 1e300;
  Table table{"ad_" + sc.name(), {"sample", "h", "k", "lhs", "rhs"}, {}};
  for (std::size_t i = 0; i < samples; ++i) {
    const auto& h = ball.elements[pick(rng)];
    const auto f = sample_element<std::complex<double>>(g, ball, rng, sampling);
    const unsigned k = ks[i % ks.size()];
    const auto r = ad_inequality_check(h, f, k, schedule, metric, ctx.iteration_limits());
    if (!r.passed) ++failures;
    min_slack = std::min(min_slack, r.rhs - r.lhs);
    table.rows.push_back({std::to_string(i), g->format(h), std::to_string(k), format_number(r.lhs), format_number(r.rhs)});
  }
  out.tables.push_back(std::move(table));
  sc.block()["samples"] = samples;
  sc.block()["min_rhs_minus_lhs"] = tagged(min_slack, "lhs: compressed lower bound; rhs: exact weighted l1 sum");
  sc.verdict("ad inequality holds", failures == 0, json{{"failures", failures}, {"min_slack", min_slack}},
             json{{"samples", samples}, {"schedule", join(schedule)}});
}

}  // namespace

void run_leibniz(Context& ctx, CommandResult& out) {
  for_each_scenario(ctx, out, [&](Scenario& sc) {
    const auto& s = sc.spec();
    const auto g = ctx.group(s.at("group"));
    auto& metric = ctx.metric(g);
    const auto ball = metric.ball(s.value("support_radius", std::uint64_t{2}));
    const auto tuples = s.at("tuples").get<std::size_t>();
    const auto ns = uint_list(s.at("n_values"));
    const auto ks = uint_list(s.at("k_values"));
    const auto vectors = s.value("test_vectors", std::size_t{2});
    const bool identity = s.value("factors", std::string("random")) == "identity";
    const auto sampling = sampling_from(s);
    LeibnizOptions lopt;
    lopt.max_compositions = ctx.cap("compositions");
    auto rng = ctx.rng(sc.name(), "tuples");

    std::size_t nonzero = 0, checks = 0;
    double worst = 0;
    Table table{"leibniz_" + sc.name(), {"tuple", "n", "k", "compositions", "vectors", "deviation"}, {}};
    for (std::size_t t = 0; t < tuples; ++t) {
      const unsigned n = ns[t % ns.size()];
      std::vector<ExactAlgebraElement> fs;
      for (unsigned i = 0; i < n; ++i)
        fs.push_back(identity ? ExactAlgebraElement::delta(g, g->identity())
                              : sample_element<ComplexRational>(g, ball, rng, sampling));
      std::vector<ExactFinVector> vs{ExactFinVector::delta(g, g->identity())};
      for (std::size_t i = 0; i < vectors; ++i) vs.push_back(sample_element<ComplexRational>(g, ball, rng, sampling));
      for (unsigned k : ks) {
        const auto r = verify_leibniz(fs, k, vs, metric, lopt);
        ++checks;
        if (!r.exact_zero) ++nonzero;
        worst = std::max(worst, r.max_deviation);
        table.rows.push_back({std::to_string(t), std::to_string(n), std::to_string(k), std::to_string(r.compositions),
                              std::to_string(r.vectors), format_number(r.max_deviation)});
      }
    }
    out.tables.push_back(std::move(table));
    auto& b = sc.block();
    b["group"] = g->to_json();
    b["checks"] = checks;
    b["max_deviation"] = tagged(worst, "exact: Gaussian-rational arithmetic");
    sc.verdict("deviation exactly zero", nonzero == 0, json{{"nonzero", nonzero}, {"max_deviation", worst}},
               json{{"checks", checks}});
  });
}

void run_seminorm(Context& ctx, CommandResult& out) {
  for_each_scenario(ctx, out, [&](Scenario& sc) {
    const auto& s = sc.spec();
    const auto g = ctx.group(s.at("group"));
    auto& metric = ctx.metric(g);
    sc.block()["group"] = g->to_json();
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "delta")
      delta_scenario(ctx, out, sc, g, metric);
    else if (kind == "ordering")
      ordering_scenario(ctx, out, sc, g, metric);
    else if (kind == "dft")
      dft_scenario(ctx, out, sc, g, metric);
    else if (kind == "explicit")
      explicit_scenario(ctx, sc, g, metric);
    else if (kind == "ad_inequality")
      ad_scenario(ctx, out, sc, g, metric);
    else
      throw ParameterError("unknown seminorm scenario kind \"" + kind + "\"");
  });
}

}  // namespace cqms::lab::detail
