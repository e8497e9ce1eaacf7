#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cqms/dimension.hpp"
#include "cqms/entropy.hpp"

using namespace cqms;

namespace {

const IntMatrix kCat = IntMatrix::from_rows({{2, 1}, {1, 1}});

// |{g_0 alpha(g_1) ... alpha^{n-1}(g_{n-1})}| by enumerating every tuple.
std::size_t brute_force_product_count(const Automorphism& a, const std::vector<GroupElement>& seeds, std::size_t n) {
  const auto& g = *a.group();
  std::set<GroupElement> out;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    GroupElement p = g.identity();
    for (std::size_t i = 0; i < n; ++i) {
      GroupElement x = seeds[idx[i]];
      for (std::size_t j = 0; j < i; ++j) x = a.apply(x);
      p = g.multiply(p, x);
    }
    out.insert(p);
    std::size_t i = 0;
    while (i < n && ++idx[i] == seeds.size()) idx[i++] = 0;
    if (i == n) break;
  }
  return out.size();
}

// All 2^{n+1} sums of eps_i psi^i v, counted with std::set.
std::size_t brute_force_signed_sums(const std::vector<std::vector<std::int64_t>>& psi, std::vector<std::int64_t> v,
                                    std::size_t n) {
  std::vector<std::vector<std::int64_t>> powers;
  for (std::size_t i = 0; i <= n; ++i) {
    powers.push_back(v);
    std::vector<std::int64_t> w(v.size(), 0);
    for (std::size_t r = 0; r < v.size(); ++r)
      for (std::size_t c = 0; c < v.size(); ++c) w[r] += psi[r][c] * v[c];
    v = w;
  }
  std::set<std::vector<std::int64_t>> sums;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n + 1)); ++mask) {
    std::vector<std::int64_t> s(v.size(), 0);
    for (std::size_t i = 0; i <= n; ++i)
      if (mask >> i & 1)
        for (std::size_t r = 0; r < s.size(); ++r) s[r] += powers[i][r];
    sums.insert(s);
  }
  return sums.size();
}

std::vector<GroupElement> positive_words(const GroupDescriptor& f2, std::size_t p) {
  std::vector<GroupElement> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    std::string w;
    for (std::size_t i = 0; i < p; ++i) w += (mask >> i & 1) ? 'b' : 'a';
    out.push_back(f2.word(w));
  }
  return out;
}

}  // namespace

TEST_CASE("dimension estimate examples") {
  const Eigen::MatrixXcd i3 = Eigen::MatrixXcd::Identity(3, 3);
  auto e = dimension_estimate(i3, 0.5);
  CHECK(e.lower == 3);
  CHECK(e.upper == 3);

  e = dimension_estimate(Eigen::MatrixXcd::Identity(1, 1), 2.0);
  CHECK(e.lower == 0);
  CHECK(e.upper == 0);

  auto z = GroupDescriptor::free_abelian(1);
  WordMetric m(z);
  std::vector<FinVector> basis;
  for (const auto& g : m.ball(2).elements) basis.push_back(FinVector::delta(z, g));
  e = dimension_estimate(embed_vectors(basis), 0.5);
  CHECK(e.lower == 4);
  CHECK(e.upper == 5);
  CHECK(e.orthonormal_subset == 5);

  CHECK_THROWS_AS(dimension_estimate(i3, 0.0), ParameterError);
}

TEST_CASE("dimension estimate on rotated orthonormal sets") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int m : {2, 5, 8}) {
    Eigen::MatrixXcd a(12, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {nd(rng), nd(rng)};
    const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ() * Eigen::MatrixXcd::Identity(12, m);
    for (double delta : {0.1, 0.5, 0.9}) {
      const auto e = dimension_estimate(q, delta);
      CHECK(e.upper == static_cast<std::size_t>(m));
      CHECK(e.lower == static_cast<std::size_t>(std::ceil((1 - delta * delta) * m - 1e-9)));
    }
    CHECK(dimension_estimate(q, 1.5).upper == 0);
  }
}

TEST_CASE("dimension estimate invariants on random sets") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd a(7, 5);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {nd(rng) * 0.5, nd(rng) * 0.5};
    if (trial % 2) a.col(0) = Eigen::VectorXcd::Unit(7, 3);
    const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues();
    std::size_t prev_lo = 100, prev_up = 100;
    for (double delta : {0.05, 0.2, 0.5, 0.8, 1.2, 3.0}) {
      const auto e = dimension_estimate(a, delta);
      CHECK(e.lower <= e.upper);
      CHECK(e.lower <= prev_lo);
      CHECK(e.upper <= prev_up);
      prev_lo = e.lower;
      prev_up = e.upper;
      std::size_t r = 0;
      while (r < static_cast<std::size_t>(sigma.size()) && sigma(static_cast<Eigen::Index>(r)) >= delta) ++r;
      CHECK(e.upper == r);
    }
  }
}

TEST_CASE("product sets: worked examples") {
  auto g = GroupDescriptor::semidirect(-IntMatrix::identity(2), "Z^2 x_-I Z");
  auto z2 = GroupDescriptor::free_abelian(2);
  const auto cat = product_set_growth(Automorphism::matrix(z2, kCat), {z2->identity(), z2->vec({1, 0})}, 18);
  for (std::size_t n = 1; n <= 18; ++n) CHECK(cat.cardinalities[n - 1] == (std::uint64_t{1} << n));

  auto z1 = GroupDescriptor::free_abelian(1);
  const auto id = product_set_growth(Automorphism::identity(z1), {z1->identity(), z1->vec({1})}, 30);
  for (std::size_t n = 1; n <= 30; ++n) CHECK(id.cardinalities[n - 1] == n + 1);

  auto f2 = GroupDescriptor::free(2);
  for (std::size_t p = 1; p <= 3; ++p) {
    const auto tr = product_set_growth(Automorphism::identity(f2), positive_words(*f2, p), 6);
    for (std::size_t n = 1; n <= 6; ++n) CHECK(tr.cardinalities[n - 1] == (std::uint64_t{1} << (p * n)));
  }
}

TEST_CASE("product sets agree with tuple enumeration") {
  std::mt19937_64 rng(9);
  auto g = GroupDescriptor::semidirect(-IntMatrix::identity(2), "Z^2 x_-I Z");
  WordMetric m(g);
  const Ball b2 = m.ball(2);
  const std::vector<Automorphism> autos{Automorphism::extended(g, kCat), Automorphism::inner(g, g->t()),
                                        Automorphism::inner(g, g->pair({1, 0}, 1))};
  for (const auto& a : autos)
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<GroupElement> seeds{g->identity()};
      while (seeds.size() < 3) {
        const auto& x = b2.elements[rng() % b2.size()];
        if (std::find(seeds.begin(), seeds.end(), x) == seeds.end()) seeds.push_back(x);
      }
      const auto tr = product_set_growth(a, seeds, 7);
      for (std::size_t n = 1; n <= 7; ++n) {
        CHECK(tr.cardinalities[n - 1] == brute_force_product_count(a, seeds, n));
        if (n > 1) {
          CHECK(tr.cardinalities[n - 1] >= tr.cardinalities[n - 2]);
          CHECK(tr.cardinalities[n - 1] <= tr.cardinalities[n - 2] * seeds.size());
        }
      }
    }
}

TEST_CASE("product set cap") {
  auto z2 = GroupDescriptor::free_abelian(2);
  const auto tr = product_set_growth(Automorphism::matrix(z2, kCat), {z2->identity(), z2->vec({1, 0})}, 18, 1000);
  CHECK(tr.truncated);
  CHECK(tr.length() == 9);  // 2^9 = 512 <= 1000 < 1024
  CHECK_THROWS_AS(product_set_growth(Automorphism::identity(z2), {}, 3), ParameterError);
}

TEST_CASE("hyperbolic witness search") {
  const auto w = hyperbolic_witness_search(kCat, 1, 12);
  REQUIRE(w.witness);
  CHECK(w.hyperbolic);
  CHECK(brute_force_signed_sums({{2, 1}, {1, 1}}, *w.witness, 12) == 8192);
  for (std::size_t n = 0; n <= 12; ++n) CHECK(w.cardinalities[n] == (std::uint64_t{1} << (n + 1)));

  const auto id = hyperbolic_witness_search(IntMatrix::identity(2), 2, 1);
  CHECK_FALSE(id.witness);
  CHECK_FALSE(id.hyperbolic);

  const auto minus = hyperbolic_witness_search(-IntMatrix::identity(2), 2, 2);
  CHECK_FALSE(minus.witness);
  CHECK(minus.candidates_tried == 12);

  // distinct sums for every candidate of the cat map are not automatic: compare with brute force
  for (const auto& v : std::vector<std::vector<std::int64_t>>{{1, 0}, {1, -1}, {2, 1}, {-1, 2}}) {
    const auto card = signed_sum_cardinalities(kCat, v, 9);
    for (std::size_t n = 0; n <= 9; ++n) CHECK(card[n] == brute_force_signed_sums({{2, 1}, {1, 1}}, v, n));
  }
}

TEST_CASE("entropy lower estimates") {
  auto z2 = GroupDescriptor::free_abelian(2);
  const auto cat = product_set_growth(Automorphism::matrix(z2, kCat), {z2->identity(), z2->vec({1, 0})}, 18);
  const auto le = entropy_lower_estimate(cat, 0.5);
  CHECK(std::abs(le.value - std::log(2.0)) < 1e-12);
  CHECK(le.window_lo == 12);
  CHECK(le.window_hi == 18);
  CHECK(le.certified_rates.size() == 18);
  CHECK(le.certified_rates[17] == doctest::Approx(std::log(0.75 * 262144) / 18));

  auto z1 = GroupDescriptor::free_abelian(1);
  const auto id = product_set_growth(Automorphism::identity(z1), {z1->identity(), z1->vec({1})}, 100);
  CHECK(entropy_lower_estimate(id, 0.5).value == doctest::Approx(std::log(101.0 / 100.0)));

  auto f2 = GroupDescriptor::free(2);
  const auto fr = product_set_growth(Automorphism::identity(f2), positive_words(*f2, 2), 6);
  CHECK(entropy_lower_estimate(fr, 0.5).value == doctest::Approx(2 * std::log(2.0)));

  CHECK(entropy_lower_estimate(cat, 0.1).value == entropy_lower_estimate(cat, 0.9).value);
  CHECK(entropy_lower_estimate(id, 0.1).value == entropy_lower_estimate(id, 0.9).value);

  ProductSetTrace short_trace = cat;
  short_trace.cardinalities.resize(5);
  CHECK_THROWS_AS(entropy_lower_estimate(short_trace, 0.5), ParameterError);
  CHECK_THROWS_AS(entropy_lower_estimate(cat, 1.0), ParameterError);
}

TEST_CASE("entropy lower estimate is monotone in the seed set") {
  auto g = GroupDescriptor::semidirect(-IntMatrix::identity(2), "Z^2 x_-I Z");
  const auto a = Automorphism::extended(g, kCat);
  const std::vector<GroupElement> small{g->identity(), g->pair({1, 0}, 0)};
  std::vector<GroupElement> big = small;
  big.push_back(g->pair({0, 1}, 0));
  const auto lo_small = entropy_lower_estimate(product_set_growth(a, small, 12), 0.5).value;
  const auto lo_big = entropy_lower_estimate(product_set_growth(a, big, 12), 0.5).value;
  CHECK(lo_big >= lo_small);
}

TEST_CASE("toral ceiling on random seed sets") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> c(-2, 2);
  auto z2 = GroupDescriptor::free_abelian(2);
  // Only hyperbolic maps: a unipotent map has ceiling 0 but its polynomial
  // growth still shows slopes of order (degree)/n at these depths.
  for (const auto& t : {kCat, IntMatrix::from_rows({{3, 2}, {1, 1}})}) {
    const double ceiling = eigen_entropy(t);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<GroupElement> seeds{z2->identity()};
      while (seeds.size() < 3) {
        auto x = z2->vec({c(rng), c(rng)});
        if (std::find(seeds.begin(), seeds.end(), x) == seeds.end()) seeds.push_back(x);
      }
      const auto tr = product_set_growth(Automorphism::matrix(z2, t), seeds, 15, 2'000'000);
      CHECK(entropy_lower_estimate(tr, 0.5).value <= ceiling + 0.02);
    }
  }
}

TEST_CASE("entropy upper certificates") {
  auto g = GroupDescriptor::semidirect(-IntMatrix::identity(2), "Z^2 x_-I Z");
  WordMetric m(g);
  const auto cat = Automorphism::extended(g, kCat);
  const auto lip = lipschitz_constant(cat, m, 4);
  UpperRequest req;
  req.growth_exponent = 3;
  const auto up = entropy_upper_certificate(cat, lip, req);
  CHECK(up.value == 3 * std::log(3.0));
  CHECK(up.lipschitz == 3);

  const auto id = Automorphism::identity(g);
  CHECK(entropy_upper_certificate(id, lipschitz_constant(id, m, 3), req).value == 0.0);

  UpperRequest inner;
  inner.mode = UpperMode::Inner;
  const auto ad = Automorphism::inner(g, g->t());
  CHECK(entropy_upper_certificate(ad, lipschitz_constant(ad, m, 3), inner).value == 0.0);
  CHECK_THROWS_AS(entropy_upper_certificate(cat, lip, inner), ParameterError);

  auto g3 = GroupDescriptor::semidirect(-IntMatrix::identity(3), "Z^3 x_-I Z");
  WordMetric m3(g3);
  const auto heis = Automorphism::extended(g3, IntMatrix::heisenberg(3));
  UpperRequest poly;
  poly.mode = UpperMode::PolynomialLength;
  CHECK_THROWS_AS(entropy_upper_certificate(heis, lipschitz_constant(heis, m3, 2), poly), ParameterError);
  poly.polynomial_bound_verified = true;
  CHECK(entropy_upper_certificate(heis, lipschitz_constant(heis, m3, 2), poly).value == 0.0);

  UpperRequest order;
  order.mode = UpperMode::Order;
  CHECK_THROWS_AS(entropy_upper_certificate(cat, lip, order), ParameterError);
  order.k = 4;
  order.mdim_upper = 1.5;
  CHECK(entropy_upper_certificate(cat, lip, order).value == doctest::Approx(4 * 1.5 * std::log(3.0)));
  CHECK_THROWS_AS(entropy_upper_certificate(cat, lip, UpperRequest{}), ParameterError);
}

TEST_CASE("mdim slopes") {
  std::vector<double> grid;
  for (int i = 0; i < 8; ++i) grid.push_back(std::pow(10.0, -1.0 - 3.0 * i / 7.0));

  auto z1 = GroupDescriptor::free_abelian(1);
  MdimOptions o1;
  o1.growth_exponent = 1;
  const auto e1 = mdim_slope_estimate(WordMetric(z1), 2, grid, o1);
  CHECK(e1.lower_slope == doctest::Approx(0.5).epsilon(0.1));
  CHECK(e1.lower_slope >= 0.5 - 0.05);
  CHECK(*e1.bracket_upper == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(e1.infinite_signature);
  // |U_delta| = 2 floor(delta^{-1/2}) + 1
  for (const auto& p : e1.points)
    CHECK(p.lower_log == doctest::Approx(std::log(0.75 * (2.0 * std::floor(std::pow(p.delta, -0.5) + 1e-9) + 1))));

  auto z2 = GroupDescriptor::free_abelian(2);
  MdimOptions o2;
  o2.growth_exponent = 2;
  o2.c_hat = 1.0;
  const auto e2 = mdim_slope_estimate(WordMetric(z2), 3, grid, o2);
  CHECK(e2.lower_slope >= 1.0 / 3 - 0.05);
  CHECK(e2.lower_slope <= 1.0 + 0.05);
  CHECK(e2.lower_slope == doctest::Approx(2.0 / 3).epsilon(0.15));
  CHECK(e2.upper_slope.has_value());
  CHECK(*e2.upper_slope >= e2.lower_slope);
  CHECK_FALSE(e2.infinite_signature);

  auto f2 = GroupDescriptor::free(2);
  const auto ef = mdim_slope_estimate(WordMetric(f2), 3, grid, {});
  CHECK(ef.infinite_signature);
  CHECK(ef.second_half_slope > 2 * ef.first_half_slope);

  CHECK_THROWS_AS(mdim_slope_estimate(WordMetric(z2), 2, grid, o2), ParameterError);
  CHECK_THROWS_AS(mdim_slope_estimate(WordMetric(z2), 3, {0.1, 0.05, 0.02, 0.01, 0.005}, o2), ParameterError);
  CHECK_THROWS_AS(mdim_slope_estimate(WordMetric(z2), 3, {0.1, 0.01, 0.001}, o2), ParameterError);
}

TEST_CASE("rapid decay constant sampling") {
  std::mt19937_64 rng(10);
  auto z2 = GroupDescriptor::free_abelian(2);
  const auto c = estimate_rapid_decay_constant(WordMetric(z2), 2, 50, 3, rng);
  CHECK(c.samples == 50);
  CHECK(c.norm_method == "dft-upper");
  CHECK(c.c_hat > 0);
  CHECK(c.c_hat <= 1.0 + 1e-9);  // ||f||_red <= ||f||_2 * sqrt(|supp|) and (1+l)^2 >= 1 bounds it by l1/l2 scaling
}

TEST_CASE("exports") {
  auto z1 = GroupDescriptor::free_abelian(1);
  const auto id = product_set_growth(Automorphism::identity(z1), {z1->identity(), z1->vec({1})}, 6);
  std::ostringstream csv;
  write_csv(csv, id);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,cardinality,rate");
  std::getline(in, line);
  CHECK(line.rfind("1,2,", 0) == 0);
  const auto j = to_json(id);
  CHECK(j["cardinalities"].size() == 6);
  CHECK(to_json(entropy_lower_estimate(id, 0.5))["certificate"].get<std::string>().find("Voiculescu") !=
        std::string::npos);
}
