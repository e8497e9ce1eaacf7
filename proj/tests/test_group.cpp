#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "cqms/errors.hpp"
#include "cqms/growth.hpp"
#include "cqms/word_metric.hpp"

using namespace cqms;

namespace {

GroupPtr minus_identity_semidirect(std::size_t d) {
  return GroupDescriptor::semidirect(-IntMatrix::identity(d), "Z^" + std::to_string(d) + " x_-I Z");
}

GroupPtr cat_semidirect() {
  return GroupDescriptor::semidirect(IntMatrix::from_rows({{2, 1}, {1, 1}}), "Z^2 x_cat Z");
}

// Brute-force oracle: all products of at most n generators, multiplied with an
// independent pair-arithmetic implementation for semidirect products.
std::set<std::vector<std::int64_t>> brute_force_semidirect_ball(
    const std::vector<std::vector<std::int64_t>>& phi, std::size_t n) {
  const std::size_t d = phi.size();
  auto matpow = [&](std::int64_t k, const std::vector<std::int64_t>& w) {
    // phi is an involution or general; apply |k| times phi (or phi^-1 by solving 2x2/diag cases)
    std::vector<std::int64_t> out = w;
    const std::int64_t steps = k < 0 ? -k : k;
    for (std::int64_t s = 0; s < steps; ++s) {
      std::vector<std::int64_t> nxt(d, 0);
      if (k > 0) {
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t c = 0; c < d; ++c) nxt[r] += phi[r][c] * out[c];
      } else {
        // only used with 2x2 unimodular matrices here: inverse via adjugate
        const std::int64_t det = phi[0][0] * phi[1][1] - phi[0][1] * phi[1][0];
        const std::int64_t inv[2][2] = {{phi[1][1] * det, -phi[0][1] * det},
                                        {-phi[1][0] * det, phi[0][0] * det}};
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t c = 0; c < d; ++c) nxt[r] += inv[r][c] * out[c];
      }
      out = nxt;
    }
    return out;
  };
  std::vector<std::vector<std::int64_t>> gens;
  for (std::size_t i = 0; i <= d; ++i)
    for (int s : {1, -1}) {
      std::vector<std::int64_t> g(d + 1, 0);
      g[i] = s;
      gens.push_back(g);
    }
  std::set<std::vector<std::int64_t>> seen{std::vector<std::int64_t>(d + 1, 0)};
  std::vector<std::vector<std::int64_t>> layer{std::vector<std::int64_t>(d + 1, 0)};
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<std::vector<std::int64_t>> next;
    for (const auto& a : layer)
      for (const auto& b : gens) {
        std::vector<std::int64_t> w(b.begin(), b.end() - 1);
        auto moved = matpow(a[d], w);
        std::vector<std::int64_t> p(d + 1);
        for (std::size_t i = 0; i < d; ++i) p[i] = a[i] + moved[i];
        p[d] = a[d] + b[d];
        next.push_back(p);
      }
    for (auto& p : next) seen.insert(p);
    layer = std::move(next);
  }
  return seen;
}

}  // namespace

TEST_CASE("multiply: normal-form group laws") {
  auto z2 = GroupDescriptor::free_abelian(2);
  CHECK(z2->multiply(z2->vec({1, 2}), z2->vec({3, -1})) == z2->vec({4, 1}));

  auto f2 = GroupDescriptor::free(2);
  CHECK(f2->multiply(f2->word("ab"), f2->word("Ba")) == f2->word("aa"));
  CHECK(f2->word("abBA") == f2->identity());

  auto s = minus_identity_semidirect(2);
  CHECK(s->multiply(s->pair({1, 0}, 1), s->pair({1, 0}, 0)) == s->pair({0, 0}, 1));
}

TEST_CASE("multiply: descriptor mismatch is a structural error") {
  auto z2 = GroupDescriptor::free_abelian(2);
  auto z3 = GroupDescriptor::free_abelian(3);
  CHECK_THROWS_AS(z2->multiply(z2->vec({1, 2}), z3->vec({1, 2, 3})), StructuralError);
  auto f2 = GroupDescriptor::free(2);
  CHECK_THROWS_AS(f2->check(GroupElement({1, -1})), StructuralError);
  CHECK_THROWS_AS(f2->check(GroupElement({3})), StructuralError);
}

TEST_CASE("semidirect relation t x t^-1 = phi(x) for every generator") {
  for (auto g : {minus_identity_semidirect(2), cat_semidirect(),
                 GroupDescriptor::semidirect(IntMatrix::heisenberg(3))}) {
    const auto t = g->t();
    for (std::size_t i = 1; i <= g->rank(); ++i) {
      const auto lhs = g->multiply(g->multiply(t, g->x(i)), g->inverse(t));
      std::vector<std::int64_t> col(g->rank());
      for (std::size_t r = 0; r < g->rank(); ++r)
        col[r] = static_cast<std::int64_t>(g->twist()(r, i - 1));
      CHECK(lhs == g->pair(col, 0));
    }
  }
}

TEST_CASE("group axioms on random elements, including the BigInt path") {
  std::mt19937_64 rng(7);
  for (auto g : {GroupDescriptor::free_abelian(3), GroupDescriptor::free(2),
                 minus_identity_semidirect(2), cat_semidirect()}) {
    const auto& gens = g->generators();
    auto random_element = [&](int len) {
      GroupElement x = g->identity();
      for (int i = 0; i < len; ++i) x = g->multiply(x, gens[rng() % gens.size()]);
      return x;
    };
    for (int trial = 0; trial < 50; ++trial) {
      const auto a = random_element(8), b = random_element(8), c = random_element(8);
      CHECK(g->multiply(g->multiply(a, b), c) == g->multiply(a, g->multiply(b, c)));
      CHECK(g->multiply(a, g->inverse(a)) == g->identity());
      CHECK(g->multiply(g->identity(), a) == a);
    }
  }
  // Coordinates beyond int64 switch storage and stay canonical.
  auto cat = cat_semidirect();
  const auto far = cat->multiply(cat->pair({0, 0}, 200), cat->x(1));
  CHECK(far.is_wide());
  const auto back = cat->multiply(cat->multiply(cat->pair({0, 0}, -200), far), cat->inverse(cat->x(1)));
  CHECK(back == cat->identity());
  CHECK_FALSE(back.is_wide());
  auto z1 = GroupDescriptor::free_abelian(1);
  const auto big = z1->multiply(z1->vec({INT64_MAX}), z1->vec({INT64_MAX}));
  CHECK(big.is_wide());
  CHECK(big.coord(0) == BigInt(INT64_MAX) * 2);
  CHECK(z1->multiply(big, z1->inverse(big)) == z1->identity());
}

TEST_CASE("wordLength examples") {
  auto z2 = GroupDescriptor::free_abelian(2);
  WordMetric mz2(z2);
  CHECK(mz2.length(z2->vec({3, -2})) == 5);
  auto f2 = GroupDescriptor::free(2);
  WordMetric mf2(f2);
  CHECK(mf2.length(f2->word("abA")) == 3);
  auto s = minus_identity_semidirect(2);
  WordMetric ms(s);
  CHECK(ms.bfs_length(s->pair({1, 1}, 2)) == 4);
  CHECK(ms.length(s->pair({1, 1}, 2)) == 4);
  CHECK(ms.closed_form_active());
}

TEST_CASE("closed forms agree with BFS wherever both exist") {
  for (auto g : {GroupDescriptor::free_abelian(2), GroupDescriptor::free(2),
                 minus_identity_semidirect(2), minus_identity_semidirect(3)}) {
    WordMetric bfs(g, {.use_closed_form_accelerator = false});
    WordMetric fast(g);
    const auto b = bfs.ball(5);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(bfs.bfs_length(b.elements[i]) == b.lengths[i]);
      CHECK(fast.length(b.elements[i]) == b.lengths[i]);
    }
  }
}

TEST_CASE("closed-form accelerator is rejected when it is false") {
  // phi = cat is not signed-diagonal, so no accelerator; lengths come from BFS.
  auto cat = cat_semidirect();
  WordMetric m(cat);
  CHECK_FALSE(m.closed_form_active());
  // t x1 t^-1 = ((2,1),0): length 3 both ways.
  const auto g = cat->pair({2, 1}, 0);
  CHECK(m.length(g) == 3);
  // t^2 x1 t^-2 = ((5,3),0) has length 5 while ||v||_1 + |k| = 8.
  const auto h = cat->pair({5, 3}, 0);
  CHECK(m.length(h) == 5);
  CHECK(cat->semidirect_length_upper_bound(h) == 8);
}

TEST_CASE("ball examples and brute-force oracle") {
  auto f2 = GroupDescriptor::free(2);
  CHECK(WordMetric(f2).ball(1).size() == 5);
  auto z1 = GroupDescriptor::free_abelian(1);
  CHECK(WordMetric(z1).ball(3).size() == 7);

  auto s = minus_identity_semidirect(2);
  const auto b = WordMetric(s).ball(2);
  // Same count as the radius-2 l1 ball of Z^3, as ||v||_1 + |k| predicts.
  CHECK(b.size() == 25);
  CHECK(BigInt(b.size()) == free_abelian_ball_count(3, 2));
  const auto oracle = brute_force_semidirect_ball({{-1, 0}, {0, -1}}, 2);
  REQUIRE(oracle.size() == 25);
  for (const auto& g : b.elements)
    CHECK(oracle.count(std::vector<std::int64_t>(g.coords().begin(), g.coords().end())) == 1);

  auto cat = cat_semidirect();
  const auto bc = WordMetric(cat).ball(4);
  const auto oc = brute_force_semidirect_ball({{2, 1}, {1, 1}}, 4);
  CHECK(bc.size() == oc.size());
  // lexicographic order
  CHECK(std::is_sorted(bc.elements.begin(), bc.elements.end()));
  CHECK(bc.cumulative.front() == 1);
  CHECK(bc.cumulative.back() == bc.size());
}

TEST_CASE("growth sequences match closed forms and brute-force counts") {
  auto f2 = GroupDescriptor::free(2);
  const auto seq = WordMetric(f2).growth_sequence(9);
  for (const auto& [n, c] : seq) CHECK(c == 2 * static_cast<std::uint64_t>(std::pow(3, n)) - 1);

  auto z2 = GroupDescriptor::free_abelian(2);
  const auto sz = WordMetric(z2).growth_sequence(20);
  for (const auto& [n, c] : sz) {
    std::uint64_t brute = 0;
    const auto r = static_cast<std::int64_t>(n);
    for (std::int64_t a = -r; a <= r; ++a)
      for (std::int64_t b = -r; b <= r; ++b) brute += (std::llabs(a) + std::llabs(b) <= r);
    CHECK(c == brute);
    CHECK(c == 2 * n * n + 2 * n + 1);
    CHECK(BigInt(c) == free_abelian_ball_count(2, n));
  }

  auto f3 = GroupDescriptor::free(3);
  const auto s3 = WordMetric(f3).growth_sequence(6);
  for (const auto& [n, c] : s3) CHECK(BigInt(c) == free_group_ball_count(3, n));

  // Cached and frontier BFS agree.
  auto s = minus_identity_semidirect(2);
  WordMetric ms(s);
  const auto frontier = ms.growth_sequence(8);
  ms.ball(8);
  CHECK(ms.growth_sequence(8) == frontier);
  // Strictly increasing for infinite groups.
  for (std::size_t i = 1; i < frontier.size(); ++i) CHECK(frontier[i].second > frontier[i - 1].second);
}

TEST_CASE("BFS layering: every sphere element is a generator multiple of a smaller one") {
  auto cat = cat_semidirect();
  WordMetric m(cat);
  const auto b = m.ball(5);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.lengths[i] == 0) continue;
    bool found = false;
    for (const auto& s : cat->generators()) {
      auto idx = b.index_of(cat->multiply(b.elements[i], s));
      if (idx && b.lengths[*idx] + 1 == b.lengths[i]) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("word length is a length function on random pairs") {
  std::mt19937_64 rng(11);
  for (auto g : {GroupDescriptor::free(2), minus_identity_semidirect(2), cat_semidirect()}) {
    WordMetric m(g);
    const auto b = m.ball(4);
    for (int trial = 0; trial < 200; ++trial) {
      const auto& x = b.elements[rng() % b.size()];
      const auto& y = b.elements[rng() % b.size()];
      CHECK(m.length(g->multiply(x, y)) <= m.length(x) + m.length(y));
      CHECK(m.length(g->inverse(x)) == m.length(x));
      CHECK((m.length(x) == 0) == (x == g->identity()));
    }
  }
}

TEST_CASE("horizon and budget errors") {
  auto cat = cat_semidirect();
  WordMetric m(cat, {.horizon = 3});
  const auto far = cat->pair({40, 0}, 0);
  try {
    m.length(far);
    FAIL("expected HorizonExceeded");
  } catch (const HorizonExceeded& e) {
    CHECK(e.required_radius() == 40);
  }
  WordMetric small(GroupDescriptor::free(2), {.max_elements = 100});
  try {
    small.ball(6);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(e.partial_radius() == 3);  // |B_3| = 53, |B_4| = 161
  }
}

TEST_CASE("growth fits") {
  auto counts = [](auto f, std::uint64_t n_max) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> c;
    for (std::uint64_t n = 0; n <= n_max; ++n) c.emplace_back(n, f(n));
    return c;
  };
  const auto z2 = counts([](std::uint64_t n) { return 2 * n * n + 2 * n + 1; }, 40);
  const auto fz2 = fit_growth(z2, {10, 40});
  CHECK(fz2.kind == GrowthKind::Polynomial);
  CHECK(fz2.exponent == doctest::Approx(2.0).epsilon(0.075));

  const auto f2 = counts([](std::uint64_t n) { return 2 * static_cast<std::uint64_t>(std::pow(3, n)) - 1; }, 12);
  const auto ff2 = fit_growth(f2, default_growth_window(12));
  CHECK(ff2.kind == GrowthKind::Exponential);
  CHECK(std::abs(ff2.rate - std::log(3.0)) < 0.02);

  const auto z1 = counts([](std::uint64_t n) { return 2 * n + 1; }, 40);
  const auto fz1 = fit_growth(z1, default_growth_window(40));
  CHECK(std::abs(fz1.exponent - 1.0) < 0.05);

  const auto cubic = counts([](std::uint64_t n) { return (n + 1) * (n + 1) * (n + 1); }, 40);
  CHECK(fit_growth(cubic, {10, 40}).kind == GrowthKind::Polynomial);

  const auto flat = counts([](std::uint64_t) { return std::uint64_t{8}; }, 10);
  CHECK(fit_growth(flat, {2, 10}).kind == GrowthKind::FiniteGroupLike);
  CHECK_THROWS_AS(fit_growth(z1, {1, 4}), ParameterError);
}

TEST_CASE("ball cache persists and is invalidated by descriptor mismatch") {
  const auto dir = std::filesystem::temp_directory_path() / "cqms_cache_test";
  std::filesystem::remove_all(dir);
  auto cat = cat_semidirect();
  WordMetric a(cat);
  a.ball(5);
  a.save_cache(dir / "cat.jsonl");
  WordMetric b(cat);
  CHECK(b.load_cache(dir / "cat.jsonl"));
  CHECK(b.cached_radius() == 5);
  CHECK(b.ball(5).elements == a.ball(5).elements);
  CHECK(b.ball(6).size() == a.ball(6).size());
  WordMetric other(minus_identity_semidirect(2));
  CHECK_FALSE(other.load_cache(dir / "cat.jsonl"));
  CHECK(other.cached_radius() == 0);
  std::filesystem::remove_all(dir);
}
