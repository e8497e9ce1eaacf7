#include "cqms/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

#include "cqms/checked_int.hpp"
#include "cqms/errors.hpp"

namespace cqms {

namespace {

// Open-addressing set of fixed-width int64 tuples stored back to back.
class FlatTupleSet {
 public:
  explicit FlatTupleSet(std::size_t width) : width_(width), slots_(1024, 0) {}

  std::size_t size() const { return count_; }
  std::size_t width() const { return width_; }
  const std::int64_t* at(std::size_t i) const { return arena_.data() + i * width_; }

  bool insert(const std::int64_t* p) {
    if (2 * (count_ + 1) > slots_.size()) grow();
    std::size_t s = probe(p);
    if (slots_[s] != 0) return false;
    arena_.insert(arena_.end(), p, p + width_);
    slots_[s] = static_cast<std::uint32_t>(++count_);
    return true;
  }

 private:
  std::size_t hash(const std::int64_t* p) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < width_; ++i) h = splitmix64(h ^ static_cast<std::uint64_t>(p[i]));
    return static_cast<std::size_t>(h);
  }
  std::size_t probe(const std::int64_t* p) const {
    const std::size_t mask = slots_.size() - 1;
    std::size_t s = hash(p) & mask;
    while (slots_[s] != 0 && !std::equal(p, p + width_, at(slots_[s] - 1))) s = (s + 1) & mask;
    return s;
  }
  void grow() {
    std::vector<std::uint32_t> old(slots_.size() * 2, 0);
    old.swap(slots_);
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = 0; i < count_; ++i) {
      std::size_t s = hash(at(i)) & mask;
      while (slots_[s] != 0) s = (s + 1) & mask;
      slots_[s] = static_cast<std::uint32_t>(i + 1);
    }
  }

  std::size_t width_;
  std::vector<std::int64_t> arena_;
  std::vector<std::uint32_t> slots_;
  std::size_t count_ = 0;
};

// Elements of one fixed width with machine-size coordinates go to the flat
// table; everything else to a node-based set.
class ElementSet {
 public:
  explicit ElementSet(std::optional<std::size_t> width) {
    if (width) flat_.emplace(*width);
  }
  std::size_t size() const { return (flat_ ? flat_->size() : 0) + other_.size(); }
  bool insert(const GroupElement& g) {
    if (flat_ && !g.is_wide() && g.size() == flat_->width()) return flat_->insert(g.coords().data());
    return other_.insert(g).second;
  }
  template <class F>
  void for_each(F&& f) const {
    if (flat_)
      for (std::size_t i = 0; i < flat_->size(); ++i) {
        const std::int64_t* p = flat_->at(i);
        f(GroupElement(std::vector<std::int64_t>(p, p + flat_->width())));
      }
    for (const auto& g : other_) f(g);
  }

 private:
  std::optional<FlatTupleSet> flat_;
  std::unordered_set<GroupElement, GroupElementHash> other_;
};

std::optional<std::size_t> fixed_width(const GroupDescriptor& g) {
  switch (g.kind()) {
    case GroupKind::FreeAbelian:
      return g.rank();
    case GroupKind::Semidirect:
      return g.rank() + 1;
    case GroupKind::Free:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

double ProductSetTrace::rate(std::size_t n) const {
  if (n == 0 || n > cardinalities.size()) throw ParameterError("rate index outside the trace");
  return std::log(static_cast<double>(cardinalities[n - 1])) / static_cast<double>(n);
}

ProductSetTrace product_set_growth(const Automorphism& alpha, const std::vector<GroupElement>& seeds,
                                   std::size_t n_max, std::uint64_t cap) {
  if (seeds.empty()) throw ParameterError("product set needs a nonempty seed set");
  if (cap == 0) throw ParameterError("cardinality cap must be positive");
  const auto& group = *alpha.group();
  for (const auto& s : seeds) group.check(s);

  ProductSetTrace trace;
  trace.automorphism = alpha.describe();
  trace.seeds = seeds;
  trace.cap = cap;
  const auto width = fixed_width(group);

  ElementSet current(width);
  for (const auto& s : seeds) current.insert(s);
  if (n_max == 0) return trace;
  trace.cardinalities.push_back(current.size());

  for (std::size_t n = 1; n < n_max; ++n) {
    std::vector<GroupElement> layer;
    {
      std::unordered_set<GroupElement, GroupElementHash> uniq;
      for (const auto& s : seeds) uniq.insert(alpha.apply_power(s, n));
      layer.assign(uniq.begin(), uniq.end());
      std::sort(layer.begin(), layer.end());
    }
    ElementSet next(width);
    bool over = false;
    current.for_each([&](const GroupElement& x) {
      if (over) return;
      for (const auto& y : layer) {
        next.insert(group.multiply(x, y));
        if (next.size() > cap) {
          over = true;
          return;
        }
      }
    });
    if (over) {
      trace.truncated = true;
      break;
    }
    trace.cardinalities.push_back(next.size());
    current = std::move(next);
  }
  return trace;
}

std::vector<std::uint64_t> signed_sum_cardinalities(const IntMatrix& psi, const std::vector<std::int64_t>& v,
                                                    std::size_t n_check) {
  const std::size_t d = psi.dim();
  if (v.size() != d) throw StructuralError("witness candidate has the wrong dimension");
  const auto small = psi.to_int64();
  if (!small) throw ResourceError("matrix entries exceed machine integers", 0);
  std::vector<std::uint64_t> out;
  std::vector<std::int64_t> sums;  // flat list of the current sums
  FlatTupleSet seen(d);
  std::vector<std::int64_t> zero(d, 0);
  sums = zero;
  seen.insert(zero.data());
  std::vector<std::int64_t> term = v;
  std::vector<std::int64_t> tmp(d);
  try {
    for (std::size_t n = 0; n <= n_check; ++n) {
      if (n > 0) {
        std::vector<CheckedInt> w(term.begin(), term.end());
        auto next = mat_vec<CheckedInt>(*small, d, w);
        for (std::size_t i = 0; i < d; ++i) term[i] = next[i].value();
      }
      const std::size_t count = sums.size() / d;
      for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t i = 0; i < d; ++i) tmp[i] = (CheckedInt(sums[s * d + i]) + CheckedInt(term[i])).value();
        if (seen.insert(tmp.data())) sums.insert(sums.end(), tmp.begin(), tmp.end());
      }
      out.push_back(seen.size());
    }
  } catch (const Overflow&) {
    throw ResourceError("signed sums left the machine-integer range", out.size());
  }
  return out;
}

WitnessSearch hyperbolic_witness_search(const IntMatrix& psi, std::uint64_t search_radius, std::size_t n_check) {
  WitnessSearch out;
  const auto h = hyperbolicity_check(psi);
  out.hyperbolic = h.hyperbolic;
  out.max_modulus = h.max_modulus;
  const std::size_t d = psi.dim();
  const auto r = static_cast<std::int64_t>(search_radius);

  std::vector<std::vector<std::int64_t>> candidates;
  std::vector<std::int64_t> v(d, -r);
  while (true) {
    std::int64_t l1 = 0;
    for (auto c : v) l1 += std::abs(c);
    if (l1 > 0 && l1 <= r) candidates.push_back(v);
    std::size_t i = d;
    while (i > 0 && v[i - 1] == r) v[--i] = -r;
    if (i == 0) break;
    ++v[i - 1];
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    std::int64_t la = 0, lb = 0;
    for (auto c : a) la += std::abs(c);
    for (auto c : b) lb += std::abs(c);
    return la < lb;
  });

  for (const auto& c : candidates) {
    ++out.candidates_tried;
    auto card = signed_sum_cardinalities(psi, c, n_check);
    bool ok = true;
    for (std::size_t n = 0; n < card.size(); ++n)
      if (card[n] != (std::uint64_t{1} << (n + 1))) ok = false;
    out.cardinalities = std::move(card);
    if (ok) {
      out.witness = c;
      break;
    }
  }
  return out;
}

EntropyLowerEstimate entropy_lower_estimate(const ProductSetTrace& trace, double delta, double window_fraction) {
  if (!(delta > 0 && delta < 1)) throw ParameterError("entropy lower estimate needs delta in (0, 1)");
  if (!(window_fraction > 0 && window_fraction <= 1)) throw ParameterError("window fraction must lie in (0, 1]");
  const std::size_t n = trace.length();
  if (n < 6) throw ParameterError("entropy lower estimate needs at least 6 trace points");
  EntropyLowerEstimate est;
  est.delta = delta;
  const auto span = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n) - 1e-9)));
  est.window_hi = n;
  est.window_lo = n - std::min(span, n - 1);
  for (std::size_t m = est.window_lo; m < est.window_hi; ++m)
    est.window_slopes.push_back(std::log(static_cast<double>(trace.cardinalities[m])) -
                                std::log(static_cast<double>(trace.cardinalities[m - 1])));
  est.value = std::max(0.0, *std::min_element(est.window_slopes.begin(), est.window_slopes.end()));
  for (std::size_t m = 1; m <= n; ++m)
    est.certified_rates.push_back(
        std::log((1 - delta * delta) * static_cast<double>(trace.cardinalities[m - 1])) / static_cast<double>(m));
  est.certificate = "D(Omega_n, delta) >= (1 - delta^2)|P_n| (orthonormal delta_g, Voiculescu); min window slope of log|P_n| over n in [" +
                    std::to_string(est.window_lo) + ", " + std::to_string(est.window_hi) + "]";
  return est;
}

std::string to_string(UpperMode m) {
  switch (m) {
    case UpperMode::Growth:
      return "growth";
    case UpperMode::Order:
      return "order";
    case UpperMode::PolynomialLength:
      return "polynomial-length";
    case UpperMode::Inner:
      return "inner";
  }
  return "?";
}

EntropyUpperCertificate entropy_upper_certificate(const Automorphism& alpha, const LipschitzCertificate& lip,
                                                  const UpperRequest& request) {
  EntropyUpperCertificate c;
  c.mode = request.mode;
  c.lipschitz = lip.constant;
  const double log_lambda = std::log(static_cast<double>(lip.constant));
  switch (request.mode) {
    case UpperMode::Growth:
      if (!request.growth_exponent) throw ParameterError("growth-mode certificate needs a growth exponent");
      c.value = *request.growth_exponent * log_lambda;
      c.certificate = "Entp <= r log(lambda), r = " + std::to_string(*request.growth_exponent) +
                      ", lambda = " + std::to_string(lip.constant);
      break;
    case UpperMode::Order:
      if (!request.k || !request.mdim_upper)
        throw ParameterError("order-mode certificate needs k and an Mdim upper estimate");
      c.value = static_cast<double>(*request.k) * *request.mdim_upper * log_lambda;
      c.certificate = "Entp <= k d log(lambda), k = " + std::to_string(*request.k) +
                      ", d = " + std::to_string(*request.mdim_upper) + ", lambda = " + std::to_string(lip.constant);
      break;
    case UpperMode::PolynomialLength:
      if (alpha.kind() != AutomorphismKind::Extended && alpha.kind() != AutomorphismKind::Matrix)
        throw ParameterError("polynomial-length certificate applies to matrix automorphisms");
      if (!request.polynomial_bound_verified)
        throw ParameterError("polynomial-length certificate needs a passed length-bound check");
      c.value = 0;
      c.certificate = "Entp = 0: l(alpha^n(g)) <= d n^(d-1) l(g) on a group of polynomial growth";
      break;
    case UpperMode::Inner:
      if (alpha.kind() != AutomorphismKind::Inner && alpha.kind() != AutomorphismKind::Identity)
        throw ParameterError("inner certificate applies to inner automorphisms");
      c.value = 0;
      c.certificate = "Entp = 0: inner automorphism of a group of polynomial growth";
      break;
  }
  return c;
}

void write_csv(std::ostream& out, const ProductSetTrace& trace) {
  out << "n,cardinality,rate\n";
  out.precision(17);
  for (std::size_t n = 1; n <= trace.length(); ++n)
    out << n << "," << trace.cardinalities[n - 1] << "," << trace.rate(n) << "\n";
}

nlohmann::json to_json(const ProductSetTrace& trace) {
  nlohmann::json rates = nlohmann::json::array();
  for (std::size_t n = 1; n <= trace.length(); ++n) rates.push_back(trace.rate(n));
  return {{"automorphism", trace.automorphism},
          {"seed_count", trace.seeds.size()},
          {"cardinalities", trace.cardinalities},
          {"rates", rates},
          {"truncated", trace.truncated},
          {"cap", trace.cap}};
}

nlohmann::json to_json(const EntropyLowerEstimate& e) {
  return {{"value", e.value},
          {"certificate", e.certificate},
          {"delta", e.delta},
          {"window", {e.window_lo, e.window_hi}},
          {"window_slopes", e.window_slopes},
          {"certified_rates", e.certified_rates}};
}

nlohmann::json to_json(const EntropyUpperCertificate& e) {
  return {{"value", e.value}, {"mode", to_string(e.mode)}, {"lipschitz", e.lipschitz}, {"certificate", e.certificate}};
}

nlohmann::json to_json(const WitnessSearch& w) {
  nlohmann::json j{{"hyperbolic", w.hyperbolic},
                   {"max_modulus", w.max_modulus},
                   {"candidates_tried", w.candidates_tried},
                   {"cardinalities", w.cardinalities}};
  j["witness"] = w.witness ? nlohmann::json(*w.witness) : nlohmann::json(nullptr);
  return j;
}

}  // namespace cqms
