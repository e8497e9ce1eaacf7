#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqms/automorphism.hpp"
#include "cqms/spectrum.hpp"

namespace cqms {

struct ProductSetTrace {
  std::string automorphism;
  std::vector<GroupElement> seeds;
  /// cardinalities[n-1] = |P_n| for each computed n
  std::vector<std::uint64_t> cardinalities;
  bool truncated = false;
  std::uint64_t cap = 0;

  std::size_t length() const { return cardinalities.size(); }
  /// (1/n) log|P_n|
  double rate(std::size_t n) const;
};

/// P_1 = seeds, P_{n+1} = P_n alpha^n(seeds), with exact hashing of normal
/// forms. Stops early, flagging the trace, when |P_{n+1}| would pass `cap`.
ProductSetTrace product_set_growth(const Automorphism& alpha, const std::vector<GroupElement>& seeds,
                                   std::size_t n_max, std::uint64_t cap = 10'000'000);

struct WitnessSearch {
  std::optional<std::vector<std::int64_t>> witness;
  bool hyperbolic = false;
  double max_modulus = 0;
  std::size_t candidates_tried = 0;
  /// |T^(n)| for n = 0..n_check for the witness (or the last candidate tried)
  std::vector<std::uint64_t> cardinalities;
};

/// First v in B_radius(Z^d) \ {0}, ordered by l1 norm then lexicographically,
/// whose sums sum_{i<=n} eps_i psi^i(v), eps_i in {0,1}, are pairwise distinct
/// for every n <= n_check.
WitnessSearch hyperbolic_witness_search(const IntMatrix& psi, std::uint64_t search_radius, std::size_t n_check);

/// |T^(n)| for n = 0..n_check.
std::vector<std::uint64_t> signed_sum_cardinalities(const IntMatrix& psi, const std::vector<std::int64_t>& v,
                                                    std::size_t n_check);

struct EntropyLowerEstimate {
  /// min over the window of log|P_{n+1}| - log|P_n|
  double value = 0;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  std::vector<double> window_slopes;
  /// (1/n) log((1 - delta^2)|P_n|) for every n in the trace
  std::vector<double> certified_rates;
  double delta = 0;
  std::string certificate;
};

/// Needs at least 6 untruncated points; the window is the last `window_fraction` of them.
EntropyLowerEstimate entropy_lower_estimate(const ProductSetTrace& trace, double delta,
                                            double window_fraction = 1.0 / 3.0);

enum class UpperMode { Growth, Order, PolynomialLength, Inner };
std::string to_string(UpperMode m);

struct UpperRequest {
  UpperMode mode = UpperMode::Growth;
  std::optional<double> growth_exponent;  // Growth
  std::optional<unsigned> k;              // Order
  std::optional<double> mdim_upper;       // Order
  /// PolynomialLength: the Heisenberg length-bound check must have passed.
  bool polynomial_bound_verified = false;
};

struct EntropyUpperCertificate {
  double value = 0;
  UpperMode mode = UpperMode::Growth;
  std::uint64_t lipschitz = 1;
  std::string certificate;
};

EntropyUpperCertificate entropy_upper_certificate(const Automorphism& alpha, const LipschitzCertificate& lip,
                                                  const UpperRequest& request);

void write_csv(std::ostream& out, const ProductSetTrace& trace);
nlohmann::json to_json(const ProductSetTrace& trace);
nlohmann::json to_json(const EntropyLowerEstimate& e);
nlohmann::json to_json(const EntropyUpperCertificate& e);
nlohmann::json to_json(const WitnessSearch& w);

}  // namespace cqms
