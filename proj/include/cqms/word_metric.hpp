#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cqms/group.hpp"

namespace cqms {

struct MetricOptions {
  /// Largest radius the BFS length cache may be grown to.
  std::uint64_t horizon = 256;
  /// Element budget for any single BFS (cache or counting frontier).
  std::uint64_t max_elements = 6'000'000;
  /// Radius on which a conjectured closed form must match BFS before use.
  std::uint64_t closed_form_validation_radius = 8;
  bool use_closed_form_accelerator = true;
};

/// All elements of length <= radius, in lexicographic normal-form order.
struct Ball {
  std::uint64_t radius = 0;
  std::vector<GroupElement> elements;
  std::vector<std::uint32_t> lengths;  // parallel to elements
  /// cumulative[n] = |B_n| for n = 0..radius.
  std::vector<std::uint64_t> cumulative;

  std::size_t size() const { return elements.size(); }
  /// Position of g in elements, if present.
  std::optional<std::size_t> index_of(const GroupElement& g) const;
};

/// Word metric of a descriptor's symmetric generating set. Closed forms are
/// used where they are theorems (Z^d, F_m); otherwise lengths come from a
/// memoized breadth-first search of the Cayley graph. Safe for concurrent
/// readers; cache growth is serialized internally.
class WordMetric {
 public:
  explicit WordMetric(GroupPtr group, MetricOptions options = {});

  const GroupPtr& group() const { return group_; }
  const MetricOptions& options() const { return options_; }

  /// Exact word length. Throws HorizonExceeded when BFS would have to go past
  /// the horizon and no validated closed form applies.
  std::uint64_t length(const GroupElement& g) const;
  /// Word length from BFS alone, ignoring closed forms.
  std::uint64_t bfs_length(const GroupElement& g) const;

  /// Exact ball by BFS layering. Throws ResourceError past the element budget.
  Ball ball(std::uint64_t n) const;
  /// |B_n| for n = 0..n_max by frontier BFS (keeps three layers alive).
  std::vector<std::pair<std::uint64_t, std::uint64_t>> growth_sequence(std::uint64_t n_max) const;
  /// |B_n|, by closed form for Z^d and F_m, by BFS otherwise.
  BigInt ball_count(std::uint64_t n) const;

  /// Whether the +-1-diagonal closed form ||v||_1+|k| has been validated and is in use.
  bool closed_form_active() const;
  std::uint64_t cached_radius() const;

  /// JSON-lines cache: a header record then one record per element.
  void save_cache(const std::filesystem::path& path) const;
  /// Returns false (and loads nothing) if the file is for another descriptor or version.
  bool load_cache(const std::filesystem::path& path);

  static constexpr int kCacheFormatVersion = 1;

 private:
  void grow_cache_locked(std::uint64_t radius) const;
  std::uint64_t bfs_length_locked(const GroupElement& g) const;
  void validate_closed_form_locked() const;
  std::uint64_t signed_diagonal_length(const GroupElement& g) const;

  GroupPtr group_;
  MetricOptions options_;

  mutable std::mutex mutex_;
  mutable std::unordered_map<GroupElement, std::uint32_t, GroupElementHash> lengths_;
  mutable std::vector<GroupElement> frontier_;
  mutable std::uint64_t radius_ = 0;
  mutable std::optional<bool> closed_form_ok_;
};

/// |B_n| of the l1 ball in Z^d: sum_j 2^j C(d,j) C(n,j).
BigInt free_abelian_ball_count(std::size_t d, std::uint64_t n);
/// |B_n| in F_m: 1 + sum_{j=1..n} 2m(2m-1)^(j-1).
BigInt free_group_ball_count(std::size_t m, std::uint64_t n);

}  // namespace cqms
