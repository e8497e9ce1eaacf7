#include "cqms/word_metric.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "cqms/errors.hpp"

namespace cqms {

std::optional<std::size_t> Ball::index_of(const GroupElement& g) const {
  auto it = std::lower_bound(elements.begin(), elements.end(), g);
  if (it == elements.end() || !(*it == g)) return std::nullopt;
  return static_cast<std::size_t>(it - elements.begin());
}

BigInt free_abelian_ball_count(std::size_t d, std::uint64_t n) {
  BigInt total = 0;
  BigInt cd = 1;  // C(d, j)
  BigInt cn = 1;  // C(n, j)
  BigInt two = 1;
  for (std::size_t j = 0; j <= d; ++j) {
    if (j > 0) {
      cd = cd * (d - j + 1) / j;
      cn = n >= j ? cn * (n - j + 1) / j : BigInt(0);
      two *= 2;
    }
    total += two * cd * cn;
  }
  return total;
}

BigInt free_group_ball_count(std::size_t m, std::uint64_t n) {
  BigInt total = 1;
  BigInt sphere = 2 * m;
  for (std::uint64_t j = 1; j <= n; ++j) {
    total += sphere;
    sphere *= 2 * m - 1;
  }
  return total;
}

WordMetric::WordMetric(GroupPtr group, MetricOptions options)
    : group_(std::move(group)), options_(options) {
  if (!group_) throw ParameterError("word metric needs a group");
  const GroupElement e = group_->identity();
  lengths_.emplace(e, 0);
  frontier_.push_back(e);
}

void WordMetric::grow_cache_locked(std::uint64_t radius) const {
  if (radius > options_.horizon) throw HorizonExceeded(radius, options_.horizon);
  const auto& gens = group_->generators();
  while (radius_ < radius) {
    std::vector<GroupElement> next;
    for (const auto& g : frontier_) {
      for (const auto& s : gens) {
        GroupElement h = group_->multiply(g, s);
        if (lengths_.find(h) != lengths_.end()) continue;
        if (lengths_.size() >= options_.max_elements)
          throw ResourceError("BFS element budget " + std::to_string(options_.max_elements) +
                                  " exhausted for " + group_->name(),
                              radius_);
        lengths_.emplace(h, static_cast<std::uint32_t>(radius_ + 1));
        next.push_back(std::move(h));
      }
    }
    std::sort(next.begin(), next.end());
    frontier_ = std::move(next);
    ++radius_;
  }
}

std::uint64_t WordMetric::bfs_length_locked(const GroupElement& g) const {
  group_->check(g);
  // Any element is reachable within its closed-form or ||v||_1+|k| bound.
  const std::uint64_t bound = group_->kind() == GroupKind::Semidirect
                                  ? group_->semidirect_length_upper_bound(g)
                                  : *group_->closed_form_length(g);
  for (;;) {
    auto it = lengths_.find(g);
    if (it != lengths_.end()) return it->second;
    if (radius_ >= bound) throw StructuralError("BFS failed to reach " + group_->format(g));
    if (radius_ >= options_.horizon) throw HorizonExceeded(bound, options_.horizon);
    grow_cache_locked(radius_ + 1);
  }
}

std::uint64_t WordMetric::signed_diagonal_length(const GroupElement& g) const {
  return group_->semidirect_length_upper_bound(g);
}

void WordMetric::validate_closed_form_locked() const {
  if (closed_form_ok_) return;
  if (!options_.use_closed_form_accelerator || group_->kind() != GroupKind::Semidirect ||
      !group_->has_signed_diagonal_twist()) {
    closed_form_ok_ = false;
    return;
  }
  grow_cache_locked(std::min(options_.closed_form_validation_radius, options_.horizon));
  bool ok = true;
  for (const auto& [g, len] : lengths_) {
    if (signed_diagonal_length(g) != len) {
      ok = false;
      break;
    }
  }
  closed_form_ok_ = ok;
}

bool WordMetric::closed_form_active() const {
  std::lock_guard lock(mutex_);
  validate_closed_form_locked();
  return *closed_form_ok_;
}

std::uint64_t WordMetric::cached_radius() const {
  std::lock_guard lock(mutex_);
  return radius_;
}

std::uint64_t WordMetric::length(const GroupElement& g) const {
  if (auto c = group_->closed_form_length(g)) return *c;
  std::lock_guard lock(mutex_);
  validate_closed_form_locked();
  if (*closed_form_ok_) return signed_diagonal_length(g);
  return bfs_length_locked(g);
}

std::uint64_t WordMetric::bfs_length(const GroupElement& g) const {
  std::lock_guard lock(mutex_);
  return bfs_length_locked(g);
}

Ball WordMetric::ball(std::uint64_t n) const {
  Ball b;
  b.radius = n;
  {
    std::lock_guard lock(mutex_);
    grow_cache_locked(n);
    b.elements.reserve(lengths_.size());
    for (const auto& [g, len] : lengths_)
      if (len <= n) b.elements.push_back(g);
  }
  std::sort(b.elements.begin(), b.elements.end());
  b.lengths.reserve(b.elements.size());
  b.cumulative.assign(n + 1, 0);
  {
    std::lock_guard lock(mutex_);
    for (const auto& g : b.elements) {
      const auto len = lengths_.at(g);
      b.lengths.push_back(len);
      ++b.cumulative[len];
    }
  }
  std::partial_sum(b.cumulative.begin(), b.cumulative.end(), b.cumulative.begin());
  return b;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> WordMetric::growth_sequence(
    std::uint64_t n_max) const {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  {
    std::lock_guard lock(mutex_);
    if (radius_ >= n_max) {
      std::vector<std::uint64_t> per(n_max + 1, 0);
      for (const auto& [g, len] : lengths_)
        if (len <= n_max) ++per[len];
      std::uint64_t acc = 0;
      for (std::uint64_t n = 0; n <= n_max; ++n) out.emplace_back(n, acc += per[n]);
      return out;
    }
  }
  // In a Cayley graph the neighbours of layer n lie in layers n-1, n, n+1.
  using Layer = std::unordered_set<GroupElement, GroupElementHash>;
  Layer previous;
  Layer current{group_->identity()};
  std::uint64_t total = 1;
  out.emplace_back(0, 1);
  const auto& gens = group_->generators();
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    Layer next;
    for (const auto& g : current)
      for (const auto& s : gens) {
        GroupElement h = group_->multiply(g, s);
        if (previous.count(h) || current.count(h)) continue;
        if (previous.size() + current.size() + next.size() >= options_.max_elements)
          throw ResourceError("frontier budget " + std::to_string(options_.max_elements) +
                                  " exhausted for " + group_->name(),
                              n - 1);
        next.insert(std::move(h));
      }
    total += next.size();
    out.emplace_back(n, total);
    previous = std::move(current);
    current = std::move(next);
  }
  return out;
}

BigInt WordMetric::ball_count(std::uint64_t n) const {
  switch (group_->kind()) {
    case GroupKind::FreeAbelian:
      return free_abelian_ball_count(group_->rank(), n);
    case GroupKind::Free:
      return free_group_ball_count(group_->rank(), n);
    case GroupKind::Semidirect:
      return growth_sequence(n).back().second;
  }
  return 0;
}

void WordMetric::save_cache(const std::filesystem::path& path) const {
  std::lock_guard lock(mutex_);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write cache " + path.string());
  nlohmann::json header{{"format_version", kCacheFormatVersion},
                        {"descriptor", group_->to_json()},
                        {"descriptor_hash", group_->fingerprint()},
                        {"radius", radius_}};
  out << header.dump() << '\n';
  std::vector<std::pair<GroupElement, std::uint32_t>> rows(lengths_.begin(), lengths_.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [g, len] : rows) {
    out << nlohmann::json{{"normal_form", group_->element_to_json(g)}, {"length", len}}.dump()
        << '\n';
  }
}

bool WordMetric::load_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format_version", -1) != kCacheFormatVersion ||
      header.value("descriptor_hash", std::string{}) != group_->fingerprint())
    return false;
  const auto radius = header.at("radius").get<std::uint64_t>();
  std::unordered_map<GroupElement, std::uint32_t, GroupElementHash> loaded;
  std::vector<GroupElement> frontier;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    GroupElement g = group_->element_from_json(rec.at("normal_form"));
    const auto len = rec.at("length").get<std::uint32_t>();
    if (len == radius) frontier.push_back(g);
    loaded.emplace(std::move(g), len);
  }
  std::sort(frontier.begin(), frontier.end());
  std::lock_guard lock(mutex_);
  if (radius <= radius_) return true;
  lengths_ = std::move(loaded);
  frontier_ = std::move(frontier);
  radius_ = radius;
  closed_form_ok_.reset();
  return true;
}

}  // namespace cqms
