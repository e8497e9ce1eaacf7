#include "cqms/group.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "cqms/errors.hpp"

namespace cqms {

// ---------------------------------------------------------------- elements

GroupElement GroupElement::from_big(const std::vector<BigInt>& coords) {
  GroupElement g;
  if (std::all_of(coords.begin(), coords.end(), [](const BigInt& x) { return fits_int64(x); })) {
    g.small_.reserve(coords.size());
    for (const auto& x : coords) g.small_.push_back(static_cast<std::int64_t>(x));
  } else {
    g.wide_ = std::make_shared<const std::vector<BigInt>>(coords);
  }
  return g;
}

std::vector<BigInt> GroupElement::big_coords() const {
  if (wide_) return *wide_;
  return {small_.begin(), small_.end()};
}

bool operator==(const GroupElement& a, const GroupElement& b) {
  if (a.is_wide() != b.is_wide()) return false;  // canonical storage
  if (!a.is_wide()) return a.small_ == b.small_;
  return *a.wide_ == *b.wide_;
}

std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b) {
  if (!a.is_wide() && !b.is_wide()) {
    return std::lexicographical_compare_three_way(a.small_.begin(), a.small_.end(),
                                                  b.small_.begin(), b.small_.end());
  }
  const auto x = a.big_coords();
  const auto y = b.big_coords();
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < y[i]) return std::strong_ordering::less;
    if (y[i] < x[i]) return std::strong_ordering::greater;
  }
  return x.size() <=> y.size();
}

std::size_t GroupElement::hash() const {
  std::size_t h = size();
  if (!wide_) {
    for (auto c : small_) hash_combine(h, static_cast<std::uint64_t>(c));
  } else {
    for (const auto& c : *wide_) hash_combine(h, std::hash<std::string>{}(c.str()));
  }
  return h;
}

// ---------------------------------------------------------------- kernels

namespace {

template <class T>
std::vector<T> to_vec(const GroupElement& g);

template <>
std::vector<CheckedInt> to_vec<CheckedInt>(const GroupElement& g) {
  if (g.is_wide()) throw Overflow{};
  return {g.coords().begin(), g.coords().end()};
}

template <>
std::vector<BigInt> to_vec<BigInt>(const GroupElement& g) {
  return g.big_coords();
}

GroupElement from_vec(const std::vector<CheckedInt>& v) {
  std::vector<std::int64_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](CheckedInt c) { return c.value(); });
  return GroupElement(std::move(out));
}

GroupElement from_vec(const std::vector<BigInt>& v) { return GroupElement::from_big(v); }

/// Runs kernel<CheckedInt>, retrying with BigInt if any step overflows.
template <class Kernel>
GroupElement with_fallback(Kernel&& kernel) {
  try {
    return from_vec(kernel(CheckedInt{}));
  } catch (const Overflow&) {
    return from_vec(kernel(BigInt{}));
  }
}

std::int64_t exponent_of(const GroupElement& g, std::size_t d) {
  if (g.is_wide()) {
    const BigInt k = g.coord(d);
    if (!fits_int64(k)) throw StructuralError("t-exponent exceeds 64 bits");
    return static_cast<std::int64_t>(k);
  }
  return g.coords()[d];
}

std::vector<std::int64_t> reduce_word(std::vector<std::int64_t> w) {
  std::vector<std::int64_t> out;
  out.reserve(w.size());
  for (auto l : w) {
    if (!out.empty() && out.back() == -l) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- descriptor

GroupPtr GroupDescriptor::free_abelian(std::size_t d) {
  if (d == 0) throw ParameterError("Z^d needs d >= 1");
  auto g = std::shared_ptr<GroupDescriptor>(new GroupDescriptor());
  g->kind_ = GroupKind::FreeAbelian;
  g->rank_ = d;
  g->name_ = "Z^" + std::to_string(d);
  g->finish();
  return g;
}

GroupPtr GroupDescriptor::free(std::size_t m) {
  if (m == 0) throw ParameterError("F_m needs m >= 1");
  auto g = std::shared_ptr<GroupDescriptor>(new GroupDescriptor());
  g->kind_ = GroupKind::Free;
  g->rank_ = m;
  g->name_ = "F_" + std::to_string(m);
  g->finish();
  return g;
}

GroupPtr GroupDescriptor::semidirect(const IntMatrix& phi, std::string name) {
  if (phi.dim() == 0) throw ParameterError("semidirect product needs d >= 1");
  if (!phi.is_unimodular()) throw ParameterError("twisting matrix must have determinant +-1");
  auto g = std::shared_ptr<GroupDescriptor>(new GroupDescriptor());
  g->kind_ = GroupKind::Semidirect;
  g->rank_ = phi.dim();
  g->phi_ = phi;
  g->name_ = name.empty() ? "Z^" + std::to_string(phi.dim()) + " x_" + phi.to_string() + " Z"
                          : std::move(name);
  g->finish();
  return g;
}

GroupPtr GroupDescriptor::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "free_abelian") return free_abelian(j.at("rank").get<std::size_t>());
  if (kind == "free") return free(j.at("rank").get<std::size_t>());
  if (kind == "semidirect") {
    const auto rows = j.at("twist").get<std::vector<std::vector<std::int64_t>>>();
    return semidirect(IntMatrix::from_rows(rows), j.value("name", std::string{}));
  }
  throw ParameterError("unknown group kind '" + kind + "'");
}

void GroupDescriptor::finish() {
  const std::size_t width = kind_ == GroupKind::Semidirect ? rank_ + 1 : rank_;
  auto unit = [&](std::size_t i, std::int64_t s) {
    std::vector<std::int64_t> v(width, 0);
    v[i] = s;
    return GroupElement(std::move(v));
  };
  const char* xs = "abcdefghijklmnopqrs";
  for (std::size_t i = 0; i < rank_; ++i) {
    const auto idx = static_cast<std::int64_t>(i + 1);
    std::string nm = kind_ == GroupKind::Free && i < 19 ? std::string(1, xs[i])
                                                        : "x" + std::to_string(i + 1);
    if (kind_ == GroupKind::Free) {
      generators_.push_back(GroupElement({idx}));
      generators_.push_back(GroupElement({-idx}));
    } else {
      generators_.push_back(unit(i, 1));
      generators_.push_back(unit(i, -1));
    }
    generator_names_.push_back(nm);
    generator_names_.push_back(nm + "^-1");
  }
  if (kind_ == GroupKind::Semidirect) {
    generators_.push_back(unit(rank_, 1));
    generators_.push_back(unit(rank_, -1));
    generator_names_.push_back("t");
    generator_names_.push_back("t^-1");
    phi_signed_diagonal_ = true;
    for (std::size_t r = 0; r < rank_; ++r)
      for (std::size_t c = 0; c < rank_; ++c) {
        const BigInt& e = phi_(r, c);
        if (r == c ? (e != 1 && e != -1) : e != 0) phi_signed_diagonal_ = false;
      }
  }
  const std::string canon = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  fingerprint_ = os.str();
}

const GroupDescriptor::TwistPower& GroupDescriptor::twist_power(std::int64_t k) const {
  std::lock_guard lock(power_mutex_);
  auto it = powers_.find(k);
  if (it == powers_.end()) {
    TwistPower p;
    p.big = phi_.power(k);
    p.small = p.big.to_int64();
    it = powers_.emplace(k, std::move(p)).first;
  }
  return it->second;  // map nodes are stable
}

GroupElement GroupDescriptor::identity() const {
  switch (kind_) {
    case GroupKind::Free:
      return GroupElement{};
    case GroupKind::FreeAbelian:
      return GroupElement(std::vector<std::int64_t>(rank_, 0));
    case GroupKind::Semidirect:
      return GroupElement(std::vector<std::int64_t>(rank_ + 1, 0));
  }
  return {};
}

void GroupDescriptor::check(const GroupElement& g) const {
  switch (kind_) {
    case GroupKind::FreeAbelian:
      if (g.size() != rank_) throw StructuralError("element is not in " + name_);
      return;
    case GroupKind::Semidirect:
      if (g.size() != rank_ + 1) throw StructuralError("element is not in " + name_);
      return;
    case GroupKind::Free: {
      if (g.is_wide()) throw StructuralError("element is not in " + name_);
      const auto w = g.coords();
      const auto m = static_cast<std::int64_t>(rank_);
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0 || w[i] > m || w[i] < -m)
          throw StructuralError("letter out of range for " + name_);
        if (i > 0 && w[i] == -w[i - 1]) throw StructuralError("word is not reduced");
      }
      return;
    }
  }
}

GroupElement GroupDescriptor::multiply(const GroupElement& a, const GroupElement& b) const {
  check(a);
  check(b);
  switch (kind_) {
    case GroupKind::Free: {
      const auto x = a.coords();
      const auto y = b.coords();
      std::size_t cancel = 0;
      while (cancel < x.size() && cancel < y.size() &&
             x[x.size() - 1 - cancel] == -y[cancel])
        ++cancel;
      std::vector<std::int64_t> out(x.begin(), x.end() - static_cast<std::ptrdiff_t>(cancel));
      out.insert(out.end(), y.begin() + static_cast<std::ptrdiff_t>(cancel), y.end());
      return GroupElement(std::move(out));
    }
    case GroupKind::FreeAbelian:
      return with_fallback([&](auto tag) {
        using T = decltype(tag);
        auto x = to_vec<T>(a);
        const auto y = to_vec<T>(b);
        for (std::size_t i = 0; i < rank_; ++i) x[i] += y[i];
        return x;
      });
    case GroupKind::Semidirect: {
      // (v,k)(w,m) = (v + phi^k w, k + m)
      const std::int64_t k = exponent_of(a, rank_);
      const TwistPower& pk = twist_power(k);
      return with_fallback([&](auto tag) {
        using T = decltype(tag);
        auto x = to_vec<T>(a);
        auto y = to_vec<T>(b);
        const T km = x[rank_] + y[rank_];
        y.pop_back();
        std::vector<T> moved;
        if constexpr (std::is_same_v<T, CheckedInt>) {
          if (!pk.small) throw Overflow{};
          moved = mat_vec<T>(*pk.small, rank_, y);
        } else {
          moved = pk.big.apply(y);
        }
        for (std::size_t i = 0; i < rank_; ++i) x[i] += moved[i];
        x[rank_] = km;
        return x;
      });
    }
  }
  return {};
}

GroupElement GroupDescriptor::inverse(const GroupElement& g) const {
  check(g);
  switch (kind_) {
    case GroupKind::Free: {
      std::vector<std::int64_t> out(g.coords().rbegin(), g.coords().rend());
      for (auto& l : out) l = -l;
      return GroupElement(std::move(out));
    }
    case GroupKind::FreeAbelian:
      return with_fallback([&](auto tag) {
        using T = decltype(tag);
        auto x = to_vec<T>(g);
        for (auto& c : x) c = T(0) - c;
        return x;
      });
    case GroupKind::Semidirect: {
      // (v,k)^-1 = (-phi^{-k} v, -k)
      const std::int64_t k = exponent_of(g, rank_);
      if (k == std::numeric_limits<std::int64_t>::min())
        throw StructuralError("t-exponent exceeds 64 bits");
      const TwistPower& p = twist_power(-k);
      return with_fallback([&](auto tag) {
        using T = decltype(tag);
        auto x = to_vec<T>(g);
        x.pop_back();
        std::vector<T> moved;
        if constexpr (std::is_same_v<T, CheckedInt>) {
          if (!p.small) throw Overflow{};
          moved = mat_vec<T>(*p.small, rank_, x);
        } else {
          moved = p.big.apply(x);
        }
        for (auto& c : moved) c = T(0) - c;
        moved.push_back(T(-k));
        return moved;
      });
    }
  }
  return {};
}

GroupElement GroupDescriptor::power(const GroupElement& g, std::int64_t n) const {
  GroupElement base = n < 0 ? inverse(g) : g;
  std::uint64_t e = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
  GroupElement out = identity();
  while (e) {
    if (e & 1) out = multiply(out, base);
    e >>= 1;
    if (e) base = multiply(base, base);
  }
  return out;
}

GroupElement GroupDescriptor::vec(std::vector<std::int64_t> v) const {
  if (kind_ != GroupKind::FreeAbelian || v.size() != rank_)
    throw StructuralError("vector of size " + std::to_string(v.size()) + " is not in " + name_);
  return GroupElement(std::move(v));
}

GroupElement GroupDescriptor::word(const std::vector<std::int64_t>& letters) const {
  if (kind_ != GroupKind::Free) throw StructuralError("words only live in free groups");
  GroupElement g(reduce_word(letters));
  check(g);
  return g;
}

GroupElement GroupDescriptor::word(const std::string& letters) const {
  std::vector<std::int64_t> w;
  for (char c : letters) {
    if (c == ' ') continue;
    if (c >= 'a' && c <= 's') {
      w.push_back(c - 'a' + 1);
    } else if (c >= 'A' && c <= 'S') {
      w.push_back(-(c - 'A' + 1));
    } else {
      throw StructuralError(std::string("bad letter '") + c + "'");
    }
  }
  return word(w);
}

GroupElement GroupDescriptor::pair(std::vector<std::int64_t> v, std::int64_t k) const {
  if (kind_ != GroupKind::Semidirect || v.size() != rank_)
    throw StructuralError("pair is not in " + name_);
  v.push_back(k);
  return GroupElement(std::move(v));
}

GroupElement GroupDescriptor::x(std::size_t i) const {
  if (i == 0 || i > rank_) throw StructuralError("generator index out of range");
  return generators_[2 * (i - 1)];
}

GroupElement GroupDescriptor::t() const {
  if (kind_ != GroupKind::Semidirect) throw StructuralError(name_ + " has no generator t");
  return generators_[2 * rank_];
}

std::optional<std::uint64_t> GroupDescriptor::closed_form_length(const GroupElement& g) const {
  check(g);
  switch (kind_) {
    case GroupKind::Free:
      return g.size();
    case GroupKind::FreeAbelian: {
      if (!g.is_wide()) {
        std::uint64_t s = 0;
        for (auto c : g.coords()) {
          const std::uint64_t a = c < 0 ? 0 - static_cast<std::uint64_t>(c) : static_cast<std::uint64_t>(c);
          if (__builtin_add_overflow(s, a, &s)) throw StructuralError("word length exceeds 64 bits");
        }
        return s;
      }
      throw StructuralError("word length exceeds 64 bits");
    }
    case GroupKind::Semidirect:
      return std::nullopt;
  }
  return std::nullopt;
}

std::uint64_t GroupDescriptor::semidirect_length_upper_bound(const GroupElement& g) const {
  check(g);
  BigInt s = 0;
  for (const auto& c : g.big_coords()) s += abs(c);
  if (s > BigInt(std::numeric_limits<std::uint64_t>::max()))
    throw StructuralError("word length exceeds 64 bits");
  return static_cast<std::uint64_t>(s);
}

bool GroupDescriptor::has_signed_diagonal_twist() const { return phi_signed_diagonal_; }

std::string GroupDescriptor::format(const GroupElement& g) const {
  std::ostringstream os;
  const auto c = g.big_coords();
  auto tuple = [&](std::size_t n) {
    os << '(';
    for (std::size_t i = 0; i < n; ++i) os << (i ? "," : "") << c[i];
    os << ')';
  };
  switch (kind_) {
    case GroupKind::FreeAbelian:
      tuple(rank_);
      break;
    case GroupKind::Free:
      if (c.empty()) os << 'e';
      for (const auto& l : c) {
        const auto v = static_cast<std::int64_t>(l);
        const auto i = static_cast<std::size_t>(std::llabs(v)) - 1;
        os << (i < 19 ? std::string(1, static_cast<char>((v > 0 ? 'a' : 'A') + i))
                      : (v > 0 ? "x" : "X") + std::to_string(i + 1));
      }
      break;
    case GroupKind::Semidirect:
      os << '(';
      tuple(rank_);
      os << ',' << c[rank_] << ')';
      break;
  }
  return os.str();
}

nlohmann::json GroupDescriptor::element_to_json(const GroupElement& g) const {
  nlohmann::json arr = nlohmann::json::array();
  if (!g.is_wide()) {
    for (auto c : g.coords()) arr.push_back(c);
  } else {
    for (const auto& c : g.big_coords()) arr.push_back(c.str());
  }
  return arr;
}

GroupElement GroupDescriptor::element_from_json(const nlohmann::json& j) const {
  if (!j.is_array()) throw StructuralError("normal form must be a JSON array");
  std::vector<BigInt> c;
  for (const auto& x : j) {
    if (x.is_number_integer()) {
      c.emplace_back(x.get<std::int64_t>());
    } else if (x.is_string()) {
      c.emplace_back(x.get<std::string>());
    } else {
      throw StructuralError("normal form entries must be integers");
    }
  }
  GroupElement g = GroupElement::from_big(c);
  if (kind_ == GroupKind::Free) {
    GroupElement r = word(std::vector<std::int64_t>(g.coords().begin(), g.coords().end()));
    if (!(r == g)) throw StructuralError("free-group normal form is not reduced");
  }
  check(g);
  return g;
}

nlohmann::json GroupDescriptor::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case GroupKind::FreeAbelian:
      j["kind"] = "free_abelian";
      j["rank"] = rank_;
      break;
    case GroupKind::Free:
      j["kind"] = "free";
      j["rank"] = rank_;
      break;
    case GroupKind::Semidirect:
      j["kind"] = "semidirect";
      j["twist"] = phi_.to_rows();
      break;
  }
  return j;
}

std::string GroupDescriptor::fingerprint() const { return fingerprint_; }

}  // namespace cqms
