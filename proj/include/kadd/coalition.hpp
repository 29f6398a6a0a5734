#pragma once

#include <bit>
#include <cstdint>
#include <iterator>
#include <ranges>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kadd {

/// Default upper bound on the player count. Exact solvers and dense value
/// tables need 2^n entries, so anything above this requires an explicit
/// override.
inline constexpr int kDefaultPlayerCap = 24;
/// Players above this count trigger a warning in the exact solvers.
inline constexpr int kExactWarnPlayers = 20;
/// Hard ceiling imposed by the 64-bit coalition encoding.
inline constexpr int kMaxPlayers = 63;

/// A subset of players. Bit j set means player j+1 is a member.
struct Coalition {
  std::uint64_t bits = 0;

  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint64_t b) : bits(b) {}

  constexpr int size() const { return std::popcount(bits); }
  constexpr bool empty() const { return bits == 0; }
  constexpr bool contains(int player) const { return (bits >> player) & 1U; }
  constexpr bool subset_of(Coalition other) const { return (bits & ~other.bits) == 0; }

  constexpr Coalition with(int player) const { return Coalition{bits | (std::uint64_t{1} << player)}; }
  constexpr Coalition without(int player) const {
    return Coalition{bits & ~(std::uint64_t{1} << player)};
  }

  friend constexpr Coalition operator|(Coalition a, Coalition b) { return Coalition{a.bits | b.bits}; }
  friend constexpr Coalition operator&(Coalition a, Coalition b) { return Coalition{a.bits & b.bits}; }
  friend constexpr bool operator==(Coalition a, Coalition b) = default;
  friend constexpr auto operator<=>(Coalition a, Coalition b) = default;
};

struct CoalitionHash {
  std::size_t operator()(Coalition c) const noexcept {
    // splitmix64 finalizer
    std::uint64_t z = c.bits + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

/// Validates a player count against the cap. `allow_large` lifts the default
/// cap up to the encoding limit.
inline void check_players(int n, bool allow_large = false) {
  if (n < 1) throw std::invalid_argument("player count must be at least 1");
  const int cap = allow_large ? kMaxPlayers : kDefaultPlayerCap;
  if (n > cap) {
    throw std::invalid_argument("player count " + std::to_string(n) + " exceeds cap " +
                                std::to_string(cap) + (allow_large ? "" : " (override required)"));
  }
}

constexpr Coalition grand_coalition(int n) {
  return Coalition{n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1};
}

constexpr Coalition singleton(int player) { return Coalition{std::uint64_t{1} << player}; }

inline bool valid_for(Coalition a, int n) { return (a.bits & ~grand_coalition(n).bits) == 0; }

/// All 2^n coalitions in ascending bit-pattern order.
inline auto enumerate_all(int n) {
  check_players(n);
  return std::views::iota(std::uint64_t{0}, std::uint64_t{1} << n) |
         std::views::transform([](std::uint64_t b) { return Coalition{b}; });
}

/// Lazy range over all coalitions of a fixed size in ascending bit-pattern
/// order (Gosper's hack).
class SizedSubsets {
 public:
  class iterator {
   public:
    using value_type = Coalition;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(std::uint64_t cur, std::uint64_t limit) : cur_(cur), limit_(limit) {}

    Coalition operator*() const { return Coalition{cur_}; }
    iterator& operator++() {
      if (cur_ == 0) {
        cur_ = limit_;  // the single empty subset
        return *this;
      }
      const std::uint64_t c = cur_ & -cur_;
      const std::uint64_t r = cur_ + c;
      if (r == 0 || r >= limit_) {
        cur_ = limit_;
        return *this;
      }
      cur_ = (((r ^ cur_) >> 2) / c) | r;
      if (cur_ >= limit_) cur_ = limit_;
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator& o) const { return cur_ == o.cur_; }

   private:
    std::uint64_t cur_ = 0;
    std::uint64_t limit_ = 0;
  };

  SizedSubsets(int n, int s) : n_(n), s_(s) {
    check_players(n);
    if (s < 0 || s > n) throw std::out_of_range("subset size out of range");
  }

  iterator begin() const {
    const std::uint64_t limit = std::uint64_t{1} << n_;
    return iterator{s_ == 0 ? 0 : (std::uint64_t{1} << s_) - 1, limit};
  }
  iterator end() const { return iterator{std::uint64_t{1} << n_, std::uint64_t{1} << n_}; }

 private:
  int n_;
  int s_;
};

inline SizedSubsets enumerate_size(int n, int s) { return SizedSubsets(n, s); }

/// Exact binomial coefficient for 0 <= a <= 64. Returns 0 when b is outside
/// [0, a].
constexpr std::uint64_t binomial(int a, int b) {
  if (a < 0) throw std::invalid_argument("binomial: negative upper argument");
  if (a > 64) throw std::invalid_argument("binomial: upper argument above 64");
  if (b < 0 || b > a) return 0;
  if (b > a - b) b = a - b;
  unsigned __int128 r = 1;
  for (int i = 1; i <= b; ++i) {
    r = r * static_cast<unsigned>(a - b + i) / static_cast<unsigned>(i);
  }
  return static_cast<std::uint64_t>(r);
}

/// Text form: n characters, position j is player j+1.
inline std::string to_bitstring(Coalition a, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int j = 0; j < n; ++j)
    if (a.contains(j)) s[static_cast<std::size_t>(j)] = '1';
  return s;
}

inline Coalition parse_bitstring(std::string_view s) {
  if (s.empty() || s.size() > static_cast<std::size_t>(kMaxPlayers))
    throw std::invalid_argument("bad coalition bitstring length");
  Coalition a;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] == '1')
      a = a.with(static_cast<int>(j));
    else if (s[j] != '0')
      throw std::invalid_argument("bad coalition bitstring character");
  }
  return a;
}

/// Coalition from 1-indexed player labels.
inline Coalition from_players(const std::vector<int>& players, int n) {
  Coalition a;
  for (int p : players) {
    if (p < 1 || p > n) throw std::invalid_argument("player label " + std::to_string(p) + " out of range");
    a = a.with(p - 1);
  }
  return a;
}

/// 1-indexed labels of the members, ascending.
inline std::vector<int> members(Coalition a) {
  std::vector<int> out;
  for (std::uint64_t b = a.bits; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
  return out;
}

}  // namespace kadd
