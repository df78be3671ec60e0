#ifndef PAIRSHAP_COALITION_HPP
#define PAIRSHAP_COALITION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pairshap {

// A subset of the grand coalition {0, ..., q-1} stored as explicit 0/1
// indicators. Player indices are 0-based internally; every external
// interface (configs, CLI output) is 1-based.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(int q);

  static Coalition empty(int q) { return Coalition(q); }
  static Coalition full(int q);
  // Bit j of `mask` is player j. Requires q <= 63.
  static Coalition from_mask(int q, std::uint64_t mask);
  static Coalition from_players(int q, std::span<const int> players);

  int q() const { return static_cast<int>(bits_.size()); }
  bool contains(int j) const { return bits_[j] != 0; }
  std::uint8_t operator[](int j) const { return bits_[j]; }
  void set(int j, bool member = true) { bits_[j] = member ? 1 : 0; }

  int size() const;
  bool is_empty() const { return size() == 0; }
  bool is_full() const { return size() == q(); }

  Coalition complement() const;
  Coalition with(int j) const;
  std::vector<int> players() const;

  // Requires q <= 63.
  std::uint64_t mask() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  // "1010"-style rendering, player 1 first.
  std::string to_string() const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// A bijection pi on {0, ..., q-1}; order()[i] is the player at position i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> order);

  static Permutation identity(int q);

  int q() const { return static_cast<int>(order_.size()); }
  const std::vector<int>& order() const { return order_; }
  int operator[](int i) const { return order_[i]; }

  // kappa(j): the position at which player j appears.
  int position(int j) const { return position_[j]; }

  // rho(pi) = (pi_q, ..., pi_1).
  Permutation reversed() const;

  // Players preceding j in this order; empty when j comes first.
  Coalition prefix_coalition(int j) const;

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.order_ == b.order_;
  }

 private:
  std::vector<int> order_;
  std::vector<int> position_;
};

}  // namespace pairshap

#endif  // PAIRSHAP_COALITION_HPP
