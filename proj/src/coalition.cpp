#include "pairshap/coalition.hpp"

#include <algorithm>
#include <numeric>

#include "pairshap/errors.hpp"

namespace pairshap {

Coalition::Coalition(int q) {
  if (q < 1) throw DomainError("coalition needs at least one player");
  bits_.assign(static_cast<std::size_t>(q), 0);
}

Coalition Coalition::full(int q) {
  Coalition c(q);
  std::fill(c.bits_.begin(), c.bits_.end(), std::uint8_t{1});
  return c;
}

Coalition Coalition::from_mask(int q, std::uint64_t mask) {
  if (q > 63) throw DomainError("integer coalition masks support q <= 63");
  Coalition c(q);
  for (int j = 0; j < q; ++j) c.bits_[j] = static_cast<std::uint8_t>((mask >> j) & 1u);
  return c;
}

Coalition Coalition::from_players(int q, std::span<const int> players) {
  Coalition c(q);
  for (int j : players) {
    if (j < 0 || j >= q) throw DomainError("player index out of range");
    c.bits_[j] = 1;
  }
  return c;
}

int Coalition::size() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Coalition Coalition::complement() const {
  Coalition c = *this;
  for (auto& b : c.bits_) b ^= 1u;
  return c;
}

Coalition Coalition::with(int j) const {
  Coalition c = *this;
  c.bits_[j] = 1;
  return c;
}

std::vector<int> Coalition::players() const {
  std::vector<int> out;
  for (int j = 0; j < q(); ++j)
    if (bits_[j]) out.push_back(j);
  return out;
}

std::uint64_t Coalition::mask() const {
  if (q() > 63) throw DomainError("integer coalition masks support q <= 63");
  std::uint64_t m = 0;
  for (int j = 0; j < q(); ++j)
    if (bits_[j]) m |= std::uint64_t{1} << j;
  return m;
}

std::string Coalition::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

Permutation::Permutation(std::vector<int> order) : order_(std::move(order)) {
  const int q = static_cast<int>(order_.size());
  if (q < 1) throw DomainError("permutation of an empty set");
  position_.assign(order_.size(), -1);
  for (int i = 0; i < q; ++i) {
    const int j = order_[i];
    if (j < 0 || j >= q || position_[j] != -1)
      throw DomainError("permutation must contain each player exactly once");
    position_[j] = i;
  }
}

Permutation Permutation::identity(int q) {
  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  return Permutation(std::move(order));
}

Permutation Permutation::reversed() const {
  return Permutation(std::vector<int>(order_.rbegin(), order_.rend()));
}

Coalition Permutation::prefix_coalition(int j) const {
  Coalition c(q());
  for (int i = 0; i < position_[j]; ++i) c.set(order_[i]);
  return c;
}

}  // namespace pairshap
