#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace pgfl {

/// Disjoint sets over [0, n) with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1), sets_(n) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }

  std::size_t size() const noexcept { return parent_.size(); }
  std::size_t num_sets() const noexcept { return sets_; }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns true if x and y were in different sets.
  bool unite(std::uint32_t x, std::uint32_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (size_[x] < size_[y]) std::swap(x, y);
    parent_[y] = x;
    size_[x] += size_[y];
    --sets_;
    return true;
  }

  /// Compact labels 0..num_sets()-1, numbered by first appearance.
  std::vector<std::uint32_t> labels() {
    constexpr auto unset = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> root_label(parent_.size(), unset);
    std::vector<std::uint32_t> out(parent_.size());
    std::uint32_t next = 0;
    for (std::size_t v = 0; v < parent_.size(); ++v) {
      const auto r = find(static_cast<std::uint32_t>(v));
      if (root_label[r] == unset) root_label[r] = next++;
      out[v] = root_label[r];
    }
    return out;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
  std::size_t sets_;
};

}  // namespace pgfl
