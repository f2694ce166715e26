#ifndef EXTENTLAB_TOKEN_SET_HPP_
#define EXTENTLAB_TOKEN_SET_HPP_

#include <algorithm>
#include <compare>
#include <initializer_list>
#include <ranges>
#include <vector>

namespace extentlab {

// An ordered set of sentence token indices. Always sorted and
// duplicate-free, so two sets built from the same members compare equal
// regardless of how they were produced. Ordering is lexicographic over the
// sorted members.
class TokenSet {
 public:
  using const_iterator = std::vector<int>::const_iterator;

  TokenSet() = default;
  TokenSet(std::initializer_list<int> indices)
      : indices_(indices.begin(), indices.end()) {
    normalize();
  }
  template <std::ranges::input_range Range>
  explicit TokenSet(const Range& indices)
      : indices_(std::ranges::begin(indices), std::ranges::end(indices)) {
    normalize();
  }

  // Every index in [begin, end).
  static TokenSet range(int begin, int end) {
    TokenSet out;
    for (int i = begin; i < end; ++i) out.indices_.push_back(i);
    return out;
  }

  bool contains(int index) const {
    return std::binary_search(indices_.begin(), indices_.end(), index);
  }
  bool includes(const TokenSet& other) const {
    return std::includes(indices_.begin(), indices_.end(),
                         other.indices_.begin(), other.indices_.end());
  }
  void insert(int index) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
    if (it == indices_.end() || *it != index) indices_.insert(it, index);
  }
  void erase(int index) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
    if (it != indices_.end() && *it == index) indices_.erase(it);
  }
  TokenSet without(int index) const {
    TokenSet out = *this;
    out.erase(index);
    return out;
  }
  TokenSet united(const TokenSet& other) const {
    TokenSet out;
    std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(),
                   other.indices_.end(), std::back_inserter(out.indices_));
    return out;
  }
  TokenSet minus(const TokenSet& other) const {
    TokenSet out;
    std::set_difference(indices_.begin(), indices_.end(),
                        other.indices_.begin(), other.indices_.end(),
                        std::back_inserter(out.indices_));
    return out;
  }

  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  const_iterator begin() const { return indices_.begin(); }
  const_iterator end() const { return indices_.end(); }
  const std::vector<int>& indices() const { return indices_; }

  friend bool operator==(const TokenSet&, const TokenSet&) = default;
  friend auto operator<=>(const TokenSet&, const TokenSet&) = default;

 private:
  void normalize() {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()),
                   indices_.end());
  }

  std::vector<int> indices_;
};

}  // namespace extentlab

#endif  // EXTENTLAB_TOKEN_SET_HPP_
