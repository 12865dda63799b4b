#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "grwalk/group.hpp"

namespace grwalk {

/// BFS layers of the Cayley graph around the identity.
///
/// Layer 0 is {identity}; layer r+1 is the set of generator neighbours of
/// layer r not already in layers 0..r. Each layer is sorted by canonical form.
class WordMetricCache {
 public:
  explicit WordMetricCache(std::shared_ptr<const Group> group);

  const Group& group() const noexcept { return *group_; }
  const std::shared_ptr<const Group>& group_ptr() const noexcept { return group_; }

  /// Largest radius whose layer is complete.
  int radius() const noexcept { return static_cast<int>(layers_.size()) - 1; }
  std::size_t size() const noexcept { return index_.size(); }
  const std::vector<GroupElement>& layer(int r) const;
  /// Number of elements of the ball of radius r (r <= radius()).
  std::size_t ball_size(int r) const;
  /// Elements of B(r) in layer order.
  std::vector<GroupElement> ball_elements(int r) const;

  /// Word length if |g| <= radius(), otherwise nullopt.
  std::optional<int> find(const GroupElement& g) const;
  bool contains(const GroupElement& g) const { return index_.contains(g); }

  /// Grow to `radius`. Throws ResourceError (progress = last complete radius)
  /// if the element count would exceed `cap`; completed layers are kept.
  void extend(int radius, std::size_t cap);

 private:
  std::shared_ptr<const Group> group_;
  std::vector<std::vector<GroupElement>> layers_;
  absl::flat_hash_map<GroupElement, int, GroupElementHash> index_;
};

inline constexpr std::size_t kDefaultBallCap = 20'000'000;

/// Exact ball of radius r by breadth-first search.
WordMetricCache ball(std::shared_ptr<const Group> group, int r, std::size_t cap = kDefaultBallCap);

/// BFS layer index of g. Throws RangeError beyond the cached radius.
int word_length(const GroupElement& g, const WordMetricCache& cache);

}  // namespace grwalk
