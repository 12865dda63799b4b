#include "grwalk/word_metric.hpp"

#include <algorithm>

#include "grwalk/errors.hpp"

namespace grwalk {

WordMetricCache::WordMetricCache(std::shared_ptr<const Group> group) : group_(std::move(group)) {
  GroupElement id = group_->identity();
  layers_.push_back({id});
  index_.emplace(std::move(id), 0);
}

const std::vector<GroupElement>& WordMetricCache::layer(int r) const {
  if (r < 0 || r > radius()) throw RangeError("layer beyond cached radius");
  return layers_[static_cast<std::size_t>(r)];
}

std::size_t WordMetricCache::ball_size(int r) const {
  if (r < 0 || r > radius()) throw RangeError("ball beyond cached radius");
  std::size_t n = 0;
  for (int i = 0; i <= r; ++i) n += layers_[static_cast<std::size_t>(i)].size();
  return n;
}

std::vector<GroupElement> WordMetricCache::ball_elements(int r) const {
  std::vector<GroupElement> out;
  out.reserve(ball_size(r));
  for (int i = 0; i <= r; ++i)
    out.insert(out.end(), layers_[static_cast<std::size_t>(i)].begin(), layers_[static_cast<std::size_t>(i)].end());
  return out;
}

std::optional<int> WordMetricCache::find(const GroupElement& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void WordMetricCache::extend(int target, std::size_t cap) {
  const auto& gens = group_->generators();
  while (radius() < target) {
    const int r = radius();
    std::vector<GroupElement> next;
    for (const auto& g : layers_.back()) {
      for (const auto& s : gens) {
        GroupElement h = group_->multiply(g, s);
        if (index_.contains(h)) continue;
        if (index_.size() >= cap) {
          // roll back the incomplete layer
          for (const auto& x : next) index_.erase(x);
          throw ResourceError("ball size cap exceeded after radius " + std::to_string(r), r);
        }
        index_.emplace(h, r + 1);
        next.push_back(std::move(h));
      }
    }
    std::sort(next.begin(), next.end());
    layers_.push_back(std::move(next));
  }
}

WordMetricCache ball(std::shared_ptr<const Group> group, int r, std::size_t cap) {
  if (r < 0) throw UsageError("ball radius must be nonnegative");
  WordMetricCache cache(std::move(group));
  cache.extend(r, cap);
  return cache;
}

int word_length(const GroupElement& g, const WordMetricCache& cache) {
  if (auto d = cache.find(g)) return *d;
  throw RangeError("element beyond cached radius " + std::to_string(cache.radius()));
}

}  // namespace grwalk
