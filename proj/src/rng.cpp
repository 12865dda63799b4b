#include "grwalk/rng.hpp"

#include <algorithm>
#include <cmath>

#include "grwalk/errors.hpp"

namespace grwalk {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

void PhiloxStream::refill() noexcept {
  buf_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                       key_);
  ++block_;
  pos_ = 0;
}

std::uint32_t PhiloxStream::below(std::uint32_t n) noexcept {
  // Lemire's multiply-and-reject
  std::uint64_t m = static_cast<std::uint64_t>((*this)()) * n;
  auto low = static_cast<std::uint32_t>(m);
  if (low < n) {
    const std::uint32_t threshold = static_cast<std::uint32_t>(-n) % n;
    while (low < threshold) {
      m = static_cast<std::uint64_t>((*this)()) * n;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  if (weights.empty()) throw UsageError("sampler needs at least one weight");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("sampler weights must be nonnegative");
    total += w;
    cumulative_.push_back(total);
  }
  if (!(total > 0.0)) throw UsageError("sampler weights sum to zero");
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
  uniform_ = std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights[0]; });
}

std::size_t DiscreteSampler::operator()(PhiloxStream& rng) const {
  if (uniform_) return rng.below(static_cast<std::uint32_t>(cumulative_.size()));
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                           static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
}

}  // namespace grwalk
