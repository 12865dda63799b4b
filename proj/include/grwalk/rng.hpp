#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace grwalk {

/// Philox4x32-10 counter-based generator (Salmon et al. parameters).
/// Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Sequential stream for one (seed, stream) pair: key = seed, counter words
/// 2..3 = stream index, counter words 0..1 = block number. Streams with
/// different indices never overlap, so per-path streams make Monte Carlo
/// results independent of how paths are scheduled.
class PhiloxStream {
 public:
  using result_type = std::uint32_t;

  PhiloxStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    std::uint64_t hi = (*this)() >> 5;
    std::uint64_t lo = (*this)() >> 6;
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  /// Uniform on {0, .., n-1}, unbiased (n >= 1, n < 2^32).
  std::uint32_t below(std::uint32_t n) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

/// Sampler for a finite distribution by cumulative table lookup.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);
  std::size_t operator()(PhiloxStream& rng) const;
  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
  bool uniform_ = false;
};

}  // namespace grwalk
