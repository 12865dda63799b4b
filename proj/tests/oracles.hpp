#pragma once

// Independent reference computations shared by the test binaries.

#include <cmath>
#include <functional>
#include <map>

#include "grwalk/measure.hpp"

namespace grwalk::testing {

/// C(2n, n) / 4^n as a running product in long double.
inline double central_binomial_over_4n(int n) {
  long double p = 1.0L;
  for (int k = 1; k <= n; ++k) p *= static_cast<long double>(2 * k - 1) / (2 * k);
  return static_cast<double>(p);
}

/// C(n, k) / 2^n in long double via Pascal's triangle.
inline std::vector<long double> binomial_row(int n) {
  std::vector<long double> row{1.0L};
  for (int i = 0; i < n; ++i) {
    std::vector<long double> next(row.size() + 1, 0.0L);
    for (std::size_t k = 0; k < row.size(); ++k) {
      next[k] += row[k] / 2;
      next[k + 1] += row[k] / 2;
    }
    row = std::move(next);
  }
  return row;
}

/// E|S_n| for simple random walk on Z: sum_k |2k - n| C(n,k) / 2^n.
inline double binomial_mean_abs(int n) {
  auto row = binomial_row(n);
  long double s = 0;
  for (int k = 0; k <= n; ++k) s += std::abs(2 * k - n) * row[static_cast<std::size_t>(k)];
  return static_cast<double>(s);
}

/// Law of W_n by enumerating every n-tuple of support elements.
inline std::map<GroupElement, double> enumerate_paths(const StepMeasure& mu, int n) {
  std::map<GroupElement, double> law;
  const Group& g = mu.group();
  std::function<void(const GroupElement&, double, int)> rec = [&](const GroupElement& x, double p, int left) {
    if (left == 0) {
      law[x] += p;
      return;
    }
    for (const auto& e : mu.support()) rec(g.multiply(x, e.element), p * e.mass, left - 1);
  };
  rec(g.identity(), 1.0, n);
  return law;
}

/// P(exists k <= n: W_k not in V) by enumerating every path.
inline double exit_probability_by_enumeration(const StepMeasure& mu, int n,
                                              const std::function<bool(const GroupElement&)>& inside) {
  const Group& g = mu.group();
  double out = 0;
  std::function<void(const GroupElement&, double, int)> rec = [&](const GroupElement& x, double p, int left) {
    if (!inside(x)) {
      out += p;
      return;
    }
    if (left == 0) return;
    for (const auto& e : mu.support()) rec(g.multiply(x, e.element), p * e.mass, left - 1);
  };
  rec(g.identity(), 1.0, n);
  return out;
}

}  // namespace grwalk::testing
