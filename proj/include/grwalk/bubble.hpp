#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grwalk/bubble_graph.hpp"
#include "grwalk/parallel.hpp"

namespace grwalk {

enum class BubbleMove : std::uint8_t { a, a_inv, b, b_inv };

/// s^-1 . v: one step of the induced chain Y_n^-1 . o.
SchreierGraph::Vertex induced_chain_step(const SchreierGraph& g, SchreierGraph::Vertex v, BubbleMove s);

/// How branching 3-cycles enter the unit-conductance network.
enum class ResistanceConvention {
  contracted,  // 3-cycles shorted to a point: 2^{-k-1} l + sum_{j<=k} 2^{-j} alpha_j
  literal,     // every edge has unit conductance: 2^{-k-1} l + sum_{j<=k} 2^{-j} (alpha_j + 1)
};
std::string to_string(ResistanceConvention c);

/// r = l + sum_{j<=k} alpha_j + k.
int level_set_radius(const ScalingSequence& seq, int k, int ell);

/// R(o <-> S_r) in closed form. Requires 0 <= l <= alpha_{k+1} and k < L;
/// RangeError otherwise. k = l = 0 gives 0.
double effective_resistance(const ScalingSequence& seq, int k, int ell,
                            ResistanceConvention c = ResistanceConvention::contracted);

/// R(o <-> S_r) from the harmonic equations on the built graph (vertices at
/// distance <= r, self-loops carry no current). RangeError if S_r is empty or
/// reaches the truncation boundary.
double harmonic_resistance(const SchreierGraph& g, int r, ResistanceConvention c);

struct RecurrenceReport {
  std::vector<double> partial_sums;  // sum_{k<=K} alpha_k / 2^k
  std::string growth;                // "divergent", "bounded" or "undetermined"
  std::string verdict;               // "recurrent", "transient" or "undetermined"
  /// Geometric bound on the remaining tail when growth is "bounded".
  double tail_bound = 0.0;
};

/// Geometric sequences use the declared closed form (alpha_k / 2^k =
/// 2^{(theta-1)k}). Explicit lists are "bounded" when the term ratio over the
/// second half of the levels stays below 1, "divergent" when the terms never
/// decrease there.
RecurrenceReport recurrence_check(const ScalingSequence& seq, int k_max);

/// Occupation and lamp data for one path of length n. Occupation and lamps
/// live on the inverted orbit Y_j . o (j = 0..n), which is not Markov;
/// first_hit uses the induced chain Y_j^-1 . o. Both visit o at the same times.
struct OrbitPath {
  std::vector<std::pair<SchreierGraph::Vertex, long long>> occupation;  // Q_n, by vertex
  long long return_time = -1;                                          // T, -1 if T > n
  std::vector<long long> first_hit;  // sigma_r for r = 0.. max distance reached by the chain
  std::vector<std::pair<SchreierGraph::Vertex, std::int64_t>> lamps;  // nonzero L_n
};

/// One path from the (seed, stream) pair. Cost O(n^2). ResourceError when n
/// exceeds the boundary distance (deepen L).
OrbitPath trace_orbit(const SchreierGraph& g, long long n, std::uint64_t seed, std::uint64_t stream);

struct WreathWalkOptions {
  std::vector<long long> grid;  // evaluation times, increasing
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  ExecutionPolicy policy;
};

struct OrbitGridPoint {
  long long n = 0;
  double mean_log_occupation = 0.0;  // E sum_x ln(1 + Q_n(x))
  double se_log_occupation = 0.0;
  std::size_t survivors = 0;         // paths with T > n
  double mean_lamp_support = 0.0;
  double mean_range = 0.0;           // E |supp Q_n|
};

struct OrbitEnsemble {
  std::size_t samples = 0;
  std::vector<OrbitGridPoint> points;
};

/// Runs `samples` paths to the last grid time; path i uses stream i.
OrbitEnsemble wreath_walk(const SchreierGraph& g, const WreathWalkOptions& opts);

struct EntropyFloorRow {
  long long n = 0;
  double estimate = 0.0;
  double se = 0.0;
  double p_hat = 0.0;    // empirical P(T > n)
  double p_lower = 0.0;  // one-sided 95% Clopper-Pearson lower bound
  double floor = 0.0;    // n p ln(1 + 1/p) / 16 at p = p_lower
  bool holds = true;     // estimate >= floor
  double ball = 0.0;     // |B(o, floor(sqrt n))|
  double ratio = 0.0;    // estimate / (ball ln n)
};

struct EntropyFloorReport {
  std::vector<EntropyFloorRow> rows;
  double ratio_spread = 0.0;  // max ratio / min ratio
  bool ok = true;             // every row holds and the spread is <= 4
};

/// Requires an ensemble of at least 1000 samples (UsageError otherwise).
EntropyFloorReport entropy_lower_bound(const SchreierGraph& g, const OrbitEnsemble& ens);

/// Vertices at graph distance <= r. RangeError beyond the truncation.
std::size_t ball_volume(const SchreierGraph& g, int r);

enum class ChainKind {
  lazy,  // literal moves; b at a self-loop vertex stays put
  jump,  // self-loop moves skipped
};

struct HittingEstimate {
  double p = 0.0;
  double se = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
};

/// P(the induced chain from o reaches S_r before returning to o).
HittingEstimate hitting_probability(const SchreierGraph& g, int r, ChainKind kind, std::size_t samples,
                                    std::uint64_t seed, const ExecutionPolicy& policy = {});

struct ReturnTailReport {
  int k = 0;
  int ell = 0;
  std::vector<long long> grid;
  std::vector<double> tail;  // empirical P(T > n)
  double bound = 0.0;        // 2^k / (16 (alpha_k + l))
  double scale = 0.0;        // alpha_k^2 + l^2
  double c_hat = 0.0;        // largest grid n / scale with tail >= bound
  bool hypothesis = true;    // inf alpha_{k+1}/alpha_k > 2 on the stored levels
};

ReturnTailReport return_time_tail(const SchreierGraph& g, int k, int ell, std::vector<long long> grid,
                                  std::size_t samples, std::uint64_t seed, const ExecutionPolicy& policy = {});

struct ExponentReport {
  double theta = 0.0;
  double beta_return = 0.0;       // (theta+1)/(3theta+1)
  double log_correction = 0.0;    // 2theta/(3theta+1)
  double entropy_exponent = 0.0;  // (theta+1)/(2theta)
  int levels = 0;
  int r_min = 0;
  int r_max = 0;
  /// Log-log slope of n / phi(n)^2 against n, phi the inverse of
  /// r^2 |B(o,r)| ln r, from BFS volumes on geometric(theta).
  double fitted_slope = 0.0;
  double relative_error = 0.0;  // |fitted - beta_return| / beta_return

  std::string to_json() const;
};

/// phi(n) by linear interpolation of r -> r^2 |B(o,r)| ln r on integers
/// r >= 2; volumes[r] = |B(o,r)|. RangeError outside the tabulated range.
double phi_inverse(const std::vector<double>& volumes, double n);

/// Throws InapplicableError for theta <= 1. `max_vertices` caps the graph used
/// for the numeric check.
ExponentReport exponent_report(double theta, std::size_t max_vertices = 4'000'000);

/// vertex,level,kind,a_target,b_target
std::string adjacency_csv(const SchreierGraph& g);

}  // namespace grwalk
