#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "grwalk/group.hpp"
#include "grwalk/measure.hpp"
#include "grwalk/parallel.hpp"
#include "grwalk/word_metric.hpp"

namespace grwalk {

/// Sparse law of W_n, all masses > 0, distinct elements. Entries are in
/// first-arrival order of the convolution that produced them; that order is
/// deterministic.
///
/// stored + pruned + absorbed = 1 (up to rounding). `absorbed` is mass removed
/// by a keep filter (killed walks); it is 0 for plain convolution.
class Distribution {
 public:
  using Entry = std::pair<GroupElement, double>;

  /// delta at the identity, n = 0.
  explicit Distribution(std::shared_ptr<const Group> group);
  Distribution(std::shared_ptr<const Group> group, std::vector<Entry> entries, double pruned,
               double absorbed, long long n);

  static Distribution point_mass(std::shared_ptr<const Group> group, const GroupElement& at);

  const Group& group() const noexcept { return *group_; }
  const std::shared_ptr<const Group>& group_ptr() const noexcept { return group_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  long long step() const noexcept { return n_; }
  double pruned_mass() const noexcept { return pruned_; }
  double absorbed_mass() const noexcept { return absorbed_; }
  double stored_mass() const;
  /// 0 if g is not stored. Linear scan; use index() for bulk lookups.
  double mass(const GroupElement& g) const;
  absl::flat_hash_map<GroupElement, double, GroupElementHash> index() const;
  /// Entries sorted by canonical form.
  std::vector<Entry> sorted_entries() const;

 private:
  std::shared_ptr<const Group> group_;
  std::vector<Entry> entries_;
  double pruned_ = 0.0;
  double absorbed_ = 0.0;
  long long n_ = 0;
};

using KeepFilter = std::function<bool(const GroupElement&)>;

/// One step: dist * step. Entries with mass < prune_eps are dropped into the
/// pruned ledger; entries rejected by `keep` go to the absorbed ledger. The
/// result is bit-identical for every thread count: each element's mass is
/// summed in product order (input index, then support index) and elements
/// appear in order of first arrival.
Distribution convolve(const Distribution& dist, const StepMeasure& step, double prune_eps,
                      const ExecutionPolicy& policy = {}, const KeepFilter& keep = {});

/// Natural-log Shannon entropy of the stored mass. `error_bound` is the repo
/// convention pruned * (max surprisal + 1); it is not a theorem.
struct EntropyValue {
  double value = 0.0;
  double error_bound = 0.0;
};
EntropyValue entropy(const Distribution& dist);

/// sum |x| mass(x) over the stored entries. Throws RangeError if an entry lies
/// beyond the cache radius.
double escape(const Distribution& dist, const WordMetricCache& cache);
/// Same with a caller-supplied length function.
double escape(const Distribution& dist, const std::function<std::int64_t(const GroupElement&)>& length);

/// sum mass^2 over stored entries, a lower bound for mu^(2n)(id) when the
/// step is symmetric.
double squared_norm(const Distribution& dist);

struct ObservableOptions {
  double prune_eps = 0.0;
  ExecutionPolicy policy;
  /// Support size above which the run stops.
  std::size_t support_cap = 40'000'000;
  /// Stop at the cap and return the completed prefix instead of throwing.
  bool partial_ok = false;
  bool compute_escape = true;
  std::size_t ball_cap = 5'000'000;
  /// Directory for checkpoints; empty disables them.
  std::string checkpoint_dir;
};

/// Per-step observables of the exact convolution, indexed by step k = 0..steps.
struct WalkObservables {
  std::vector<double> identity_mass;  // stored mu^(k)(id), a certified lower bound
  std::vector<double> pruned_mass;
  std::vector<double> entropy;
  std::vector<double> entropy_error;
  std::vector<double> escape;  // NaN when no word metric is available
  std::vector<std::size_t> support;
  std::string escape_method;   // "bfs", "closed-form" or "none"
  bool truncated = false;      // stopped at the support cap
  bool resumed = false;        // started from a checkpoint

  long long steps() const { return static_cast<long long>(identity_mass.size()) - 1; }
  /// mu^(2n)(id) lower end and upper end (+ pruned mass at step 2n).
  double return_prob(long long n) const { return identity_mass.at(static_cast<std::size_t>(2 * n)); }
  double return_prob_upper(long long n) const {
    return identity_mass.at(static_cast<std::size_t>(2 * n)) + pruned_mass.at(static_cast<std::size_t>(2 * n));
  }
};

WalkObservables compute_observables(const StepMeasure& step, long long steps, const ObservableOptions& opts);

/// mu^(2n)(id) for n = 0..n_max with upper interval ends. Requires a
/// symmetric step.
struct ReturnCurve {
  std::vector<double> value;
  std::vector<double> upper;
};
ReturnCurve return_probability_curve(const StepMeasure& step, long long n_max, double prune_eps,
                                     const ExecutionPolicy& policy = {});

/// (H(n) - H(n-m)) / m for every n in [m, steps].
std::vector<double> entropy_slope(const WalkObservables& obs, long long m);
double entropy_slope(const WalkObservables& obs, long long n, long long m);

/// Checkpoint binary format (little endian):
///   "GRWDIST1" (8 bytes), u32 version = 1, u64 group spec digest,
///   i64 n, f64 pruned mass, f64 absorbed mass, u64 record count,
///   then per record: u32 word count w, w x i64 canonical code words,
///   f64 mass.
void save_checkpoint(const Distribution& dist, const std::string& path);
Distribution load_checkpoint(std::shared_ptr<const Group> group, const std::string& path);

/// Monte Carlo path statistics.
struct SampleOptions {
  long long count = 1000;
  std::uint64_t seed = 0;
  /// Report times; the walk runs to the largest.
  std::vector<long long> grid;
  std::vector<double> alphas{1.0};
  /// Membership test for the exit event {exists k <= n: W_k not in V}.
  KeepFilter inside;
  /// Record the histogram of W_n at the largest grid time.
  bool endpoint_histogram = false;
  ExecutionPolicy policy;
  /// Used when the group has no closed-form length.
  const WordMetricCache* cache = nullptr;
};

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct SampleStats {
  std::vector<long long> grid;
  std::vector<MeanEstimate> displacement;             // E|W_n| per grid point
  std::vector<std::vector<MeanEstimate>> max_moment;  // [alpha][grid] E max_{k<=n}|W_k|^alpha
  std::vector<MeanEstimate> exit_prob;                // per grid point, when `inside` is set
  std::map<GroupElement, long long> endpoint_counts;
  long long count = 0;
};

/// Paths use independent Philox streams keyed by (seed, path index); each
/// step draws one support index of `step` from its stream.
SampleStats sample_paths(const StepMeasure& step, const SampleOptions& opts);

}  // namespace grwalk
