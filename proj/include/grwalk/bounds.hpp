#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grwalk/group.hpp"
#include "grwalk/measure.hpp"
#include "grwalk/parallel.hpp"
#include "grwalk/spectral.hpp"
#include "grwalk/walk.hpp"

namespace grwalk {

inline constexpr int kReportSchemaVersion = 1;

/// gamma(n) with mu^(2n)(id) >= exp(-gamma(n)), defined on [1, max_arg()].
class GammaModel {
 public:
  /// C n^beta (ln(n+1))^kappa.
  static GammaModel power(double c, double beta, double kappa = 0.0);
  /// values[i] = gamma(i + 1), linear between integers. Throws UsageError
  /// unless strictly increasing.
  static GammaModel table(std::vector<double> values, std::string source = "table");
  /// gamma(n) = -ln(stored mu^(2n)(id)), n = 1..steps/2. The stored mass is a
  /// lower bound, so the hypothesis direction holds.
  static GammaModel from_observables(const WalkObservables& obs);

  double operator()(double x) const;
  /// Throws RangeError outside [gamma(1), gamma(max_arg())].
  double inverse(double y) const;
  double max_arg() const noexcept;
  bool closed_form() const noexcept { return values_.empty(); }
  double beta() const noexcept { return beta_; }
  double kappa() const noexcept { return kappa_; }
  double c() const noexcept { return c_; }
  std::string describe() const;

  /// n^beta / gamma(n) non-decreasing on the grid.
  bool ratio_nondecreasing(double beta, const std::vector<double>& grid) const;

 private:
  GammaModel() = default;
  double c_ = 1.0, beta_ = 0.0, kappa_ = 0.0;
  std::vector<double> values_;
  std::string source_;
};

/// rho(n) = inf{x : gamma^-1(x/2) / x > n}, relative precision 1e-12.
double rho(const GammaModel& gamma, double n);

/// l_n = min{k >= ceil(k0) : e^k phi(e^k/2)^(1/2) >= n}, phi(x) =
/// gamma^-1(x) / x^2, k0 = ln(gamma(2) + ln 64). Throws InapplicableError if
/// phi decreases along the scan.
int ell_n(const GammaModel& gamma, double n);
/// The tail value 1 / phi(e^{l_n})^(1/2) reported with l_n.
double ell_tail_value(const GammaModel& gamma, int ell);

/// rho~(n) = inf{x : Lambda(e^x) <= 1/n} from a profile envelope; nullopt if
/// the curve never gets that low.
std::optional<double> rho_tilde(const ProfileCurve& curve, double n);

LambdaPoint lambda_upper_from_return(const GammaModel& gamma, long long n);

struct BoundRow {
  long long n = 0;
  double measured = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound / measured, +inf when measured = 0
  bool holds = true;
  std::string method;
  std::vector<std::pair<std::string, double>> extra;
};

struct BoundReport {
  std::string theorem;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<BoundRow> grid;
  std::string verdict;
  bool ok = true;

  std::string to_json() const;
  /// theorem, n, measured, bound, slack, holds, method, then extra columns.
  std::string to_csv() const;
};

double slack_ratio(double bound, double measured);

struct EntropyReportOptions {
  /// Evaluation grid; empty means every n in [1, steps].
  std::vector<long long> grid;
  const ProfileCurve* profile = nullptr;
  /// beta for the n^beta / gamma(n) check when gamma is a table.
  double table_beta = 0.45;
};

/// H(n) against rho(n) + 1. Throws InapplicableError for a closed form with
/// beta >= 1/2. The ratio counts as bounded when its log-log slope over the
/// upper half of the grid is <= 0.1 and at least three rows have a finite
/// rho (a table gamma leaves rho undefined once it runs out of domain).
BoundReport entropy_bound_report(const WalkObservables& obs, const GammaModel& gamma,
                                 const EntropyReportOptions& opts = {});

/// Every product u^-1 v, u, v in U. Throws ResourceError above `cap`.
std::vector<GroupElement> set_product(const Group& g, const std::vector<GroupElement>& u, std::size_t cap);

struct TailOptions {
  long long n_max = 64;
  /// Max-version (killed walk) up to this n.
  long long n_max_paths = 12;
  /// Pruning once n lambda >= 1, where the inequality holds for any left side.
  double eps_after_trivial = 1e-6;
  std::size_t product_cap = 20'000'000;
  SpectralOptions spectral;
  ExecutionPolicy policy;
};

struct TailCheck {
  double lambda = 0.0;
  std::size_t set_size = 0;
  std::size_t product_size = 0;
  BoundReport tail;      // P(W_n not in U^-1 U) <= n lambda(U)
  BoundReport max_tail;  // P(exists k <= n: W_k not in U^-1 U) <= (32 n + 1) lambda(U)
};

/// Exact left sides from convolution: the fixed-time side is
/// 1 - mass stored in U^-1 U (an upper end even under pruning), the max side
/// is the mass absorbed by the walk killed outside U^-1 U.
TailCheck tail_check(const StepMeasure& step, const std::vector<GroupElement>& u, const std::string& set_name,
                     const TailOptions& opts = {});

/// f(r) >= lambda(B(r)) as a step function of floor(r).
class RadialProfile {
 public:
  explicit RadialProfile(std::vector<double> by_radius, std::string source);
  double operator()(double r) const;
  int max_radius() const noexcept { return static_cast<int>(values_.size()) - 1; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::vector<double> values_;
  std::string source_;
};

/// lambda(B(r)) for r <= r_max. Balls larger than `ball_cap` elements are
/// replaced by a certified family inside the ball when the group has one
/// (rectangles R_m inside B(r) for lamplighters over Z with an sws step);
/// otherwise the profile stops at the last computed radius.
RadialProfile ball_profile(const StepMeasure& step, int r_max, std::size_t ball_cap = 4000,
                           const SpectralOptions& opts = {});

struct DoublingCertificate {
  double c0 = 1.0;
  double theta = 2.0;
};

/// Smallest C0 with f(r) / f(s) <= C0 (r/s)^-theta for 1 <= s <= r within
/// the computed range of the step function.
DoublingCertificate fit_doubling(const RadialProfile& f, double theta);

/// varrho(n) = inf{r > 0 : f(r) < 1/n} for non-increasing f; RangeError if
/// not reached by r_max.
double varrho(const std::function<double(double)>& f, double n, double r_max);

struct MomentBound {
  double varrho = 0.0;
  double constant = 0.0;  // e^a + C0 e^(2a) / (1 - e^-(theta - a))
  double bound = 0.0;     // constant * varrho^a
  /// Same chain keeping the factor 33 from (32n+1) n f(e^{k_n}) < 33 and
  /// e^{k_n} <= e varrho.
  double bound_conservative = 0.0;
};

/// Throws InapplicableError if alpha >= theta or alpha <= 0.
MomentBound moment_bound(const RadialProfile& f, const DoublingCertificate& cert, double alpha, double n);

struct ComparisonResult {
  double r = 0.0;
  double moment_term = 0.0;  // C |S| r^-2 sum_{|g| <= r} |g|^2 eta(g)
  double tail_term = 0.0;    // eta{|g| >= r}
  double bound = 0.0;
  /// Share of the first moment carried by |g| in [R/2, R], R the largest
  /// length in the support. Above 1% the finite-first-moment hypothesis is
  /// flagged as doubtful.
  double first_moment_tail_share = 0.0;
  bool first_moment_suspect = false;
};

/// Bound on Lambda_eta(e^r) from Lambda_mu(e^r) <= c r^-2, mu uniform on S.
/// Word lengths come from the closed form or `cache`; RangeError beyond it.
ComparisonResult compare_measures(const StepMeasure& eta, const StepMeasure& mu, double c, double r,
                                  const WordMetricCache* cache = nullptr);

}  // namespace grwalk
