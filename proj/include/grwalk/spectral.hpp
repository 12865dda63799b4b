#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "grwalk/group.hpp"
#include "grwalk/measure.hpp"
#include "grwalk/parallel.hpp"

namespace grwalk {

/// Killed kernel P(x, y) = mu(x^-1 y) restricted to a finite set.
class DirichletProblem {
 public:
  /// Throws UsageError on an empty set, repeated elements or an asymmetric step.
  DirichletProblem(const StepMeasure& step, std::vector<GroupElement> omega);

  const std::vector<GroupElement>& omega() const noexcept { return omega_; }
  std::size_t size() const noexcept { return omega_.size(); }
  const Eigen::SparseMatrix<double>& kernel() const noexcept { return kernel_; }
  /// I - P on the set.
  Eigen::SparseMatrix<double> operator_matrix() const;
  /// <f, (I - P) f>; equals E_mu(f) for f supported on the set.
  double energy(const Eigen::VectorXd& f) const;

 private:
  std::vector<GroupElement> omega_;
  Eigen::SparseMatrix<double> kernel_;
};

enum class EigenMethod { automatic, dense, iterative };

struct SpectralOptions {
  /// Residual tolerance ||(I - P) f - lambda f|| for the iterative solver.
  double tol = 1e-10;
  std::size_t dense_threshold = 2000;
  int max_iterations = 10'000;
  EigenMethod method = EigenMethod::automatic;
};

struct SpectralResult {
  double lambda = 0.0;
  double residual = 0.0;
  std::size_t set_size = 0;
  std::string method;  // "dense" or "iterative"
  int iterations = 0;
  Eigen::VectorXd vector;  // unit eigenvector, nonnegative
};

/// Smallest eigenvalue of I - P_Omega. Dense for |Omega| <= dense_threshold,
/// otherwise inverse power iteration with shift 0 on a sparse LDLT factor.
/// Throws ConvergenceError with the best estimate at the iteration cap.
SpectralResult dirichlet_lambda(const DirichletProblem& prob, const SpectralOptions& opts = {});

enum class ProfileFamily { balls, lamplighter_rectangles, bubble_sets };

std::string to_string(ProfileFamily f);
ProfileFamily parse_profile_family(const std::string& s);

struct ProfilePoint {
  double volume = 0.0;
  double lambda = 0.0;        // lambda_mu of this candidate set
  double lambda_upper = 0.0;  // lower envelope up to this volume
  int parameter = 0;          // ball radius or rectangle half-width
  std::string descriptor;
  std::string method;
  double residual = 0.0;
};

/// Upper bounds for Lambda_mu from one candidate family, in increasing volume.
struct ProfileCurve {
  ProfileFamily family = ProfileFamily::balls;
  std::vector<ProfilePoint> points;

  /// Envelope value at volume v: +inf below the smallest volume, the last
  /// value beyond the largest one (still an upper bound since Lambda_mu is
  /// non-increasing).
  double operator()(double v) const;
  double max_volume() const { return points.empty() ? 0.0 : points.back().volume; }
  /// volume, lambda_upper, family, set_descriptor, lambda, method, residual
  std::string to_csv() const;
};

/// Elements of one family member.
std::vector<GroupElement> candidate_set(std::shared_ptr<const Group> group, ProfileFamily family, int parameter);

/// Candidate ladder parameter = 0, 1, ... while the volume stays <= v_max.
ProfileCurve profile_upper(const StepMeasure& step, ProfileFamily family, double v_max,
                           const SpectralOptions& opts = {}, const ExecutionPolicy& policy = {});

/// Replaces lambda_upper by the running minimum of lambda.
void lower_envelope(ProfileCurve& curve);

struct CoulhonOptions {
  double rel_tol = 1e-10;
  /// Upper limit for u = ln(1 / psi).
  double u_cap = 700.0;
  /// Volumes where the profile may jump; the integral is split there.
  std::vector<double> breakpoints;
};

struct CoulhonResult {
  double psi = 1.0;
  /// 2 psi >= 1: the return-probability bound carries no information.
  bool vacuous = false;
  /// The integral stayed below t up to u_cap; psi is exp(-u_cap), which
  /// bounds the exact solution from above.
  bool saturated = false;
};

/// Solves t = int_1^{1/psi} ds / (2 s Lambda(4 s)) for psi, integrating in
/// u = ln s with adaptive Gauss-Kronrod and bisecting in u.
CoulhonResult coulhon_psi(const std::function<double(double)>& lambda_up, double t,
                          const CoulhonOptions& opts = {});
CoulhonResult coulhon_psi(const ProfileCurve& curve, double t, CoulhonOptions opts = {});

/// Certified point of the profile from a return-probability lower bound
/// mu^(2n)(id) >= exp(-gamma_n).
struct LambdaPoint {
  double volume = 0.0;
  double bound = 0.0;
};
LambdaPoint lambda_upper_from_return(double gamma_n, long long n);

/// Family member of volume <= ceil(exp(exp(k))) with the smallest lambda.
/// Throws RangeError if no member qualifies.
ProfilePoint test_sets(const ProfileCurve& curve, double k);

}  // namespace grwalk
