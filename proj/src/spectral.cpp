#include "grwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <absl/container/flat_hash_map.h>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "grwalk/errors.hpp"
#include "grwalk/format.hpp"
#include "grwalk/word_metric.hpp"

namespace grwalk {

DirichletProblem::DirichletProblem(const StepMeasure& step, std::vector<GroupElement> omega)
    : omega_(std::move(omega)) {
  if (omega_.empty()) throw UsageError("Dirichlet problem needs a nonempty set");
  if (!step.symmetric()) throw UsageError("Dirichlet problem needs a symmetric step");
  const Group& g = step.group();
  absl::flat_hash_map<GroupElement, int, GroupElementHash> index;
  index.reserve(omega_.size());
  for (std::size_t i = 0; i < omega_.size(); ++i)
    if (!index.emplace(omega_[i], static_cast<int>(i)).second) throw UsageError("repeated element in Dirichlet set");

  std::vector<Eigen::Triplet<double>> trip;
  GroupElement::Code scratch;
  for (std::size_t i = 0; i < omega_.size(); ++i)
    for (const auto& s : step.support()) {
      g.multiply_into(omega_[i], s.element, scratch);
      auto it = index.find(GroupElement(std::span<const std::int64_t>(scratch.data(), scratch.size())));
      if (it != index.end()) trip.emplace_back(static_cast<int>(i), it->second, s.mass);
    }
  const auto n = static_cast<Eigen::Index>(omega_.size());
  kernel_.resize(n, n);
  kernel_.setFromTriplets(trip.begin(), trip.end());
  kernel_.makeCompressed();
}

Eigen::SparseMatrix<double> DirichletProblem::operator_matrix() const {
  Eigen::SparseMatrix<double> id(kernel_.rows(), kernel_.cols());
  id.setIdentity();
  Eigen::SparseMatrix<double> a = id - kernel_;
  a.makeCompressed();
  return a;
}

double DirichletProblem::energy(const Eigen::VectorXd& f) const { return f.squaredNorm() - f.dot(kernel_ * f); }

namespace {

SpectralResult dense_lambda(const DirichletProblem& prob) {
  Eigen::MatrixXd a = Eigen::MatrixXd(prob.operator_matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0, 0.0);
  SpectralResult r;
  r.lambda = es.eigenvalues()(0);
  r.vector = es.eigenvectors().col(0);
  if (r.vector.sum() < 0) r.vector = -r.vector;
  r.residual = (a * r.vector - r.lambda * r.vector).norm();
  r.method = "dense";
  return r;
}

SpectralResult iterative_lambda(const DirichletProblem& prob, const SpectralOptions& opts) {
  const Eigen::SparseMatrix<double> a = prob.operator_matrix();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("I - P is singular on this set", 0.0, 0.0);
  const auto n = a.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd ax = a * x;
  double lambda = x.dot(ax);
  double residual = (ax - lambda * x).norm();
  int it = 0;
  while (residual > opts.tol && it < opts.max_iterations) {
    x = ldlt.solve(x);
    x.normalize();
    ax = a * x;
    lambda = x.dot(ax);
    residual = (ax - lambda * x).norm();
    ++it;
  }
  if (residual > opts.tol) throw ConvergenceError("inverse iteration hit its cap", lambda, residual);
  SpectralResult r;
  r.lambda = lambda;
  r.residual = residual;
  r.iterations = it;
  r.vector = x.sum() < 0 ? Eigen::VectorXd(-x) : x;
  r.method = "iterative";
  return r;
}

}  // namespace

SpectralResult dirichlet_lambda(const DirichletProblem& prob, const SpectralOptions& opts) {
  const bool dense = opts.method == EigenMethod::dense ||
                     (opts.method == EigenMethod::automatic && prob.size() <= opts.dense_threshold);
  SpectralResult r = dense ? dense_lambda(prob) : iterative_lambda(prob, opts);
  r.set_size = prob.size();
  return r;
}

std::string to_string(ProfileFamily f) {
  switch (f) {
    case ProfileFamily::balls:
      return "balls";
    case ProfileFamily::lamplighter_rectangles:
      return "lamplighter-rectangles";
    case ProfileFamily::bubble_sets:
      return "bubble-sets";
  }
  return "?";
}

ProfileFamily parse_profile_family(const std::string& s) {
  for (auto f : {ProfileFamily::balls, ProfileFamily::lamplighter_rectangles, ProfileFamily::bubble_sets})
    if (to_string(f) == s) return f;
  throw UsageError("unknown profile family '" + s + "'");
}

double ProfileCurve::operator()(double v) const {
  auto it = std::upper_bound(points.begin(), points.end(), v,
                             [](double x, const ProfilePoint& p) { return x < p.volume; });
  return it == points.begin() ? std::numeric_limits<double>::infinity() : std::prev(it)->lambda_upper;
}

std::string ProfileCurve::to_csv() const {
  std::ostringstream os;
  os << "volume,lambda_upper,family,set_descriptor,lambda,method,residual\n";
  for (const auto& p : points)
    os << format_real(p.volume) << ',' << format_real(p.lambda_upper) << ',' << to_string(family) << ','
       << p.descriptor << ',' << format_real(p.lambda) << ',' << p.method << ',' << format_real(p.residual) << '\n';
  return os.str();
}

void lower_envelope(ProfileCurve& curve) {
  double best = std::numeric_limits<double>::infinity();
  for (auto& p : curve.points) {
    best = std::min(best, p.lambda);
    p.lambda_upper = best;
  }
}

namespace {

void require_family(const Group& g, ProfileFamily family) {
  const Family f = g.spec().family;
  if (family == ProfileFamily::lamplighter_rectangles && !(f == Family::LamplighterOverZ && g.spec().dim == 1))
    throw InapplicableError("lamplighter rectangles need a finite-lamp lamplighter over Z");
  if (family == ProfileFamily::bubble_sets && f != Family::BubbleWreath)
    throw InapplicableError("bubble sets need a bubble wreath group");
}

double rectangle_volume(int r, std::int64_t m) {
  return (2.0 * r + 1) * std::pow(static_cast<double>(m), 2.0 * r + 1);
}

std::vector<GroupElement> rectangle(const Group& g, int r) {
  const std::int64_t m = g.lamp_order();
  const int sites = 2 * r + 1;
  std::int64_t configs = 1;
  for (int i = 0; i < sites; ++i) configs *= m;
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(configs) * sites);
  for (std::int64_t c = 0; c < configs; ++c) {
    LampState st;
    std::int64_t rest = c;
    for (int i = 0; i < sites; ++i, rest /= m)
      if (rest % m != 0) st.lamps.push_back({{static_cast<std::int64_t>(i - r)}, rest % m});
    for (int p = -r; p <= r; ++p) {
      st.position = {p};
      out.push_back(pack_lamplighter(g, st));
    }
  }
  return out;
}

}  // namespace

std::vector<GroupElement> candidate_set(std::shared_ptr<const Group> group, ProfileFamily family, int parameter) {
  require_family(*group, family);
  if (parameter < 0) throw UsageError("candidate set parameter must be nonnegative");
  if (family == ProfileFamily::lamplighter_rectangles) return rectangle(*group, parameter);
  return ball(std::move(group), parameter).ball_elements(parameter);
}

ProfileCurve profile_upper(const StepMeasure& step, ProfileFamily family, double v_max, const SpectralOptions& opts,
                           const ExecutionPolicy& policy) {
  auto group = step.group_ptr();
  require_family(*group, family);
  if (!(v_max >= 1.0)) throw UsageError("profile needs v_max >= 1");
  ProfileCurve curve;
  curve.family = family;
  std::vector<std::vector<GroupElement>> sets;

  if (family == ProfileFamily::lamplighter_rectangles) {
    for (int r = 0; rectangle_volume(r, group->lamp_order()) <= v_max; ++r) {
      sets.push_back(rectangle(*group, r));
      curve.points.push_back({static_cast<double>(sets.back().size()), 0, 0, r, "rectangle r=" + std::to_string(r), "", 0});
    }
  } else {
    WordMetricCache cache(group);
    const auto cap = static_cast<std::size_t>(std::min(v_max * 64.0 + 64.0, 5e7));
    for (int r = 0;; ++r) {
      try {
        cache.extend(r, cap);
      } catch (const ResourceError&) {
        break;
      }
      if (static_cast<double>(cache.ball_size(r)) > v_max) break;
      sets.push_back(cache.ball_elements(r));
      curve.points.push_back({static_cast<double>(sets.back().size()), 0, 0, r, "ball r=" + std::to_string(r), "", 0});
    }
  }

  parallel_for(sets.size(), policy, [&](std::size_t i) {
    auto res = dirichlet_lambda(DirichletProblem(step, std::move(sets[i])), opts);
    curve.points[i].lambda = res.lambda;
    curve.points[i].method = res.method;
    curve.points[i].residual = res.residual;
  });
  lower_envelope(curve);
  return curve;
}

CoulhonResult coulhon_psi(const std::function<double(double)>& lambda_up, double t, const CoulhonOptions& opts) {
  if (!(t >= 0.0)) throw UsageError("Coulhon inversion needs t >= 0");
  CoulhonResult res;
  if (t == 0.0) {
    res.vacuous = true;
    return res;
  }
  // integrand in u = ln s
  auto g = [&](double u) {
    const double lam = lambda_up(4.0 * std::exp(u));
    if (!(lam > 0.0)) throw UsageError("profile bound must be positive");
    return 1.0 / (2.0 * lam);
  };
  auto integral = [&](double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 15, opts.rel_tol);
  };

  std::vector<double> cuts{0.0};
  for (double v : opts.breakpoints) {
    const double u = std::log(v / 4.0);
    if (u > 0.0 && u < opts.u_cap) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // unit pieces keep every piece finite when the integrand grows like exp(c u)
  while (cuts.back() < opts.u_cap) cuts.push_back(std::min(opts.u_cap, std::floor(cuts.back()) + 1.0));

  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double piece = integral(a, b);
    if (std::isfinite(piece) && acc + piece < t) {
      acc += piece;
      continue;
    }
    double lo = a, hi = b;
    while (hi - lo > 1e-14 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double part = integral(a, mid);
      (std::isfinite(part) && acc + part < t ? lo : hi) = mid;
    }
    res.psi = std::exp(-hi);
    res.vacuous = 2.0 * res.psi >= 1.0;
    return res;
  }
  res.psi = std::exp(-opts.u_cap);
  res.saturated = true;
  return res;
}

CoulhonResult coulhon_psi(const ProfileCurve& curve, double t, CoulhonOptions opts) {
  if (curve.points.empty()) throw UsageError("empty profile");
  for (const auto& p : curve.points) opts.breakpoints.push_back(p.volume);
  return coulhon_psi([&](double v) { return curve(v); }, t, opts);
}

LambdaPoint lambda_upper_from_return(double gamma_n, long long n) {
  if (n < 1) throw UsageError("lambda_upper_from_return needs n >= 1");
  return {8.0 * std::exp(gamma_n), (gamma_n + std::log(8.0)) / (2.0 * static_cast<double>(n))};
}

ProfilePoint test_sets(const ProfileCurve& curve, double k) {
  const double cap = std::ceil(std::exp(std::exp(k)));
  const ProfilePoint* best = nullptr;
  for (const auto& p : curve.points)
    if (p.volume <= cap && (!best || p.lambda < best->lambda)) best = &p;
  if (!best) throw RangeError("no candidate set of volume <= " + format_real(cap));
  return *best;
}

}  // namespace grwalk
