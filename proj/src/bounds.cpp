#include "grwalk/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <absl/container/flat_hash_set.h>
#include <json.hpp>

#include "grwalk/errors.hpp"
#include "grwalk/format.hpp"
#include "grwalk/word_metric.hpp"

namespace grwalk {

GammaModel GammaModel::power(double c, double beta, double kappa) {
  if (!(c > 0.0) || !(beta > 0.0) || !(kappa >= 0.0)) throw UsageError("gamma model needs C > 0, beta > 0, kappa >= 0");
  GammaModel m;
  m.c_ = c;
  m.beta_ = beta;
  m.kappa_ = kappa;
  return m;
}

GammaModel GammaModel::table(std::vector<double> values, std::string source) {
  if (values.size() < 2) throw UsageError("gamma table needs at least two values");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) throw UsageError("gamma table must be strictly increasing");
  GammaModel m;
  m.values_ = std::move(values);
  m.source_ = std::move(source);
  return m;
}

GammaModel GammaModel::from_observables(const WalkObservables& obs) {
  std::vector<double> v;
  for (long long n = 1; 2 * n <= obs.steps(); ++n) v.push_back(-std::log(obs.return_prob(n)));
  return table(std::move(v), "measured -ln mu^(2n)(id), stored lower end");
}

double GammaModel::max_arg() const noexcept {
  return closed_form() ? std::numeric_limits<double>::infinity() : static_cast<double>(values_.size());
}

double GammaModel::operator()(double x) const {
  if (!(x >= 1.0) || x > max_arg()) throw RangeError("gamma evaluated outside its domain");
  if (closed_form()) return c_ * std::pow(x, beta_) * (kappa_ == 0.0 ? 1.0 : std::pow(std::log(x + 1.0), kappa_));
  const auto i = static_cast<std::size_t>(std::floor(x)) - 1;
  if (i + 1 >= values_.size()) return values_.back();
  const double w = x - std::floor(x);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double GammaModel::inverse(double y) const {
  const double lo_val = (*this)(1.0);
  if (!(y >= lo_val)) throw RangeError("gamma inverse below gamma(1)");
  if (closed_form()) {
    if (kappa_ == 0.0) return std::pow(y / c_, 1.0 / beta_);
    double lo = 1.0, hi = 2.0;
    while ((*this)(hi) < y) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw RangeError("gamma inverse overflow");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((*this)(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  if (y > values_.back()) throw RangeError("gamma inverse beyond the table");
  auto it = std::lower_bound(values_.begin(), values_.end(), y);
  const auto j = static_cast<std::size_t>(it - values_.begin());
  if (j == 0) return 1.0;
  const double a = values_[j - 1], b = values_[j];
  return static_cast<double>(j) + (y - a) / (b - a);
}

std::string GammaModel::describe() const {
  if (!closed_form()) return "table(" + std::to_string(values_.size()) + " values; " + source_ + ")";
  std::string s = format_real(c_) + " n^" + format_real(beta_);
  if (kappa_ != 0.0) s += " ln(n+1)^" + format_real(kappa_);
  return s;
}

bool GammaModel::ratio_nondecreasing(double beta, const std::vector<double>& grid) const {
  double prev = -std::numeric_limits<double>::infinity();
  for (double x : grid) {
    const double r = std::pow(x, beta) / (*this)(x);
    if (r < prev * (1.0 - 1e-12)) return false;
    prev = r;
  }
  return true;
}

double rho(const GammaModel& gamma, double n) {
  auto h = [&](double x) { return gamma.inverse(x / 2.0) / x; };
  double lo = 2.0 * gamma(1.0);
  if (h(lo) > n) return lo;
  const double x_max = gamma.closed_form() ? std::numeric_limits<double>::infinity() : 2.0 * gamma(gamma.max_arg());
  double hi = std::min(2.0 * lo, x_max);
  while (!(h(hi) > n)) {
    if (hi >= x_max || !std::isfinite(hi)) throw RangeError("rho: condition not met within the gamma domain");
    lo = hi;
    hi = std::min(2.0 * hi, x_max);
  }
  for (int it = 0; it < 300 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > n ? hi : lo) = mid;
  }
  return hi;
}

int ell_n(const GammaModel& gamma, double n) {
  auto phi = [&](double x) { return gamma.inverse(x) / (x * x); };
  const double k0 = std::log(gamma(2.0) + std::log(64.0));
  double prev = -1.0;
  for (int k = static_cast<int>(std::ceil(k0));; ++k) {
    const double x = std::exp(static_cast<double>(k)) / 2.0;
    const double p = phi(x);
    if (prev >= 0.0 && p < prev) throw InapplicableError("phi = gamma^-1(x)/x^2 decreases on the scan");
    prev = p;
    if (std::exp(static_cast<double>(k)) * std::sqrt(p) >= n) return k;
  }
}

double ell_tail_value(const GammaModel& gamma, int ell) {
  const double x = std::exp(static_cast<double>(ell));
  return 1.0 / std::sqrt(gamma.inverse(x) / (x * x));
}

std::optional<double> rho_tilde(const ProfileCurve& curve, double n) {
  for (const auto& p : curve.points)
    if (p.lambda_upper <= 1.0 / n) return std::log(p.volume);
  return std::nullopt;
}

LambdaPoint lambda_upper_from_return(const GammaModel& gamma, long long n) {
  return lambda_upper_from_return(gamma(static_cast<double>(n)), n);
}

double slack_ratio(double bound, double measured) {
  if (measured <= 0.0) return std::numeric_limits<double>::infinity();
  return bound / measured;
}

namespace {

nlohmann::ordered_json json_real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

}  // namespace

std::string BoundReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["theorem"] = theorem;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [k, v] : inputs) in[k] = v;
  j["inputs"] = in;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : grid) {
    nlohmann::ordered_json row;
    row["n"] = r.n;
    row["measured"] = json_real(r.measured);
    row["bound"] = json_real(r.bound);
    row["slack"] = json_real(r.slack);
    row["holds"] = r.holds;
    row["method"] = r.method;
    for (const auto& [k, v] : r.extra) row[k] = json_real(v);
    rows.push_back(row);
  }
  j["grid"] = rows;
  j["verdict"] = verdict;
  j["ok"] = ok;
  return j.dump(2) + "\n";
}

std::string BoundReport::to_csv() const {
  std::ostringstream os;
  os << "theorem,n,measured,bound,slack,holds,method";
  if (!grid.empty())
    for (const auto& e : grid.front().extra) os << ',' << e.first;
  os << '\n';
  for (const auto& r : grid) {
    os << theorem << ',' << r.n << ',' << format_real(r.measured) << ',' << format_real(r.bound) << ','
       << format_real(r.slack) << ',' << (r.holds ? 1 : 0) << ',' << r.method;
    for (const auto& e : r.extra) os << ',' << format_real(e.second);
    os << '\n';
  }
  return os.str();
}

namespace {

// Least-squares slope of ln y against ln x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double d = static_cast<double>(m) * sxx - sx * sx;
  return d == 0.0 ? 0.0 : (static_cast<double>(m) * sxy - sx * sy) / d;
}

}  // namespace

BoundReport entropy_bound_report(const WalkObservables& obs, const GammaModel& gamma,
                                 const EntropyReportOptions& opts) {
  if (gamma.closed_form() && gamma.beta() >= 0.5)
    throw InapplicableError("entropy bound needs beta < 1/2, got " + format_real(gamma.beta()));
  std::vector<long long> grid = opts.grid;
  if (grid.empty())
    for (long long n = 1; n <= obs.steps(); ++n) grid.push_back(n);

  BoundReport rep;
  rep.theorem = "entropy-rho";
  rep.inputs = {{"gamma", gamma.describe()},
                {"profile", opts.profile ? to_string(opts.profile->family) : std::string("none")},
                {"entropy_error", "pruned mass * (max surprisal + 1), repo convention"}};

  std::vector<double> gx;
  for (long long n : grid) gx.push_back(static_cast<double>(n));
  bool hyp = true;
  if (!gamma.closed_form()) {
    std::vector<double> in_range;
    for (double x : gx)
      if (x <= gamma.max_arg()) in_range.push_back(x);
    hyp = gamma.ratio_nondecreasing(opts.table_beta, in_range);
    rep.inputs.push_back({"table_beta", format_real(opts.table_beta)});
  }
  rep.inputs.push_back({"hypothesis_ratio_nondecreasing", hyp ? "yes" : "no"});

  std::vector<double> xs, ratios;
  for (long long n : grid) {
    if (n < 1 || n > obs.steps()) throw RangeError("entropy report grid beyond the observed steps");
    BoundRow row;
    row.n = n;
    row.measured = obs.entropy[static_cast<std::size_t>(n)];
    double r = std::numeric_limits<double>::quiet_NaN();
    try {
      r = rho(gamma, static_cast<double>(n));
    } catch (const RangeError&) {
    }
    row.bound = r + 1.0;
    row.slack = slack_ratio(row.bound, row.measured);
    row.method = gamma.closed_form() ? "closed-form" : "table";
    const double ratio = row.measured / row.bound;
    row.extra.push_back({"rho", r});
    double rt = std::numeric_limits<double>::quiet_NaN();
    if (opts.profile)
      if (auto v = rho_tilde(*opts.profile, static_cast<double>(n))) rt = *v;
    row.extra.push_back({"rho_tilde", rt});
    row.extra.push_back({"ratio", ratio});
    row.extra.push_back({"entropy_error", obs.entropy_error[static_cast<std::size_t>(n)]});
    if (std::isfinite(ratio) && ratio > 0) {
      xs.push_back(static_cast<double>(n));
      ratios.push_back(ratio);
    }
    rep.grid.push_back(std::move(row));
  }
  const std::size_t half = xs.size() / 2;
  const double slope = loglog_slope(std::vector<double>(xs.begin() + static_cast<long>(half), xs.end()),
                                    std::vector<double>(ratios.begin() + static_cast<long>(half), ratios.end()));
  rep.inputs.push_back({"ratio_loglog_slope_upper_half", format_real(slope)});
  const bool bounded = ratios.size() >= 3 && slope <= 0.1;
  rep.verdict = bounded ? "ratio bounded on grid" : "ratio not bounded on grid";
  rep.ok = bounded;
  return rep;
}

std::vector<GroupElement> set_product(const Group& g, const std::vector<GroupElement>& u, std::size_t cap) {
  absl::flat_hash_set<GroupElement, GroupElementHash> seen;
  std::vector<GroupElement> out;
  for (const auto& a : u) {
    const GroupElement ai = g.inverse(a);
    for (const auto& b : u) {
      GroupElement p = g.multiply(ai, b);
      if (seen.insert(p).second) {
        out.push_back(std::move(p));
        if (out.size() > cap) throw ResourceError("U^-1 U exceeds its cap", static_cast<long long>(cap));
      }
    }
  }
  return out;
}

TailCheck tail_check(const StepMeasure& step, const std::vector<GroupElement>& u, const std::string& set_name,
                     const TailOptions& opts) {
  const Group& g = step.group();
  TailCheck tc;
  tc.set_size = u.size();
  auto spec = dirichlet_lambda(DirichletProblem(step, u), opts.spectral);
  tc.lambda = spec.lambda;
  auto prod = set_product(g, u, opts.product_cap);
  tc.product_size = prod.size();
  absl::flat_hash_set<GroupElement, GroupElementHash> a(prod.begin(), prod.end());
  auto inside = [&](const GroupElement& x) { return a.contains(x); };

  auto inputs = [&](BoundReport& r) {
    r.inputs = {{"group", g.spec().canonical_text()},
                {"set", set_name},
                {"set_size", std::to_string(u.size())},
                {"product_size", std::to_string(prod.size())},
                {"lambda", format_real(tc.lambda)},
                {"lambda_method", spec.method}};
  };
  tc.tail.theorem = "tail";
  tc.max_tail.theorem = "max-tail";
  inputs(tc.tail);
  inputs(tc.max_tail);

  Distribution d(step.group_ptr());
  for (long long n = 1; n <= opts.n_max; ++n) {
    const bool trivial_before = static_cast<double>(n - 1) * tc.lambda >= 1.0;
    d = convolve(d, step, trivial_before ? opts.eps_after_trivial : 0.0, opts.policy);
    double in = 0.0, out = 0.0;
    for (const auto& [x, m] : d.entries()) (inside(x) ? in : out) += m;
    BoundRow row;
    row.n = n;
    row.measured = std::max(0.0, 1.0 - in);
    row.bound = static_cast<double>(n) * tc.lambda;
    row.slack = slack_ratio(row.bound, row.measured);
    row.holds = row.measured <= row.bound;
    row.method = d.pruned_mass() > 0.0 ? "pruned" : "exact";
    row.extra = {{"lhs_lower", out}, {"pruned_mass", d.pruned_mass()}};
    tc.tail.grid.push_back(std::move(row));
  }

  Distribution k(step.group_ptr());
  for (long long n = 1; n <= opts.n_max_paths; ++n) {
    k = convolve(k, step, 0.0, opts.policy, inside);
    BoundRow row;
    row.n = n;
    row.measured = k.absorbed_mass();
    row.bound = (32.0 * static_cast<double>(n) + 1.0) * tc.lambda;
    row.slack = slack_ratio(row.bound, row.measured);
    row.holds = row.measured <= row.bound;
    row.method = "killed-walk";
    tc.max_tail.grid.push_back(std::move(row));
  }
  for (auto* r : {&tc.tail, &tc.max_tail}) {
    r->ok = std::all_of(r->grid.begin(), r->grid.end(), [](const BoundRow& x) { return x.holds; });
    r->verdict = r->ok ? "inequality holds at every n" : "VIOLATION";
  }
  return tc;
}

RadialProfile::RadialProfile(std::vector<double> by_radius, std::string source)
    : values_(std::move(by_radius)), source_(std::move(source)) {
  if (values_.empty()) throw UsageError("radial profile needs at least radius 0");
}

double RadialProfile::operator()(double r) const {
  if (!(r >= 0.0)) throw RangeError("radial profile at negative radius");
  const double f = std::floor(r);
  if (f > static_cast<double>(max_radius())) throw RangeError("radial profile beyond its computed radius");
  return values_[static_cast<std::size_t>(f)];
}

namespace {

// Rectangle certificate for sws-type steps on Z_m wr Z: R_m = positions
// [-m, m] x all lamps on [-m, m]. Every step changes lamps only between the
// old and new position, so phi(position) is an eigenfunction of the killed
// kernel on R_m with the eigenvalue of the projected base walk on [-m, m].
struct RectangleCertificate {
  std::vector<int> radius_of;      // word-length diameter L(m) for m = 0, 1, ...
  std::vector<double> lambda_of;   // base interval eigenvalue for m = 0, 1, ...
};

std::optional<RectangleCertificate> rectangle_certificate(const StepMeasure& step, int r_max,
                                                          const SpectralOptions& opts) {
  const Group& g = step.group();
  if (g.spec().family != Family::LamplighterOverZ || g.spec().dim != 1) return std::nullopt;
  std::map<std::int64_t, double> base;
  for (const auto& e : step.support()) {
    auto st = unpack_lamplighter(g, e.element);
    const std::int64_t p = st.position[0];
    for (const auto& [site, v] : st.lamps)
      if (site[0] < std::min<std::int64_t>(0, p) || site[0] > std::max<std::int64_t>(0, p)) return std::nullopt;
    base[p] += e.mass;
  }
  auto z = make_group(GroupSpec::z(1));
  std::vector<MassEntry> nu;
  for (const auto& [p, m] : base) nu.push_back({GroupElement(GroupElement::Code{z->tag(), p}), m});
  StepMeasure base_step(z, nu);

  std::int64_t worst = 1;
  for (std::int64_t v = 1; v < g.lamp_order(); ++v) {
    LampState one{{0}, {{{0}, v}}}, best{{0}, {{{0}, worst}}};
    if (*g.closed_form_length(pack_lamplighter(g, one)) > *g.closed_form_length(pack_lamplighter(g, best))) worst = v;
  }
  RectangleCertificate cert;
  for (int m = 0;; ++m) {
    LampState st;
    for (int s = -m; s <= m; ++s) st.lamps.push_back({{s}, worst});
    std::int64_t diam = 0;
    for (int p = -m; p <= m; ++p) {
      st.position = {p};
      diam = std::max(diam, *g.closed_form_length(pack_lamplighter(g, st)));
    }
    if (diam > r_max) break;
    std::vector<GroupElement> interval;
    for (int p = -m; p <= m; ++p) interval.emplace_back(GroupElement::Code{z->tag(), p});
    cert.radius_of.push_back(static_cast<int>(diam));
    cert.lambda_of.push_back(dirichlet_lambda(DirichletProblem(base_step, interval), opts).lambda);
  }
  return cert;
}

}  // namespace

RadialProfile ball_profile(const StepMeasure& step, int r_max, std::size_t ball_cap, const SpectralOptions& opts) {
  auto group = step.group_ptr();
  WordMetricCache cache(group);
  std::vector<double> vals;
  for (int r = 0; r <= r_max; ++r) {
    try {
      cache.extend(r, ball_cap);
    } catch (const ResourceError&) {
      break;
    }
    vals.push_back(dirichlet_lambda(DirichletProblem(step, cache.ball_elements(r)), opts).lambda);
  }
  std::string source = "balls r<=" + std::to_string(static_cast<int>(vals.size()) - 1);
  auto rect = rectangle_certificate(step, r_max, opts);
  if (!rect) return RadialProfile(std::move(vals), source);
  std::vector<double> out;
  for (int r = 0; r <= r_max; ++r) {
    double f = std::numeric_limits<double>::infinity();
    if (static_cast<std::size_t>(r) < vals.size()) f = vals[static_cast<std::size_t>(r)];
    for (std::size_t m = 0; m < rect->radius_of.size(); ++m)
      if (rect->radius_of[m] <= r) f = std::min(f, rect->lambda_of[m]);
    if (!out.empty()) f = std::min(f, out.back());
    if (!std::isfinite(f)) break;
    out.push_back(f);
  }
  return RadialProfile(std::move(out), source + "; rectangles inside balls");
}

DoublingCertificate fit_doubling(const RadialProfile& f, double theta) {
  if (!(theta > 0.0)) throw UsageError("doubling exponent must be positive");
  const auto& v = f.values();
  DoublingCertificate c{1.0, theta};
  // sup over real 1 <= s <= r: take s at the bottom of its radius class and r
  // at the top of its class
  for (std::size_t b = 1; b < v.size(); ++b)
    for (std::size_t a = b; a < v.size(); ++a) {
      const double top = std::min(static_cast<double>(a) + 1.0, static_cast<double>(v.size() - 1));
      const double r = std::max(top, static_cast<double>(a));
      c.c0 = std::max(c.c0, v[a] / v[b] * std::pow(r / static_cast<double>(b), theta));
    }
  return c;
}

double varrho(const std::function<double(double)>& f, double n, double r_max) {
  if (!(n > 0.0)) throw UsageError("varrho needs n > 0");
  const double target = 1.0 / n;
  if (f(0.0) < target) return 0.0;
  if (!(f(r_max) < target)) throw RangeError("varrho: f(r) >= 1/n up to r_max");
  double lo = 0.0, hi = r_max;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? hi : lo) = mid;
  }
  return hi;
}

MomentBound moment_bound(const RadialProfile& f, const DoublingCertificate& cert, double alpha, double n) {
  if (!(alpha > 0.0) || !(alpha < cert.theta))
    throw InapplicableError("moment bound needs 0 < alpha < theta = " + format_real(cert.theta));
  MomentBound mb;
  mb.varrho = varrho([&](double r) { return f(r); }, n, static_cast<double>(f.max_radius()));
  const double geo = 1.0 / (1.0 - std::exp(-(cert.theta - alpha)));
  mb.constant = std::exp(alpha) + cert.c0 * std::exp(2.0 * alpha) * geo;
  mb.bound = mb.constant * std::pow(mb.varrho, alpha);
  mb.bound_conservative =
      (std::exp(alpha) + 33.0 * cert.c0 * std::exp(2.0 * alpha) * geo) * std::exp(alpha) * std::pow(mb.varrho, alpha);
  return mb;
}

ComparisonResult compare_measures(const StepMeasure& eta, const StepMeasure& mu, double c, double r,
                                  const WordMetricCache* cache) {
  if (eta.group().tag() != mu.group().tag()) throw UsageError("measures live on different groups");
  if (!(r > 0.0)) throw UsageError("comparison radius must be positive");
  const double m0 = mu.support().front().mass;
  for (const auto& e : mu.support())
    if (std::abs(e.mass - m0) > 1e-15) throw UsageError("comparison needs mu uniform on S");
  const Group& g = eta.group();
  auto length = [&](const GroupElement& x) -> double {
    if (auto l = g.closed_form_length(x)) return static_cast<double>(*l);
    if (!cache) throw RangeError("no word metric available for eta's support");
    auto l = cache->find(x);
    if (!l) throw RangeError("eta's support extends beyond the metric cache");
    return *l;
  };
  ComparisonResult res;
  res.r = r;
  double second = 0.0, first = 0.0, max_len = 0.0;
  std::vector<std::pair<double, double>> lens;
  for (const auto& e : eta.support()) {
    const double l = length(e.element);
    lens.push_back({l, e.mass});
    max_len = std::max(max_len, l);
    if (l <= r) second += l * l * e.mass;
    if (l >= r) res.tail_term += e.mass;
    first += l * e.mass;
  }
  double upper_half = 0.0;
  for (const auto& [l, m] : lens)
    if (l >= max_len / 2.0) upper_half += l * m;
  res.first_moment_tail_share = first > 0.0 ? upper_half / first : 0.0;
  res.first_moment_suspect = res.first_moment_tail_share > 0.01;
  res.moment_term = c * static_cast<double>(mu.support().size()) / (r * r) * second;
  res.bound = res.moment_term + res.tail_term;
  return res;
}

}  // namespace grwalk
