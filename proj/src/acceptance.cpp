#include "grwalk/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include <absl/container/flat_hash_set.h>
#include <json.hpp>

#include "grwalk/bounds.hpp"
#include "grwalk/bubble.hpp"
#include "grwalk/errors.hpp"
#include "grwalk/spectral.hpp"
#include "grwalk/walk.hpp"
#include "grwalk/word_metric.hpp"

namespace grwalk {

namespace {

using json = nlohmann::ordered_json;

struct Outcome {
  bool pass = true;
  json detail = json::object();
};

// mu^(2n)(0) on Z, by the ratio recurrence c_n = c_{n-1} (2n-1) / (2n).
std::vector<long double> central_binomials(int n_max) {
  std::vector<long double> c{1.0L};
  for (int n = 1; n <= n_max; ++n) c.push_back(c.back() * (2.0L * n - 1.0L) / (2.0L * n));
  return c;
}

std::shared_ptr<const Group> group(const std::string& spec) { return make_group(GroupSpec::parse(spec)); }

StepMeasure sws(const std::shared_ptr<const Group>& g) {
  return sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome binomial_oracle(const AcceptanceOptions& o) {
  Outcome out;
  const auto exact = central_binomials(64);
  auto curve = return_probability_curve(uniform_measure(group("Z")), 64, 0.0, o.policy);
  double worst = 0.0;
  int worst_n = 0;
  for (int n = 0; n <= 64; ++n) {
    const double e = static_cast<double>(std::abs((curve.value[n] - exact[n]) / exact[n]));
    if (e > worst) worst = e, worst_n = n;
  }
  out.pass = worst <= 1e-10;
  out.detail = {{"n_max", 64}, {"max_relative_error", worst}, {"worst_n", worst_n}, {"tolerance", 1e-10}};
  return out;
}

Outcome entropy_slope_check(const AcceptanceOptions& o) {
  Outcome out;
  json rows = json::array();
  for (int d : {1, 2}) {
    ObservableOptions opts;
    opts.policy = o.policy;
    opts.compute_escape = false;
    auto obs = compute_observables(uniform_measure(make_group(GroupSpec::z(d))), 512, opts);
    std::vector<double> x, y;
    double ledger = 0.0;
    for (int n = 64; n <= 512; ++n) {
      x.push_back(std::log(static_cast<double>(n)));
      y.push_back(obs.entropy[n]);
      ledger = std::max(ledger, obs.pruned_mass[n]);
    }
    const double slope = least_squares_slope(x, y);
    const double target = d / 2.0;
    const bool ok = std::abs(slope - target) <= 0.1 * target && ledger < 1e-9;
    out.pass &= ok;
    rows.push_back({{"d", d}, {"slope", slope}, {"target", target}, {"pruned_mass", ledger}, {"pass", ok}});
  }
  out.detail = {{"range", "n in [64, 512]"}, {"rows", rows}};
  return out;
}

Outcome eigen_oracles(const AcceptanceOptions&) {
  Outcome out;
  json sets = json::array();
  double worst = 0.0;
  auto compare = [&](const std::string& spec, bool sws_step, int r) {
    auto g = group(spec);
    StepMeasure mu = sws_step ? sws(g) : uniform_measure(g);
    DirichletProblem prob(mu, ball(g, r).ball_elements(r));
    SpectralOptions dense, iter;
    dense.method = EigenMethod::dense;
    iter.method = EigenMethod::iterative;
    iter.tol = 1e-12;
    const double a = dirichlet_lambda(prob, dense).lambda;
    const double b = dirichlet_lambda(prob, iter).lambda;
    worst = std::max(worst, std::abs(a - b));
    sets.push_back({{"group", spec}, {"ball_radius", r}, {"size", prob.size()}, {"dense", a}, {"iterative", b}});
  };
  compare("Z^2", false, 10);
  compare("Z^2", false, 31);
  compare("Z^3", false, 9);
  compare("Z2wrZ", false, 9);
  compare("Z2wrZ", true, 4);
  compare("heisenberg", false, 6);
  compare("BS(1,2)", false, 8);
  double interval = 0.0;
  auto z = group("Z");
  auto mu = uniform_measure(z);
  std::vector<GroupElement> powers{z->generators().front()};
  while (powers.size() < 200) powers.push_back(z->multiply(powers.back(), z->generators().front()));
  for (int m = 1; m <= 200; ++m) {
    std::vector<GroupElement> omega(powers.begin(), powers.begin() + m);
    SpectralOptions dense;
    dense.method = EigenMethod::dense;
    const double lam = dirichlet_lambda(DirichletProblem(mu, omega), dense).lambda;
    interval = std::max(interval, std::abs(lam - (1.0 - std::cos(M_PI / (m + 1.0)))));
  }
  bool sizes_ok = std::all_of(sets.begin(), sets.end(), [](const json& s) { return s["size"].get<int>() <= 2000; });
  out.pass = sizes_ok && worst <= 1e-8 && interval <= 1e-10;
  out.detail = {{"sets", sets},
                {"max_dense_iterative_gap", worst},
                {"interval_m_max", 200},
                {"interval_max_error", interval}};
  return out;
}

struct TailRun {
  std::string group;
  int radius = 0;
  TailCheck check;
};

std::vector<TailRun> tail_runs(const AcceptanceOptions& o, const std::vector<std::string>& groups, long long n_max,
                               long long n_paths) {
  std::vector<TailRun> runs;
  for (const auto& spec : groups) {
    auto g = group(spec);
    auto mu = uniform_measure(g);
    auto cache = ball(g, 8);
    for (int r = 1; r <= 8; ++r) {
      TailOptions to;
      to.n_max = n_max;
      to.n_max_paths = n_paths;
      to.policy = o.policy;
      runs.push_back({spec, r, tail_check(mu, cache.ball_elements(r), "ball", to)});
    }
  }
  return runs;
}

Outcome tail_lemma(const AcceptanceOptions& o) {
  Outcome out;
  json rows = json::array();
  std::size_t cases = 0, violations = 0;
  for (const auto& run : tail_runs(o, {"Z", "Z^2", "Z2wrZ"}, 64, 0)) {
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t pruned = 0;
    for (const auto& row : run.check.tail.grid) {
      ++cases;
      violations += !row.holds;
      min_slack = std::min(min_slack, row.slack);
      pruned += row.method == "pruned";
    }
    rows.push_back({{"group", run.group},
                    {"radius", run.radius},
                    {"lambda", run.check.lambda},
                    {"product_size", run.check.product_size},
                    {"min_slack", std::isfinite(min_slack) ? json(min_slack) : json("inf")},
                    {"pruned_rows", pruned}});
  }
  out.pass = violations == 0 && cases == 3 * 8 * 64;
  out.detail = {{"cases", cases}, {"violations", violations}, {"runs", rows}};
  return out;
}

// P(first exit from `inside` at step k) for k = 1..n by depth-first search over
// all step sequences, stopping each path at its first exit.
std::vector<double> first_exit_by_paths(const StepMeasure& mu, int n,
                                        const absl::flat_hash_set<GroupElement, GroupElementHash>& inside) {
  std::vector<double> at(static_cast<std::size_t>(n) + 1, 0.0);
  const Group& g = mu.group();
  std::vector<GroupElement> stack{g.identity()};
  std::vector<double> weight{1.0};
  auto dfs = [&](auto&& self, int depth) -> void {
    if (depth == n) return;
    for (const auto& e : mu.support()) {
      GroupElement next = g.multiply(stack.back(), e.element);
      const double w = weight.back() * e.mass;
      if (!inside.contains(next)) {
        at[static_cast<std::size_t>(depth) + 1] += w;
        continue;
      }
      stack.push_back(std::move(next));
      weight.push_back(w);
      self(self, depth + 1);
      stack.pop_back();
      weight.pop_back();
    }
  };
  dfs(dfs, 0);
  return at;
}

Outcome max_tail_lemma(const AcceptanceOptions& o) {
  Outcome out;
  json rows = json::array();
  std::size_t cases = 0, violations = 0;
  double route_gap = 0.0;
  constexpr int kN = 12;
  for (const auto& run : tail_runs(o, {"Z", "Z2wrZ"}, 1, kN)) {
    auto g = group(run.group);
    auto mu = uniform_measure(g);
    auto cache = ball(g, 8);
    absl::flat_hash_set<GroupElement, GroupElementHash> inside;
    for (auto& e : set_product(*g, cache.ball_elements(run.radius), 20'000'000)) inside.insert(std::move(e));
    const auto at = first_exit_by_paths(mu, kN, inside);
    double cumulative = 0.0, min_slack = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= kN; ++n) {
      cumulative += at[static_cast<std::size_t>(n)];
      const double bound = (32.0 * n + 1.0) * run.check.lambda;
      const bool holds = cumulative <= bound;
      ++cases;
      violations += !holds;
      min_slack = std::min(min_slack, slack_ratio(bound, cumulative));
      const auto& row = run.check.max_tail.grid.at(static_cast<std::size_t>(n - 1));
      route_gap = std::max(route_gap, std::abs(row.measured - cumulative));
    }
    rows.push_back({{"group", run.group},
                    {"radius", run.radius},
                    {"lambda", run.check.lambda},
                    {"min_slack", std::isfinite(min_slack) ? json(min_slack) : json("inf")}});
  }
  // the killed convolution and the path enumeration are independent routes
  out.pass = violations == 0 && route_gap <= 1e-12 && cases == 2 * 8 * kN;
  out.detail = {{"cases", cases},
                {"violations", violations},
                {"max_gap_paths_vs_killed_walk", route_gap},
                {"runs", rows}};
  return out;
}

Outcome coulhon_check(const AcceptanceOptions& o) {
  Outcome out;
  auto curve = profile_upper(uniform_measure(group("Z")), ProfileFamily::balls, 257, {}, o.policy);
  const auto exact = central_binomials(129);
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= 128; ++n) {
    const double lhs = 2.0 * coulhon_psi(curve, 2.0 * n).psi;
    const double rhs = static_cast<double>(exact[static_cast<std::size_t>(n) + 1]);
    violations += lhs < rhs;
    min_slack = std::min(min_slack, lhs / rhs);
  }
  double closed = 0.0;
  for (double t : {0.0, 0.1, 1.0, 4.0, 10.0, 100.0, 1e3, 1e4, 1e5}) {
    const double psi = coulhon_psi([](double v) { return 1.0 / (v * v); }, t).psi;
    closed = std::max(closed, std::abs(psi - 1.0 / std::sqrt(1.0 + t / 4.0)));
  }
  out.pass = violations == 0 && closed <= 1e-8;
  out.detail = {{"profile_max_volume", curve.max_volume()},
                {"n_max", 128},
                {"violations", violations},
                {"min_ratio", min_slack},
                {"closed_form_max_error", closed}};
  return out;
}

Outcome rho_closed_form(const AcceptanceOptions&) {
  Outcome out;
  double worst = 0.0;
  json rows = json::array();
  for (double beta : {0.2, 1.0 / 3.0, 0.4}) {
    auto gamma = GammaModel::power(1.0, beta);
    for (double n = 1e2; n <= 1e6 * 1.0001; n *= 10.0) {
      const double got = rho(gamma, n);
      const double want = std::pow(2.0, 1.0 / (1.0 - beta)) * std::pow(n, beta / (1.0 - beta));
      const double e = std::abs(got - want) / want;
      worst = std::max(worst, e);
      rows.push_back({{"beta", beta}, {"n", n}, {"rho", got}, {"closed_form", want}});
    }
  }
  out.pass = worst <= 1e-6;
  out.detail = {{"max_relative_error", worst}, {"rows", rows}};
  return out;
}

Outcome moment_check(const AcceptanceOptions& o) {
  Outcome out;
  json rows = json::array();
  struct Case {
    std::string spec;
    bool sws_step;
    int r_max;
  };
  std::uint64_t salt = 0;
  for (const auto& c : {Case{"Z", false, 100}, Case{"Z2wrZ", true, 300}}) {
    auto g = group(c.spec);
    StepMeasure mu = c.sws_step ? sws(g) : uniform_measure(g);
    auto f = ball_profile(mu, c.r_max, 4000);
    auto cert = fit_doubling(f, 2.0);
    SampleOptions so;
    so.count = 100000;
    so.seed = o.seed + 100 + salt++;
    so.grid = {10, 100, 1000};
    so.alphas = {1.0, 1.5};
    so.policy = o.policy;
    auto st = sample_paths(mu, so);
    for (std::size_t a = 0; a < so.alphas.size(); ++a)
      for (std::size_t i = 0; i < so.grid.size(); ++i) {
        const auto m = st.max_moment[a][i];
        const auto mb = moment_bound(f, cert, so.alphas[a], static_cast<double>(so.grid[i]));
        const bool holds = m.mean - 3.0 * m.stderr_ <= mb.bound;
        out.pass &= holds;
        rows.push_back({{"group", c.spec},
                        {"measure", c.sws_step ? "switch-walk-switch" : "uniform"},
                        {"alpha", so.alphas[a]},
                        {"n", so.grid[i]},
                        {"measured", m.mean},
                        {"stderr", m.stderr_},
                        {"bound", mb.bound},
                        {"bound_conservative", mb.bound_conservative},
                        {"varrho", mb.varrho},
                        {"c0", cert.c0},
                        {"holds", holds}});
      }
  }
  out.detail = {{"paths", 100000}, {"theta", 2.0}, {"rows", rows}};
  return out;
}

Outcome bubble_resistance(const AcceptanceOptions& o) {
  Outcome out;
  double worst = 0.0;
  std::size_t pairs = 0;
  const std::vector<ScalingSequence> seqs{
      ScalingSequence::explicit_list({2, 3, 4}), ScalingSequence::explicit_list({2, 3, 4, 5, 6, 7}),
      ScalingSequence::explicit_list({2, 6, 18, 54, 162, 486}), ScalingSequence::geometric(1.5, 6)};
  for (const auto& s : seqs) {
    SchreierGraph g(s);
    for (int k = 0; k < s.levels(); ++k)
      for (int ell = 0; ell <= s.alpha(k + 1); ++ell) {
        const int r = level_set_radius(s, k, ell);
        if (r > g.boundary_distance()) continue;
        for (auto c : {ResistanceConvention::contracted, ResistanceConvention::literal}) {
          worst = std::max(worst, std::abs(effective_resistance(s, k, ell, c) - harmonic_resistance(g, r, c)));
          ++pairs;
        }
      }
  }
  json mc = json::array();
  bool mc_ok = true;
  for (const auto& s : {ScalingSequence::explicit_list({2, 3, 4}), ScalingSequence::geometric(1.5, 4)}) {
    SchreierGraph g(s);
    for (int k = 0; k <= 2; ++k)
      for (int ell : std::set<int>{k == 0 ? 1 : 0, s.alpha(k + 1) / 2, s.alpha(k + 1)}) {
        const int r = level_set_radius(s, k, ell);
        const double rl = effective_resistance(s, k, ell, ResistanceConvention::literal);
        const std::uint64_t seed = o.seed + 1000 * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(ell);
        auto est = hitting_probability(g, r, ChainKind::jump, 100000, seed, o.policy);
        const double target = 1.0 / (2.0 * rl);
        const bool ok = std::abs(est.p - target) <= 3.0 * est.se;
        mc_ok &= ok;
        mc.push_back({{"sequence", s.describe()},
                      {"k", k},
                      {"l", ell},
                      {"r", r},
                      {"estimate", est.p},
                      {"stderr", est.se},
                      {"one_over_2R", target},
                      {"pass", ok}});
      }
  }
  out.pass = worst <= 1e-9 && mc_ok;
  out.detail = {{"pairs", pairs},
                {"max_closed_form_gap", worst},
                {"chain", "jump chain, literal resistance"},
                {"monte_carlo", mc}};
  return out;
}

Outcome bubble_entropy(const AcceptanceOptions& o) {
  Outcome out;
  auto base = ScalingSequence::geometric(2.0, 12);
  SchreierGraph g(base.truncated(base.levels_for_distance(4096)));
  WreathWalkOptions w;
  for (int e = 5; e <= 12; ++e) w.grid.push_back(1LL << e);
  w.samples = 1000;
  w.seed = o.seed + 7;
  w.policy = o.policy;
  auto rep = entropy_lower_bound(g, wreath_walk(g, w));
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"n", r.n},
                    {"estimate", r.estimate},
                    {"stderr", r.se},
                    {"p_hat", r.p_hat},
                    {"p_lower", r.p_lower},
                    {"floor", r.floor},
                    {"holds", r.holds},
                    {"ball", r.ball},
                    {"ratio", r.ratio}});
  out.pass = rep.ok;
  out.detail = {{"samples", w.samples}, {"ratio_spread", rep.ratio_spread}, {"band", 4.0}, {"rows", rows}};
  return out;
}

Outcome exponent_check(const AcceptanceOptions&) {
  Outcome out;
  auto rep = exponent_report(2.0);
  const bool exact = rep.beta_return == 3.0 / 7.0 && rep.entropy_exponent == 0.75;
  out.pass = exact && rep.relative_error <= 0.15;
  out.detail = json::parse(rep.to_json());
  return out;
}

struct Spec {
  int id;
  const char* name;
  double limit_seconds;  // 0: none
  Outcome (*run)(const AcceptanceOptions&);
};

const Spec kCriteria[] = {
    {1, "binomial oracle on Z", 1.0, binomial_oracle},
    {2, "entropy slope on Z^d", 60.0, entropy_slope_check},
    {3, "eigenvalue oracles", 0.0, eigen_oracles},
    {4, "tail inequality, exhaustive", 300.0, tail_lemma},
    {5, "maximal tail inequality, exhaustive paths", 0.0, max_tail_lemma},
    {6, "Coulhon soundness on Z", 0.0, coulhon_check},
    {7, "rho closed form", 0.0, rho_closed_form},
    {8, "moment bound soundness", 0.0, moment_check},
    {9, "bubble resistance and hitting", 300.0, bubble_resistance},
    {10, "bubble entropy floor", 0.0, bubble_entropy},
    {11, "exponent report", 0.0, exponent_check},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> results;
  for (const auto& c : kCriteria) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), c.id) == opts.only.end()) continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = c.run(opts);
      r.pass = o.pass;
      r.detail = o.detail.dump();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = json{{"error", e.what()}}.dump();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.runtime_ok = c.limit_seconds <= 0.0 || r.seconds < c.limit_seconds;
    if (opts.on_result) opts.on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string acceptance_json(const std::vector<CriterionResult>& results, std::uint64_t seed) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["report"] = "verify";
  j["seed"] = seed;
  j["criteria"] = json::array();
  bool ok = true;
  for (const auto& r : results) {
    j["criteria"].push_back({{"id", r.id},
                             {"name", r.name},
                             {"pass", r.pass},
                             {"runtime_ok", r.runtime_ok},
                             {"detail", json::parse(r.detail)}});
    ok &= r.pass && r.runtime_ok;
  }
  j["ok"] = ok;
  return j.dump(2) + "\n";
}

std::string acceptance_line(const CriterionResult& r) {
  std::string s = "criterion " + std::to_string(r.id) + " " + (r.pass && r.runtime_ok ? "PASS" : "FAIL") + " " + r.name;
  if (!r.runtime_ok) s += " (over the runtime limit)";
  return s;
}

}  // namespace grwalk
