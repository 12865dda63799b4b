#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "grwalk/acceptance.hpp"
#include "grwalk/bounds.hpp"
#include "grwalk/bubble.hpp"
#include "grwalk/config.hpp"
#include "grwalk/errors.hpp"
#include "grwalk/format.hpp"
#include "grwalk/spectral.hpp"
#include "grwalk/walk.hpp"

using namespace grwalk;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kViolation = 1, kUsage = 2, kResource = 3, kFailure = 4 };

// Emitted files go to output.dir with a manifest; without a directory the
// primary output goes to stdout.
class Sink {
 public:
  Sink(const Config& cfg, std::string command, std::string subcommand)
      : dir_(cfg.text("output.dir", "")), cfg_(cfg), command_(std::move(command)), sub_(std::move(subcommand)) {}

  void emit(const std::string& name, const std::string& content, bool primary = true) {
    if (dir_.empty()) {
      if (primary) std::cout << content;
      return;
    }
    std::filesystem::create_directories(dir_);
    std::ofstream os(std::filesystem::path(dir_) / name, std::ios::binary);
    os << content;
    if (!os) throw Error("cannot write " + name);
    files_.push_back({{"name", name}, {"bytes", content.size()}});
  }

  void finish(const std::string& status, const json& extra = json::object()) {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    json m;
    m["generated_at"] = timestamp();
    m["schema_version"] = kReportSchemaVersion;
    m["command"] = command_;
    m["subcommand"] = sub_;
    m["status"] = status;
    m["config"] = json::parse(cfg_.to_json());
    m["files"] = files_;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream os(std::filesystem::path(dir_) / "manifest.json", std::ios::binary);
    os << m.dump(2) << "\n";
  }

 private:
  static std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string dir_;
  const Config& cfg_;
  std::string command_, sub_;
  json files_ = json::array();
};

ExecutionPolicy policy_of(const Config& cfg) {
  const long long t = cfg.integer("run.threads", 1);
  if (t < 1) throw ConfigError("run.threads must be >= 1", cfg.has("run.threads") ? cfg.entries().at("run.threads").line : 0,
                               "run.threads");
  return {static_cast<unsigned>(t)};
}

std::uint64_t seed_of(const Config& cfg) {
  cfg.require("run.seed");
  const long long s = cfg.integer("run.seed", 0);
  if (s < 0) throw ConfigError("run.seed must be >= 0", cfg.entries().at("run.seed").line, "run.seed");
  return static_cast<std::uint64_t>(s);
}

StepMeasure measure_of(const Config& cfg, std::shared_ptr<const Group> g) {
  const std::string m = cfg.text("walk.measure", "uniform");
  if (m == "uniform") return uniform_measure(g);
  if (m == "sws") {
    if (!g->is_wreath()) throw ConfigError("sws needs a wreath-type group", cfg.entries().at("walk.measure").line, "walk.measure");
    return sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
  }
  throw ConfigError("walk.measure must be uniform or sws", cfg.entries().at("walk.measure").line, "walk.measure");
}

long long positive(const Config& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.integer(key, fallback);
  if (v < 1) throw ConfigError("value must be >= 1", cfg.has(key) ? cfg.entries().at(key).line : 0, key);
  return v;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) s += (s.empty() ? "" : ",") + c;
  return s + "\n";
}

std::string fr(double x) { return format_real(x); }

int run_walk(const Config& cfg, Sink& out) {
  auto g = make_group(group_from_config(cfg, "Z"));
  const long long n_max = positive(cfg, "walk.n_max", 64);
  ObservableOptions o;
  o.prune_eps = cfg.real("walk.prune_eps", 0.0);
  o.policy = policy_of(cfg);
  o.partial_ok = true;
  if (const char* dir = std::getenv("GRWALK_CACHE_DIR"); dir && *dir && cfg.boolean("walk.checkpoint", true))
    o.checkpoint_dir = dir;
  auto obs = compute_observables(measure_of(cfg, g), 2 * n_max, o);
  std::string csv = "n,return_prob,return_prob_upper,entropy,escape,entropy_error,pruned_mass,support,escape_method\n";
  for (long long n = 0; 2 * n <= obs.steps(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    csv += csv_row({std::to_string(n), fr(obs.return_prob(n)), fr(obs.return_prob_upper(n)), fr(obs.entropy[i]),
                    fr(obs.escape[i]), fr(obs.entropy_error[i]), fr(obs.pruned_mass[i]), std::to_string(obs.support[i]),
                    obs.escape_method});
  }
  out.emit("walk.csv", csv);
  json extra{{"steps_completed", obs.steps()}, {"resumed", obs.resumed}};
  if (obs.truncated) {
    out.finish("partial", extra);
    std::cerr << "support cap reached after step " << obs.steps() << "; rows up to n = " << obs.steps() / 2
              << " were written\n";
    return kResource;
  }
  out.finish("ok", extra);
  return kOk;
}

int run_sample(const Config& cfg, Sink& out) {
  auto g = make_group(group_from_config(cfg, "Z"));
  SampleOptions o;
  o.seed = seed_of(cfg);
  o.count = positive(cfg, "walk.samples", 10000);
  o.grid = cfg.integers("walk.grid", {10, 100, 1000});
  o.alphas = cfg.reals("walk.alpha", {1.0});
  o.policy = policy_of(cfg);
  std::unique_ptr<WordMetricCache> cache;
  if (!g->closed_form_length(g->identity())) {
    long long n = 0;
    for (long long v : o.grid) n = std::max(n, v);
    cache = std::make_unique<WordMetricCache>(ball(g, static_cast<int>(n)));
    o.cache = cache.get();
  }
  auto st = sample_paths(measure_of(cfg, g), o);
  std::string csv = "n,statistic,alpha,mean,stderr,samples,method\n";
  for (std::size_t i = 0; i < st.grid.size(); ++i) {
    const auto n = std::to_string(st.grid[i]);
    csv += csv_row({n, "displacement", "1", fr(st.displacement[i].mean), fr(st.displacement[i].stderr_),
                    std::to_string(st.count), "monte-carlo"});
    for (std::size_t a = 0; a < o.alphas.size(); ++a)
      csv += csv_row({n, "max_moment", fr(o.alphas[a]), fr(st.max_moment[a][i].mean), fr(st.max_moment[a][i].stderr_),
                      std::to_string(st.count), "monte-carlo"});
  }
  out.emit("sample.csv", csv);
  out.finish("ok");
  return kOk;
}

int run_spectral(const Config& cfg, Sink& out) {
  auto g = make_group(group_from_config(cfg, "Z"));
  ProfileFamily fam;
  try {
    fam = parse_profile_family(cfg.text("spectral.family", "balls"));
  } catch (const Error& e) {
    throw ConfigError(e.what(), cfg.entries().at("spectral.family").line, "spectral.family");
  }
  SpectralOptions so;
  so.tol = cfg.real("spectral.tol", so.tol);
  auto curve = profile_upper(measure_of(cfg, g), fam, cfg.real("spectral.v_max", 1000.0), so, policy_of(cfg));
  out.emit("profile.csv", curve.to_csv());
  out.finish("ok");
  return kOk;
}

int emit_reports(Sink& out, const std::string& stem, const std::vector<const BoundReport*>& reps) {
  json arr = json::array();
  std::string csv;
  bool ok = true;
  for (const auto* r : reps) {
    arr.push_back(json::parse(r->to_json()));
    std::string c = r->to_csv();
    if (!csv.empty()) c = c.substr(c.find('\n') + 1);
    csv += c;
    ok &= r->ok;
  }
  const std::string js = (reps.size() == 1 ? arr[0] : arr).dump(2) + "\n";
  out.emit(stem + ".json", js);
  out.emit(stem + ".csv", csv, false);
  out.finish(ok ? "ok" : "violation");
  return ok ? kOk : kViolation;
}

int run_bounds(const Config& cfg, Sink& out) {
  const std::string theorem = cfg.text("bounds.theorem", "entropy");
  const auto policy = policy_of(cfg);
  if (theorem == "entropy") {
    auto g = make_group(group_from_config(cfg, "Z"));
    ObservableOptions o;
    o.policy = policy;
    o.prune_eps = cfg.real("walk.prune_eps", 0.0);
    o.compute_escape = false;
    const long long n_max = positive(cfg, "bounds.n_max", 256);
    auto obs = compute_observables(measure_of(cfg, g), 2 * n_max, o);
    const std::string gm = cfg.text("bounds.gamma", "observed");
    std::optional<GammaModel> gamma;
    if (gm == "observed")
      gamma = GammaModel::from_observables(obs);
    else if (gm == "power")
      gamma = GammaModel::power(cfg.real("bounds.gamma_c", 1.0), cfg.real("bounds.gamma_beta", 1.0 / 3.0),
                                cfg.real("bounds.gamma_kappa", 0.0));
    else
      throw ConfigError("bounds.gamma must be observed or power", cfg.entries().at("bounds.gamma").line, "bounds.gamma");
    EntropyReportOptions eo;
    eo.grid = cfg.integers("bounds.grid", {});
    auto rep = entropy_bound_report(obs, *gamma, eo);
    return emit_reports(out, "bounds_entropy", {&rep});
  }
  if (theorem == "tail") {
    auto g = make_group(group_from_config(cfg, "Z"));
    auto mu = measure_of(cfg, g);
    std::vector<TailCheck> checks;
    const auto radii = cfg.integers("bounds.radius", {1, 2, 4});
    int r_top = 0;
    for (long long r : radii) r_top = std::max(r_top, static_cast<int>(r));
    auto cache = ball(g, r_top);
    TailOptions to;
    to.policy = policy;
    to.n_max = positive(cfg, "bounds.n_max", 64);
    to.n_max_paths = std::min<long long>(to.n_max, 12);
    for (long long r : radii) checks.push_back(tail_check(mu, cache.ball_elements(static_cast<int>(r)), "ball(" + std::to_string(r) + ")", to));
    std::vector<const BoundReport*> reps;
    for (const auto& c : checks) reps.push_back(&c.tail);
    for (const auto& c : checks) reps.push_back(&c.max_tail);
    return emit_reports(out, "bounds_tail", reps);
  }
  if (theorem == "moment") {
    auto g = make_group(group_from_config(cfg, "Z"));
    auto mu = measure_of(cfg, g);
    const double theta = cfg.real("bounds.theta", 2.0);
    auto f = ball_profile(mu, static_cast<int>(positive(cfg, "bounds.r_max", 100)), 4000);
    auto cert = fit_doubling(f, theta);
    SampleOptions so;
    so.seed = seed_of(cfg);
    so.count = positive(cfg, "bounds.samples", 100000);
    so.grid = cfg.integers("bounds.grid", {10, 100, 1000});
    so.alphas = cfg.reals("bounds.alpha", {1.0, 1.5});
    so.policy = policy;
    auto st = sample_paths(mu, so);
    BoundReport rep;
    rep.theorem = "moment";
    rep.inputs = {{"group", g->spec().canonical_text()},
                  {"profile", f.source()},
                  {"theta", format_real(theta)},
                  {"c0", format_real(cert.c0)},
                  {"samples", std::to_string(so.count)},
                  {"seed", std::to_string(so.seed)},
                  {"doubling_beyond_profile", "assumed"}};
    for (std::size_t a = 0; a < so.alphas.size(); ++a)
      for (std::size_t i = 0; i < so.grid.size(); ++i) {
        const auto m = st.max_moment[a][i];
        const auto mb = moment_bound(f, cert, so.alphas[a], static_cast<double>(so.grid[i]));
        BoundRow row;
        row.n = so.grid[i];
        row.measured = m.mean;
        row.bound = mb.bound;
        row.slack = slack_ratio(mb.bound, m.mean);
        row.holds = m.mean - 3.0 * m.stderr_ <= mb.bound;
        row.method = "monte-carlo";
        row.extra = {{"alpha", so.alphas[a]}, {"stderr", m.stderr_}, {"varrho", mb.varrho},
                     {"bound_conservative", mb.bound_conservative}};
        rep.ok &= row.holds;
        rep.grid.push_back(row);
      }
    rep.verdict = rep.ok ? "holds within 3 standard errors" : "violated";
    return emit_reports(out, "bounds_moment", {&rep});
  }
  throw ConfigError("bounds.theorem must be entropy, tail or moment",
                    cfg.has("bounds.theorem") ? cfg.entries().at("bounds.theorem").line : 0, "bounds.theorem");
}

int run_bubble(const Config& cfg, Sink& out) {
  const std::string report = cfg.text("bubble.report", "exponents");
  const auto policy = policy_of(cfg);
  if (report == "exponents") {
    const double theta = cfg.real("bubble.theta", 2.0);
    try {
      out.emit("bubble_exponents.json",
               exponent_report(theta, static_cast<std::size_t>(positive(cfg, "bubble.max_vertices", 4'000'000)))
                       .to_json() + "\n");
    } catch (const InapplicableError& e) {
      throw ConfigError(e.what(), cfg.has("bubble.theta") ? cfg.entries().at("bubble.theta").line : 0, "bubble.theta");
    }
    out.finish("ok");
    return kOk;
  }
  const auto seq = sequence_from_config(cfg);
  if (report == "graph") {
    out.emit("bubble_graph.csv", adjacency_csv(SchreierGraph(seq)));
    out.finish("ok");
    return kOk;
  }
  if (report == "recurrence") {
    const int k_max = static_cast<int>(std::min<long long>(positive(cfg, "bubble.k_max", seq.levels()), seq.levels()));
    auto rc = recurrence_check(seq, k_max);
    json j{{"schema_version", kReportSchemaVersion}, {"report", "recurrence"}, {"sequence", seq.describe()},
           {"partial_sums", rc.partial_sums}, {"growth", rc.growth}, {"verdict", rc.verdict},
           {"tail_bound", rc.tail_bound}};
    out.emit("bubble_recurrence.json", j.dump(2) + "\n");
    out.finish("ok");
    return kOk;
  }
  if (report == "resistance") {
    SchreierGraph g(seq);
    const int k_max = static_cast<int>(std::min<long long>(positive(cfg, "bubble.k_max", 2), seq.levels() - 1));
    std::string csv = "k,l,r,R_contracted,R_literal,R_harmonic_contracted,R_harmonic_literal,hit_jump,hit_lazy,method\n";
    for (int k = 0; k <= k_max; ++k)
      for (int ell = 0; ell <= seq.alpha(k + 1); ++ell) {
        const int r = level_set_radius(seq, k, ell);
        const double rc = effective_resistance(seq, k, ell, ResistanceConvention::contracted);
        const double rl = effective_resistance(seq, k, ell, ResistanceConvention::literal);
        std::string hc = "nan", hl = "nan", method = "closed-form";
        if (r <= g.boundary_distance()) {
          hc = fr(harmonic_resistance(g, r, ResistanceConvention::contracted));
          hl = fr(harmonic_resistance(g, r, ResistanceConvention::literal));
          method = "closed-form+harmonic";
        }
        csv += csv_row({std::to_string(k), std::to_string(ell), std::to_string(r), fr(rc), fr(rl), hc, hl,
                        fr(r == 0 ? 1.0 : 1.0 / (2.0 * rl)), fr(r == 0 ? 1.0 : 1.0 / (4.0 * rl)), method});
      }
    out.emit("bubble_resistance.csv", csv);
    out.finish("ok");
    return kOk;
  }
  if (report == "orbit") {
    WreathWalkOptions w;
    w.grid = cfg.integers("bubble.grid", {32, 64, 128, 256, 512});
    w.samples = static_cast<std::size_t>(positive(cfg, "bubble.samples", 1000));
    w.seed = seed_of(cfg);
    w.policy = policy;
    long long horizon = 0;
    for (long long n : w.grid) horizon = std::max(horizon, n);
    int levels = seq.levels();
    try {
      levels = seq.levels_for_distance(horizon);
    } catch (const RangeError&) {
      // too short for the horizon; wreath_walk reports the cap
    }
    SchreierGraph g(seq.truncated(levels));
    auto ens = wreath_walk(g, w);
    json rows = json::array();
    for (const auto& p : ens.points)
      rows.push_back({{"n", p.n}, {"mean_log_occupation", p.mean_log_occupation}, {"stderr", p.se_log_occupation},
                      {"survivors", p.survivors}, {"mean_lamp_support", p.mean_lamp_support},
                      {"mean_range", p.mean_range}});
    json j{{"schema_version", kReportSchemaVersion}, {"report", "orbit"}, {"sequence", g.sequence().describe()},
           {"samples", w.samples}, {"seed", w.seed}, {"rows", rows}};
    int code = kOk;
    if (w.samples >= 1000) {
      auto fl = entropy_lower_bound(g, ens);
      json floor = json::array();
      for (const auto& r : fl.rows)
        floor.push_back({{"n", r.n}, {"estimate", r.estimate}, {"p_hat", r.p_hat}, {"p_lower", r.p_lower},
                         {"floor", r.floor}, {"holds", r.holds}, {"ball", r.ball}, {"ratio", r.ratio}});
      j["entropy_floor"] = {{"rows", floor}, {"ratio_spread", fl.ratio_spread}, {"ok", fl.ok}};
      if (!fl.ok) code = kViolation;
    }
    out.emit("bubble_orbit.json", j.dump(2) + "\n");
    out.finish(code == kOk ? "ok" : "violation");
    return code;
  }
  throw ConfigError("bubble.report must be exponents, graph, recurrence, resistance or orbit",
                    cfg.has("bubble.report") ? cfg.entries().at("bubble.report").line : 0, "bubble.report");
}

int run_verify(const Config& cfg, Sink& out, const std::vector<int>& only) {
  AcceptanceOptions o;
  o.seed = cfg.has("run.seed") ? seed_of(cfg) : o.seed;
  o.policy = policy_of(cfg);
  o.only = only;
  o.on_result = [](const CriterionResult& r) {
    std::cout << acceptance_line(r) << " [" << format_real(std::round(r.seconds * 10) / 10) << " s]\n" << std::flush;
  };
  auto results = run_acceptance(o);
  bool ok = true;
  for (const auto& r : results) ok &= r.pass && r.runtime_ok;
  const std::string js = acceptance_json(results, o.seed);
  out.emit("verify.json", js, false);
  out.finish(ok ? "ok" : "violation");
  return ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks on groups: exact laws, spectral profiles, bounds and bubble graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flags;  // config key -> flag value
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override a config key, key=value (repeatable)");
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option(flag, flags[key], help);
  };
  auto global = [&](CLI::App* sub) {
    bind(sub, "--threads", "run.threads", "worker cap; results do not depend on it");
    bind(sub, "--seed", "run.seed", "seed for sampled runs");
    bind(sub, "--out", "output.dir", "output directory (files plus manifest.json); stdout if unset");
  };

  auto* walk = app.add_subcommand("walk", "exact convolution observables (CSV)");
  auto* sample = app.add_subcommand("sample", "Monte Carlo path statistics (CSV)");
  auto* spectral = app.add_subcommand("spectral", "spectral profile upper bounds (CSV)");
  auto* bounds = app.add_subcommand("bounds", "theorem inequality reports (JSON + CSV)");
  auto* bubble = app.add_subcommand("bubble", "bubble graph exports and reports");
  auto* verify = app.add_subcommand("verify", "acceptance suite; nonzero exit on any violation");
  std::vector<int> only;
  verify->add_option("--only", only, "criterion ids to run")->delimiter(',');
  for (auto* sub : {walk, sample, spectral, bounds, bubble, verify}) global(sub);
  for (auto* sub : {walk, sample, spectral, bounds}) {
    bind(sub, "--group", "group.spec", "group spec, e.g. Z, Z^2, Z2wrZ, ZwrZ, heisenberg, BS(1,2), bubble:2,3,4");
    bind(sub, "--measure", "walk.measure", "uniform or sws");
  }
  bind(walk, "--n-max", "walk.n_max", "largest n (steps run to 2 n)");
  bind(walk, "--prune-eps", "walk.prune_eps", "pruning threshold");
  bind(sample, "--samples", "walk.samples", "number of paths");
  bind(sample, "--grid", "walk.grid", "report times, comma separated");
  bind(sample, "--alpha", "walk.alpha", "moment exponents, comma separated");
  bind(spectral, "--family", "spectral.family", "balls, lamplighter_rectangles or bubble_sets");
  bind(spectral, "--v-max", "spectral.v_max", "largest candidate volume");
  bind(spectral, "--tol", "spectral.tol", "eigen residual tolerance");
  bind(bounds, "--theorem", "bounds.theorem", "entropy, tail or moment");
  bind(bounds, "--gamma", "bounds.gamma", "observed or power");
  bind(bounds, "--n-max", "bounds.n_max", "largest n");
  bind(bounds, "--grid", "bounds.grid", "evaluation grid");
  bind(bounds, "--radius", "bounds.radius", "ball radii for the tail check");
  bind(bounds, "--samples", "bounds.samples", "Monte Carlo paths for the moment check");
  bind(bubble, "--theta", "bubble.theta", "alpha_k = round(2^(theta k))");
  bind(bubble, "--sequence", "bubble.sequence", "explicit alpha list, e.g. 2,3,4");
  bind(bubble, "--levels", "bubble.levels", "levels of a geometric sequence");
  bind(bubble, "--report", "bubble.report", "exponents, graph, recurrence, resistance or orbit");
  bind(bubble, "--k-max", "bubble.k_max", "largest level index");
  bind(bubble, "--samples", "bubble.samples", "orbit paths");
  bind(bubble, "--grid", "bubble.grid", "orbit evaluation times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);
  Config cfg;
  std::unique_ptr<Sink> sink;
  try {
    if (!config_path.empty()) cfg = Config::load(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value", 0, o);
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    for (const auto& [key, value] : flags)
      if (!value.empty()) cfg.set(key, value);
    // validate what the subcommand will read before running anything
    if (sub != verify && sub != bubble) group_from_config(cfg, "Z");
    if (sub == bubble && cfg.text("bubble.report", "exponents") != "exponents") sequence_from_config(cfg);
    policy_of(cfg);

    sink = std::make_unique<Sink>(cfg, command, sub->get_name());
    Sink& out = *sink;
    if (sub == walk) return run_walk(cfg, out);
    if (sub == sample) return run_sample(cfg, out);
    if (sub == spectral) return run_spectral(cfg, out);
    if (sub == bounds) return run_bounds(cfg, out);
    if (sub == bubble) return run_bubble(cfg, out);
    return run_verify(cfg, out, only);
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " at line " << e.line();
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << " (progress " << e.progress() << ")\n";
    if (sink) sink->finish("resource_cap", {{"error", e.what()}, {"progress", e.progress()}});
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
