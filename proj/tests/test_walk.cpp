#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "grwalk/errors.hpp"
#include "grwalk/rng.hpp"
#include "grwalk/walk.hpp"
#include "oracles.hpp"

using namespace grwalk;
using namespace grwalk::testing;

namespace {

std::shared_ptr<const Group> grp(const std::string& s) { return make_group(GroupSpec::parse(s)); }

GroupElement zel(const Group& g, std::int64_t v) { return GroupElement(GroupElement::Code{g.tag(), v}); }

Distribution run(const StepMeasure& mu, int steps, double eps = 0.0, unsigned threads = 1) {
  Distribution d(mu.group_ptr());
  for (int i = 0; i < steps; ++i) d = convolve(d, mu, eps, {threads});
  return d;
}

bool identical(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size() || a.pruned_mass() != b.pruned_mass()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a.entries()[i].first == b.entries()[i].first) || a.entries()[i].second != b.entries()[i].second) return false;
  return true;
}

}  // namespace

TEST_CASE("convolution on Z") {
  auto z = grp("Z");
  auto mu = uniform_measure(z);
  auto d2 = run(mu, 2);
  CHECK(d2.size() == 3);
  CHECK(d2.mass(zel(*z, 0)) == 0.5);
  CHECK(d2.mass(zel(*z, 2)) == 0.25);
  CHECK(d2.mass(zel(*z, -2)) == 0.25);
  CHECK(d2.step() == 2);
  CHECK(run(mu, 10).mass(zel(*z, 0)) == doctest::Approx(252.0 / 1024).epsilon(1e-15));

  // identity step leaves the distribution unchanged
  auto delta = dirac_measure(z, z->identity());
  auto d = run(mu, 7, 1e-3);
  auto e = convolve(d, delta, 1e-3);
  REQUIRE(e.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(e.entries()[i] == d.entries()[i]);
  CHECK(e.pruned_mass() == d.pruned_mass());
}

TEST_CASE("return probabilities on Z match the binomial oracle") {
  auto mu = uniform_measure(grp("Z"));
  auto curve = return_probability_curve(mu, 64, 0.0);
  CHECK(curve.value[3] == doctest::Approx(0.3125).epsilon(1e-15));
  for (int n = 0; n <= 64; ++n) {
    CHECK(std::abs(curve.value[n] / central_binomial_over_4n(n) - 1.0) <= 1e-12);
    CHECK(curve.upper[n] == curve.value[n]);
  }
}

TEST_CASE("lamplighter return probabilities match path enumeration") {
  auto g = grp("Z2wrZ");
  auto mu = sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
  auto curve = return_probability_curve(mu, 6, 0.0);
  for (int n = 0; n <= 6; ++n) {
    auto law = enumerate_paths(mu, n);
    double sq = 0;
    for (const auto& [x, m] : law) sq += m * m;
    CHECK(curve.value[n] == doctest::Approx(sq).epsilon(1e-13));
    auto d = run(mu, n);
    CHECK(d.size() == law.size());
    for (const auto& [x, m] : law) CHECK(d.mass(x) == doctest::Approx(m).epsilon(1e-13));
  }
}

TEST_CASE("entropy") {
  auto z = grp("Z");
  CHECK(entropy(Distribution(z)).value == 0.0);
  std::vector<Distribution::Entry> u;
  for (int i = 0; i < 7; ++i) u.emplace_back(zel(*z, i), 1.0 / 7);
  CHECK(entropy(Distribution(z, u, 0, 0, 0)).value == doctest::Approx(std::log(7.0)).epsilon(1e-14));
  CHECK(entropy(run(uniform_measure(z), 2)).value == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(entropy(run(uniform_measure(z), 30, 0.0)).error_bound == 0.0);
}

TEST_CASE("escape") {
  auto z = grp("Z");
  auto mu = uniform_measure(z);
  auto cache = ball(z, 12);
  CHECK(escape(Distribution(z), cache) == 0.0);
  CHECK(escape(run(mu, 2), cache) == 1.0);
  CHECK(escape(run(mu, 10), cache) == doctest::Approx(binomial_mean_abs(10)).epsilon(1e-14));
  CHECK_THROWS_AS(escape(run(mu, 13), cache), RangeError);
}

TEST_CASE("mass conservation, monotonicity and subadditivity") {
  for (std::string s : {"Z^2", "Z2wrZ", "heisenberg"}) {
    auto g = grp(s);
    auto mu = s == "Z2wrZ" ? sws_measure(default_lamp_measure(*g), base_uniform_measure(g)) : uniform_measure(g);
    ObservableOptions opt;
    opt.prune_eps = 1e-8;
    opt.compute_escape = false;
    auto obs = compute_observables(mu, 24, opt);
    Distribution d(g);
    for (int k = 1; k <= 16; ++k) {
      d = convolve(d, mu, opt.prune_eps);
      CHECK(std::abs(d.stored_mass() + d.pruned_mass() - 1.0) <= 1e-12);
    }
    for (int n = 0; n + 1 <= 12; ++n) CHECK(obs.return_prob(n + 1) <= obs.return_prob_upper(n));
    for (int n = 0; n < 24; ++n) CHECK(obs.entropy[n + 1] >= obs.entropy[n] - obs.entropy_error[n + 1]);
    for (int n = 0; n <= 12; ++n)
      for (int m = 0; n + m <= 24; ++m)
        CHECK(obs.entropy[n + m] <= obs.entropy[n] + obs.entropy[m] + obs.entropy_error[n + m] + 1e-12);
  }
}

TEST_CASE("convolution is independent of the thread count") {
  auto g = grp("Z2wrZ");
  auto mu = sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
  auto a = run(mu, 12, 1e-9, 1);
  REQUIRE(a.size() > 2 * (1 << 14));  // spans several parallel blocks
  CHECK(identical(a, run(mu, 12, 1e-9, 3)));
  CHECK(identical(a, run(mu, 12, 1e-9, 8)));
}

TEST_CASE("pruning ledger") {
  auto mu = uniform_measure(grp("Z^2"));
  auto exact = run(mu, 20, 0.0);
  CHECK(exact.pruned_mass() == 0.0);
  auto pruned = run(mu, 20, 1e-8);
  CHECK(pruned.pruned_mass() > 0.0);
  CHECK(pruned.size() < exact.size());
  CHECK(std::abs(pruned.stored_mass() + pruned.pruned_mass() - 1.0) <= 1e-12);
  // every stored entry is a lower bound for the exact mass
  for (const auto& [x, m] : pruned.entries()) CHECK(m <= exact.mass(x) * (1 + 1e-12));
}

TEST_CASE("checkpoints round-trip") {
  auto g = grp("Z2wrZ");
  auto mu = sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
  auto d = run(mu, 5, 1e-6);
  auto dir = std::filesystem::temp_directory_path() / "grwalk_test_ckpt";
  std::filesystem::create_directories(dir);
  auto path = (dir / "d.ckpt").string();
  save_checkpoint(d, path);
  auto back = load_checkpoint(g, path);
  CHECK(identical(d, back));
  CHECK(back.step() == 5);
  CHECK_THROWS_AS(load_checkpoint(grp("Z"), path), UsageError);

  ObservableOptions opt;
  opt.prune_eps = 1e-9;
  opt.checkpoint_dir = (dir / "obs").string();
  std::filesystem::remove_all(opt.checkpoint_dir);
  auto first = compute_observables(mu, 6, opt);
  auto resumed = compute_observables(mu, 10, opt);
  CHECK(resumed.resumed);
  auto fresh = compute_observables(mu, 10, ObservableOptions{.prune_eps = 1e-9});
  CHECK(resumed.entropy == fresh.entropy);
  CHECK(resumed.identity_mass == fresh.identity_mass);
  CHECK(resumed.escape == fresh.escape);
  std::filesystem::remove_all(dir);
}

TEST_CASE("entropy slope") {
  auto z = grp("Z");
  auto obs = compute_observables(dirac_measure(z, z->identity()), 20, {});
  for (double s : entropy_slope(obs, 5)) CHECK(s == 0.0);
  auto srw = compute_observables(uniform_measure(z), 512, ObservableOptions{.prune_eps = 1e-20});
  CHECK(entropy_slope(srw, 512, 16) < 0.05);
  CHECK(entropy_slope(srw, 512, 16) >= 0.0);
}

TEST_CASE("support cap") {
  auto g = grp("Z2wrZ");
  auto mu = sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
  ObservableOptions opt;
  opt.support_cap = 500;
  CHECK_THROWS_AS(compute_observables(mu, 20, opt), ResourceError);
  opt.partial_ok = true;
  auto obs = compute_observables(mu, 20, opt);
  CHECK(obs.truncated);
  CHECK(obs.steps() < 20);
  CHECK(obs.support.back() <= 500);
}

TEST_CASE("Monte Carlo sampling") {
  auto z = grp("Z");
  auto mu = uniform_measure(z);

  SampleOptions opt;
  opt.count = 100;
  opt.seed = 5;
  opt.grid = {0};
  auto s0 = sample_paths(mu, opt);
  CHECK(s0.displacement[0].mean == 0.0);
  CHECK(s0.max_moment[0][0].mean == 0.0);

  opt.count = 100000;
  opt.grid = {10, 100};
  opt.alphas = {1.0, 1.5};
  auto s = sample_paths(mu, opt);
  CHECK(std::abs(s.displacement[1].mean - binomial_mean_abs(100)) <= 3 * s.displacement[1].stderr_);
  CHECK(std::abs(s.displacement[0].mean - binomial_mean_abs(10)) <= 3 * s.displacement[0].stderr_);

  // reproducible and independent of the worker count
  auto again = sample_paths(mu, opt);
  opt.policy.threads = 4;
  auto threaded = sample_paths(mu, opt);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    CHECK(again.displacement[i].mean == s.displacement[i].mean);
    CHECK(threaded.displacement[i].mean == s.displacement[i].mean);
    CHECK(threaded.max_moment[1][i].stderr_ == s.max_moment[1][i].stderr_);
  }
}

TEST_CASE("sampled endpoint law matches exact convolution") {
  auto z = grp("Z");
  auto mu = uniform_measure(z);
  for (int n : {1, 4, 9, 16}) {
    SampleOptions opt;
    opt.count = 100000;
    opt.seed = 100 + n;
    opt.grid = {n};
    opt.endpoint_histogram = true;
    auto s = sample_paths(mu, opt);
    auto d = run(mu, n);
    double tv = 0;
    for (const auto& [x, m] : d.entries()) {
      auto it = s.endpoint_counts.find(x);
      double emp = it == s.endpoint_counts.end() ? 0.0 : static_cast<double>(it->second) / opt.count;
      tv += std::abs(emp - m);
    }
    tv /= 2;
    // E[TV] <= (1/2) sum sqrt(p(1-p)/N) <= (1/2) sqrt(support/N); threshold 3 sqrt(support/N)
    CHECK(tv <= 3 * std::sqrt(static_cast<double>(d.size()) / opt.count));
  }
}

TEST_CASE("sampling exit events and lamplighter walker") {
  auto g = grp("Z2wrZ");
  auto mu = sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
  auto cache = ball(g, 7);
  SampleOptions opt;
  opt.count = 20000;
  opt.seed = 9;
  opt.grid = {1, 2, 3, 4};
  opt.inside = [&](const GroupElement& x) { auto r = cache.find(x); return r && *r <= 2; };
  auto s = sample_paths(mu, opt);
  // exact P(exists k <= n: |W_k| > 2) from killed-walk enumeration
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    double exact = exit_probability_by_enumeration(mu, static_cast<int>(s.grid[i]), opt.inside);
    CHECK(std::abs(s.exit_prob[i].mean - exact) <= 3 * s.exit_prob[i].stderr_ + 1e-12);
  }
  // the fast walker and the generic product agree
  auto w = g->make_walker(mu);
  GroupElement x = g->identity();
  PhiloxStream rng(3, 0);
  for (int k = 0; k < 2000; ++k) {
    auto i = rng.below(static_cast<std::uint32_t>(mu.support().size()));
    w->step(i);
    x = g->multiply(x, mu.support()[i].element);
    if (k % 97 == 0) {
      CHECK(w->element() == x);
      CHECK(w->length() == *g->closed_form_length(x));
    }
  }
}
