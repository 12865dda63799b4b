#include <cmath>
#include <numbers>

#include "doctest.h"
#include "grwalk/bounds.hpp"
#include "grwalk/errors.hpp"
#include "grwalk/word_metric.hpp"
#include "oracles.hpp"

using namespace grwalk;
using namespace grwalk::testing;

namespace {

std::shared_ptr<const Group> grp(const std::string& s) { return make_group(GroupSpec::parse(s)); }

StepMeasure sws(const std::shared_ptr<const Group>& g) {
  return sws_measure(default_lamp_measure(*g), base_uniform_measure(g));
}

GroupElement z_at(const Group& z, std::int64_t x) { return GroupElement(GroupElement::Code{z.tag(), x}); }

std::vector<GroupElement> interval(const Group& z, int lo, int hi) {
  std::vector<GroupElement> out;
  for (int x = lo; x <= hi; ++x) out.push_back(z_at(z, x));
  return out;
}

// Symmetric measure on Z with eta(+-k) proportional to w(k), k = 1..K.
StepMeasure symmetric_on_z(const std::shared_ptr<const Group>& z, int k_max, const std::function<double(int)>& w) {
  double total = 0.0;
  for (int k = 1; k <= k_max; ++k) total += 2.0 * w(k);
  std::vector<MassEntry> e;
  for (int k = 1; k <= k_max; ++k) {
    e.push_back({z_at(*z, k), w(k) / total});
    e.push_back({z_at(*z, -k), w(k) / total});
  }
  return StepMeasure(z, e);
}

}  // namespace

TEST_CASE("rho against the power-law closed form") {
  for (double beta : {0.2, 1.0 / 3.0, 0.4})
    for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      // gamma^-1(x/2)/x = (x/2)^(1/beta)/x exceeds n exactly above this point
      const double closed = std::pow(2.0, 1.0 / (1.0 - beta)) * std::pow(n, beta / (1.0 - beta));
      CHECK(std::abs(rho(GammaModel::power(1.0, beta), n) / closed - 1.0) <= 1e-6);
    }
  CHECK(rho(GammaModel::power(1.0, 1.0 / 3.0), 100) == doctest::Approx(28.2842712).epsilon(1e-8));
}

TEST_CASE("rho from a table matches the closed form it samples") {
  std::vector<double> v;
  for (int n = 1; n <= 4000; ++n) v.push_back(2.0 * std::pow(n, 0.3));
  auto t = GammaModel::table(v);
  auto c = GammaModel::power(2.0, 0.3);
  for (double n : {5.0, 20.0, 50.0}) CHECK(rho(t, n) == doctest::Approx(rho(c, n)).epsilon(1e-3));
  CHECK(t.inverse(t(17.25)) == doctest::Approx(17.25).epsilon(1e-12));
  CHECK_THROWS_AS(t.inverse(1e9), RangeError);
  CHECK_THROWS_AS(t(5000.0), RangeError);
  CHECK_THROWS_AS(GammaModel::table({1.0, 1.0}), UsageError);
}

TEST_CASE("gamma inverse with a log factor") {
  auto g = GammaModel::power(1.5, 0.25, 2.0);
  for (double x : {1.0, 3.0, 100.0, 1e6}) CHECK(g.inverse(g(x)) == doctest::Approx(x).epsilon(1e-10));
}

TEST_CASE("ell_n by direct scan") {
  for (double beta : {0.25, 1.0 / 3.0, 0.45}) {
    auto g = GammaModel::power(1.0, beta);
    auto ginv = [&](double y) { return std::pow(y, 1.0 / beta); };
    const double k0 = std::log(std::pow(2.0, beta) + std::log(64.0));
    for (double n : {10.0, 1e3, 1e5, 1e8}) {
      int k = static_cast<int>(std::ceil(k0));
      while (true) {
        const double x = std::exp(k) / 2.0;
        if (std::exp(k) * std::sqrt(ginv(x) / (x * x)) >= n) break;
        ++k;
      }
      CHECK(ell_n(g, n) == k);
    }
    const double e = std::exp(3.0);
    CHECK(ell_tail_value(g, 3) == doctest::Approx(1.0 / std::sqrt(ginv(e) / (e * e))).epsilon(1e-12));
  }
}

TEST_CASE("tail inequality on Z") {
  auto z = grp("Z");
  auto mu = uniform_measure(z);
  TailOptions o;
  o.n_max = 64;
  o.n_max_paths = 12;
  auto tc = tail_check(mu, interval(*z, -2, 2), "interval", o);
  CHECK(tc.lambda == doctest::Approx(1.0 - std::cos(std::numbers::pi / 6)).epsilon(1e-12));
  CHECK(tc.product_size == 9);
  // P(|S_6| > 4) = 2 / 64
  CHECK(tc.tail.grid[5].measured == doctest::Approx(0.03125).epsilon(1e-14));
  CHECK(tc.tail.ok);
  CHECK(tc.max_tail.ok);
  auto inside = [&](const GroupElement& x) { return std::llabs(x.code()[1]) <= 4; };
  for (const auto& row : tc.max_tail.grid)
    CHECK(row.measured == doctest::Approx(exit_probability_by_enumeration(mu, static_cast<int>(row.n), inside))
                              .epsilon(1e-12));
  auto row_law = binomial_row(10);
  double out = 0;
  for (int k = 0; k <= 10; ++k)
    if (std::abs(2 * k - 10) > 4) out += static_cast<double>(row_law[static_cast<std::size_t>(k)]);
  CHECK(tc.tail.grid[9].measured == doctest::Approx(out).epsilon(1e-13));
}

TEST_CASE("set product of a ball is the doubled ball") {
  auto g = grp("Z2wrZ");
  WordMetricCache cache(g);
  cache.extend(6, 100000);
  for (int r = 1; r <= 3; ++r) {
    auto p = set_product(*g, cache.ball_elements(r), 1'000'000);
    CHECK(p.size() == cache.ball_size(2 * r));
    for (const auto& x : p) CHECK(*cache.find(x) <= 2 * r);
  }
  CHECK_THROWS_AS(set_product(*g, cache.ball_elements(3), 100), ResourceError);
}

TEST_CASE("tail inequality on the lamplighter against path enumeration") {
  auto g = grp("Z2wrZ");
  auto mu = uniform_measure(g);
  WordMetricCache cache(g);
  cache.extend(4, 100000);
  TailOptions o;
  o.n_max = 5;
  o.n_max_paths = 5;
  auto tc = tail_check(mu, cache.ball_elements(2), "ball(2)", o);
  auto inside = [&](const GroupElement& x) {
    auto l = cache.find(x);
    return l && *l <= 4;
  };
  for (int n = 1; n <= 5; ++n) {
    double in = 0;
    for (const auto& [x, m] : enumerate_paths(mu, n))
      if (inside(x)) in += m;
    const auto& row = tc.tail.grid[static_cast<std::size_t>(n - 1)];
    CHECK(row.measured == doctest::Approx(1.0 - in).epsilon(1e-12));
    CHECK(row.method == "exact");
    CHECK(tc.max_tail.grid[static_cast<std::size_t>(n - 1)].measured ==
          doctest::Approx(exit_probability_by_enumeration(mu, n, inside)).epsilon(1e-12));
  }
  CHECK(tc.tail.ok);
  CHECK(tc.max_tail.ok);
}

TEST_CASE("varrho and the doubling constant") {
  CHECK(varrho([](double r) { return 1.0 / (r * r); }, 100, 1000) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(varrho([](double) { return 0.001; }, 100, 10) == 0.0);
  CHECK_THROWS_AS(varrho([](double) { return 1.0; }, 100, 10), RangeError);

  std::vector<double> v{1.0};
  for (int r = 1; r <= 20; ++r) v.push_back(1.0 / (r * r));
  RadialProfile f(v, "r^-2");
  CHECK(f(7.9) == 1.0 / 49);
  CHECK_THROWS_AS(f(21.0), RangeError);
  auto cert = fit_doubling(f, 2.0);
  // brute force over real 1 <= s <= r on a fine grid
  double c0 = 0.0;
  for (double s = 1.0; s <= 20.0; s += 0.01)
    for (double r = s; r < 20.999; r += 0.01) c0 = std::max(c0, f(r) / f(s) * std::pow(r / s, 2.0));
  CHECK(cert.c0 >= c0 - 1e-12);
  CHECK(cert.c0 <= c0 * 1.03);

  auto mb = moment_bound(f, cert, 1.5, 100);
  CHECK(mb.varrho == doctest::Approx(11.0).epsilon(1e-12));
  const double geo = 1.0 / (1.0 - std::exp(-0.5));
  CHECK(mb.constant == doctest::Approx(std::exp(1.5) + cert.c0 * std::exp(3.0) * geo).epsilon(1e-14));
  CHECK(mb.bound == doctest::Approx(mb.constant * std::pow(11.0, 1.5)).epsilon(1e-12));
  CHECK(mb.bound_conservative > mb.bound);
  CHECK_THROWS_AS(moment_bound(f, cert, 2.0, 100), InapplicableError);
}

TEST_CASE("lamplighter radial profile stays above ball eigenvalues") {
  auto g = grp("Z2wrZ");
  auto mu = sws(g);
  auto full = ball_profile(mu, 7, 4000);
  auto cut = ball_profile(mu, 40, 60);
  REQUIRE(full.max_radius() == 7);
  REQUIRE(cut.max_radius() == 40);
  for (int r = 0; r <= 7; ++r) CHECK(cut(r) >= full(r) - 1e-12);
  for (int r = 1; r <= 40; ++r) CHECK(cut(r) <= cut(r - 1));
  // the certificate value at half-width m is the rectangle eigenvalue itself
  auto curve = profile_upper(mu, ProfileFamily::lamplighter_rectangles, 5000);
  bool matched = false;
  for (const auto& p : curve.points)
    for (int r = 0; r <= 40; ++r)
      if (std::abs(cut(r) - p.lambda) <= 1e-10) matched = true;
  CHECK(matched);
  // Z has no certificate, so the profile stops where the balls stop
  auto z = ball_profile(uniform_measure(grp("Z^2")), 50, 200);
  CHECK(z.max_radius() < 50);
}

TEST_CASE("measure comparison") {
  auto z = grp("Z");
  auto mu = uniform_measure(z);
  auto same = compare_measures(mu, mu, 0.7, 2.0);
  CHECK(same.moment_term == doctest::Approx(0.7 * 2 / 4.0).epsilon(1e-15));
  CHECK(same.tail_term == 0.0);

  auto geo = symmetric_on_z(z, 60, [](int k) { return std::pow(0.5, k); });
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {4.0, 8.0, 16.0, 32.0}) {
    auto c = compare_measures(geo, mu, 1.0, r);
    double second = 0, tail = 0;
    for (const auto& e : geo.support()) {
      const double l = std::llabs(e.element.code()[1]);
      if (l <= r) second += l * l * e.mass;
      if (l >= r) tail += e.mass;
    }
    CHECK(c.bound == doctest::Approx(2.0 * second / (r * r) + tail).epsilon(1e-13));
    CHECK(r * c.bound < prev);
    prev = r * c.bound;
    CHECK_FALSE(c.first_moment_suspect);
  }
  auto heavy = symmetric_on_z(z, 2000, [](int k) { return 1.0 / (double(k) * k); });
  CHECK(compare_measures(heavy, mu, 1.0, 10.0).first_moment_suspect);
  CHECK_THROWS_AS(compare_measures(geo, lazy_measure(mu, 0.3), 1.0, 2.0), UsageError);
}

TEST_CASE("entropy report on a lazy walk on Z") {
  auto mu = lazy_measure(uniform_measure(grp("Z")), 0.5);
  auto obs = compute_observables(mu, 2000, {});
  auto gamma = GammaModel::from_observables(obs);
  CHECK(gamma.max_arg() == 1000);
  CHECK(gamma(3.0) == doctest::Approx(-std::log(obs.return_prob(3))).epsilon(1e-15));
  auto rep = entropy_bound_report(obs, gamma, {.grid = {8, 16, 32, 64, 100}});
  CHECK(rep.ok);
  REQUIRE(rep.grid.size() == 5);
  for (const auto& row : rep.grid) CHECK(std::isfinite(row.bound));
  // rho needs gamma far beyond n, so a short table leaves rows undecided
  auto short_rep = entropy_bound_report(obs, GammaModel::table({0.5, 0.8, 1.0}), {.grid = {8, 16, 32}});
  CHECK_FALSE(short_rep.ok);
  const auto json = rep.to_json();
  CHECK(json.find("\"schema_version\": 1") != std::string::npos);
  CHECK(rep.to_csv().rfind("theorem,n,measured,bound,slack,holds,method,rho,rho_tilde,ratio,entropy_error\n", 0) ==
        0);
  CHECK_THROWS_AS(entropy_bound_report(obs, GammaModel::power(1.0, 0.5)), InapplicableError);
}
