#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "doctest.h"
#include "grwalk/bubble.hpp"
#include "grwalk/errors.hpp"
#include "grwalk/group.hpp"
#include "grwalk/rng.hpp"

using namespace grwalk;
using Vertex = SchreierGraph::Vertex;

namespace {

ScalingSequence seq(std::vector<int> a) { return ScalingSequence::explicit_list(std::move(a)); }

// BFS over the undirected edge list, independent of the stored distances.
std::vector<int> bfs(const SchreierGraph& g) {
  std::vector<std::vector<Vertex>> adj(g.size());
  for (const auto& e : g.edges()) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  std::vector<int> d(g.size(), -1);
  std::deque<Vertex> q{0};
  d[0] = 0;
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop_front();
    for (Vertex w : adj[static_cast<std::size_t>(v)])
      if (d[static_cast<std::size_t>(w)] < 0) {
        d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(v)] + 1;
        q.push_back(w);
      }
  }
  return d;
}

Vertex act(const SchreierGraph& g, BubbleMove s, Vertex v) {
  switch (s) {
    case BubbleMove::a: return g.a(v);
    case BubbleMove::a_inv: return g.a_inv(v);
    case BubbleMove::b: return g.b(v);
    case BubbleMove::b_inv: return g.b_inv(v);
  }
  return v;
}

}  // namespace

TEST_CASE("bubble graph structure") {
  SchreierGraph g(seq({2, 3, 4}));
  CHECK(g.size() == 4 + 2 * 6 + 4 * 8);
  CHECK(g.bubble_edge_count(1) == 4);
  CHECK(g.bubble_edge_count(2) == 12);
  CHECK(g.bubble_edge_count(3) == 32);
  CHECK(g.branching_cycle_count() == 3);
  // level-1 bubble is a 4-cycle through o
  Vertex v = SchreierGraph::kRoot;
  for (int i = 0; i < 4; ++i) {
    CHECK((i == 0 || v != SchreierGraph::kRoot));
    v = g.a(v);
  }
  CHECK(v == SchreierGraph::kRoot);
  std::vector<int> in_a(g.size(), 0), in_b(g.size(), 0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto u = static_cast<Vertex>(x);
    ++in_a[static_cast<std::size_t>(g.a(u))];
    ++in_b[static_cast<std::size_t>(g.b(u))];
    CHECK(g.a_inv(g.a(u)) == u);
    CHECK(g.b_inv(g.b(u)) == u);
    if (g.b(u) == u) {
      CHECK(g.kind(u) == VertexKind::Bubble);
    } else {
      CHECK(g.kind(u) == VertexKind::Branching);
      CHECK(g.b(g.b(g.b(u))) == u);
    }
  }
  CHECK(std::all_of(in_a.begin(), in_a.end(), [](int c) { return c == 1; }));
  CHECK(std::all_of(in_b.begin(), in_b.end(), [](int c) { return c == 1; }));
  auto d = bfs(g);
  for (std::size_t x = 0; x < g.size(); ++x) CHECK(d[x] == g.distance(static_cast<Vertex>(x)));
  CHECK(g.boundary_distance() == 2 + 1 + 3 + 1 + 4);
  CHECK(induced_chain_step(g, SchreierGraph::kRoot, BubbleMove::b) == SchreierGraph::kRoot);
  CHECK(induced_chain_step(g, SchreierGraph::kRoot, BubbleMove::a) == g.a_inv(SchreierGraph::kRoot));
}

TEST_CASE("adjacency export") {
  SchreierGraph g(seq({2, 3}));
  auto csv = adjacency_csv(g);
  CHECK(csv.rfind("vertex,level,kind,a_target,b_target\n0,1,bubble,", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == g.size() + 1);
}

TEST_CASE("induced chain equals word accumulation in the wreath group") {
  auto grp = make_group(GroupSpec::parse("bubble:2,3,4,5,6,7,8,9,10"));
  const auto& g = bubble_graph_of(*grp);
  const auto& gens = grp->base_generators();  // a, a^-1, b, b^-1
  for (std::uint64_t stream = 0; stream < 20; ++stream) {
    PhiloxStream rng(99, stream);
    GroupElement y = grp->identity();
    Vertex v = SchreierGraph::kRoot;
    for (int j = 1; j <= 50; ++j) {
      const auto s = rng.below(4);
      y = grp->multiply(y, gens[s]);
      v = induced_chain_step(g, v, static_cast<BubbleMove>(s));
      CHECK(unpack_bubble(*grp, grp->inverse(y)).action[SchreierGraph::kRoot] == v);
    }
  }
}

// X_1 ... X_j . o, innermost first.
Vertex orbit_point(const SchreierGraph& g, const std::vector<int>& word, int j) {
  Vertex x = SchreierGraph::kRoot;
  for (int i = j; i >= 1; --i) x = act(g, static_cast<BubbleMove>(word[static_cast<std::size_t>(i - 1)]), x);
  return x;
}

TEST_CASE("inverted orbit against exhaustive enumeration") {
  // all 4^n move sequences: the orbit and the induced chain return to o at the
  // same times, yet their occupation laws differ, so Q_n must use the orbit
  SchreierGraph g(seq({2, 3, 4, 5}));
  std::vector<double> exact_mean(7, 0.0);
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> word(static_cast<std::size_t>(n), 0);
    const long total = 1L << (2 * n);
    double orbit_sum = 0, chain_sum = 0;
    bool same_returns = true;
    for (long code = 0; code < total; ++code) {
      for (int i = 0; i < n; ++i) word[static_cast<std::size_t>(i)] = static_cast<int>((code >> (2 * i)) & 3);
      std::map<Vertex, int> qo, qc;
      Vertex c = SchreierGraph::kRoot;
      ++qo[c];
      ++qc[c];
      for (int j = 1; j <= n; ++j) {
        const Vertex x = orbit_point(g, word, j);
        ++qo[x];
        c = induced_chain_step(g, c, static_cast<BubbleMove>(word[static_cast<std::size_t>(j - 1)]));
        ++qc[c];
        same_returns &= (x == SchreierGraph::kRoot) == (c == SchreierGraph::kRoot);
      }
      for (auto& [k, v] : qo) orbit_sum += std::log1p(v);
      for (auto& [k, v] : qc) chain_sum += std::log1p(v);
    }
    CHECK(same_returns);
    exact_mean[static_cast<std::size_t>(n)] = orbit_sum / static_cast<double>(total);
    if (n >= 3) CHECK(std::abs(orbit_sum - chain_sum) / static_cast<double>(total) > 1e-3);
  }
  WreathWalkOptions o;
  o.grid = {1, 2, 3, 4, 5, 6};
  o.samples = 20000;
  o.seed = 17;
  auto ens = wreath_walk(g, o);
  for (const auto& pt : ens.points) {
    CHECK(pt.se_log_occupation > 0);
    CHECK(std::abs(pt.mean_log_occupation - exact_mean[static_cast<std::size_t>(pt.n)]) <
          4 * pt.se_log_occupation);
  }
}

TEST_CASE("orbit path replays its random draws") {
  // draw order per stream: Z_1, then (X_j, Z_2j, Z_2j+1) for each step
  SchreierGraph g(seq({2, 3, 4, 5, 6, 7, 8}));
  for (long long n : {0, 1, 2, 9, 40}) {
    for (std::uint64_t st = 0; st < 30; ++st) {
      PhiloxStream rng(8, st);
      const int z1 = (rng() & 1u) ? 1 : -1;
      std::vector<int> word;
      std::vector<int> z{0, z1};
      for (long long j = 1; j <= n; ++j) {
        word.push_back(static_cast<int>(rng.below(4)));
        z.push_back((rng() & 1u) ? 1 : -1);
        z.push_back((rng() & 1u) ? 1 : -1);
      }
      std::map<Vertex, long long> q;
      std::map<Vertex, std::int64_t> lamp;
      long long ret = -1;
      for (int j = 0; j <= n; ++j) {
        const Vertex x = orbit_point(g, word, j);
        ++q[x];
        if (j > 0 && x == SchreierGraph::kRoot && ret < 0) ret = j;
        if (n == 0) continue;
        if (j == 0) lamp[x] += z[1];
        else if (j == n) lamp[x] += z[static_cast<std::size_t>(2 * j)];
        else lamp[x] += z[static_cast<std::size_t>(2 * j)] + z[static_cast<std::size_t>(2 * j + 1)];
      }
      std::vector<std::pair<Vertex, long long>> occ(q.begin(), q.end());
      std::vector<std::pair<Vertex, std::int64_t>> lamps;
      for (auto& [v, l] : lamp)
        if (l != 0) lamps.emplace_back(v, l);
      auto p = trace_orbit(g, n, 8, st);
      CHECK(p.occupation == occ);
      CHECK(p.lamps == lamps);
      CHECK(p.return_time == ret);
    }
  }
}

TEST_CASE("closed-form resistance against the harmonic solve") {
  for (const auto& s : {seq({2, 3, 4, 5, 6, 7}), seq({2, 6, 18, 54, 162, 486}), ScalingSequence::geometric(1.5, 6)}) {
    SchreierGraph g(s);
    for (int k = 0; k < s.levels(); ++k)
      for (int ell = 0, step = std::max(1, s.alpha(k + 1) / 24); ell <= s.alpha(k + 1);
           ell = ell == s.alpha(k + 1) ? ell + 1 : std::min(ell + step, s.alpha(k + 1))) {
        const int r = level_set_radius(s, k, ell);
        if (r > g.boundary_distance()) continue;
        for (auto c : {ResistanceConvention::contracted, ResistanceConvention::literal})
          CHECK(std::abs(effective_resistance(s, k, ell, c) - harmonic_resistance(g, r, c)) <= 1e-9);
      }
  }
  auto s = seq({2, 3, 4});
  CHECK(effective_resistance(s, 1, 0) == 1.0);
  CHECK(effective_resistance(s, 1, 2) == 1.5);
  CHECK(effective_resistance(s, 0, 0) == 0.0);
  CHECK(effective_resistance(s, 1, 0, ResistanceConvention::literal) == 1.5);
  CHECK(level_set_radius(s, 1, 2) == 5);
  CHECK_THROWS_AS(effective_resistance(s, 3, 0), RangeError);
  CHECK_THROWS_AS(effective_resistance(s, 1, 4), RangeError);
}

TEST_CASE("hitting probability by Monte Carlo") {
  auto s = seq({2, 3, 4});
  SchreierGraph g(s);
  for (int ell = 0; ell <= 3; ++ell) {
    const int r = level_set_radius(s, 1, ell);
    const double rl = effective_resistance(s, 1, ell, ResistanceConvention::literal);
    auto jump = hitting_probability(g, r, ChainKind::jump, 100000, 11 + ell);
    auto lazy = hitting_probability(g, r, ChainKind::lazy, 100000, 23 + ell);
    CHECK(std::abs(jump.p - 1.0 / (2.0 * rl)) <= 3.0 * jump.se);
    // the self-loop at o halves the chance of leaving before returning
    CHECK(std::abs(lazy.p - 1.0 / (4.0 * rl)) <= 3.0 * lazy.se);
  }
  CHECK_THROWS_AS(hitting_probability(g, 100, ChainKind::jump, 10, 1), RangeError);
}

TEST_CASE("recurrence criterion") {
  auto dyadic = recurrence_check(seq({2, 4, 8, 16, 32, 64}), 6);
  for (int k = 1; k <= 6; ++k) CHECK(dyadic.partial_sums[static_cast<std::size_t>(k - 1)] == k);
  CHECK(dyadic.verdict == "recurrent");
  auto flat = recurrence_check(seq({2, 2, 2, 2, 2, 2}), 6);
  CHECK(flat.verdict == "transient");
  CHECK(flat.partial_sums.back() + flat.tail_bound == doctest::Approx(2.0).epsilon(1e-14));
  auto geo = recurrence_check(ScalingSequence::geometric(1.5, 5), 5);
  CHECK(geo.growth == "divergent");
  CHECK(geo.verdict == "recurrent");
  CHECK_THROWS_AS(recurrence_check(seq({2, 3}), 3), RangeError);
}

TEST_CASE("orbit paths") {
  SchreierGraph g(seq({2, 3, 4, 5, 6, 7, 8, 9}));
  auto p0 = trace_orbit(g, 0, 5, 0);
  REQUIRE(p0.occupation.size() == 1);
  CHECK(p0.occupation[0] == std::pair<Vertex, long long>{0, 1});
  CHECK(p0.lamps.empty());
  for (long long n : {1, 7, 30}) {
    for (std::uint64_t st = 0; st < 50; ++st) {
      auto p = trace_orbit(g, n, 5, st);
      long long total = 0;
      for (const auto& [v, q] : p.occupation) total += q;
      CHECK(total == n + 1);
      for (const auto& [v, l] : p.lamps)
        CHECK(std::any_of(p.occupation.begin(), p.occupation.end(), [&](const auto& e) { return e.first == v; }));
      CHECK(p.occupation.size() <= static_cast<std::size_t>(n) + 1);
      for (std::size_t r = 1; r < p.first_hit.size(); ++r) CHECK(p.first_hit[r] > p.first_hit[r - 1]);
      auto again = trace_orbit(g, n, 5, st);
      CHECK(again.occupation == p.occupation);
      CHECK(again.lamps == p.lamps);
    }
  }
  // ensemble grid points agree with single paths of the same streams
  WreathWalkOptions o;
  o.grid = {3, 10, 25};
  o.samples = 40;
  o.seed = 5;
  auto ens = wreath_walk(g, o);
  for (std::size_t i = 0; i < o.grid.size(); ++i) {
    double sum = 0, support = 0;
    std::size_t alive = 0;
    for (std::uint64_t st = 0; st < 40; ++st) {
      auto p = trace_orbit(g, o.grid[i], 5, st);
      for (const auto& [v, q] : p.occupation) sum += std::log1p(static_cast<double>(q));
      support += static_cast<double>(p.lamps.size());
      alive += p.return_time < 0;
    }
    CHECK(ens.points[i].mean_log_occupation == doctest::Approx(sum / 40).epsilon(1e-12));
    CHECK(ens.points[i].mean_lamp_support == doctest::Approx(support / 40).epsilon(1e-12));
    CHECK(ens.points[i].survivors == alive);
  }
  SchreierGraph small(seq({2, 3}));
  CHECK_THROWS_AS(wreath_walk(small, {.grid = {200}, .samples = 4, .seed = 1}), ResourceError);
}

TEST_CASE("thread count does not change the ensemble") {
  SchreierGraph g(ScalingSequence::geometric(2.0, 4));
  WreathWalkOptions o{.grid = {8, 64, 256}, .samples = 300, .seed = 3};
  auto a = wreath_walk(g, o);
  o.policy.threads = 3;
  auto b = wreath_walk(g, o);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.points[i].mean_log_occupation == b.points[i].mean_log_occupation);
    CHECK(a.points[i].survivors == b.points[i].survivors);
  }
}

TEST_CASE("entropy floor from the occupation measure") {
  SchreierGraph g(ScalingSequence::geometric(2.0, 5));
  WreathWalkOptions o{.grid = {32, 64, 128, 256, 512}, .samples = 1000, .seed = 17};
  auto ens = wreath_walk(g, o);
  auto rep = entropy_lower_bound(g, ens);
  REQUIRE(rep.rows.size() == 5);
  for (const auto& row : rep.rows) {
    CHECK(row.holds);
    CHECK(row.p_lower < row.p_hat);
    CHECK(row.ball == ball_volume(g, static_cast<int>(std::floor(std::sqrt(static_cast<double>(row.n))))));
  }
  CHECK(rep.ratio_spread <= 4.0);
  o.samples = 999;
  CHECK_THROWS_AS(entropy_lower_bound(g, wreath_walk(g, o)), UsageError);
}

TEST_CASE("ball volumes") {
  SchreierGraph g(seq({5, 11, 23}));
  auto d = bfs(g);
  CHECK(ball_volume(g, 0) == 1);
  for (int r = 1; r < 5; ++r) CHECK(ball_volume(g, r) == static_cast<std::size_t>(2 * r + 1));
  for (int r = 0; r <= g.boundary_distance(); ++r)
    CHECK(ball_volume(g, r) == static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [&](int x) { return x <= r; })));
  SchreierGraph h(seq({2, 3, 4}));
  CHECK(ball_volume(h, 3) == 6);
  CHECK_THROWS_AS(ball_volume(g, g.boundary_distance() + 1), RangeError);
}

TEST_CASE("return-time tail") {
  SchreierGraph g(seq({2, 6, 18, 54}));
  auto rep = return_time_tail(g, 1, 0, {0, 1, 2, 4, 8, 16, 32, 64}, 20000, 4);
  CHECK(rep.bound == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(rep.scale == 4.0);
  CHECK(rep.tail[0] == 1.0);
  for (std::size_t i = 1; i < rep.tail.size(); ++i) CHECK(rep.tail[i] <= rep.tail[i - 1]);
  CHECK(rep.c_hat > 0.0);
  CHECK(rep.hypothesis);
  SchreierGraph h(seq({2, 3, 4}));
  CHECK_FALSE(return_time_tail(h, 1, 0, {1, 2}, 100, 4).hypothesis);
}

TEST_CASE("exponent report") {
  auto rep = exponent_report(2.0);
  CHECK(rep.beta_return == 3.0 / 7.0);
  CHECK(rep.log_correction == 4.0 / 7.0);
  CHECK(rep.entropy_exponent == 0.75);
  CHECK(rep.relative_error <= 0.15);
  CHECK(rep.to_json().find("\"beta_return\": 0.42857142857142855") != std::string::npos);
  CHECK(exponent_report(3.0, 100000).beta_return == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
  CHECK_THROWS_AS(exponent_report(1.0), InapplicableError);

  std::vector<double> vol;
  for (int r = 0; r <= 100; ++r) vol.push_back(2.0 * r + 1);
  for (double n : {50.0, 1e3, 1e5}) {
    const double phi = phi_inverse(vol, n);
    const auto lo = static_cast<std::size_t>(std::floor(phi));
    auto gval = [&](std::size_t r) { return double(r) * double(r) * vol[r] * std::log(double(r)); };
    CHECK(gval(lo) <= n);
    CHECK(n <= gval(lo + 1));
  }
  CHECK_THROWS_AS(phi_inverse(vol, 1.0), RangeError);
}
