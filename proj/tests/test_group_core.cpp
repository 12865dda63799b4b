#include <array>
#include <map>
#include <set>

#include "doctest.h"
#include "grwalk/errors.hpp"
#include "grwalk/group.hpp"
#include "grwalk/measure.hpp"
#include "grwalk/rng.hpp"
#include "grwalk/word_metric.hpp"

using namespace grwalk;

namespace {

std::shared_ptr<const Group> grp(const std::string& s) { return make_group(GroupSpec::parse(s)); }

GroupElement lamplighter(const Group& g, std::int64_t pos, std::vector<std::pair<std::int64_t, std::int64_t>> lamps) {
  LampState s;
  s.position = {pos};
  for (auto [site, v] : lamps) s.lamps.push_back({{site}, v});
  return pack_lamplighter(g, s);
}

std::vector<int> random_word(PhiloxStream& rng, std::size_t gens, int max_len) {
  std::vector<int> w(rng.below(static_cast<std::uint32_t>(max_len + 1)));
  for (int& x : w) x = static_cast<int>(rng.below(static_cast<std::uint32_t>(gens)));
  return w;
}

// Oracle representations: each maps a word to a value whose equality is
// group-element equality, computed without the library's normal forms.

using Mat3 = std::array<std::array<std::int64_t, 3>, 3>;
Mat3 mat_mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Mat3 heisenberg_oracle(const Group& g, const std::vector<int>& word) {
  Mat3 m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int i : word) {
    Mat3 s{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    const std::string& n = g.generator_names()[static_cast<std::size_t>(i)];
    if (n == "x") s[0][1] = 1;
    if (n == "x^-1") s[0][1] = -1;
    if (n == "y") s[1][2] = 1;
    if (n == "y^-1") s[1][2] = -1;
    m = mat_mul(m, s);
  }
  return m;
}

// Lamplighter state machine: the walker reads the word left to right.
std::pair<std::int64_t, std::map<std::int64_t, std::int64_t>> lamp_oracle(const Group& g, const std::vector<int>& word,
                                                                          std::int64_t m) {
  std::int64_t pos = 0;
  std::map<std::int64_t, std::int64_t> lamps;
  for (int i : word) {
    const std::string& n = g.generator_names()[static_cast<std::size_t>(i)];
    if (n == "t") ++pos;
    if (n == "t^-1") --pos;
    if (n == "s") lamps[pos] += 1;
    if (n == "s^-1") lamps[pos] -= 1;
    if (m > 0) lamps[pos] = ((lamps[pos] % m) + m) % m;
    if (lamps[pos] == 0) lamps.erase(pos);
  }
  return {pos, lamps};
}

// BS(1,q): the affine map evaluated exactly at 0 and 1, values scaled by q^40.
std::pair<__int128, __int128> bs_oracle(const Group& g, const std::vector<int>& word, int q) {
  __int128 scale = 1;
  for (int i = 0; i < 40; ++i) scale *= q;
  std::array<__int128, 2> pts{0, scale};
  // (g1 ... gk)(x) = g1(g2(...gk(x))): apply from the right end.
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const std::string& n = g.generator_names()[static_cast<std::size_t>(*it)];
    for (auto& p : pts) {
      if (n == "t") p *= q;
      if (n == "t^-1") {
        REQUIRE(p % q == 0);
        p /= q;
      }
      if (n == "x") p += scale;
      if (n == "x^-1") p -= scale;
    }
  }
  return {pts[0], pts[1]};
}

}  // namespace

TEST_CASE("spec parsing round-trips") {
  for (std::string s : {"Z", "Z^3", "heisenberg", "Z2wrZ", "Z3wrZ^2", "ZwrZ", "BS(1,2)", "BS(1,5)", "bubble:2,3,4",
                        "bubble:theta=2,L=4"}) {
    auto spec = GroupSpec::parse(s);
    CHECK(GroupSpec::parse(spec.canonical_text()) == spec);
  }
  CHECK_THROWS_AS(GroupSpec::parse("Z1wrZ"), UsageError);
  CHECK_THROWS_AS(GroupSpec::parse("BS(1,1)"), UsageError);
  CHECK_THROWS_AS(GroupSpec::parse("Z^0"), UsageError);
  CHECK_THROWS_AS(GroupSpec::parse("free"), UsageError);
}

TEST_CASE("generating sets are symmetric and exclude the identity") {
  for (std::string s : {"Z", "Z^2", "heisenberg", "Z2wrZ", "Z3wrZ", "Z2wrZ^2", "ZwrZ", "BS(1,3)", "bubble:2,3"}) {
    auto g = grp(s);
    std::set<GroupElement> gens(g->generators().begin(), g->generators().end());
    CHECK(gens.size() == g->generators().size());
    CHECK(!gens.contains(g->identity()));
    for (const auto& x : g->generators()) CHECK(gens.contains(g->inverse(x)));
  }
  CHECK(grp("Z2wrZ")->generators().size() == 3);
  CHECK(grp("Z3wrZ")->generators().size() == 4);
  CHECK(grp("bubble:2,3")->generators().size() == 6);
}

TEST_CASE("multiply and inverse on Z") {
  auto g = grp("Z");
  auto e = [&](std::int64_t v) { return GroupElement(GroupElement::Code{g->tag(), v}); };
  CHECK(g->multiply(e(2), e(3)) == e(5));
  CHECK(g->inverse(e(5)) == e(-5));
  CHECK(g->inverse(g->identity()) == g->identity());
}

TEST_CASE("lamplighter products follow the wreath rule") {
  auto g = grp("Z2wrZ");
  auto a = lamplighter(*g, 0, {{0, 1}});
  auto b = lamplighter(*g, 1, {});
  CHECK(g->multiply(a, b) == lamplighter(*g, 1, {{0, 1}}));
  // translation by the position of the left factor
  CHECK(g->multiply(b, a) == lamplighter(*g, 1, {{1, 1}}));

  auto x = lamplighter(*g, 2, {{2, 1}});
  auto xi = g->inverse(x);
  CHECK(xi == lamplighter(*g, -2, {{0, 1}}));
  CHECK(g->multiply(x, xi) == g->identity());
  CHECK(g->multiply(xi, x) == g->identity());
}

TEST_CASE("operands from different groups are rejected") {
  auto z = grp("Z");
  auto z2 = grp("Z^2");
  CHECK_THROWS_AS(z->multiply(z->identity(), z2->identity()), UsageError);
  CHECK_THROWS_AS(z2->inverse(z->identity()), UsageError);
}

TEST_CASE("canonical forms agree with independent oracles on random words") {
  PhiloxStream rng(7, 0);
  SUBCASE("Heisenberg matrices") {
    auto g = grp("heisenberg");
    for (int trial = 0; trial < 3000; ++trial) {
      auto u = random_word(rng, g->generators().size(), 12);
      auto v = random_word(rng, g->generators().size(), 12);
      CHECK((evaluate_word(*g, u) == evaluate_word(*g, v)) == (heisenberg_oracle(*g, u) == heisenberg_oracle(*g, v)));
      CHECK(g->is_valid(evaluate_word(*g, u)));
    }
  }
  SUBCASE("lamplighter state machines") {
    for (auto [s, m] : std::vector<std::pair<std::string, int>>{{"Z2wrZ", 2}, {"Z3wrZ", 3}, {"ZwrZ", 0}}) {
      auto g = grp(s);
      for (int trial = 0; trial < 3000; ++trial) {
        // short words over few generators collide often enough to test both directions
        auto u = random_word(rng, g->generators().size(), 8);
        auto v = random_word(rng, g->generators().size(), 8);
        auto eu = evaluate_word(*g, u);
        CHECK((eu == evaluate_word(*g, v)) == (lamp_oracle(*g, u, m) == lamp_oracle(*g, v, m)));
        auto [pos, lamps] = lamp_oracle(*g, u, m);
        std::vector<std::pair<std::int64_t, std::int64_t>> lv(lamps.begin(), lamps.end());
        CHECK(eu == lamplighter(*g, pos, lv));
        CHECK(g->is_valid(eu));
      }
    }
  }
  SUBCASE("BS(1,q) affine maps evaluated at two points") {
    for (int q : {2, 3}) {
      auto g = make_group(GroupSpec::baumslag_solitar(q));
      int equal = 0;
      for (int trial = 0; trial < 3000; ++trial) {
        auto u = random_word(rng, g->generators().size(), 12);
        auto v = random_word(rng, g->generators().size(), 6);
        bool same = evaluate_word(*g, u) == evaluate_word(*g, v);
        equal += same;
        CHECK(same == (bs_oracle(*g, u, q) == bs_oracle(*g, v, q)));
        CHECK(g->is_valid(evaluate_word(*g, u)));
      }
      CHECK(equal > 0);
    }
  }
}

TEST_CASE("group axioms on random elements") {
  PhiloxStream rng(11, 0);
  for (std::string s : {"Z^3", "heisenberg", "Z2wrZ", "Z3wrZ^2", "ZwrZ", "BS(1,2)", "bubble:2,3,4"}) {
    auto g = grp(s);
    for (int trial = 0; trial < 200; ++trial) {
      auto a = evaluate_word(*g, random_word(rng, g->generators().size(), 10));
      auto b = evaluate_word(*g, random_word(rng, g->generators().size(), 10));
      auto c = evaluate_word(*g, random_word(rng, g->generators().size(), 10));
      CHECK(g->multiply(g->multiply(a, b), c) == g->multiply(a, g->multiply(b, c)));
      CHECK(g->multiply(a, g->identity()) == a);
      CHECK(g->multiply(g->identity(), a) == a);
      CHECK(g->multiply(a, g->inverse(a)) == g->identity());
      CHECK(g->inverse(g->inverse(a)) == a);
    }
  }
}

TEST_CASE("ball sizes") {
  CHECK(ball(grp("Z"), 3).size() == 7);
  auto z2 = ball(grp("Z^2"), 8);
  for (int r = 0; r <= 8; ++r) CHECK(z2.ball_size(r) == static_cast<std::size_t>(2 * r * r + 2 * r + 1));

  // Heisenberg: BFS over integer matrices as the oracle
  auto h = grp("heisenberg");
  auto cache = ball(h, 5);
  std::set<Mat3> seen{heisenberg_oracle(*h, {})};
  std::vector<Mat3> frontier(seen.begin(), seen.end());
  for (int r = 1; r <= 5; ++r) {
    std::vector<Mat3> next;
    for (const auto& m : frontier)
      for (int i = 0; i < 4; ++i) {
        Mat3 x = mat_mul(m, heisenberg_oracle(*h, {i}));
        if (seen.insert(x).second) next.push_back(x);
      }
    frontier = next;
    CHECK(cache.ball_size(r) == seen.size());
  }
  CHECK(cache.ball_size(2) == 17);
}

TEST_CASE("ball cap reports the partial radius") {
  try {
    ball(grp("Z^2"), 10, 100);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(e.progress() == 6);  // |B(6)| = 85, |B(7)| = 113
  }
}

TEST_CASE("word lengths") {
  auto z2 = grp("Z^2");
  auto c = ball(z2, 7);
  CHECK(word_length(z2->identity(), c) == 0);
  CHECK(word_length(GroupElement(GroupElement::Code{z2->tag(), 3, 4}), c) == 7);
  CHECK_THROWS_AS(word_length(GroupElement(GroupElement::Code{z2->tag(), 4, 4}), c), RangeError);

  auto g = grp("Z2wrZ");
  auto lc = ball(g, 6);
  CHECK(word_length(lamplighter(*g, 0, {{0, 1}, {2, 1}}), lc) == 6);
}

TEST_CASE("closed-form lengths agree with BFS") {
  for (std::string s : {"Z", "Z^3", "Z2wrZ", "Z3wrZ", "ZwrZ"}) {
    auto g = grp(s);
    auto c = ball(g, 10, 3'000'000);
    for (int r = 0; r <= c.radius(); ++r)
      for (const auto& x : c.layer(r)) CHECK(g->closed_form_length(x) == r);
  }
  CHECK(!grp("heisenberg")->closed_form_length(grp("heisenberg")->identity()));
  CHECK(!grp("Z2wrZ^2")->closed_form_length(grp("Z2wrZ^2")->identity()));
}

TEST_CASE("metric properties on cached balls") {
  for (std::string s : {"Z^2", "heisenberg", "Z2wrZ", "BS(1,2)", "Z2wrZ^2"}) {
    auto g = grp(s);
    auto c = ball(g, 6, 2'000'000);
    auto b3 = c.ball_elements(3);
    // triangle inequality
    for (std::size_t i = 0; i < b3.size(); i += 3)
      for (std::size_t j = 0; j < b3.size(); j += 5) {
        auto p = g->multiply(b3[i], b3[j]);
        CHECK(word_length(p, c) <= word_length(b3[i], c) + word_length(b3[j], c));
      }
    // symmetry of balls
    for (const auto& x : c.ball_elements(6)) CHECK(word_length(g->inverse(x), c) == word_length(x, c));
    // layer r+1 = neighbours of layer r minus layers <= r
    for (int r = 0; r < 6; ++r) {
      std::set<GroupElement> nb;
      for (const auto& x : c.layer(r))
        for (const auto& s2 : g->generators()) {
          auto y = g->multiply(x, s2);
          if (c.find(y) > r || !c.find(y)) nb.insert(y);
        }
      std::set<GroupElement> layer(c.layer(r + 1).begin(), c.layer(r + 1).end());
      CHECK(nb == layer);
    }
  }
}

TEST_CASE("uniform measures") {
  auto z = uniform_measure(grp("Z"));
  CHECK(z.support().size() == 2);
  for (const auto& e : z.support()) CHECK(e.mass == 0.5);
  CHECK(z.symmetric());

  auto z2 = uniform_measure(grp("Z^2"));
  CHECK(z2.support().size() == 4);
  for (const auto& e : z2.support()) CHECK(e.mass == 0.25);

  auto bw = grp("bubble:2,3,4");
  auto nu = base_uniform_measure(bw);
  CHECK(nu.support().size() == 4);
  for (const auto& e : nu.support()) CHECK(e.mass == 0.25);
  CHECK(nu.symmetric());
}

TEST_CASE("switch-walk-switch measure") {
  auto bw = grp("bubble:2,3,4");
  auto nu = base_uniform_measure(bw);
  auto mu = sws_measure(default_lamp_measure(*bw), nu);
  CHECK(mu.support().size() <= 16);
  double total = 0;
  for (const auto& e : mu.support()) total += e.mass;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mu.symmetric());
  for (const auto& e : mu.support()) CHECK(mu.mass(bw->inverse(e.element)) == doctest::Approx(e.mass));

  // eta = delta_id reproduces nu
  auto same = sws_measure({{0, 1.0}}, nu);
  REQUIRE(same.support().size() == nu.support().size());
  for (std::size_t i = 0; i < nu.support().size(); ++i) {
    CHECK(same.support()[i].element == nu.support()[i].element);
    CHECK(same.support()[i].mass == nu.support()[i].mass);
  }

  auto ll = grp("Z2wrZ");
  auto sws = sws_measure(default_lamp_measure(*ll), base_uniform_measure(ll));
  CHECK(sws.support().size() == 8);
  CHECK(sws.symmetric());
  CHECK_THROWS_AS(sws_measure({{1, 1.0}}, base_uniform_measure(grp("ZwrZ"))), UsageError);
  CHECK_THROWS_AS(sws_measure({{0, 1.0}}, uniform_measure(grp("Z"))), UsageError);
}

TEST_CASE("step measure validation") {
  auto z = grp("Z");
  auto one = GroupElement(GroupElement::Code{z->tag(), 1});
  CHECK_THROWS_AS(StepMeasure(z, {{one, 0.5}}), UsageError);
  CHECK_THROWS_AS(StepMeasure(z, {{one, -0.5}, {z->identity(), 1.5}}), UsageError);
  StepMeasure skew(z, {{one, 0.5}, {z->identity(), 0.5}});
  CHECK(!skew.symmetric());
  auto lazy = lazy_measure(uniform_measure(z), 0.5);
  CHECK(lazy.mass(z->identity()) == 0.5);
  CHECK(lazy.symmetric());
}

TEST_CASE("Philox known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and distinct") {
  PhiloxStream a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a();
    CHECK(x == b());
    differs |= x != c();
  }
  CHECK(differs);
  PhiloxStream r(1, 0);
  std::array<int, 3> counts{};
  for (int i = 0; i < 30000; ++i) ++counts[r.below(3)];
  for (int n : counts) CHECK(std::abs(n - 10000) < 500);
}
