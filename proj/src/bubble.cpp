#include "grwalk/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <boost/math/special_functions/beta.hpp>
#include <json.hpp>

#include "grwalk/bounds.hpp"
#include "grwalk/errors.hpp"
#include "grwalk/format.hpp"
#include "grwalk/rng.hpp"

namespace grwalk {

using Vertex = SchreierGraph::Vertex;

Vertex induced_chain_step(const SchreierGraph& g, Vertex v, BubbleMove s) {
  switch (s) {
    case BubbleMove::a: return g.a_inv(v);
    case BubbleMove::a_inv: return g.a(v);
    case BubbleMove::b: return g.b_inv(v);
    case BubbleMove::b_inv: return g.b(v);
  }
  return v;
}

std::string to_string(ResistanceConvention c) {
  return c == ResistanceConvention::contracted ? "contracted" : "literal";
}

namespace {

void check_level_index(const ScalingSequence& seq, int k, int ell) {
  if (k < 0 || k >= seq.levels()) throw RangeError("level index k outside the truncation");
  if (ell < 0 || ell > seq.alpha(k + 1)) throw RangeError("offset l outside [0, alpha_{k+1}]");
}

}  // namespace

int level_set_radius(const ScalingSequence& seq, int k, int ell) {
  check_level_index(seq, k, ell);
  int r = ell + k;
  for (int j = 1; j <= k; ++j) r += seq.alpha(j);
  return r;
}

double effective_resistance(const ScalingSequence& seq, int k, int ell, ResistanceConvention c) {
  check_level_index(seq, k, ell);
  const double extra = c == ResistanceConvention::literal ? 1.0 : 0.0;
  double r = std::ldexp(static_cast<double>(ell), -k - 1);
  for (int j = 1; j <= k; ++j) r += std::ldexp(seq.alpha(j) + extra, -j);
  return r;
}

double harmonic_resistance(const SchreierGraph& g, int r, ResistanceConvention c) {
  if (r < 0) throw UsageError("negative radius");
  if (r > g.boundary_distance()) throw RangeError("level set beyond the truncation boundary");
  if (r == 0) return 0.0;
  const auto dist = g.distances();
  const std::size_t n = g.size();

  std::vector<Vertex> parent(n);
  for (std::size_t v = 0; v < n; ++v) parent[v] = static_cast<Vertex>(v);
  auto find = [&](Vertex v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  const auto edges = g.edges();
  auto inside = [&](const SchreierGraph::Edge& e) { return dist[e.u] <= r && dist[e.v] <= r; };
  if (c == ResistanceConvention::contracted)
    for (const auto& e : edges)
      if (e.branching && inside(e)) parent[find(e.u)] = find(e.v);

  // node roles: source (holds o), ground (touches S_r), unknowns indexed densely
  std::vector<int> index(n, -1);
  std::vector<char> ground(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (dist[v] == r) ground[find(static_cast<Vertex>(v))] = 1;
  const Vertex src = find(SchreierGraph::kRoot);
  if (ground[src]) return 0.0;
  int unknowns = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const Vertex root = find(static_cast<Vertex>(v));
    if (dist[v] <= r && root != src && !ground[root] && index[root] < 0) index[root] = unknowns++;
  }

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  std::vector<int> src_neighbours;  // -1 for ground
  for (const auto& e : edges) {
    if (!inside(e)) continue;
    if (c == ResistanceConvention::contracted && e.branching) continue;
    const Vertex u = find(e.u), w = find(e.v);
    if (u == w) continue;
    const int iu = index[u], iw = index[w];
    if (iu >= 0) trip.emplace_back(iu, iu, 1.0);
    if (iw >= 0) trip.emplace_back(iw, iw, 1.0);
    if (iu >= 0 && iw >= 0) {
      trip.emplace_back(iu, iw, -1.0);
      trip.emplace_back(iw, iu, -1.0);
    }
    if (u == src) {
      if (iw >= 0) rhs[iw] += 1.0;
      src_neighbours.push_back(iw);
    } else if (w == src) {
      if (iu >= 0) rhs[iu] += 1.0;
      src_neighbours.push_back(iu);
    }
  }
  Eigen::VectorXd phi;
  if (unknowns > 0) {
    Eigen::SparseMatrix<double> lap(unknowns, unknowns);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw ConvergenceError("harmonic solve failed", 0.0, 0.0);
    phi = solver.solve(rhs);
  }
  double current = 0.0;
  for (int i : src_neighbours) current += 1.0 - (i >= 0 ? phi[i] : 0.0);
  return 1.0 / current;
}

RecurrenceReport recurrence_check(const ScalingSequence& seq, int k_max) {
  if (k_max < 1 || k_max > seq.levels()) throw RangeError("K outside the stored levels");
  RecurrenceReport rep;
  std::vector<double> terms;
  double s = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    terms.push_back(std::ldexp(static_cast<double>(seq.alpha(k)), -k));
    s += terms.back();
    rep.partial_sums.push_back(s);
  }
  if (seq.is_geometric()) {
    const bool div = seq.theta() >= 1.0;
    rep.growth = div ? "divergent" : "bounded";
    rep.verdict = div ? "recurrent" : "transient";
    return rep;
  }
  rep.growth = "undetermined";
  rep.verdict = "undetermined";
  if (k_max < 2) return rep;
  double q_max = 0.0, q_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = terms.size() / 2; i + 1 < terms.size(); ++i) {
    q_max = std::max(q_max, terms[i + 1] / terms[i]);
    q_min = std::min(q_min, terms[i + 1] / terms[i]);
  }
  if (terms.size() == 2) q_max = q_min = terms[1] / terms[0];
  if (q_max < 1.0) {
    rep.growth = "bounded";
    rep.verdict = "transient";
    rep.tail_bound = terms.back() * q_max / (1.0 - q_max);
  } else if (q_min >= 1.0) {
    rep.growth = "divergent";
    rep.verdict = "recurrent";
  }
  return rep;
}

namespace {

// Per-thread scratch indexed by vertex, reset through the touched list.
struct Scratch {
  std::vector<long long> visits;
  std::vector<std::int64_t> lamps;
  std::vector<Vertex> touched;

  void prepare(std::size_t n) {
    if (visits.size() != n) {
      visits.assign(n, 0);
      lamps.assign(n, 0);
    }
    for (Vertex v : touched) {
      visits[static_cast<std::size_t>(v)] = 0;
      lamps[static_cast<std::size_t>(v)] = 0;
    }
    touched.clear();
  }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// Generator action v -> s . v, four entries per vertex in BubbleMove order.
// The inverse move is s ^ 1.
std::vector<Vertex> move_table(const SchreierGraph& g) {
  std::vector<Vertex> t(4 * g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto u = static_cast<Vertex>(v);
    t[4 * v] = g.a(u);
    t[4 * v + 1] = g.a_inv(u);
    t[4 * v + 2] = g.b(u);
    t[4 * v + 3] = g.b_inv(u);
  }
  return t;
}

void check_horizon(const SchreierGraph& g, long long n) {
  // every partial product X_i..X_j . o and every chain state stays within distance n
  if (n > g.boundary_distance())
    throw ResourceError("path length exceeds the truncation boundary distance; deepen L", n);
}

// Shared path driver. Step j draws (X_j, Z_2j, Z_2j+1) so prefixes of a stream
// agree for every horizon. x_j = X_1 .. X_j . o is the inverted orbit, recomputed
// from the stored moves (b fixes o, so b-steps repeat x_{j-1}); c_j = Y_j^-1 . o
// is the induced chain. `at(j, x_j, Q_{j-1}(x_j), |supp L_j|, c_j)` runs with L_j final.
template <class AtStep>
void drive_orbit(const std::vector<Vertex>& tab, std::size_t size, long long n, std::uint64_t seed,
                 std::uint64_t stream, Scratch& s, AtStep&& at) {
  PhiloxStream rng(seed, stream);
  s.prepare(size);
  long long nonzero = 0;
  auto add_lamp = [&](Vertex v, std::int64_t z) {
    auto& l = s.lamps[static_cast<std::size_t>(v)];
    nonzero -= l != 0;
    l += z;
    nonzero += l != 0;
  };
  auto visit = [&](Vertex v) {
    auto& q = s.visits[static_cast<std::size_t>(v)];
    if (q == 0) s.touched.push_back(v);
    return q++;
  };
  std::vector<std::uint8_t> moves(static_cast<std::size_t>(n) + 1);
  Vertex x = SchreierGraph::kRoot, c = SchreierGraph::kRoot;
  visit(x);
  const std::int64_t z_first = (rng() & 1u) ? 1 : -1;
  at(0, x, 0LL, nonzero, c);
  if (n > 0) add_lamp(x, z_first);
  for (long long j = 1; j <= n; ++j) {
    const auto m = static_cast<std::uint8_t>(rng.below(4));
    const std::int64_t z_even = (rng() & 1u) ? 1 : -1;
    const std::int64_t z_odd = (rng() & 1u) ? 1 : -1;
    moves[static_cast<std::size_t>(j)] = m;
    c = tab[4 * static_cast<std::size_t>(c) + (m ^ 1u)];
    if (m < 2) {
      Vertex v = tab[4 * static_cast<std::size_t>(SchreierGraph::kRoot) + m];
      for (long long i = j - 1; i >= 1; --i) v = tab[4 * static_cast<std::size_t>(v) + moves[i]];
      x = v;
    }
    const long long before = visit(x);
    add_lamp(x, z_even);
    at(j, x, before, nonzero, c);
    if (j < n) add_lamp(x, z_odd);
  }
}

}  // namespace

OrbitPath trace_orbit(const SchreierGraph& g, long long n, std::uint64_t seed, std::uint64_t stream) {
  if (n < 0) throw UsageError("negative path length");
  check_horizon(g, n);
  OrbitPath p;
  const auto dist = g.distances();
  const auto tab = move_table(g);
  Scratch& s = scratch();
  drive_orbit(tab, g.size(), n, seed, stream, s, [&](long long j, Vertex x, long long, long long, Vertex c) {
    if (j > 0 && x == SchreierGraph::kRoot && p.return_time < 0) p.return_time = j;
    if (dist[c] >= static_cast<int>(p.first_hit.size())) p.first_hit.push_back(j);
  });
  for (Vertex v : s.touched) {
    const auto i = static_cast<std::size_t>(v);
    if (s.visits[i] > 0) p.occupation.emplace_back(v, s.visits[i]);
    if (s.lamps[i] != 0) p.lamps.emplace_back(v, s.lamps[i]);
  }
  std::sort(p.occupation.begin(), p.occupation.end());
  std::sort(p.lamps.begin(), p.lamps.end());
  return p;
}

OrbitEnsemble wreath_walk(const SchreierGraph& g, const WreathWalkOptions& opts) {
  if (opts.grid.empty()) throw UsageError("wreath walk needs a time grid");
  for (std::size_t i = 0; i < opts.grid.size(); ++i)
    if (opts.grid[i] < 0 || (i && opts.grid[i] <= opts.grid[i - 1]))
      throw UsageError("wreath walk grid must be increasing and nonnegative");
  if (opts.samples == 0) throw UsageError("wreath walk needs samples");
  check_horizon(g, opts.grid.back());
  const std::size_t m = opts.grid.size();
  const auto tab = move_table(g);
  struct PerPath {
    std::vector<double> logsum, support, range;
    std::vector<char> alive;
  };
  std::vector<PerPath> paths(opts.samples);
  parallel_for(opts.samples, opts.policy, [&](std::size_t i) {
    PerPath& out = paths[i];
    out.logsum.resize(m);
    out.support.resize(m);
    out.range.resize(m);
    out.alive.resize(m);
    double logsum = 0.0;
    long long range = 0;
    bool returned = false;
    std::size_t next = 0;
    drive_orbit(tab, g.size(), opts.grid.back(), opts.seed, i, scratch(),
                [&](long long j, Vertex x, long long before, long long nonzero, Vertex) {
                  logsum += std::log1p(static_cast<double>(before) + 1.0) - std::log1p(static_cast<double>(before));
                  range += before == 0;
                  if (j > 0 && x == SchreierGraph::kRoot) returned = true;
                  while (next < m && opts.grid[next] == j) {
                    out.logsum[next] = logsum;
                    out.support[next] = static_cast<double>(nonzero);
                    out.range[next] = static_cast<double>(range);
                    out.alive[next] = !returned;
                    ++next;
                  }
                });
  });
  OrbitEnsemble ens;
  ens.samples = opts.samples;
  const double ns = static_cast<double>(opts.samples);
  for (std::size_t k = 0; k < m; ++k) {
    OrbitGridPoint pt;
    pt.n = opts.grid[k];
    double s1 = 0.0, s2 = 0.0, sup = 0.0, rng = 0.0;
    for (const auto& p : paths) {
      s1 += p.logsum[k];
      s2 += p.logsum[k] * p.logsum[k];
      sup += p.support[k];
      rng += p.range[k];
      pt.survivors += p.alive[k] != 0;
    }
    pt.mean_log_occupation = s1 / ns;
    const double var = ns > 1 ? std::max(0.0, (s2 - s1 * s1 / ns) / (ns - 1.0)) : 0.0;
    pt.se_log_occupation = std::sqrt(var / ns);
    pt.mean_lamp_support = sup / ns;
    pt.mean_range = rng / ns;
    ens.points.push_back(pt);
  }
  return ens;
}

std::size_t ball_volume(const SchreierGraph& g, int r) {
  if (r < 0) throw UsageError("negative radius");
  if (r > g.boundary_distance()) throw RangeError("ball radius beyond the truncation boundary");
  std::size_t c = 0;
  for (int d : g.distances()) c += d <= r;
  return c;
}

EntropyFloorReport entropy_lower_bound(const SchreierGraph& g, const OrbitEnsemble& ens) {
  if (ens.samples < 1000) throw UsageError("entropy lower bound needs at least 1000 samples");
  EntropyFloorReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const auto total = static_cast<double>(ens.samples);
  for (const auto& pt : ens.points) {
    if (pt.n < 2) continue;
    EntropyFloorRow row;
    row.n = pt.n;
    row.estimate = pt.mean_log_occupation;
    row.se = pt.se_log_occupation;
    row.p_hat = static_cast<double>(pt.survivors) / total;
    row.p_lower = pt.survivors == 0
                      ? 0.0
                      : boost::math::ibeta_inv(static_cast<double>(pt.survivors),
                                               total - static_cast<double>(pt.survivors) + 1.0, 0.05);
    const double nn = static_cast<double>(pt.n);
    row.floor = row.p_lower > 0.0 ? nn * row.p_lower * std::log1p(1.0 / row.p_lower) / 16.0 : 0.0;
    row.holds = row.estimate >= row.floor;
    row.ball = static_cast<double>(ball_volume(g, static_cast<int>(std::floor(std::sqrt(nn)))));
    row.ratio = row.estimate / (row.ball * std::log(nn));
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    rep.ok = rep.ok && row.holds;
    rep.rows.push_back(row);
  }
  rep.ratio_spread = rep.rows.empty() ? 1.0 : hi / lo;
  rep.ok = rep.ok && rep.ratio_spread <= 4.0;
  return rep;
}

HittingEstimate hitting_probability(const SchreierGraph& g, int r, ChainKind kind, std::size_t samples,
                                    std::uint64_t seed, const ExecutionPolicy& policy) {
  if (r < 1) throw UsageError("hitting radius must be >= 1");
  if (r > g.boundary_distance()) throw RangeError("level set beyond the truncation boundary");
  if (samples == 0) throw UsageError("hitting estimate needs samples");
  const auto dist = g.distances();
  std::vector<char> hit(samples, 0);
  parallel_for(samples, policy, [&](std::size_t i) {
    PhiloxStream rng(seed, i);
    Vertex x = SchreierGraph::kRoot;
    while (true) {
      Vertex y;
      if (kind == ChainKind::lazy) {
        y = induced_chain_step(g, x, static_cast<BubbleMove>(rng.below(4)));
      } else {
        Vertex opts[4];
        std::uint32_t c = 0;
        for (int s = 0; s < 4; ++s) {
          const Vertex w = induced_chain_step(g, x, static_cast<BubbleMove>(s));
          if (w != x) opts[c++] = w;
        }
        y = opts[rng.below(c)];
      }
      x = y;
      if (x == SchreierGraph::kRoot) return;
      if (dist[x] >= r) {
        hit[i] = 1;
        return;
      }
    }
  });
  HittingEstimate est;
  est.samples = samples;
  for (char h : hit) est.hits += h != 0;
  est.p = static_cast<double>(est.hits) / static_cast<double>(samples);
  est.se = std::sqrt(est.p * (1.0 - est.p) / static_cast<double>(samples));
  return est;
}

ReturnTailReport return_time_tail(const SchreierGraph& g, int k, int ell, std::vector<long long> grid,
                                  std::size_t samples, std::uint64_t seed, const ExecutionPolicy& policy) {
  const auto& seq = g.sequence();
  if (k < 1) throw RangeError("return-time tail needs k >= 1");
  check_level_index(seq, k, ell);
  if (grid.empty() || samples == 0) throw UsageError("return-time tail needs a grid and samples");
  std::sort(grid.begin(), grid.end());
  if (grid.front() < 0) throw UsageError("negative time in grid");
  const long long horizon = grid.back();
  std::vector<long long> t(samples, -1);
  parallel_for(samples, policy, [&](std::size_t i) {
    PhiloxStream rng(seed, i);
    Vertex x = SchreierGraph::kRoot;
    for (long long j = 1; j <= horizon; ++j) {
      x = induced_chain_step(g, x, static_cast<BubbleMove>(rng.below(4)));
      if (x == SchreierGraph::kRoot) {
        t[i] = j;
        return;
      }
      if (g.is_boundary(x)) throw ResourceError("induced chain reached the truncation boundary; deepen L", j);
    }
  });
  ReturnTailReport rep;
  rep.k = k;
  rep.ell = ell;
  rep.grid = grid;
  const double a = seq.alpha(k);
  rep.bound = std::ldexp(1.0, k) / (16.0 * (a + ell));
  rep.scale = a * a + static_cast<double>(ell) * ell;
  rep.hypothesis = seq.satisfies_ratio_condition();
  for (long long n : grid) {
    std::size_t alive = 0;
    for (long long ti : t) alive += ti < 0 || ti > n;
    const double p = static_cast<double>(alive) / static_cast<double>(samples);
    rep.tail.push_back(p);
    if (p >= rep.bound) rep.c_hat = std::max(rep.c_hat, static_cast<double>(n) / rep.scale);
  }
  return rep;
}

double phi_inverse(const std::vector<double>& volumes, double n) {
  auto gfun = [&](std::size_t r) {
    const double rr = static_cast<double>(r);
    return rr * rr * volumes[r] * std::log(rr);
  };
  if (volumes.size() < 4) throw RangeError("phi inverse needs volumes up to r = 3");
  if (n < gfun(2) || n > gfun(volumes.size() - 1)) throw RangeError("phi inverse outside the tabulated range");
  std::size_t lo = 2, hi = volumes.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (gfun(mid) <= n ? lo : hi) = mid;
  }
  const double a = gfun(lo), b = gfun(hi);
  return static_cast<double>(lo) + (b > a ? (n - a) / (b - a) : 0.0);
}

ExponentReport exponent_report(double theta, std::size_t max_vertices) {
  if (!(theta > 1.0)) throw InapplicableError("exponent report needs theta > 1");
  ExponentReport rep;
  rep.theta = theta;
  rep.beta_return = (theta + 1.0) / (3.0 * theta + 1.0);
  rep.log_correction = 2.0 * theta / (3.0 * theta + 1.0);
  rep.entropy_exponent = (theta + 1.0) / (2.0 * theta);

  int levels = 0;
  double total = 1.0;
  for (int k = 1; k <= 28; ++k) {
    const double alpha = std::round(std::exp2(theta * k));
    if (alpha > 1e8) break;
    total += std::ldexp(2.0 * alpha + 2.0, k - 1);
    if (total > static_cast<double>(max_vertices)) break;
    levels = k;
  }
  if (levels < 3) throw RangeError("vertex cap leaves fewer than three levels");
  SchreierGraph g(ScalingSequence::geometric(theta, levels));
  rep.levels = levels;
  rep.r_max = g.boundary_distance();
  rep.r_min = g.sequence().alpha(1);
  std::vector<double> vol(static_cast<std::size_t>(rep.r_max) + 1, 0.0);
  for (int d : g.distances())
    if (d <= rep.r_max) vol[static_cast<std::size_t>(d)] += 1.0;
  for (std::size_t r = 1; r < vol.size(); ++r) vol[r] += vol[r - 1];

  auto gfun = [&](double r) { return r * r * vol[static_cast<std::size_t>(r)] * std::log(r); };
  const double ln_lo = std::log(gfun(std::max(2, rep.r_min))), ln_hi = std::log(gfun(rep.r_max));
  const int points = 400;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < points; ++i) {
    const double x = ln_lo + (ln_hi - ln_lo) * i / (points - 1);
    const double n = std::clamp(std::exp(x), gfun(std::max(2, rep.r_min)), gfun(rep.r_max));
    const double phi = phi_inverse(vol, n);
    const double y = x - 2.0 * std::log(phi);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.fitted_slope = (points * sxy - sx * sy) / (points * sxx - sx * sx);
  rep.relative_error = std::abs(rep.fitted_slope - rep.beta_return) / rep.beta_return;
  return rep;
}

std::string ExponentReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["report"] = "exponents";
  j["theta"] = theta;
  j["beta_return"] = beta_return;
  j["log_correction"] = log_correction;
  j["entropy_exponent"] = entropy_exponent;
  j["numeric_phi"] = {{"levels", levels},
                      {"r_min", r_min},
                      {"r_max", r_max},
                      {"fitted_slope", fitted_slope},
                      {"relative_error", relative_error}};
  return j.dump(2) + "\n";
}

std::string adjacency_csv(const SchreierGraph& g) {
  std::ostringstream os;
  os << "vertex,level,kind,a_target,b_target\n";
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto x = static_cast<Vertex>(v);
    os << v << ',' << g.level(x) << ',' << (g.kind(x) == VertexKind::Branching ? "branching" : "bubble") << ','
       << g.a(x) << ',' << g.b(x) << '\n';
  }
  return os.str();
}

}  // namespace grwalk
