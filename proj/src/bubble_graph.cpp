#include "grwalk/bubble_graph.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "grwalk/errors.hpp"

namespace grwalk {

ScalingSequence ScalingSequence::explicit_list(std::vector<int> alphas) {
  if (alphas.empty()) throw UsageError("scaling sequence must have at least one level");
  for (int a : alphas)
    if (a < 2) throw UsageError("scaling sequence entries must be >= 2");
  ScalingSequence s;
  s.alphas_ = std::move(alphas);
  return s;
}

ScalingSequence ScalingSequence::geometric(double theta, int levels) {
  if (!(theta > 1.0)) throw UsageError("geometric scaling sequence requires theta > 1");
  if (levels < 1) throw UsageError("scaling sequence must have at least one level");
  ScalingSequence s;
  for (int k = 1; k <= levels; ++k) {
    double v = std::round(std::exp2(theta * k));
    if (v > 1e8) throw RangeError("geometric scaling sequence entry too large");
    s.alphas_.push_back(static_cast<int>(v));
  }
  s.geometric_ = true;
  s.theta_ = theta;
  return s;
}

int ScalingSequence::alpha(int k) const {
  if (k < 1 || k > levels()) throw RangeError("scaling sequence index out of range");
  return alphas_[static_cast<std::size_t>(k - 1)];
}

double ScalingSequence::min_ratio() const {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < alphas_.size(); ++i)
    r = std::min(r, static_cast<double>(alphas_[i]) / alphas_[i - 1]);
  return r;
}

ScalingSequence ScalingSequence::truncated(int levels) const {
  if (levels < 1 || levels > this->levels()) throw RangeError("truncation outside stored levels");
  ScalingSequence s = *this;
  s.alphas_.resize(static_cast<std::size_t>(levels));
  return s;
}

int ScalingSequence::levels_for_distance(long long distance) const {
  long long sum = 0;
  for (int k = 1; k <= levels(); ++k) {
    sum += alphas_[static_cast<std::size_t>(k - 1)] + 1;
    if (sum > distance) return k;
  }
  throw RangeError("scaling sequence too short for distance " + std::to_string(distance));
}

std::string ScalingSequence::describe() const {
  std::ostringstream os;
  if (geometric_) os << "geometric(theta=" << theta_ << ") ";
  os << "(";
  for (std::size_t i = 0; i < alphas_.size(); ++i) os << (i ? "," : "") << alphas_[i];
  os << ")";
  return os.str();
}

SchreierGraph::Vertex SchreierGraph::add_vertex(int level, VertexKind kind) {
  const auto v = static_cast<Vertex>(a_.size());
  a_.push_back(v);
  b_.push_back(v);
  level_.push_back(level);
  kind_.push_back(kind);
  boundary_.push_back(0);
  return v;
}

SchreierGraph::SchreierGraph(ScalingSequence seq) : seq_(std::move(seq)) {
  const int L = seq_.levels();
  if (L < 1) throw UsageError("bubble graph needs at least one level");
  long long total = 1;
  for (int k = 1; k <= L; ++k) total += (1LL << (k - 1)) * (2LL * seq_.alpha(k) + 2);
  if (L > 28 || total > 50'000'000) throw ResourceError("bubble graph too large", 0);

  // Each pending bubble is identified by its top vertex (already created).
  std::vector<Vertex> tops{add_vertex(1, VertexKind::Bubble)};  // o
  for (int k = 1; k <= L; ++k) {
    const int alpha = seq_.alpha(k);
    std::vector<Vertex> next_tops;
    for (Vertex top : tops) {
      // arc 1: top -> x1 .. x_{alpha-1} -> bottom; arc 2: bottom -> y1 .. -> top
      Vertex prev = top;
      for (int i = 1; i < alpha; ++i) {
        Vertex x = add_vertex(k, VertexKind::Bubble);
        a_[prev] = x;
        prev = x;
      }
      Vertex bottom = add_vertex(k, k < L ? VertexKind::Branching : VertexKind::Bubble);
      a_[prev] = bottom;
      prev = bottom;
      for (int i = 1; i < alpha; ++i) {
        Vertex y = add_vertex(k, VertexKind::Bubble);
        a_[prev] = y;
        prev = y;
      }
      a_[prev] = top;

      if (k < L) {
        Vertex c1 = add_vertex(k + 1, VertexKind::Branching);
        Vertex c2 = add_vertex(k + 1, VertexKind::Branching);
        b_[bottom] = c1;
        b_[c1] = c2;
        b_[c2] = bottom;
        next_tops.push_back(c1);
        next_tops.push_back(c2);
      } else {
        boundary_[bottom] = 1;
      }
    }
    tops = std::move(next_tops);
  }

  const std::size_t n = a_.size();
  a_inv_.assign(n, 0);
  b_inv_.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    a_inv_[static_cast<std::size_t>(a_[v])] = static_cast<Vertex>(v);
    b_inv_[static_cast<std::size_t>(b_[v])] = static_cast<Vertex>(v);
  }

  dist_.assign(n, -1);
  std::deque<Vertex> queue{kRoot};
  dist_[kRoot] = 0;
  boundary_distance_ = std::numeric_limits<int>::max();
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    if (boundary_[v]) boundary_distance_ = std::min(boundary_distance_, dist_[v]);
    for (Vertex w : {a_[v], a_inv_[v], b_[v], b_inv_[v]}) {
      if (dist_[w] < 0) {
        dist_[w] = dist_[v] + 1;
        queue.push_back(w);
      }
    }
  }
}

std::vector<SchreierGraph::Edge> SchreierGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t v = 0; v < a_.size(); ++v) {
    out.push_back({static_cast<Vertex>(v), a_[v], false});
    if (b_[v] != static_cast<Vertex>(v)) out.push_back({static_cast<Vertex>(v), b_[v], true});
  }
  return out;
}

std::size_t SchreierGraph::bubble_edge_count(int k) const {
  std::size_t c = 0;
  for (int l : level_) c += l == k;
  return c;
}

std::size_t SchreierGraph::branching_cycle_count() const {
  std::size_t c = 0;
  for (std::size_t v = 0; v < b_.size(); ++v) c += b_[v] != static_cast<Vertex>(v);
  return c / 3;
}

SchreierGraph build_graph(const ScalingSequence& seq) { return SchreierGraph(seq); }

}  // namespace grwalk
