#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace grwalk {

/// Bubble lengths alpha_1..alpha_L of a bubble graph.
class ScalingSequence {
 public:
  /// alpha_k taken verbatim; every entry must be >= 2.
  static ScalingSequence explicit_list(std::vector<int> alphas);
  /// alpha_k = round(2^(theta k)) for k = 1..levels; theta > 1.
  static ScalingSequence geometric(double theta, int levels);

  int levels() const noexcept { return static_cast<int>(alphas_.size()); }
  /// 1-based, as in alpha_1 .. alpha_L.
  int alpha(int k) const;
  std::span<const int> values() const noexcept { return alphas_; }

  bool is_geometric() const noexcept { return geometric_; }
  double theta() const noexcept { return theta_; }

  /// min_k alpha_{k+1}/alpha_k over the stored levels (+inf for L = 1).
  double min_ratio() const;
  /// The growth condition inf alpha_{k+1}/alpha_k > 2 used by the entropy
  /// lower bound, evaluated on the stored levels.
  bool satisfies_ratio_condition() const { return min_ratio() > 2.0; }

  /// A copy keeping only the first `levels` entries (geometric tag kept).
  ScalingSequence truncated(int levels) const;
  /// Smallest prefix length L with sum_{j<=L}(alpha_j + 1) > distance.
  /// Throws RangeError if the stored sequence is too short.
  int levels_for_distance(long long distance) const;

  std::string describe() const;

  friend bool operator==(const ScalingSequence&, const ScalingSequence&) = default;

 private:
  std::vector<int> alphas_;
  bool geometric_ = false;
  double theta_ = 0.0;
};

enum class VertexKind : std::uint8_t { Bubble, Branching };

/// The truncated bubble graph M_a with the actions of a and b.
///
/// Levels 1..L of bubbles are built. Tree vertices of levels 1..L-1 are
/// blown up to branching 3-cycles. The far ends of level-L bubbles are
/// ordinary bubble vertices (they carry a b-self-loop); they form the
/// truncation boundary. Every action table is a permutation of the
/// vertex set, so Gamma_a elements can be stored as action tables.
///
/// Orientation: on each bubble, a runs from the parent-side attachment along
/// the first arc to the child-side attachment and back along the second arc.
/// On a branching cycle, b runs parent-side -> first child -> second child.
class SchreierGraph {
 public:
  using Vertex = std::int32_t;
  static constexpr Vertex kRoot = 0;

  explicit SchreierGraph(ScalingSequence seq);

  const ScalingSequence& sequence() const noexcept { return seq_; }
  int truncation_level() const noexcept { return seq_.levels(); }
  std::size_t size() const noexcept { return a_.size(); }

  Vertex a(Vertex v) const { return a_[v]; }
  Vertex a_inv(Vertex v) const { return a_inv_[v]; }
  Vertex b(Vertex v) const { return b_[v]; }
  Vertex b_inv(Vertex v) const { return b_inv_[v]; }

  std::span<const Vertex> a_table() const noexcept { return a_; }
  std::span<const Vertex> a_inv_table() const noexcept { return a_inv_; }
  std::span<const Vertex> b_table() const noexcept { return b_; }
  std::span<const Vertex> b_inv_table() const noexcept { return b_inv_; }

  /// Level k of the bubble carrying v (every vertex lies on one bubble).
  int level(Vertex v) const { return level_[v]; }
  VertexKind kind(Vertex v) const { return kind_[v]; }
  /// Far end of a level-L bubble.
  bool is_boundary(Vertex v) const { return boundary_[v] != 0; }

  /// Graph distance from the root (undirected, self-loops ignored).
  std::span<const int> distances() const noexcept { return dist_; }
  int distance(Vertex v) const { return dist_[v]; }
  /// Distance from the root to the nearest boundary vertex.
  int boundary_distance() const noexcept { return boundary_distance_; }

  /// Undirected edges {v, a v} (bubble edges) and {v, b v} with b v != v
  /// (branching-cycle edges).
  struct Edge {
    Vertex u;
    Vertex v;
    bool branching;
  };
  std::vector<Edge> edges() const;

  /// Count of a-edges belonging to bubbles of level k (2^(k-1) * 2 alpha_k).
  std::size_t bubble_edge_count(int k) const;
  std::size_t branching_cycle_count() const;

 private:
  Vertex add_vertex(int level, VertexKind kind);

  ScalingSequence seq_;
  std::vector<Vertex> a_, a_inv_, b_, b_inv_;
  std::vector<int> level_;
  std::vector<VertexKind> kind_;
  std::vector<std::uint8_t> boundary_;
  std::vector<int> dist_;
  int boundary_distance_ = 0;
};

SchreierGraph build_graph(const ScalingSequence& seq);

}  // namespace grwalk
