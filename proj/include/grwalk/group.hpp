#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "grwalk/bubble_graph.hpp"

namespace grwalk {

enum class Family {
  ZPowD,             // Z^d, standard generators
  Heisenberg,        // integer Heisenberg group, generators x, y
  LamplighterOverZ,  // Z_m wr Z^d, generators t_i, s
  WreathZOverZ,      // Z wr Z, generators t, s
  BaumslagSolitar,   // BS(1,q), generators t, x
  BubbleWreath,      // Z wr_{M_a} Gamma_a, generators a, b, s
};

std::string to_string(Family f);

/// Which group and which generating set. Parameters not used by the family
/// are ignored (and left at their defaults by the parser).
struct GroupSpec {
  Family family = Family::ZPowD;
  int dim = 1;         // lattice dimension (ZPowD, LamplighterOverZ)
  int lamp_order = 2;  // LamplighterOverZ
  int q = 2;           // BaumslagSolitar
  std::optional<ScalingSequence> bubble;  // BubbleWreath

  static GroupSpec z(int d = 1);
  static GroupSpec heisenberg();
  static GroupSpec lamplighter(int d = 1, int lamp_order = 2);
  static GroupSpec wreath_z_over_z();
  static GroupSpec baumslag_solitar(int q);
  static GroupSpec bubble_wreath(ScalingSequence seq);

  /// Shorthands: "Z", "Z^3", "heisenberg", "Z2wrZ", "Z3wrZ^2", "ZwrZ",
  /// "BS(1,2)", "bubble:2,3,4", "bubble:theta=2,L=5".
  static GroupSpec parse(const std::string& text);

  /// Canonical text; parse(canonical_text()) reproduces the spec.
  std::string canonical_text() const;
  /// 64-bit FNV-1a digest of canonical_text().
  std::uint64_t digest() const;

  /// Throws UsageError when the invariants (d >= 1, m >= 2, q >= 2, bubble
  /// sequence present) fail.
  void validate() const;

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

/// Canonical form of a group element.
///
/// The code starts with the owning group's tag (derived from the spec
/// digest) followed by the family layout:
///   ZPowD          tag, x_1..x_d
///   Heisenberg     tag, x, y, z        with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y')
///   Lamplighter    tag, p_1..p_d, then per lit lamp (sorted by site): site_1..site_d, value
///   WreathZOverZ   tag, p, then per nonzero lamp (sorted): site, value
///   BaumslagSolitar tag, m, num, k     the affine map x -> q^m x + num/q^k, in lowest terms
///   BubbleWreath   tag, gamma(0)..gamma(V-1), then per nonzero lamp (sorted): vertex, value
/// Equal elements have equal codes.
class GroupElement {
 public:
  using Code = boost::container::small_vector<std::int64_t, 6>;

  GroupElement() = default;
  explicit GroupElement(Code code) : code_(std::move(code)) {}
  explicit GroupElement(std::span<const std::int64_t> code) : code_(code.begin(), code.end()) {}

  std::span<const std::int64_t> code() const noexcept { return {code_.data(), code_.size()}; }
  Code& mutable_code() noexcept { return code_; }
  std::int64_t tag() const { return code_.empty() ? 0 : code_[0]; }

  std::size_t hash() const noexcept;

  friend bool operator==(const GroupElement& a, const GroupElement& b) noexcept {
    return a.code_ == b.code_;
  }
  friend std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b) noexcept;

 private:
  Code code_;
};

/// Hash of a canonical code; GroupElement::hash() == hash_code(code()).
std::size_t hash_code(std::span<const std::int64_t> code) noexcept;

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept { return g.hash(); }
};

class StepMeasure;
class Walker;

/// Group arithmetic for one spec. Immutable after construction.
class Group {
 public:
  explicit Group(GroupSpec spec);
  virtual ~Group() = default;
  Group(const Group&) = delete;
  Group& operator=(const Group&) = delete;

  const GroupSpec& spec() const noexcept { return spec_; }
  std::int64_t tag() const noexcept { return tag_; }

  virtual GroupElement identity() const = 0;
  /// Throws UsageError for operands of another group.
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;
  /// multiply() writing into a caller-owned buffer (reused across calls).
  void multiply_into(const GroupElement& a, const GroupElement& b, GroupElement::Code& out) const;

  /// Symmetric closure of the declared generating set, identity removed,
  /// duplicates removed, in a fixed order.
  const std::vector<GroupElement>& generators() const noexcept { return generators_; }
  /// Names parallel to generators(), e.g. "t", "t^-1", "s".
  const std::vector<std::string>& generator_names() const noexcept { return generator_names_; }

  virtual std::string describe(const GroupElement& g) const = 0;
  /// Structural validity of a code for this group (tag, layout, canonical).
  virtual bool is_valid(const GroupElement& g) const = 0;

  /// Word length from a closed formula for the default generating set, when
  /// the family has one (Z^d, lamplighters over Z). Used where the BFS cache
  /// cannot reach (long sampled paths); always cross-checked against BFS in
  /// the tests.
  virtual std::optional<std::int64_t> closed_form_length(const GroupElement&) const {
    return std::nullopt;
  }

  /// Wreath-type families: the lamp-group element z placed at the base point
  /// with trivial base component.
  virtual bool is_wreath() const noexcept { return false; }
  virtual GroupElement lamp_element(std::int64_t value) const;
  /// Lamp group order (0 for Z lamps). Meaningful only for wreath families.
  virtual std::int64_t lamp_order() const noexcept { return 0; }
  /// Generators of the base group, embedded with trivial lamps.
  virtual std::vector<GroupElement> base_generators() const;

  /// Incremental path state for sampling. The default walker multiplies
  /// canonical forms; families with a closed-form length provide faster ones.
  virtual std::unique_ptr<Walker> make_walker(const StepMeasure& step) const;

 protected:
  virtual GroupElement multiply_impl(const GroupElement& a, const GroupElement& b) const = 0;
  virtual GroupElement inverse_impl(const GroupElement& a) const = 0;
  virtual void multiply_into_impl(const GroupElement& a, const GroupElement& b, GroupElement::Code& out) const;
  void set_generators(std::vector<GroupElement> gens, std::vector<std::string> names);
  void check_operand(const GroupElement& g) const;

 private:
  GroupSpec spec_;
  std::int64_t tag_;
  std::vector<GroupElement> generators_;
  std::vector<std::string> generator_names_;
};

std::shared_ptr<const Group> make_group(const GroupSpec& spec);

/// Multiply a word given as generator indices.
GroupElement evaluate_word(const Group& g, std::span<const int> word);

/// Incremental walk state used by the Monte Carlo sampler.
class Walker {
 public:
  virtual ~Walker() = default;
  virtual void reset() = 0;
  /// Right-multiply by support element `index` of the step measure.
  virtual void step(std::size_t index) = 0;
  /// Word length of the current position.
  virtual std::int64_t length() const = 0;
  virtual GroupElement element() const = 0;
};

/// Family-specific view of an element of Z_m wr Z^d or Z wr Z.
struct LampState {
  std::vector<std::int64_t> position;
  std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> lamps;
};
LampState unpack_lamplighter(const Group& g, const GroupElement& e);
GroupElement pack_lamplighter(const Group& g, const LampState& s);

/// Family-specific view of an element of the bubble wreath product.
struct BubbleState {
  std::vector<SchreierGraph::Vertex> action;  // gamma(x) for every vertex x
  std::vector<std::pair<SchreierGraph::Vertex, std::int64_t>> lamps;
};
BubbleState unpack_bubble(const Group& g, const GroupElement& e);
GroupElement pack_bubble(const Group& g, const BubbleState& s);
/// The Schreier graph underlying a BubbleWreath group.
const SchreierGraph& bubble_graph_of(const Group& g);

}  // namespace grwalk

template <>
struct std::hash<grwalk::GroupElement> {
  std::size_t operator()(const grwalk::GroupElement& g) const noexcept { return g.hash(); }
};
