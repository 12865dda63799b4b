#include <algorithm>
#include <sstream>

#include "groups/families.hpp"

namespace grwalk::detail {
namespace {

// Z wr_{M_a} Gamma_a on the truncated bubble graph. gamma is stored as its
// action table; (f, g)(f', g') = (f + tau_g f', g g') with the lamp of f'
// at y moved to g(y), and (g g')(x) = g(g'(x)).
class BubbleWreathGroup final : public Group {
 public:
  explicit BubbleWreathGroup(const GroupSpec& spec)
      : Group(spec), graph_(std::make_shared<SchreierGraph>(*spec.bubble)), n_(graph_->size()) {
    set_generators({from_table(graph_->a_table()), from_table(graph_->a_inv_table()),
                    from_table(graph_->b_table()), from_table(graph_->b_inv_table()),
                    lamp_element(1), lamp_element(-1)},
                   {"a", "a^-1", "b", "b^-1", "s", "s^-1"});
  }

  const SchreierGraph& graph() const noexcept { return *graph_; }
  bool is_wreath() const noexcept override { return true; }
  std::int64_t lamp_order() const noexcept override { return 0; }

  GroupElement identity() const override {
    GroupElement::Code c;
    c.reserve(n_ + 1);
    c.push_back(tag());
    for (std::size_t v = 0; v < n_; ++v) c.push_back(static_cast<std::int64_t>(v));
    return GroupElement(std::move(c));
  }

  GroupElement lamp_element(std::int64_t value) const override {
    GroupElement e = identity();
    if (value != 0) {
      e.mutable_code().push_back(SchreierGraph::kRoot);
      e.mutable_code().push_back(value);
    }
    return e;
  }

  std::vector<GroupElement> base_generators() const override {
    return {from_table(graph_->a_table()), from_table(graph_->a_inv_table()),
            from_table(graph_->b_table()), from_table(graph_->b_inv_table())};
  }

  std::string describe(const GroupElement& g) const override {
    auto c = g.code();
    std::ostringstream os;
    os << "(moves={";
    bool first = true;
    for (std::size_t v = 0; v < n_; ++v) {
      if (c[1 + v] != static_cast<std::int64_t>(v)) {
        os << (first ? "" : ", ") << v << "->" << c[1 + v];
        first = false;
      }
    }
    os << "}, lamps={";
    first = true;
    for (std::size_t at = n_ + 1; at < c.size(); at += 2) {
      os << (first ? "" : ", ") << c[at] << ":" << c[at + 1];
      first = false;
    }
    os << "})";
    return os.str();
  }

  bool is_valid(const GroupElement& g) const override {
    auto c = g.code();
    if (g.tag() != tag() || c.size() < n_ + 1 || (c.size() - n_ - 1) % 2 != 0) return false;
    std::vector<char> seen(n_, 0);
    for (std::size_t v = 0; v < n_; ++v) {
      std::int64_t w = c[1 + v];
      if (w < 0 || w >= static_cast<std::int64_t>(n_) || seen[static_cast<std::size_t>(w)]) return false;
      seen[static_cast<std::size_t>(w)] = 1;
    }
    for (std::size_t at = n_ + 1; at < c.size(); at += 2) {
      if (c[at + 1] == 0 || c[at] < 0 || c[at] >= static_cast<std::int64_t>(n_)) return false;
      if (at > n_ + 1 && c[at - 2] >= c[at]) return false;
    }
    return true;
  }

 protected:
  GroupElement multiply_impl(const GroupElement& a, const GroupElement& b) const override {
    auto x = a.code();
    auto y = b.code();
    GroupElement::Code out;
    out.reserve(x.size() + (y.size() - n_ - 1));
    out.push_back(tag());
    for (std::size_t v = 0; v < n_; ++v) out.push_back(x[1 + static_cast<std::size_t>(y[1 + v])]);

    std::vector<std::pair<std::int64_t, std::int64_t>> lamps;
    for (std::size_t at = n_ + 1; at < x.size(); at += 2) lamps.emplace_back(x[at], x[at + 1]);
    for (std::size_t at = n_ + 1; at < y.size(); at += 2)
      lamps.emplace_back(x[1 + static_cast<std::size_t>(y[at])], y[at + 1]);
    append_lamps(out, lamps);
    return GroupElement(std::move(out));
  }

  // (f, g)^-1 = (-tau_{g^-1} f, g^-1)
  GroupElement inverse_impl(const GroupElement& a) const override {
    auto x = a.code();
    GroupElement::Code out(n_ + 1, 0);
    out[0] = tag();
    for (std::size_t v = 0; v < n_; ++v) out[1 + static_cast<std::size_t>(x[1 + v])] = static_cast<std::int64_t>(v);
    std::vector<std::pair<std::int64_t, std::int64_t>> lamps;
    for (std::size_t at = n_ + 1; at < x.size(); at += 2)
      lamps.emplace_back(out[1 + static_cast<std::size_t>(x[at])], checked_neg(x[at + 1]));
    append_lamps(out, lamps);
    return GroupElement(std::move(out));
  }

 private:
  GroupElement from_table(std::span<const SchreierGraph::Vertex> table) const {
    GroupElement::Code c;
    c.reserve(n_ + 1);
    c.push_back(tag());
    for (auto w : table) c.push_back(w);
    return GroupElement(std::move(c));
  }

  static void append_lamps(GroupElement::Code& out, std::vector<std::pair<std::int64_t, std::int64_t>>& lamps) {
    std::sort(lamps.begin(), lamps.end());
    for (std::size_t i = 0; i < lamps.size();) {
      std::size_t j = i;
      std::int64_t v = 0;
      while (j < lamps.size() && lamps[j].first == lamps[i].first) v = checked_add(v, lamps[j++].second);
      if (v != 0) {
        out.push_back(lamps[i].first);
        out.push_back(v);
      }
      i = j;
    }
  }

  std::shared_ptr<SchreierGraph> graph_;
  std::size_t n_;
};

}  // namespace

std::unique_ptr<Group> make_bubble_wreath(const GroupSpec& spec) {
  return std::make_unique<BubbleWreathGroup>(spec);
}

const SchreierGraph* bubble_graph_ptr(const Group& g) {
  auto* bw = dynamic_cast<const BubbleWreathGroup*>(&g);
  return bw ? &bw->graph() : nullptr;
}

}  // namespace grwalk::detail

namespace grwalk {

const SchreierGraph& bubble_graph_of(const Group& g) {
  const SchreierGraph* p = detail::bubble_graph_ptr(g);
  if (!p) throw UsageError("not a bubble wreath group");
  return *p;
}

BubbleState unpack_bubble(const Group& g, const GroupElement& e) {
  const std::size_t n = bubble_graph_of(g).size();
  auto c = e.code();
  BubbleState s;
  s.action.reserve(n);
  for (std::size_t v = 0; v < n; ++v) s.action.push_back(static_cast<SchreierGraph::Vertex>(c[1 + v]));
  for (std::size_t at = n + 1; at < c.size(); at += 2)
    s.lamps.emplace_back(static_cast<SchreierGraph::Vertex>(c[at]), c[at + 1]);
  return s;
}

GroupElement pack_bubble(const Group& g, const BubbleState& s) {
  const std::size_t n = bubble_graph_of(g).size();
  if (s.action.size() != n) throw UsageError("action table size does not match the bubble graph");
  GroupElement::Code c;
  c.push_back(g.tag());
  for (auto w : s.action) c.push_back(w);
  auto lamps = s.lamps;
  std::sort(lamps.begin(), lamps.end());
  for (std::size_t i = 0; i < lamps.size();) {
    std::size_t j = i;
    std::int64_t v = 0;
    while (j < lamps.size() && lamps[j].first == lamps[i].first) v = detail::checked_add(v, lamps[j++].second);
    if (v != 0) {
      c.push_back(lamps[i].first);
      c.push_back(v);
    }
    i = j;
  }
  GroupElement e(std::move(c));
  if (!g.is_valid(e)) throw UsageError("bubble state is not a valid element");
  return e;
}

}  // namespace grwalk
