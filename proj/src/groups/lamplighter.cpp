#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "grwalk/measure.hpp"
#include "groups/families.hpp"

namespace grwalk::detail {
namespace {

// Z_m wr Z^d (m >= 2) and Z wr Z (m = 0, "Z lamps").
// (f, p)(f', p') = (f + tau_p f', p + p') with (tau_p f')(x) = f'(x - p).
class LamplighterGroup final : public Group {
 public:
  explicit LamplighterGroup(const GroupSpec& spec)
      : Group(spec),
        d_(spec.family == Family::WreathZOverZ ? 1 : spec.dim),
        m_(spec.family == Family::WreathZOverZ ? 0 : spec.lamp_order) {
    std::vector<GroupElement> gens;
    std::vector<std::string> names;
    for (int i = 0; i < d_; ++i) {
      for (int sign : {1, -1}) {
        GroupElement e = identity();
        e.mutable_code()[1 + i] = sign;
        gens.push_back(e);
        std::string base = d_ == 1 ? "t" : "t" + std::to_string(i + 1);
        names.push_back(sign > 0 ? base : base + "^-1");
      }
    }
    gens.push_back(lamp_element(1));
    names.push_back("s");
    gens.push_back(lamp_element(-1));
    names.push_back("s^-1");
    set_generators(std::move(gens), std::move(names));
  }

  int dim() const noexcept { return d_; }
  std::int64_t lamp_order() const noexcept override { return m_; }
  bool is_wreath() const noexcept override { return true; }

  GroupElement identity() const override {
    GroupElement::Code c(static_cast<std::size_t>(d_ + 1), 0);
    c[0] = tag();
    return GroupElement(std::move(c));
  }

  GroupElement lamp_element(std::int64_t value) const override {
    GroupElement e = identity();
    std::int64_t v = reduce(value);
    if (v != 0) {
      auto& c = e.mutable_code();
      for (int i = 0; i < d_; ++i) c.push_back(0);
      c.push_back(v);
    }
    return e;
  }

  std::vector<GroupElement> base_generators() const override {
    std::vector<GroupElement> out;
    for (int i = 0; i < d_; ++i) {
      for (int sign : {1, -1}) {
        GroupElement e = identity();
        e.mutable_code()[1 + i] = sign;
        out.push_back(e);
      }
    }
    return out;
  }

  std::string describe(const GroupElement& g) const override {
    auto c = g.code();
    std::ostringstream os;
    os << "(pos=(";
    for (int i = 0; i < d_; ++i) os << (i ? "," : "") << c[1 + i];
    os << "), lamps={";
    const std::size_t stride = static_cast<std::size_t>(d_ + 1);
    bool first = true;
    for (std::size_t at = static_cast<std::size_t>(d_ + 1); at < c.size(); at += stride) {
      os << (first ? "" : ", ");
      first = false;
      if (d_ > 1) os << "(";
      for (int i = 0; i < d_; ++i) os << (i ? "," : "") << c[at + i];
      if (d_ > 1) os << ")";
      os << ":" << c[at + d_];
    }
    os << "})";
    return os.str();
  }

  bool is_valid(const GroupElement& g) const override {
    auto c = g.code();
    const std::size_t stride = static_cast<std::size_t>(d_ + 1);
    if (g.tag() != tag() || c.size() < stride || (c.size() - stride) % stride != 0) return false;
    for (std::size_t at = stride; at < c.size(); at += stride) {
      std::int64_t v = c[at + d_];
      if (v == 0 || (m_ > 0 && (v < 0 || v >= m_))) return false;
      if (at > stride && !site_less(c, at - stride, at)) return false;
    }
    return true;
  }

  std::optional<std::int64_t> closed_form_length(const GroupElement& g) const override {
    if (d_ != 1) return std::nullopt;
    auto c = g.code();
    const std::int64_t p = c[1];
    std::int64_t lamp_cost = 0;
    std::int64_t lo = std::min<std::int64_t>(0, p);
    std::int64_t hi = std::max<std::int64_t>(0, p);
    for (std::size_t at = 2; at < c.size(); at += 2) {
      lo = std::min(lo, c[at]);
      hi = std::max(hi, c[at]);
      lamp_cost += lamp_cost_of(c[at + 1]);
    }
    return lamp_cost + travel(lo, hi, p);
  }

  std::int64_t lamp_cost_of(std::int64_t v) const {
    if (m_ == 0) return std::llabs(v);
    return std::min(v, m_ - v);
  }

  // Shortest path from 0 covering [lo, hi] and ending at p.
  static std::int64_t travel(std::int64_t lo, std::int64_t hi, std::int64_t p) {
    return (hi - lo) + std::min(-lo + (hi - p), hi + (p - lo));
  }

  std::int64_t reduce(std::int64_t v) const {
    if (m_ == 0) return v;
    v %= m_;
    return v < 0 ? v + m_ : v;
  }

  std::unique_ptr<Walker> make_walker(const StepMeasure& step) const override;

 protected:
  GroupElement multiply_impl(const GroupElement& a, const GroupElement& b) const override {
    GroupElement::Code out;
    multiply_into_impl(a, b, out);
    return GroupElement(std::move(out));
  }

  void multiply_into_impl(const GroupElement& a, const GroupElement& b, GroupElement::Code& out) const override {
    auto x = a.code();
    auto y = b.code();
    const std::size_t stride = static_cast<std::size_t>(d_ + 1);
    out.clear();
    out.reserve(x.size() + y.size());
    out.push_back(tag());
    for (int i = 0; i < d_; ++i) out.push_back(checked_add(x[1 + i], y[1 + i]));

    // merge f (sites as is) with tau_p f' (sites shifted by p); both sorted
    std::size_t i = stride, j = stride;
    std::int64_t shifted[8];
    auto load_shifted = [&](std::size_t at) {
      for (int t = 0; t < d_; ++t) shifted[t] = checked_add(y[at + t], x[1 + t]);
    };
    auto emit = [&](const std::int64_t* site, std::int64_t value) {
      if (value == 0) return;
      for (int t = 0; t < d_; ++t) out.push_back(site[t]);
      out.push_back(value);
    };
    if (j < y.size()) load_shifted(j);
    while (i < x.size() || j < y.size()) {
      int cmp;
      if (i >= x.size())
        cmp = 1;
      else if (j >= y.size())
        cmp = -1;
      else
        cmp = compare_site(&x[i], shifted);
      if (cmp < 0) {
        emit(&x[i], x[i + d_]);
        i += stride;
      } else if (cmp > 0) {
        emit(shifted, y[j + d_]);
        j += stride;
        if (j < y.size()) load_shifted(j);
      } else {
        std::int64_t v = m_ == 0 ? checked_add(x[i + d_], y[j + d_]) : reduce(x[i + d_] + y[j + d_]);
        emit(&x[i], v);
        i += stride;
        j += stride;
        if (j < y.size()) load_shifted(j);
      }
    }
  }

  // (f, p)^-1 = (-tau_{-p} f, -p)
  GroupElement inverse_impl(const GroupElement& a) const override {
    auto x = a.code();
    const std::size_t stride = static_cast<std::size_t>(d_ + 1);
    GroupElement::Code out;
    out.reserve(x.size());
    out.push_back(tag());
    for (int i = 0; i < d_; ++i) out.push_back(checked_neg(x[1 + i]));
    for (std::size_t at = stride; at < x.size(); at += stride) {
      for (int t = 0; t < d_; ++t) out.push_back(x[at + t] - x[1 + t]);
      out.push_back(m_ == 0 ? checked_neg(x[at + d_]) : reduce(-x[at + d_]));
    }
    return GroupElement(std::move(out));
  }

 private:
  int compare_site(const std::int64_t* s, const std::int64_t* t) const {
    for (int k = 0; k < d_; ++k) {
      if (s[k] < t[k]) return -1;
      if (s[k] > t[k]) return 1;
    }
    return 0;
  }

  bool site_less(std::span<const std::int64_t> c, std::size_t a, std::size_t b) const {
    return compare_site(&c[a], &c[b]) < 0;
  }

  int d_;
  std::int64_t m_;
};

// Dense window walker for d = 1: lamps in a growable array, lit range and
// lamp cost maintained incrementally so length() is O(1) amortised.
class LamplighterWalker final : public Walker {
 public:
  LamplighterWalker(const LamplighterGroup& g, const StepMeasure& step) : group_(g) {
    for (const auto& e : step.support()) {
      auto c = e.element.code();
      Move mv;
      mv.shift = c[1];
      for (std::size_t at = 2; at < c.size(); at += 2) mv.lamps.emplace_back(c[at], c[at + 1]);
      moves_.push_back(std::move(mv));
    }
    reset();
  }

  void reset() override {
    lamps_.assign(64, 0);
    origin_ = 32;
    pos_ = 0;
    lit_ = 0;
    cost_ = 0;
    lo_ = 1;
    hi_ = 0;
  }

  void step(std::size_t index) override {
    const Move& mv = moves_[index];
    for (const auto& [off, val] : mv.lamps) toggle(pos_ + off, val);
    pos_ += mv.shift;
  }

  std::int64_t length() const override {
    tighten();
    std::int64_t lo = std::min<std::int64_t>(0, pos_);
    std::int64_t hi = std::max<std::int64_t>(0, pos_);
    if (lit_ > 0) {
      lo = std::min(lo, lo_);
      hi = std::max(hi, hi_);
    }
    return cost_ + LamplighterGroup::travel(lo, hi, pos_);
  }

  GroupElement element() const override {
    GroupElement e = group_.identity();
    auto& c = e.mutable_code();
    c[1] = pos_;
    for (std::size_t i = 0; i < lamps_.size(); ++i) {
      if (lamps_[i] != 0) {
        c.push_back(static_cast<std::int64_t>(i) - origin_);
        c.push_back(lamps_[i]);
      }
    }
    return e;
  }

 private:
  struct Move {
    std::int64_t shift = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> lamps;
  };

  std::int64_t& slot(std::int64_t site) {
    std::int64_t idx = site + origin_;
    if (idx < 0) {
      std::int64_t grow = std::max<std::int64_t>(-idx, static_cast<std::int64_t>(lamps_.size()));
      lamps_.insert(lamps_.begin(), static_cast<std::size_t>(grow), 0);
      origin_ += grow;
      idx += grow;
    } else if (idx >= static_cast<std::int64_t>(lamps_.size())) {
      std::size_t want = std::max<std::size_t>(static_cast<std::size_t>(idx) + 1, lamps_.size() * 2);
      lamps_.resize(want, 0);
    }
    return lamps_[static_cast<std::size_t>(idx)];
  }

  void toggle(std::int64_t site, std::int64_t delta) {
    std::int64_t& v = slot(site);
    std::int64_t before = v;
    v = group_.lamp_order() == 0 ? v + delta : group_.reduce(v + delta);
    cost_ += group_.lamp_cost_of(v) - group_.lamp_cost_of(before);
    if (before == 0 && v != 0) {
      if (lit_ == 0) {
        lo_ = hi_ = site;
      } else {
        lo_ = std::min(lo_, site);
        hi_ = std::max(hi_, site);
      }
      ++lit_;
    } else if (before != 0 && v == 0) {
      --lit_;
    }
  }

  // lo_/hi_ may be stale after lamps switch off; shrink to the lit range.
  void tighten() const {
    if (lit_ == 0) return;
    while (lamps_[static_cast<std::size_t>(lo_ + origin_)] == 0) ++lo_;
    while (lamps_[static_cast<std::size_t>(hi_ + origin_)] == 0) --hi_;
  }

  const LamplighterGroup& group_;
  std::vector<Move> moves_;
  std::vector<std::int64_t> lamps_;
  std::int64_t origin_ = 0;
  std::int64_t pos_ = 0;
  std::int64_t lit_ = 0;
  std::int64_t cost_ = 0;
  mutable std::int64_t lo_ = 1;
  mutable std::int64_t hi_ = 0;
};

std::unique_ptr<Walker> LamplighterGroup::make_walker(const StepMeasure& step) const {
  if (d_ != 1) return Group::make_walker(step);
  return std::make_unique<LamplighterWalker>(*this, step);
}

}  // namespace

std::unique_ptr<Group> make_lamplighter(const GroupSpec& spec) {
  if (spec.family == Family::LamplighterOverZ && spec.dim > 8)
    throw UsageError("lamplighter lattice dimension above 8 is not supported");
  return std::make_unique<LamplighterGroup>(spec);
}

}  // namespace grwalk::detail

namespace grwalk {

LampState unpack_lamplighter(const Group& g, const GroupElement& e) {
  if (g.spec().family != Family::LamplighterOverZ && g.spec().family != Family::WreathZOverZ)
    throw UsageError("not a lamplighter group");
  const int d = g.spec().family == Family::WreathZOverZ ? 1 : g.spec().dim;
  auto c = e.code();
  LampState s;
  s.position.assign(c.begin() + 1, c.begin() + 1 + d);
  for (std::size_t at = static_cast<std::size_t>(d + 1); at < c.size(); at += static_cast<std::size_t>(d + 1))
    s.lamps.emplace_back(std::vector<std::int64_t>(c.begin() + static_cast<std::ptrdiff_t>(at),
                                                   c.begin() + static_cast<std::ptrdiff_t>(at) + d),
                         c[at + static_cast<std::size_t>(d)]);
  return s;
}

GroupElement pack_lamplighter(const Group& g, const LampState& s) {
  if (g.spec().family != Family::LamplighterOverZ && g.spec().family != Family::WreathZOverZ)
    throw UsageError("not a lamplighter group");
  const std::int64_t m = g.lamp_order();
  auto lamps = s.lamps;
  for (auto& [site, v] : lamps) {
    if (m > 0) v = ((v % m) + m) % m;
  }
  std::sort(lamps.begin(), lamps.end());
  GroupElement e = g.identity();
  auto& c = e.mutable_code();
  for (std::size_t i = 0; i < s.position.size(); ++i) c[1 + i] = s.position[i];
  for (std::size_t i = 0; i < lamps.size();) {
    std::size_t j = i;
    std::int64_t v = 0;
    while (j < lamps.size() && lamps[j].first == lamps[i].first) {
      v = m > 0 ? (v + lamps[j].second) % m : v + lamps[j].second;
      ++j;
    }
    if (v != 0) {
      for (auto x : lamps[i].first) c.push_back(x);
      c.push_back(v);
    }
    i = j;
  }
  return e;
}

}  // namespace grwalk
