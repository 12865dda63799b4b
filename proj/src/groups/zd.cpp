#include <cstdlib>
#include <sstream>

#include "grwalk/measure.hpp"
#include "groups/families.hpp"

namespace grwalk::detail {
namespace {

class ZdGroup final : public Group {
 public:
  explicit ZdGroup(const GroupSpec& spec) : Group(spec), d_(spec.dim) {
    std::vector<GroupElement> gens;
    std::vector<std::string> names;
    for (int i = 0; i < d_; ++i) {
      for (int sign : {1, -1}) {
        GroupElement e = identity();
        e.mutable_code()[1 + i] = sign;
        gens.push_back(e);
        std::string base = d_ == 1 ? "e" : "e" + std::to_string(i + 1);
        names.push_back(sign > 0 ? base : base + "^-1");
      }
    }
    set_generators(std::move(gens), std::move(names));
  }

  GroupElement identity() const override {
    GroupElement::Code c(static_cast<std::size_t>(d_ + 1), 0);
    c[0] = tag();
    return GroupElement(std::move(c));
  }

  std::string describe(const GroupElement& g) const override {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < d_; ++i) os << (i ? "," : "") << g.code()[1 + i];
    os << ")";
    return os.str();
  }

  bool is_valid(const GroupElement& g) const override {
    return g.tag() == tag() && g.code().size() == static_cast<std::size_t>(d_ + 1);
  }

  std::optional<std::int64_t> closed_form_length(const GroupElement& g) const override {
    std::int64_t s = 0;
    for (int i = 0; i < d_; ++i) s += std::llabs(g.code()[1 + i]);
    return s;
  }

  std::unique_ptr<Walker> make_walker(const StepMeasure& step) const override;

 protected:
  GroupElement multiply_impl(const GroupElement& a, const GroupElement& b) const override {
    GroupElement r = a;
    auto& c = r.mutable_code();
    for (int i = 1; i <= d_; ++i) c[i] = checked_add(c[i], b.code()[i]);
    return r;
  }

  void multiply_into_impl(const GroupElement& a, const GroupElement& b, GroupElement::Code& out) const override {
    out.assign(a.code().begin(), a.code().end());
    for (int i = 1; i <= d_; ++i) out[i] = checked_add(out[i], b.code()[i]);
  }

  GroupElement inverse_impl(const GroupElement& a) const override {
    GroupElement r = a;
    auto& c = r.mutable_code();
    for (int i = 1; i <= d_; ++i) c[i] = checked_neg(c[i]);
    return r;
  }

 private:
  int d_;
};

class ZdWalker final : public Walker {
 public:
  ZdWalker(const ZdGroup& g, const StepMeasure& step) : group_(g) {
    for (const auto& e : step.support()) {
      auto c = e.element.code();
      steps_.emplace_back(c.begin() + 1, c.end());
    }
    pos_.assign(steps_.empty() ? 0 : steps_[0].size(), 0);
  }
  void reset() override { std::fill(pos_.begin(), pos_.end(), 0); }
  void step(std::size_t index) override {
    const auto& s = steps_[index];
    for (std::size_t i = 0; i < s.size(); ++i) pos_[i] += s[i];
  }
  std::int64_t length() const override {
    std::int64_t s = 0;
    for (auto v : pos_) s += std::llabs(v);
    return s;
  }
  GroupElement element() const override {
    GroupElement e = group_.identity();
    for (std::size_t i = 0; i < pos_.size(); ++i) e.mutable_code()[1 + i] = pos_[i];
    return e;
  }

 private:
  const ZdGroup& group_;
  std::vector<std::vector<std::int64_t>> steps_;
  std::vector<std::int64_t> pos_;
};

std::unique_ptr<Walker> ZdGroup::make_walker(const StepMeasure& step) const {
  return std::make_unique<ZdWalker>(*this, step);
}

}  // namespace

std::unique_ptr<Group> make_zd(const GroupSpec& spec) { return std::make_unique<ZdGroup>(spec); }

}  // namespace grwalk::detail
