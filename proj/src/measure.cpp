#include "grwalk/measure.hpp"

#include <algorithm>
#include <cmath>

#include "grwalk/errors.hpp"

namespace grwalk {

StepMeasure::StepMeasure(std::shared_ptr<const Group> group, std::vector<MassEntry> entries)
    : group_(std::move(group)) {
  if (!group_) throw UsageError("step measure needs a group");
  for (const auto& e : entries) {
    if (e.element.tag() != group_->tag()) throw UsageError("step measure element from another group");
    if (!(e.mass > 0.0) || !std::isfinite(e.mass)) throw UsageError("step measure masses must be positive");
  }
  std::sort(entries.begin(), entries.end(),
            [](const MassEntry& a, const MassEntry& b) { return a.element < b.element; });
  for (auto& e : entries) {
    if (!entries_.empty() && entries_.back().element == e.element)
      entries_.back().mass += e.mass;
    else
      entries_.push_back(std::move(e));
  }
  if (entries_.empty()) throw UsageError("step measure has empty support");
  double total = 0.0;
  for (const auto& e : entries_) total += e.mass;
  if (std::abs(total - 1.0) > 1e-12) throw UsageError("step measure masses do not sum to 1");

  symmetric_ = true;
  for (const auto& e : entries_) {
    if (std::abs(mass(group_->inverse(e.element)) - e.mass) > 1e-14) {
      symmetric_ = false;
      break;
    }
  }
}

double StepMeasure::mass(const GroupElement& g) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), g,
                             [](const MassEntry& e, const GroupElement& x) { return e.element < x; });
  return it != entries_.end() && it->element == g ? it->mass : 0.0;
}

StepMeasure uniform_measure(std::shared_ptr<const Group> group) {
  const auto& gens = group->generators();
  if (gens.empty()) throw UsageError("group has no generators");
  std::vector<MassEntry> entries;
  for (const auto& g : gens) entries.push_back({g, 1.0 / static_cast<double>(gens.size())});
  return StepMeasure(std::move(group), std::move(entries));
}

StepMeasure dirac_measure(std::shared_ptr<const Group> group, const GroupElement& at) {
  return StepMeasure(std::move(group), {{at, 1.0}});
}

StepMeasure lazy_measure(const StepMeasure& mu, double hold) {
  if (!(hold >= 0.0 && hold < 1.0)) throw UsageError("holding probability must lie in [0, 1)");
  std::vector<MassEntry> entries;
  for (const auto& e : mu.support()) entries.push_back({e.element, (1.0 - hold) * e.mass});
  if (hold > 0.0) entries.push_back({mu.group().identity(), hold});
  return StepMeasure(mu.group_ptr(), std::move(entries));
}

StepMeasure sws_measure(const LampMeasure& eta, const StepMeasure& nu) {
  const Group& g = nu.group();
  if (!g.is_wreath()) throw UsageError("switch-walk-switch measure needs a wreath-type group");
  if (!nu.symmetric()) throw UsageError("base measure must be symmetric");
  const std::int64_t m = g.lamp_order();
  auto reduce = [m](std::int64_t v) { return m > 0 ? ((v % m) + m) % m : v; };
  double total = 0.0;
  for (const auto& [v, p] : eta) {
    if (!(p > 0.0)) throw UsageError("lamp measure masses must be positive");
    total += p;
    double mirror = 0.0;
    for (const auto& [w, q] : eta)
      if (reduce(w) == reduce(-v)) mirror += q;
    double self = 0.0;
    for (const auto& [w, q] : eta)
      if (reduce(w) == reduce(v)) self += q;
    if (std::abs(mirror - self) > 1e-14) throw UsageError("lamp measure must be symmetric");
  }
  if (std::abs(total - 1.0) > 1e-12) throw UsageError("lamp measure masses do not sum to 1");

  std::vector<MassEntry> entries;
  for (const auto& [z1, p1] : eta) {
    GroupElement left = g.lamp_element(z1);
    for (const auto& e : nu.support()) {
      GroupElement mid = g.multiply(left, e.element);
      for (const auto& [z2, p2] : eta)
        entries.push_back({g.multiply(mid, g.lamp_element(z2)), p1 * e.mass * p2});
    }
  }
  return StepMeasure(nu.group_ptr(), std::move(entries));
}

LampMeasure default_lamp_measure(const Group& wreath) {
  if (!wreath.is_wreath()) throw UsageError("lamp measure needs a wreath-type group");
  const std::int64_t m = wreath.lamp_order();
  if (m == 0) return {{-1, 0.5}, {1, 0.5}};
  LampMeasure out;
  for (std::int64_t v = 0; v < m; ++v) out.emplace_back(v, 1.0 / static_cast<double>(m));
  return out;
}

StepMeasure base_uniform_measure(std::shared_ptr<const Group> wreath) {
  auto gens = wreath->base_generators();
  std::vector<MassEntry> entries;
  for (const auto& g : gens) entries.push_back({g, 1.0 / static_cast<double>(gens.size())});
  return StepMeasure(std::move(wreath), std::move(entries));
}

}  // namespace grwalk
