#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "grwalk/group.hpp"

namespace grwalk {

struct MassEntry {
  GroupElement element;
  double mass;
};

/// Finitely supported probability measure on a group.
///
/// Support entries are merged and sorted by canonical form. Masses must be
/// positive and sum to 1 within 1e-12. `symmetric()` reports whether
/// mu(g) = mu(g^-1) holds on the whole support (checked at construction).
class StepMeasure {
 public:
  StepMeasure(std::shared_ptr<const Group> group, std::vector<MassEntry> entries);

  const Group& group() const noexcept { return *group_; }
  const std::shared_ptr<const Group>& group_ptr() const noexcept { return group_; }
  std::span<const MassEntry> support() const noexcept { return entries_; }
  bool symmetric() const noexcept { return symmetric_; }
  /// 0 outside the support.
  double mass(const GroupElement& g) const;

 private:
  std::shared_ptr<const Group> group_;
  std::vector<MassEntry> entries_;
  bool symmetric_ = false;
};

/// Uniform measure on the symmetric generating set.
StepMeasure uniform_measure(std::shared_ptr<const Group> group);
StepMeasure dirac_measure(std::shared_ptr<const Group> group, const GroupElement& at);
/// (1 - hold) * mu + hold * delta_id.
StepMeasure lazy_measure(const StepMeasure& mu, double hold);

/// Measure on the lamp group (Z or Z_m), by lamp value.
using LampMeasure = std::vector<std::pair<std::int64_t, double>>;

/// The switch-walk-switch measure eta * nu * eta on a wreath-type group.
/// `nu` lives on the wreath group with trivial lamps (the embedded base
/// measure). Throws UsageError on non-wreath groups or asymmetric inputs.
StepMeasure sws_measure(const LampMeasure& eta, const StepMeasure& nu);

/// eta(+1) = eta(-1) = 1/2 on Z lamps; uniform on Z_m lamps.
LampMeasure default_lamp_measure(const Group& wreath);
/// Uniform measure on the base generators, embedded with trivial lamps.
StepMeasure base_uniform_measure(std::shared_ptr<const Group> wreath);

}  // namespace grwalk
