#pragma once

#include <cstdint>
#include <memory>

#include "grwalk/errors.hpp"
#include "grwalk/group.hpp"

namespace grwalk::detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw RangeError("integer overflow in group arithmetic");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw RangeError("integer overflow in group arithmetic");
  return r;
}

inline std::int64_t checked_neg(std::int64_t a) { return checked_mul(a, -1); }

inline std::int64_t checked_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

std::unique_ptr<Group> make_zd(const GroupSpec& spec);
std::unique_ptr<Group> make_heisenberg(const GroupSpec& spec);
std::unique_ptr<Group> make_lamplighter(const GroupSpec& spec);
std::unique_ptr<Group> make_baumslag_solitar(const GroupSpec& spec);
std::unique_ptr<Group> make_bubble_wreath(const GroupSpec& spec);
/// nullptr unless g is a bubble wreath group.
const SchreierGraph* bubble_graph_ptr(const Group& g);

}  // namespace grwalk::detail
