#pragma once

#include <string>

namespace grwalk {

/// Shortest round-trip decimal form, '.' separator, independent of the
/// locale. Non-finite values print as nan, inf, -inf.
std::string format_real(double x);

}  // namespace grwalk
