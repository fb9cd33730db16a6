#pragma once

#include <string>

namespace spatsurv {

// Shortest round-trip decimal rendering of a double (via std::to_chars),
// so CSV output is deterministic and loss-free. NaN renders as "nan".
std::string format_double(double v);

}  // namespace spatsurv
