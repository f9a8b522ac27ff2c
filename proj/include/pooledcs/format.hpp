#pragma once

#include <string>

namespace pooledcs {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

}  // namespace pooledcs
