#pragma once

#include <string>

namespace motrl {

// Shortest decimal text that parses back to exactly `value` ("10", "5.5",
// "0.1"). Integral values carry no fractional part.
std::string format_number(double value);

}  // namespace motrl
