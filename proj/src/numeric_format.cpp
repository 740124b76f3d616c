#include "motrl/numeric_format.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "motrl/error.hpp"

namespace motrl {

std::string format_number(double value) {
  if (!std::isfinite(value)) {
    throw InputError("cannot format a non-finite number");
  }
  if (value == 0.0) {
    return "0";  // folds -0
  }
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) {
    throw InvariantError("to_chars failed");
  }
  return std::string(buf.data(), end);
}

}  // namespace motrl
