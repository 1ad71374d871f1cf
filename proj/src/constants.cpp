#include "mqed/constants.hpp"
#include "mqed/errors.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace mqed {

double thz_to_rad_per_s(double f_thz) {
  return 2.0 * constants::pi * f_thz * constants::THz;
}

double parse_frequency(const std::string &text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception &) {
    throw InputError("frequency '" + text + "': not a number");
  }
  std::string suffix = text.substr(used);
  while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front())))
    suffix.erase(suffix.begin());
  if (!std::isfinite(value) || value <= 0.0)
    throw InputError("frequency '" + text + "': must be positive and finite");
  if (suffix == "THz")
    return thz_to_rad_per_s(value);
  if (suffix == "rad/s")
    return value;
  throw InputError("frequency '" + text +
                   "': explicit unit suffix required (THz or rad/s)");
}

} // namespace mqed
