#include "teamrules/common.hpp"

#include <cmath>
#include <numbers>

namespace teamrules {

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace teamrules
