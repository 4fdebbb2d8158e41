#include "pwclock/prepare.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pwclock/optics.hpp"

namespace pwclock {

PureState ququart_state(const SourceConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  if (!std::isfinite(cfg.theta) || cfg.theta < 0.0 || cfg.theta > pi / 2.0) {
    throw std::invalid_argument("source theta must lie in [0, pi/2]");
  }
  if (!std::isfinite(cfg.phi) || cfg.phi < 0.0 || cfg.phi >= 2.0 * pi) {
    throw std::invalid_argument("source phi must lie in [0, 2*pi)");
  }
  CVec amps = CVec::zero(4);
  amps[0] = cx(std::cos(cfg.theta), 0.0);
  amps[3] = std::polar(std::sin(cfg.theta), cfg.phi);
  return PureState(amps);
}

PureState singlet_state() {
  constexpr double pi = std::numbers::pi;
  SourceConfig cfg;
  cfg.theta = pi / 4.0;
  cfg.phi = pi;
  cfg.singlet_mode = true;
  const PureState source = ququart_state(cfg);
  const OpticalUnitary arm1 = tensor_product(hwp(pi / 4.0), OpticalUnitary(CMat::identity(2)));
  return apply(arm1, source);
}

}  // namespace pwclock
