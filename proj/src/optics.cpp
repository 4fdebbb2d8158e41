#include "pwclock/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pwclock {

OpticalUnitary retarder_unitary(const Retarder& r) {
  if (!std::isfinite(r.delta) || !std::isfinite(r.axis))
    throw std::invalid_argument("retarder_unitary: delta and axis must be finite");
  const double c = std::cos(r.axis);
  const double s = std::sin(r.axis);
  const cx em{std::cos(r.delta / 2.0), -std::sin(r.delta / 2.0)};  // e^{-i delta/2}
  const cx ep = std::conj(em);
  // R(axis) diag(em, ep) R(-axis), written out
  CMat u = CMat::zero(2);
  u.at(0, 0) = em * c * c + ep * s * s;
  u.at(0, 1) = (em - ep) * c * s;
  u.at(1, 0) = (em - ep) * c * s;
  u.at(1, 1) = em * s * s + ep * c * c;
  return OpticalUnitary(u);
}

OpticalUnitary hwp(double axis) { return retarder_unitary({std::numbers::pi, axis}); }

OpticalUnitary qwp(double axis) { return retarder_unitary({std::numbers::pi / 2.0, axis}); }

OpticalUnitary phase_plate(double phi) {
  CMat u = CMat::zero(2);
  u.at(0, 0) = 1.0;
  u.at(1, 1) = cx{std::cos(phi), std::sin(phi)};
  return OpticalUnitary(u);
}

CMat clock_hamiltonian_matrix(const ClockHamiltonian& h) {
  if (!(h.omega > 0.0)) throw std::invalid_argument("ClockHamiltonian: omega must be > 0");
  CMat m = CMat::zero(2);
  m.at(0, 1) = h.omega / 2.0;
  m.at(1, 0) = h.omega / 2.0;
  return m;
}

OpticalUnitary clock_evolution(const ClockHamiltonian& h, double t) {
  if (!(h.omega > 0.0)) throw std::invalid_argument("ClockHamiltonian: omega must be > 0");
  return retarder_unitary({h.omega * t, kQuarterTurn});
}

double thickness_to_phase(double thickness_m, double birefringence, double wavelength_m) {
  if (!(wavelength_m > 0.0))
    throw std::invalid_argument("thickness_to_phase: wavelength must be > 0");
  if (thickness_m < 0.0)
    throw std::invalid_argument("thickness_to_phase: thickness must be >= 0");
  return 2.0 * std::numbers::pi * birefringence * thickness_m / wavelength_m;
}

}  // namespace pwclock
