// Jones-calculus models of the optical elements: linear retarders (wave
// plates), phase plates, and the clock Hamiltonian whose exponential is the
// 45-degree plate evolution.
#pragma once

#include "pwclock/linalg.hpp"

namespace pwclock {

// Birefringent plate: relative phase `delta` between the components along the
// fast/slow axes, fast axis at `axis` radians from horizontal. `delta` is kept
// unreduced; periodicity is handled where plates are composed.
struct Retarder {
  double delta = 0.0;
  double axis = 0.0;
};

// Generator of the polarization rotation used as the clock: H = (omega/2) sx
// in the H/V basis, so exp(-iHt) equals a 45-degree retarder of phase omega*t.
struct ClockHamiltonian {
  double omega = 1.0;  // rad/s, must be > 0
};

// U = R(axis) diag(e^{-i delta/2}, e^{+i delta/2}) R(-axis).
// At axis = 45 deg this is cos(delta/2) I - i sin(delta/2) sx.
OpticalUnitary retarder_unitary(const Retarder& r);

OpticalUnitary hwp(double axis);  // half-wave plate, delta = pi
OpticalUnitary qwp(double axis);  // quarter-wave plate, delta = pi/2

// Relative phase between H and V: diag(1, e^{i phi}).
OpticalUnitary phase_plate(double phi);

CMat clock_hamiltonian_matrix(const ClockHamiltonian& h);

// Evolution operator exp(-iHt) of the clock Hamiltonian.
OpticalUnitary clock_evolution(const ClockHamiltonian& h, double t);

// delta = 2 pi * birefringence * thickness / wavelength.
double thickness_to_phase(double thickness_m, double birefringence, double wavelength_m);

inline constexpr double kQuarterTurn = 0.78539816339744830961;  // pi/4, the 45-deg plate axis

}  // namespace pwclock
