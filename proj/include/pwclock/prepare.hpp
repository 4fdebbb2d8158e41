// Source states: the one-parameter ququart family cos(theta)|HH> +
// e^{i phi} sin(theta)|VV>, and the polarization singlet obtained from it by
// a half-wave plate in the transmitted arm.
#pragma once

#include "pwclock/linalg.hpp"

namespace pwclock {

struct SourceConfig {
  double theta = 0.0;        // amplitude balance, [0, pi/2]
  double phi = 0.0;          // relative phase, [0, 2 pi)
  bool singlet_mode = false; // apply the arm-1 half-wave plate construction
};

// Amplitudes (cos theta, 0, 0, e^{i phi} sin theta) in (HH,HV,VH,VV) order.
PureState ququart_state(const SourceConfig& cfg);

// The singlet (|HV> - |VH>)/sqrt(2) up to a global phase, built by applying
// hwp(45 deg) to photon 1 of the ququart state. With the retarder convention
// used here the phase choice phi = pi (not the nominal phi = 0) delivers the
// singlet; the result is verified against the target by fidelity in tests.
PureState singlet_state();

}  // namespace pwclock
