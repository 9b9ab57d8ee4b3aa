#pragma once

// Linear-optical element primitives shared across the library.

#include <complex>
#include <optional>

#include <Eigen/Core>

#include "nmzi/path_state.hpp"

namespace nmzi {

// Sinusoidal mirror vibration. `kick` is the amplitude of the transverse
// momentum imprinted on the reflected beam, in units of the inverse beam
// waist; the instantaneous kick is kick * sin(2*pi*f*t + phase).
struct VibrationSpec {
  double frequency_hz = 0.0;
  double kick = 0.0;
  double phase = 0.0;
};

enum class SplitterConvention {
  kReflectionI,    // reflected amplitude carries phase i, transmission real
  kRealSymmetric,  // all-real entries, sign flip on the second reflection
};

// 2x2 unitary of a beam splitter with power reflectivity `reflectivity`.
// Acting on input ports (a, b): out_a = t*in_a + r*in_b, out_b = r*in_a + t*in_b
// up to the phase placement fixed by the convention. Throws
// std::invalid_argument outside [0, 1].
Eigen::Matrix2cd beam_splitter_matrix(
    double reflectivity,
    SplitterConvention convention = SplitterConvention::kReflectionI);

}  // namespace nmzi
