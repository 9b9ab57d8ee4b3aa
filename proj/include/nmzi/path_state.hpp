#pragma once

// Path-labeled single-photon amplitudes at one slice of a staged optical
// network.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace nmzi {

using Complex = std::complex<double>;
using PathLabel = std::string;

// Amplitudes over the labeled paths of one stage slice.
struct PathState {
  int slice = 0;
  std::vector<PathLabel> labels;
  Eigen::VectorXcd amplitudes;

  bool has(const PathLabel& path) const;

  // Amplitude on `path`; throws std::invalid_argument if the label does not
  // exist at this slice.
  Complex at(const PathLabel& path) const;

  double squared_norm() const { return amplitudes.squaredNorm(); }
};

}  // namespace nmzi
