#include "nmzi/elements.hpp"

#include <cmath>
#include <stdexcept>

namespace nmzi {

Eigen::Matrix2cd beam_splitter_matrix(double reflectivity,
                                      SplitterConvention convention) {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
    throw std::invalid_argument("beam splitter reflectivity outside [0, 1]");
  }
  const double r = std::sqrt(reflectivity);
  const double t = std::sqrt(1.0 - reflectivity);
  Eigen::Matrix2cd m;
  switch (convention) {
    case SplitterConvention::kReflectionI:
      m << Complex(t, 0.0), Complex(0.0, r),  //
          Complex(0.0, r), Complex(t, 0.0);
      break;
    case SplitterConvention::kRealSymmetric:
      m << Complex(t, 0.0), Complex(r, 0.0),  //
          Complex(r, 0.0), Complex(-t, 0.0);
      break;
  }
  return m;
}

}  // namespace nmzi
