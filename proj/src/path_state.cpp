#include "nmzi/path_state.hpp"

#include <stdexcept>

namespace nmzi {

bool PathState::has(const PathLabel& path) const {
  for (const auto& l : labels) {
    if (l == path) return true;
  }
  return false;
}

Complex PathState::at(const PathLabel& path) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == path) return amplitudes(static_cast<Eigen::Index>(i));
  }
  throw std::invalid_argument("no path '" + path + "' at slice " +
                              std::to_string(slice));
}

}  // namespace nmzi
