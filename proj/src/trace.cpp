#include "nmzi/trace.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "nmzi/tsvf.hpp"

namespace nmzi {

DensityMatrix DensityMatrix::ground() {
  DensityMatrix d;
  d.rho(0, 0) = Complex(1.0, 0.0);
  return d;
}

bool DensityMatrix::is_valid(double hermitian_tol, double trace_tol,
                             double psd_tol) const {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol) return false;
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > trace_tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
  return es.eigenvalues().minCoeff() > -psd_tol;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(a.rho - b.rho);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

InstrumentedNetwork::InstrumentedNetwork(OpticalNetwork network,
                                         std::vector<PointerSpec> pointers)
    : network_(std::move(network)), pointers_(std::move(pointers)) {
  if (static_cast<int>(pointers_.size()) > kMaxPointers) {
    throw std::invalid_argument("at most 6 pointers are supported");
  }
  for (std::size_t i = 0; i < pointers_.size(); ++i) {
    const auto& p = pointers_[i];
    if (!(p.epsilon >= 0.0 && p.epsilon <= std::numbers::pi / 2.0)) {
      throw std::invalid_argument("pointer coupling outside [0, pi/2]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (pointers_[j].mirror == p.mirror) {
        throw std::invalid_argument("duplicate pointer at mirror '" +
                                    p.mirror + "'");
      }
    }
    const auto& info = network_.mirror(p.mirror);  // throws for unknown mirror
    const int row = network_.label_index(info.slice, info.path);
    if (row < 0) {
      throw NetworkError("mirror path missing from its own slice");
    }
    couplings_by_slice_[info.slice].emplace_back(static_cast<int>(i), row);
  }
}

InstrumentedNetwork instrument(OpticalNetwork network,
                               std::vector<PointerSpec> pointers) {
  return InstrumentedNetwork(std::move(network), std::move(pointers));
}

int InstrumentedNetwork::pointer_index(const PathLabel& mirror) const {
  for (std::size_t i = 0; i < pointers_.size(); ++i) {
    if (pointers_[i].mirror == mirror) return static_cast<int>(i);
  }
  throw std::invalid_argument("no pointer at mirror '" + mirror + "'");
}

Eigen::MatrixXcd InstrumentedNetwork::propagate_joint(double* absorbed,
                                                      int up_to_slice) const {
  const int stop =
      up_to_slice < 0 ? network_.slice_count() - 1 : up_to_slice;
  if (stop >= network_.slice_count()) {
    throw NetworkError("slice index out of range");
  }
  const Eigen::Index dim = Eigen::Index{1} << pointer_count();
  const auto& labels0 = network_.slice_labels(0);
  if (labels0.size() != 1) {
    throw NetworkError("joint propagation needs a single-label input slice");
  }
  Eigen::MatrixXcd fields = Eigen::MatrixXcd::Zero(1, dim);
  fields(0, 0) = Complex(1.0, 0.0);  // photon at the source, pointers ground
  network_.project_blocked(0, fields, 1.0, absorbed);

  for (int s = 0; s <= stop; ++s) {
    auto it = couplings_by_slice_.find(s);
    if (it != couplings_by_slice_.end()) {
      for (const auto& [pointer, row] : it->second) {
        const double c = std::cos(pointers_[static_cast<std::size_t>(pointer)].epsilon);
        const double sn = std::sin(pointers_[static_cast<std::size_t>(pointer)].epsilon);
        const Eigen::Index bit = Eigen::Index{1} << pointer;
        for (Eigen::Index m = 0; m < dim; ++m) {
          if (m & bit) continue;
          const Complex a0 = fields(row, m);
          const Complex a1 = fields(row, m | bit);
          fields(row, m) = c * a0 - sn * a1;
          fields(row, m | bit) = sn * a0 + c * a1;
        }
      }
    }
    if (s < stop) {
      fields = network_.apply_stage(s, fields, 1.0, absorbed);
    }
  }
  return fields;
}

int JointPointerState::pointer_index(const PathLabel& mirror) const {
  for (std::size_t i = 0; i < pointers.size(); ++i) {
    if (pointers[i].mirror == mirror) return static_cast<int>(i);
  }
  throw std::invalid_argument("no pointer at mirror '" + mirror + "'");
}

Complex JointPointerState::amplitude(const std::vector<bool>& excited) const {
  if (excited.size() != pointers.size()) {
    throw std::invalid_argument("outcome tuple size mismatch");
  }
  Eigen::Index m = 0;
  for (std::size_t i = 0; i < excited.size(); ++i) {
    if (excited[i]) m |= Eigen::Index{1} << i;
  }
  return amplitudes(m);
}

JointPointerState joint_pointer_state(const InstrumentedNetwork& inet,
                                      const PathLabel& postselect_port) {
  const Eigen::MatrixXcd final_fields = inet.propagate_joint();
  const int final_slice = inet.network().slice_count() - 1;
  const int row = inet.network().label_index(final_slice, postselect_port);
  if (row < 0) {
    throw NetworkError("post-selection port '" + postselect_port +
                       "' missing from the final slice");
  }
  JointPointerState jps;
  jps.pointers = inet.pointers();
  jps.amplitudes = final_fields.row(row).transpose();
  jps.postselect_probability = jps.amplitudes.squaredNorm();
  const double total = final_fields.squaredNorm();
  if (jps.postselect_probability <=
      kSingularOverlapThreshold * kSingularOverlapThreshold * total) {
    throw ImpossiblePostselection(
        "post-selection probability is zero at port '" + postselect_port + "'");
  }
  return jps;
}

DensityMatrix reduced_dm(const JointPointerState& jps, const PathLabel& mirror) {
  const int pointer = jps.pointer_index(mirror);
  const Eigen::Index bit = Eigen::Index{1} << pointer;
  const Eigen::Index dim = jps.amplitudes.size();
  DensityMatrix out;
  for (Eigen::Index m = 0; m < dim; ++m) {
    if (m & bit) continue;
    const Complex a0 = jps.amplitudes(m);
    const Complex a1 = jps.amplitudes(m | bit);
    out.rho(0, 0) += a0 * std::conj(a0);
    out.rho(0, 1) += a0 * std::conj(a1);
    out.rho(1, 0) += a1 * std::conj(a0);
    out.rho(1, 1) += a1 * std::conj(a1);
  }
  out.rho /= jps.postselect_probability;
  return out;
}

DensityMatrix conditional_dm(const JointPointerState& jps,
                             const PathLabel& detected_at, bool excited,
                             const PathLabel& observe) {
  const int cond = jps.pointer_index(detected_at);
  const int target = jps.pointer_index(observe);
  if (cond == target) {
    throw std::invalid_argument("conditioned and observed pointers coincide");
  }
  const Eigen::Index cond_bit = Eigen::Index{1} << cond;
  const Eigen::Index dim = jps.amplitudes.size();
  Eigen::VectorXcd projected = jps.amplitudes;
  for (Eigen::Index m = 0; m < dim; ++m) {
    const bool is_excited = (m & cond_bit) != 0;
    if (is_excited != excited) projected(m) = Complex(0.0, 0.0);
  }
  const double p = projected.squaredNorm();
  if (p <= 0.0) {
    throw std::runtime_error("conditioning outcome has zero probability");
  }
  JointPointerState conditioned;
  conditioned.pointers = jps.pointers;
  conditioned.amplitudes = projected;
  conditioned.postselect_probability = p;
  return reduced_dm(conditioned, observe);
}

DensityMatrix conditional_dm(const JointPointerState& jps,
                             const PathLabel& detected_at, bool excited) {
  if (jps.pointers.size() != 2) {
    throw std::invalid_argument(
        "implicit observed pointer needs exactly two pointers");
  }
  const PathLabel& other = jps.pointers[0].mirror == detected_at
                               ? jps.pointers[1].mirror
                               : jps.pointers[0].mirror;
  return conditional_dm(jps, detected_at, excited, other);
}

double trace_magnitude(const InstrumentedNetwork& inet, const PathLabel& mirror,
                       const PathLabel& postselect_port) {
  inet.pointer_index(mirror);  // validates the location
  const auto jps = joint_pointer_state(inet, postselect_port);
  return trace_distance(reduced_dm(jps, mirror), DensityMatrix::ground());
}

std::vector<TraceSweepRow> trace_ratio_sweep(const std::vector<double>& epsilons,
                                             const NestedGeometry& geometry) {
  const OpticalNetwork net = build_nested_network(geometry);
  std::vector<TraceSweepRow> rows;
  rows.reserve(epsilons.size());
  for (const double eps : epsilons) {
    if (!(eps >= 0.0 && eps <= 0.2)) {
      throw std::invalid_argument("sweep coupling outside [0, 0.2]");
    }
    TraceSweepRow row;
    row.epsilon = eps;
    if (eps == 0.0) {
      rows.push_back(row);
      continue;
    }
    std::vector<PointerSpec> pointers;
    for (const PathLabel m : {"A", "B", "C", "E", "F"}) {
      pointers.push_back(PointerSpec{m, eps});
    }
    const InstrumentedNetwork inet(net, pointers);
    const auto jps = joint_pointer_state(inet, net.detector_port());
    auto mag = [&](const PathLabel& m) {
      return trace_distance(reduced_dm(jps, m), DensityMatrix::ground());
    };
    row.mag_A = mag("A");
    row.mag_B = mag("B");
    row.mag_C = mag("C");
    row.mag_E = mag("E");
    row.mag_F = mag("F");
    const double ab = row.mag_A + row.mag_B;
    if (ab > 0.0) row.ratio_EF_to_AB = (row.mag_E + row.mag_F) / ab;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nmzi
