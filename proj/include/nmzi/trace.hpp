#pragma once

// Weak environment pointers: two-level pointers attached at mirrors, rotated
// by a small angle when the photon passes. Post-selecting the photon leaves
// the pointers in an entangled joint state whose reduced and conditional
// density matrices carry the photon's trace.

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nmzi/network.hpp"

namespace nmzi {

struct ImpossiblePostselection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One two-level pointer: prepared in its ground state at the named mirror and
// rotated by `epsilon` (radians) when the photon is on that mirror's path.
struct PointerSpec {
  PathLabel mirror;
  double epsilon = 0.0;
};

inline constexpr int kMaxPointers = 6;

// 2x2 pointer density matrix.
struct DensityMatrix {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();

  static DensityMatrix ground();
  bool is_valid(double hermitian_tol = 1e-12, double trace_tol = 1e-12,
                double psd_tol = 1e-10) const;
};

// Half the L1 norm of the eigenvalues of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Photon network with weak pointer couplings. With every epsilon zero the
// photon dynamics reduces to the bare network.
class InstrumentedNetwork {
 public:
  InstrumentedNetwork(OpticalNetwork network, std::vector<PointerSpec> pointers);

  const OpticalNetwork& network() const { return network_; }
  const std::vector<PointerSpec>& pointers() const { return pointers_; }
  int pointer_count() const { return static_cast<int>(pointers_.size()); }
  int pointer_index(const PathLabel& mirror) const;

  // Joint photon (x) pointer state: rows are path labels of the requested
  // slice (default final), columns the 2^n pointer basis (bit i = pointer i
  // excited). Couplings located at the requested slice are included.
  Eigen::MatrixXcd propagate_joint(double* absorbed = nullptr,
                                   int up_to_slice = -1) const;

 private:
  OpticalNetwork network_;
  std::vector<PointerSpec> pointers_;
  // couplings grouped by slice: (pointer index, path row at that slice)
  std::map<int, std::vector<std::pair<int, int>>> couplings_by_slice_;
};

InstrumentedNetwork instrument(OpticalNetwork network,
                               std::vector<PointerSpec> pointers);

// Pointer amplitudes conditioned on photon post-selection, unnormalized; the
// squared norm equals the post-selection probability.
struct JointPointerState {
  std::vector<PointerSpec> pointers;
  Eigen::VectorXcd amplitudes;  // dimension 2^n
  double postselect_probability = 0.0;

  int pointer_index(const PathLabel& mirror) const;
  Complex amplitude(const std::vector<bool>& excited) const;
};

// Throws ImpossiblePostselection when the post-selection probability is zero.
JointPointerState joint_pointer_state(const InstrumentedNetwork& inet,
                                      const PathLabel& postselect_port);

// Partial trace over all other pointers.
DensityMatrix reduced_dm(const JointPointerState& jps, const PathLabel& mirror);

// Projects the pointer at `detected_at` on the given outcome and returns the
// density matrix of the pointer at `observe`. Throws std::runtime_error when
// the conditioning outcome has zero probability.
DensityMatrix conditional_dm(const JointPointerState& jps,
                             const PathLabel& detected_at, bool excited,
                             const PathLabel& observe);
// Two-pointer convenience: observes the single remaining pointer.
DensityMatrix conditional_dm(const JointPointerState& jps,
                             const PathLabel& detected_at, bool excited = true);

// Trace distance between the reduced pointer state at `mirror` and the
// undisturbed ground projector.
double trace_magnitude(const InstrumentedNetwork& inet, const PathLabel& mirror,
                       const PathLabel& postselect_port);

struct TraceSweepRow {
  double epsilon = 0.0;
  double mag_A = 0.0, mag_B = 0.0, mag_C = 0.0, mag_E = 0.0, mag_F = 0.0;
  std::optional<double> ratio_EF_to_AB;  // absent when the couplings vanish
};

// Identical couplings at mirrors A, B, C, E, F for each epsilon in the list;
// ratio_EF_to_AB = (mag_E + mag_F) / (mag_A + mag_B). Epsilons must lie in
// [0, 0.2].
std::vector<TraceSweepRow> trace_ratio_sweep(const std::vector<double>& epsilons,
                                             const NestedGeometry& geometry = {});

}  // namespace nmzi
