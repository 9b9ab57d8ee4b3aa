#pragma once

// Staged feed-forward optical networks over labeled paths.
//
// A network is an ordered list of stage maps. Each stage consumes the labels
// of one slice and produces the labels of the next; elements acting on
// disjoint labels make up a stage, untouched labels pass through unchanged.
// With no blocks every stage map is an isometry. Blocked labels are projected
// out (amplitude absorbed) at every slice where they appear.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nmzi/elements.hpp"
#include "nmzi/path_state.hpp"

namespace nmzi {

struct NetworkError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Where a mirror sits: the path it reflects and the slice at which any
// vibration kick or pointer coupling attached to it acts.
struct MirrorInfo {
  PathLabel path;
  int slice = 0;
  std::optional<VibrationSpec> vibration;
};

class NetworkBuilder;
class OpticalNetwork;

OpticalNetwork apply_block(const OpticalNetwork& network, const PathLabel& path);

class OpticalNetwork {
 public:
  int stage_count() const { return static_cast<int>(stages_.size()); }
  int slice_count() const { return stage_count() + 1; }

  const std::vector<PathLabel>& slice_labels(int slice) const;
  // Row index of `path` at `slice`, or -1 if absent.
  int label_index(int slice, const PathLabel& path) const;
  bool has_label(int slice, const PathLabel& path) const {
    return label_index(slice, path) >= 0;
  }
  bool label_exists(const PathLabel& path) const;

  const std::map<PathLabel, MirrorInfo>& mirrors() const { return mirrors_; }
  const MirrorInfo& mirror(const PathLabel& name) const;
  const std::set<PathLabel>& blocked() const { return blocked_; }
  const PathLabel& detector_port() const { return detector_port_; }
  double alignment_eta() const { return alignment_eta_; }

  // Applies stage `s` to `fields` (rows = slice_labels(s), columns an inner
  // dimension the network never mixes). Returns rows = slice_labels(s+1) with
  // blocked rows zeroed; the squared norm removed by blocking, weighted by
  // `column_weight` per column, is accumulated into *absorbed when non-null.
  Eigen::MatrixXcd apply_stage(int s, const Eigen::MatrixXcd& fields,
                               double column_weight = 1.0,
                               double* absorbed = nullptr) const;

  // Adjoint map from slice s+1 back to slice s. Blocked rows of the input are
  // projected out first and blocked rows of the result zeroed, matching the
  // forward convention so that <phi_s|psi_s> is slice-independent.
  Eigen::MatrixXcd apply_stage_adjoint(int s,
                                       const Eigen::MatrixXcd& fields) const;

  // Zeroes blocked rows at `slice`, accumulating removed squared norm.
  void project_blocked(int slice, Eigen::MatrixXcd& fields,
                       double column_weight = 1.0,
                       double* absorbed = nullptr) const;

 private:
  friend class NetworkBuilder;
  friend OpticalNetwork apply_block(const OpticalNetwork&, const PathLabel&);

  struct Op {
    bool two_port = false;
    int in0 = -1, in1 = -1;
    int out0 = -1, out1 = -1;
    Complex m00{1.0, 0.0}, m01{0.0, 0.0}, m10{0.0, 0.0}, m11{0.0, 0.0};
  };
  struct Stage {
    std::vector<Op> ops;
  };

  void rebuild_blocked_rows();

  std::vector<Stage> stages_;
  std::vector<std::vector<PathLabel>> slices_;
  std::vector<std::map<PathLabel, int>> index_;
  std::vector<std::vector<int>> blocked_rows_;
  std::map<PathLabel, MirrorInfo> mirrors_;
  std::set<PathLabel> blocked_;
  PathLabel detector_port_;
  double alignment_eta_ = 0.0;
};

// Incremental stage-by-stage construction with wiring validation.
class NetworkBuilder {
 public:
  explicit NetworkBuilder(std::vector<PathLabel> source_labels);

  NetworkBuilder& splitter(
      const PathLabel& in_a, const std::optional<PathLabel>& in_b,
      const PathLabel& out_a, const PathLabel& out_b, double reflectivity,
      SplitterConvention convention = SplitterConvention::kReflectionI);
  NetworkBuilder& mirror(const PathLabel& path,
                         std::optional<VibrationSpec> vibration = {});
  NetworkBuilder& phase(const PathLabel& path, double radians);
  NetworkBuilder& relabel(const PathLabel& from, const PathLabel& to);
  NetworkBuilder& end_stage();

  NetworkBuilder& detector(const PathLabel& port);
  NetworkBuilder& block(const PathLabel& path);
  NetworkBuilder& alignment(double eta);

  OpticalNetwork build();

 private:
  struct Pending {
    OpticalNetwork::Op op;
    std::vector<PathLabel> ins;
    std::vector<PathLabel> outs;
    std::optional<std::pair<PathLabel, std::optional<VibrationSpec>>> mirror_tag;
  };

  const std::vector<PathLabel>& current_labels() const;
  void require_available(const PathLabel& in) const;

  OpticalNetwork net_;
  std::vector<Pending> pending_;
  std::set<PathLabel> consumed_;
  std::set<PathLabel> produced_;
  std::vector<PathLabel> block_requests_;
  bool built_ = false;
};

// Unit-amplitude source state on the single slice-0 label.
PathState source_state(const OpticalNetwork& network);

struct PropagationResult {
  std::vector<PathState> slices;       // one per slice, slice 0 included
  double absorbed_probability = 0.0;   // total squared norm lost to blocks
};

// Forward propagation of `input` (labels must cover slice 0) through every
// stage. Norm is conserved exactly up to blocking losses.
PropagationResult propagate_forward(const OpticalNetwork& network,
                                    const PathState& input);

// Geometry of the nested interferometer: an outer splitter feeding an inner
// Mach-Zehnder (paths A, B between mirrors E and F) on one arm and mirror C on
// the other, recombined toward detector port D. `outer_reflectivity` is the
// power sent to the inner arm by each outer splitter; `alignment_eta` is a
// phase on inner arm B, zero meaning exact destructive interference toward
// the F continuation.
struct NestedGeometry {
  double outer_reflectivity = 2.0 / 3.0;
  double inner_reflectivity = 0.5;
  double alignment_eta = 0.0;
  std::map<PathLabel, VibrationSpec> vibrations;  // keyed by mirror label
  std::vector<PathLabel> blocks;
};

OpticalNetwork build_nested_network(const NestedGeometry& geometry = {});

}  // namespace nmzi
