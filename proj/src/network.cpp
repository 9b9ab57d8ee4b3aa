#include "nmzi/network.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace nmzi {

const std::vector<PathLabel>& OpticalNetwork::slice_labels(int slice) const {
  if (slice < 0 || slice >= slice_count()) {
    throw NetworkError("slice index out of range");
  }
  return slices_[static_cast<std::size_t>(slice)];
}

int OpticalNetwork::label_index(int slice, const PathLabel& path) const {
  if (slice < 0 || slice >= slice_count()) {
    throw NetworkError("slice index out of range");
  }
  const auto& idx = index_[static_cast<std::size_t>(slice)];
  auto it = idx.find(path);
  return it == idx.end() ? -1 : it->second;
}

bool OpticalNetwork::label_exists(const PathLabel& path) const {
  for (const auto& idx : index_) {
    if (idx.count(path)) return true;
  }
  return false;
}

const MirrorInfo& OpticalNetwork::mirror(const PathLabel& name) const {
  auto it = mirrors_.find(name);
  if (it == mirrors_.end()) {
    throw NetworkError("no mirror '" + name + "' in this network");
  }
  return it->second;
}

void OpticalNetwork::project_blocked(int slice, Eigen::MatrixXcd& fields,
                                     double column_weight,
                                     double* absorbed) const {
  for (int row : blocked_rows_[static_cast<std::size_t>(slice)]) {
    if (absorbed != nullptr) {
      *absorbed += column_weight * fields.row(row).squaredNorm();
    }
    fields.row(row).setZero();
  }
}

Eigen::MatrixXcd OpticalNetwork::apply_stage(int s,
                                             const Eigen::MatrixXcd& fields,
                                             double column_weight,
                                             double* absorbed) const {
  if (s < 0 || s >= stage_count()) throw NetworkError("stage index out of range");
  const auto& stage = stages_[static_cast<std::size_t>(s)];
  const Eigen::Index cols = fields.cols();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(slices_[static_cast<std::size_t>(s) + 1].size()),
      cols);
  for (const auto& op : stage.ops) {
    if (op.two_port) {
      const auto a = fields.row(op.in0);
      if (op.in1 >= 0) {
        const auto b = fields.row(op.in1);
        out.row(op.out0) = op.m00 * a + op.m01 * b;
        out.row(op.out1) = op.m10 * a + op.m11 * b;
      } else {
        out.row(op.out0) = op.m00 * a;
        out.row(op.out1) = op.m10 * a;
      }
    } else {
      out.row(op.out0) = op.m00 * fields.row(op.in0);
    }
  }
  project_blocked(s + 1, out, column_weight, absorbed);
  return out;
}

Eigen::MatrixXcd OpticalNetwork::apply_stage_adjoint(
    int s, const Eigen::MatrixXcd& fields) const {
  if (s < 0 || s >= stage_count()) throw NetworkError("stage index out of range");
  const auto& stage = stages_[static_cast<std::size_t>(s)];
  Eigen::MatrixXcd in = fields;
  project_blocked(s + 1, in);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(slices_[static_cast<std::size_t>(s)].size()),
      fields.cols());
  for (const auto& op : stage.ops) {
    if (op.two_port) {
      const auto a = in.row(op.out0);
      const auto b = in.row(op.out1);
      out.row(op.in0) = std::conj(op.m00) * a + std::conj(op.m10) * b;
      if (op.in1 >= 0) {
        out.row(op.in1) = std::conj(op.m01) * a + std::conj(op.m11) * b;
      }
    } else {
      out.row(op.in0) = std::conj(op.m00) * in.row(op.out0);
    }
  }
  project_blocked(s, out);
  return out;
}

void OpticalNetwork::rebuild_blocked_rows() {
  blocked_rows_.assign(slices_.size(), {});
  for (std::size_t s = 0; s < slices_.size(); ++s) {
    for (std::size_t i = 0; i < slices_[s].size(); ++i) {
      if (blocked_.count(slices_[s][i])) {
        blocked_rows_[s].push_back(static_cast<int>(i));
      }
    }
  }
}

OpticalNetwork apply_block(const OpticalNetwork& network, const PathLabel& path) {
  if (!network.label_exists(path)) {
    throw NetworkError("cannot block unknown path '" + path + "'");
  }
  OpticalNetwork blocked = network;
  blocked.blocked_.insert(path);
  blocked.rebuild_blocked_rows();
  return blocked;
}

NetworkBuilder::NetworkBuilder(std::vector<PathLabel> source_labels) {
  if (source_labels.empty()) {
    throw NetworkError("network needs at least one source label");
  }
  std::set<PathLabel> seen;
  for (const auto& l : source_labels) {
    if (!seen.insert(l).second) {
      throw NetworkError("duplicate source label '" + l + "'");
    }
  }
  net_.slices_.push_back(std::move(source_labels));
}

const std::vector<PathLabel>& NetworkBuilder::current_labels() const {
  return net_.slices_.back();
}

void NetworkBuilder::require_available(const PathLabel& in) const {
  const auto& labels = current_labels();
  if (std::find(labels.begin(), labels.end(), in) == labels.end()) {
    throw NetworkError("path '" + in + "' does not exist at the current slice");
  }
  if (consumed_.count(in)) {
    throw NetworkError("path '" + in + "' used twice within one stage");
  }
}

NetworkBuilder& NetworkBuilder::splitter(const PathLabel& in_a,
                                         const std::optional<PathLabel>& in_b,
                                         const PathLabel& out_a,
                                         const PathLabel& out_b,
                                         double reflectivity,
                                         SplitterConvention convention) {
  require_available(in_a);
  if (in_b) require_available(*in_b);
  if (out_a == out_b) throw NetworkError("splitter outputs must differ");
  for (const auto& out : {out_a, out_b}) {
    if (produced_.count(out)) {
      throw NetworkError("output path '" + out + "' produced twice in one stage");
    }
  }
  const Eigen::Matrix2cd m = beam_splitter_matrix(reflectivity, convention);
  Pending p;
  p.op.two_port = true;
  p.op.m00 = m(0, 0);
  p.op.m01 = m(0, 1);
  p.op.m10 = m(1, 0);
  p.op.m11 = m(1, 1);
  p.ins = {in_a};
  if (in_b) p.ins.push_back(*in_b);
  p.outs = {out_a, out_b};
  consumed_.insert(p.ins.begin(), p.ins.end());
  produced_.insert(p.outs.begin(), p.outs.end());
  pending_.push_back(std::move(p));
  return *this;
}

NetworkBuilder& NetworkBuilder::mirror(const PathLabel& path,
                                       std::optional<VibrationSpec> vibration) {
  require_available(path);
  if (net_.mirrors_.count(path)) {
    throw NetworkError("mirror '" + path + "' declared twice");
  }
  Pending p;
  p.op.two_port = false;
  p.op.m00 = Complex(1.0, 0.0);
  p.ins = {path};
  p.outs = {path};
  p.mirror_tag = {{path, std::move(vibration)}};
  consumed_.insert(path);
  produced_.insert(path);
  pending_.push_back(std::move(p));
  return *this;
}

NetworkBuilder& NetworkBuilder::phase(const PathLabel& path, double radians) {
  require_available(path);
  Pending p;
  p.op.two_port = false;
  p.op.m00 = std::polar(1.0, radians);
  p.ins = {path};
  p.outs = {path};
  consumed_.insert(path);
  produced_.insert(path);
  pending_.push_back(std::move(p));
  return *this;
}

NetworkBuilder& NetworkBuilder::relabel(const PathLabel& from,
                                        const PathLabel& to) {
  require_available(from);
  if (produced_.count(to)) {
    throw NetworkError("output path '" + to + "' produced twice in one stage");
  }
  Pending p;
  p.op.two_port = false;
  p.op.m00 = Complex(1.0, 0.0);
  p.ins = {from};
  p.outs = {to};
  consumed_.insert(from);
  produced_.insert(to);
  pending_.push_back(std::move(p));
  return *this;
}

NetworkBuilder& NetworkBuilder::end_stage() {
  const std::vector<PathLabel> in_labels = current_labels();
  std::vector<PathLabel> out_labels;
  // Walk inputs in slice order; an element's outputs appear at the position of
  // its first consumed input, untouched labels carry through by identity.
  std::set<const Pending*> emitted;
  std::vector<OpticalNetwork::Op> ops;
  auto in_index = [&](const PathLabel& l) {
    const auto& labels = in_labels;
    return static_cast<int>(
        std::find(labels.begin(), labels.end(), l) - labels.begin());
  };
  for (const auto& label : in_labels) {
    const Pending* owner = nullptr;
    for (const auto& p : pending_) {
      if (std::find(p.ins.begin(), p.ins.end(), label) != p.ins.end()) {
        owner = &p;
        break;
      }
    }
    if (owner == nullptr) {
      // implicit pass-through
      OpticalNetwork::Op op;
      op.two_port = false;
      op.in0 = in_index(label);
      op.out0 = static_cast<int>(out_labels.size());
      op.m00 = Complex(1.0, 0.0);
      if (std::find(out_labels.begin(), out_labels.end(), label) !=
              out_labels.end() ||
          produced_.count(label)) {
        throw NetworkError("output path '" + label + "' produced twice in one stage");
      }
      out_labels.push_back(label);
      ops.push_back(op);
      continue;
    }
    if (emitted.count(owner)) continue;
    emitted.insert(owner);
    OpticalNetwork::Op op = owner->op;
    op.in0 = in_index(owner->ins[0]);
    op.in1 = owner->ins.size() > 1 ? in_index(owner->ins[1]) : -1;
    op.out0 = static_cast<int>(out_labels.size());
    out_labels.push_back(owner->outs[0]);
    if (op.two_port) {
      op.out1 = static_cast<int>(out_labels.size());
      out_labels.push_back(owner->outs[1]);
    }
    ops.push_back(op);
  }
  for (const auto& p : pending_) {
    if (p.mirror_tag) {
      MirrorInfo info;
      info.path = p.mirror_tag->first;
      info.slice = static_cast<int>(net_.slices_.size()) - 1;
      info.vibration = p.mirror_tag->second;
      net_.mirrors_.emplace(p.mirror_tag->first, std::move(info));
    }
  }
  net_.stages_.push_back(OpticalNetwork::Stage{std::move(ops)});
  net_.slices_.push_back(std::move(out_labels));
  pending_.clear();
  consumed_.clear();
  produced_.clear();
  return *this;
}

NetworkBuilder& NetworkBuilder::detector(const PathLabel& port) {
  net_.detector_port_ = port;
  return *this;
}

NetworkBuilder& NetworkBuilder::block(const PathLabel& path) {
  block_requests_.push_back(path);
  return *this;
}

NetworkBuilder& NetworkBuilder::alignment(double eta) {
  net_.alignment_eta_ = eta;
  return *this;
}

OpticalNetwork NetworkBuilder::build() {
  if (built_) throw NetworkError("builder already consumed");
  if (!pending_.empty()) throw NetworkError("unterminated stage; call end_stage()");
  built_ = true;
  net_.index_.clear();
  for (const auto& labels : net_.slices_) {
    std::map<PathLabel, int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      idx[labels[i]] = static_cast<int>(i);
    }
    if (idx.size() != labels.size()) {
      throw NetworkError("duplicate labels within a slice");
    }
    net_.index_.push_back(std::move(idx));
  }
  if (!net_.detector_port_.empty()) {
    const auto& final_idx = net_.index_.back();
    if (!final_idx.count(net_.detector_port_)) {
      throw NetworkError("detector port '" + net_.detector_port_ +
                         "' missing from the final slice");
    }
  }
  OpticalNetwork out = std::move(net_);
  out.rebuild_blocked_rows();
  for (const auto& path : block_requests_) {
    out = apply_block(out, path);
  }
  return out;
}

PathState source_state(const OpticalNetwork& network) {
  const auto& labels = network.slice_labels(0);
  if (labels.size() != 1) {
    throw NetworkError("source_state needs a single-label input slice");
  }
  PathState st;
  st.slice = 0;
  st.labels = labels;
  st.amplitudes = Eigen::VectorXcd::Zero(1);
  st.amplitudes(0) = Complex(1.0, 0.0);
  return st;
}

PropagationResult propagate_forward(const OpticalNetwork& network,
                                    const PathState& input) {
  const auto& labels0 = network.slice_labels(0);
  Eigen::MatrixXcd fields =
      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(labels0.size()), 1);
  std::set<PathLabel> covered;
  for (std::size_t i = 0; i < input.labels.size(); ++i) {
    const int row = network.label_index(0, input.labels[i]);
    if (row < 0) {
      throw NetworkError("input label '" + input.labels[i] +
                         "' does not exist at slice 0");
    }
    fields(row, 0) = input.amplitudes(static_cast<Eigen::Index>(i));
    covered.insert(input.labels[i]);
  }
  PropagationResult result;
  network.project_blocked(0, fields, 1.0, &result.absorbed_probability);
  auto snapshot = [&](int slice, const Eigen::MatrixXcd& f) {
    PathState st;
    st.slice = slice;
    st.labels = network.slice_labels(slice);
    st.amplitudes = f.col(0);
    result.slices.push_back(std::move(st));
  };
  snapshot(0, fields);
  for (int s = 0; s < network.stage_count(); ++s) {
    fields = network.apply_stage(s, fields, 1.0, &result.absorbed_probability);
    snapshot(s + 1, fields);
  }
  return result;
}

OpticalNetwork build_nested_network(const NestedGeometry& g) {
  if (!(g.outer_reflectivity >= 0.0 && g.outer_reflectivity <= 1.0) ||
      !(g.inner_reflectivity >= 0.0 && g.inner_reflectivity <= 1.0)) {
    throw NetworkError("splitter reflectivity outside [0, 1]");
  }
  if (!std::isfinite(g.alignment_eta)) {
    throw NetworkError("alignment eta must be finite");
  }
  auto vib = [&](const PathLabel& m) -> std::optional<VibrationSpec> {
    auto it = g.vibrations.find(m);
    if (it == g.vibrations.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& [m, spec] : g.vibrations) {
    (void)spec;
    if (m != "A" && m != "B" && m != "C" && m != "E" && m != "F") {
      throw NetworkError("vibration attached to unknown mirror '" + m + "'");
    }
  }

  NetworkBuilder b({"IN"});
  b.splitter("IN", std::nullopt, "C", "E", g.outer_reflectivity).end_stage();
  b.mirror("E", vib("E")).end_stage();
  b.splitter("E", std::nullopt, "A", "B", g.inner_reflectivity).end_stage();
  b.mirror("A", vib("A")).mirror("B", vib("B")).mirror("C", vib("C")).end_stage();
  b.phase("B", g.alignment_eta).end_stage();
  b.splitter("A", "B", "F", "DUMP", g.inner_reflectivity).end_stage();
  b.mirror("F", vib("F")).end_stage();
  // Second outer splitter couples the inner arm toward the detector with the
  // same power fraction the first one sends into it.
  b.splitter("F", "C", "D", "DARK", 1.0 - g.outer_reflectivity).end_stage();
  b.detector("D");
  b.alignment(g.alignment_eta);
  for (const auto& path : g.blocks) b.block(path);
  return b.build();
}

}  // namespace nmzi
