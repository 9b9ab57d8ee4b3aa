#include "nmzi/tsvf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmzi {

ProjectorExpr ProjectorExpr::path(const PathLabel& label, int slice) {
  ProjectorExpr e;
  e.terms_.push_back(Term{slice, {label}});
  return e;
}

ProjectorExpr ProjectorExpr::operator+(const ProjectorExpr& rhs) const {
  ProjectorExpr e = *this;
  e.terms_.insert(e.terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
  return e;
}

ProjectorExpr ProjectorExpr::operator*(const ProjectorExpr& rhs) const {
  ProjectorExpr e;
  for (const auto& a : terms_) {
    for (const auto& b : rhs.terms_) {
      if (a.slice != b.slice) {
        throw std::invalid_argument(
            "projector products across different slices are not supported");
      }
      Term t;
      t.slice = a.slice;
      t.projectors = a.projectors;
      t.projectors.insert(t.projectors.end(), b.projectors.begin(),
                          b.projectors.end());
      e.terms_.push_back(std::move(t));
    }
  }
  return e;
}

std::vector<PathState> backward_state(const OpticalNetwork& network,
                                      const PathLabel& postselect_port) {
  const int final_slice = network.slice_count() - 1;
  const int row = network.label_index(final_slice, postselect_port);
  if (row < 0) {
    throw NetworkError("post-selection port '" + postselect_port +
                       "' missing from the final slice");
  }
  Eigen::MatrixXcd fields = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(network.slice_labels(final_slice).size()), 1);
  fields(row, 0) = Complex(1.0, 0.0);
  network.project_blocked(final_slice, fields);

  std::vector<PathState> states(static_cast<std::size_t>(network.slice_count()));
  auto snapshot = [&](int slice, const Eigen::MatrixXcd& f) {
    PathState st;
    st.slice = slice;
    st.labels = network.slice_labels(slice);
    st.amplitudes = f.col(0);
    states[static_cast<std::size_t>(slice)] = std::move(st);
  };
  snapshot(final_slice, fields);
  for (int s = network.stage_count() - 1; s >= 0; --s) {
    fields = network.apply_stage_adjoint(s, fields);
    snapshot(s, fields);
  }
  return states;
}

Complex overlap(const TwoStateVector& tsv) {
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < tsv.backward.labels.size(); ++i) {
    const auto& label = tsv.backward.labels[i];
    if (!tsv.forward.has(label)) continue;
    sum += std::conj(tsv.backward.amplitudes(static_cast<Eigen::Index>(i))) *
           tsv.forward.at(label);
  }
  return sum;
}

TwoStateVector two_state_vector(const OpticalNetwork& network,
                                const PathLabel& postselect_port, int slice) {
  if (slice < 0 || slice >= network.slice_count()) {
    throw NetworkError("slice index out of range");
  }
  const auto forward = propagate_forward(network, source_state(network));
  const auto backward = backward_state(network, postselect_port);
  TwoStateVector tsv;
  tsv.slice = slice;
  tsv.forward = forward.slices[static_cast<std::size_t>(slice)];
  tsv.backward = backward[static_cast<std::size_t>(slice)];
  tsv.overlap = overlap(tsv);
  return tsv;
}

namespace {

// Applies one product term to the forward state and contracts with the
// backward state: <phi| P_{p1} ... P_{pk} |psi> at the term's slice.
Complex term_matrix_element(const PathState& forward, const PathState& backward,
                            const ProjectorExpr::Term& term) {
  Eigen::VectorXcd v = forward.amplitudes;
  for (auto it = term.projectors.rbegin(); it != term.projectors.rend(); ++it) {
    bool found = false;
    for (std::size_t i = 0; i < forward.labels.size(); ++i) {
      if (forward.labels[i] == *it) {
        found = true;
        const Complex keep = v(static_cast<Eigen::Index>(i));
        v.setZero();
        v(static_cast<Eigen::Index>(i)) = keep;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument("projector on unknown path '" + *it +
                                  "' at slice " + std::to_string(term.slice));
    }
  }
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < backward.labels.size(); ++i) {
    sum += std::conj(backward.amplitudes(static_cast<Eigen::Index>(i))) *
           v(static_cast<Eigen::Index>(i));
  }
  return sum;
}

}  // namespace

WeakValueReport weak_value(const OpticalNetwork& network,
                           const ProjectorExpr& expr,
                           const PathLabel& postselect_port) {
  const auto forward = propagate_forward(network, source_state(network));
  const auto backward = backward_state(network, postselect_port);

  const int final_slice = network.slice_count() - 1;
  const Complex ov =
      forward.slices[static_cast<std::size_t>(final_slice)].at(postselect_port);

  double max_norm_product = 0.0;
  for (int s = 0; s < network.slice_count(); ++s) {
    const double p =
        std::sqrt(forward.slices[static_cast<std::size_t>(s)].squared_norm() *
                  backward[static_cast<std::size_t>(s)].squared_norm());
    max_norm_product = std::max(max_norm_product, p);
  }

  WeakValueReport report;
  report.overlap = ov;
  report.singular = std::abs(ov) < kSingularOverlapThreshold * max_norm_product;
  if (report.singular) return report;

  Complex numerator{0.0, 0.0};
  for (const auto& term : expr.terms()) {
    if (term.slice < 0 || term.slice >= network.slice_count()) {
      throw std::invalid_argument("projector slice out of range");
    }
    numerator += term_matrix_element(
        forward.slices[static_cast<std::size_t>(term.slice)],
        backward[static_cast<std::size_t>(term.slice)], term);
  }
  report.value = numerator / ov;
  return report;
}

WeakValueReport mirror_weak_value(const OpticalNetwork& network,
                                  const PathLabel& mirror,
                                  const PathLabel& postselect_port) {
  const auto& info = network.mirror(mirror);
  return weak_value(network, ProjectorExpr::path(info.path, info.slice),
                    postselect_port);
}

}  // namespace nmzi
