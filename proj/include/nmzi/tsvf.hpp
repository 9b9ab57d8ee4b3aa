#pragma once

// Two-state-vector analysis: backward-evolving states, overlaps, and weak
// values of projector expressions on a staged network.

#include <optional>
#include <vector>

#include "nmzi/network.hpp"
#include "nmzi/path_state.hpp"

namespace nmzi {

// |overlap| below this fraction of the largest per-slice norm product marks
// the post-selection as singular (formally impossible).
inline constexpr double kSingularOverlapThreshold = 1e-10;

// Forward state from the source and backward state from the post-selected
// detector port, both at one slice. Stored unnormalized; `overlap` is the
// slice-independent <phi|psi>.
struct TwoStateVector {
  int slice = 0;
  PathState forward;
  PathState backward;
  Complex overlap{0.0, 0.0};
};

// Sum of same-slice projector products: each term is a product of path
// projectors evaluated at one common slice.
class ProjectorExpr {
 public:
  struct Term {
    int slice = 0;
    std::vector<PathLabel> projectors;  // product, applied right to left
  };

  static ProjectorExpr path(const PathLabel& label, int slice);

  ProjectorExpr operator+(const ProjectorExpr& rhs) const;
  // Term-by-term product; both operands must carry single terms at one common
  // slice (cross-slice products are out of scope).
  ProjectorExpr operator*(const ProjectorExpr& rhs) const;

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

struct WeakValueReport {
  std::optional<Complex> value;  // withheld when singular
  Complex overlap{0.0, 0.0};
  bool singular = false;
};

// Per-slice backward states: the unit detector-port state pulled back through
// the adjoint stage maps. Element [s] lives at slice s.
std::vector<PathState> backward_state(const OpticalNetwork& network,
                                      const PathLabel& postselect_port);

// <phi|psi> evaluated at the two-state vector's slice.
Complex overlap(const TwoStateVector& tsv);

// Forward + backward states assembled at one slice.
TwoStateVector two_state_vector(const OpticalNetwork& network,
                                const PathLabel& postselect_port, int slice);

WeakValueReport weak_value(const OpticalNetwork& network,
                           const ProjectorExpr& expr,
                           const PathLabel& postselect_port);

// Weak value of the projector on `mirror`'s path at its canonical slice.
WeakValueReport mirror_weak_value(const OpticalNetwork& network,
                                  const PathLabel& mirror,
                                  const PathLabel& postselect_port);

}  // namespace nmzi
