#pragma once

#include <string>
#include <vector>

#include "afc/formation_geometry.hpp"
#include "afc/linalg.hpp"

namespace afc {

/// Constant affine map x ↦ linear·x + translation.
struct AffineTransform {
  Matrix linear;
  Vector translation;
  std::string label;

  static AffineTransform identity(int dim);
  int dim() const { return static_cast<int>(linear.rows()); }
  /// (this ∘ inner)(x) = linear (inner.linear x + inner.translation) + translation.
  AffineTransform compose(const AffineTransform& inner) const;
  Vector apply(const Vector& x) const { return linear * x + translation; }
};

struct TargetFormation {
  Matrix all;        ///< n×d, one agent per row
  Matrix leaders;    ///< first n_l rows
  Matrix followers;  ///< remaining n_f rows
};

/// p*_i = Υ a_i + υ for every row of `positions`.
Matrix apply_transform(const Matrix& positions, const AffineTransform& t);

/// Targets for a formation given directly in the transform's dimension.
TargetFormation target_formation(const NominalFormation& formation, const AffineTransform& t);

/// Targets when the formation lives in a lower-dimensional coordinate
/// space: each nominal position a_i is lifted to `embedding · a_i` (d×k)
/// before the transform is applied.
TargetFormation target_formation(const NominalFormation& formation, const Matrix& embedding,
                                 const AffineTransform& t);

enum class CaseId { Case1, Case2 };

std::string to_string(CaseId id);
CaseId case_id_from_string(const std::string& s);

/// Named transforms of the two bundled studies (identity, rotation, scale,
/// shear, coplanar (case 1) / colinear (case 2), combination).
AffineTransform preset_transform(CaseId id, const std::string& name);

/// Preset names available for `id`, identity first.
std::vector<std::string> preset_names(CaseId id);

}  // namespace afc
