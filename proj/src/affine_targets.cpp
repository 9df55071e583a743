#include "afc/affine_targets.hpp"

#include <cmath>
#include <numbers>

#include "afc/errors.hpp"

namespace afc {

AffineTransform AffineTransform::identity(int dim) {
  return {Matrix::Identity(dim, dim), Vector::Zero(dim), "identity"};
}

AffineTransform AffineTransform::compose(const AffineTransform& inner) const {
  if (inner.dim() != dim()) throw DimensionMismatch("cannot compose transforms of different dimension");
  return {linear * inner.linear, linear * inner.translation + translation, label + "∘" + inner.label};
}

Matrix apply_transform(const Matrix& positions, const AffineTransform& t) {
  if (t.linear.rows() != t.linear.cols() || t.translation.size() != t.linear.rows()) {
    throw DimensionMismatch("transform must be a square matrix with a matching offset");
  }
  if (positions.cols() != t.linear.cols()) {
    throw DimensionMismatch("positions have dimension " + std::to_string(positions.cols()) +
                            ", transform has " + std::to_string(t.linear.cols()));
  }
  Matrix out = positions * t.linear.transpose();
  out.rowwise() += t.translation.transpose();
  return out;
}

namespace {

TargetFormation split(const Matrix& all, int leader_count) {
  TargetFormation out;
  out.all = all;
  out.leaders = all.topRows(leader_count);
  out.followers = all.bottomRows(all.rows() - leader_count);
  return out;
}

}  // namespace

TargetFormation target_formation(const NominalFormation& formation, const AffineTransform& t) {
  return split(apply_transform(formation.positions(), t), formation.leader_count());
}

TargetFormation target_formation(const NominalFormation& formation, const Matrix& embedding,
                                 const AffineTransform& t) {
  if (embedding.cols() != formation.dim()) {
    throw DimensionMismatch("embedding must have one column per formation coordinate");
  }
  const Matrix lifted = formation.positions() * embedding.transpose();
  return split(apply_transform(lifted, t), formation.leader_count());
}

std::string to_string(CaseId id) { return id == CaseId::Case1 ? "case1" : "case2"; }

CaseId case_id_from_string(const std::string& s) {
  if (s == "case1") return CaseId::Case1;
  if (s == "case2") return CaseId::Case2;
  throw UnknownPreset("unknown case '" + s + "' (expected case1 or case2)");
}

std::vector<std::string> preset_names(CaseId id) {
  if (id == CaseId::Case1) return {"identity", "rotation", "scale", "shear", "coplanar", "combination"};
  return {"identity", "rotation", "scale", "shear", "colinear", "combination"};
}

AffineTransform preset_transform(CaseId id, const std::string& name) {
  const double c = std::cos(std::numbers::pi / 4);
  const double s = std::sin(std::numbers::pi / 4);
  if (id == CaseId::Case1) {
    AffineTransform t = AffineTransform::identity(3);
    t.label = name;
    if (name == "identity") return t;
    if (name == "rotation") {
      t.linear << 0, 0, -1, 0, 1, 0, 1, 0, 0;
    } else if (name == "scale") {
      t.linear = 2 * Matrix::Identity(3, 3);
    } else if (name == "shear") {
      t.linear << 1, 1, 0, 0, 1, 0, 0, 0, 1;
    } else if (name == "coplanar") {
      t.linear << 1, 0, 0, 0, 1, 0, 0, 0, 0;
    } else if (name == "combination") {
      t.linear << 0, 0.5, -0.5, 0, 0.5, 0, 0.5, 0, 0;
      t.translation << 2, -2, 2;
    } else {
      throw UnknownPreset("unknown case1 preset '" + name + "'");
    }
    return t;
  }

  // State ordering (x, v_x, y, v_y); velocity rows stay zero.
  AffineTransform t;
  t.linear = Matrix::Zero(4, 4);
  t.translation = Vector::Zero(4);
  t.label = name;
  auto set_position_block = [&](double xx, double xy, double yx, double yy) {
    t.linear(0, 0) = xx;
    t.linear(0, 2) = xy;
    t.linear(2, 0) = yx;
    t.linear(2, 2) = yy;
  };
  if (name == "identity") {
    t.linear = Matrix::Identity(4, 4);
  } else if (name == "rotation") {
    set_position_block(c, -s, s, c);
  } else if (name == "scale") {
    set_position_block(2, 0, 0, 2);
  } else if (name == "shear") {
    set_position_block(1, 0, 1, 1);
  } else if (name == "colinear") {
    set_position_block(3, 1, 3, 1);
  } else if (name == "combination") {
    set_position_block(c / 2, -s / 2, (c + s) / 2, (c - s) / 2);
    t.translation << -2, 0, 2, 0;
  } else {
    throw UnknownPreset("unknown case2 preset '" + name + "'");
  }
  return t;
}

}  // namespace afc
