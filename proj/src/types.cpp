#include "relucert/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relucert/detail/pair_math.hpp"

namespace relucert {

double WeightPoint::min_row_norm() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::min(m, W.row(i).norm());
  return m;
}

double WeightPoint::max_row_norm() const {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, W.row(i).norm());
  return m;
}

Vector WeightPoint::flatten() const {
  Vector x(static_cast<Eigen::Index>(n) * k);
  for (int i = 0; i < n; ++i) x.segment(static_cast<Eigen::Index>(i) * k, k) = W.row(i).transpose();
  return x;
}

WeightPoint WeightPoint::unflatten(const Vector& x, int n, int k) {
  WeightPoint p(n, k);
  for (int i = 0; i < n; ++i) p.W.row(i) = x.segment(static_cast<Eigen::Index>(i) * k, k).transpose();
  return p;
}

TargetBasis TargetBasis::standard(int k) {
  TargetBasis t;
  t.k = k;
  t.V = Matrix::Identity(k, k);
  t.orthonormal_flag = true;
  return t;
}

TargetBasis TargetBasis::from_rows(Matrix rows) {
  TargetBasis t;
  t.k = static_cast<int>(rows.rows());
  t.V = std::move(rows);
  for (int j = 0; j < t.k; ++j) {
    if (t.V.row(j).norm() == 0.0) throw ZeroNeuronError("target row " + std::to_string(j) + " is zero");
  }
  t.orthonormal_flag = (t.V * t.V.transpose()).isIdentity(1e-12);
  return t;
}

double TargetBasis::max_norm() const {
  double m = 0.0;
  for (int j = 0; j < k; ++j) m = std::max(m, V.row(j).norm());
  return m;
}

bool TargetBasis::is_standard() const {
  if (V.rows() != V.cols()) return false;
  return V.isIdentity(0.0);
}

PairGeometry pair_geometry(const Vector& w, const Vector& v) {
  PairGeometry g;
  g.norm_w = w.norm();
  g.norm_v = v.norm();
  if (g.norm_w == 0.0 || g.norm_v == 0.0) throw ZeroNeuronError("pair_geometry: zero vector");
  const int k = static_cast<int>(w.size());
  const detail::ScalarPair p = detail::scalar_pair(w.data(), v.data(), k, g.norm_w, g.norm_v);
  g.theta = p.theta;
  g.sin_theta = p.sin_t;
  g.cos_theta = p.cos_t;
  g.parallel = p.parallel;
  g.w_bar = w / g.norm_w;
  g.v_bar = v / g.norm_v;
  g.n_vw = g.v_bar - g.cos_theta * g.w_bar;
  if (g.parallel) {
    g.n_bar_vw = Vector::Zero(k);
  } else {
    g.n_bar_vw = g.n_vw / g.n_vw.norm();
  }
  return g;
}

}  // namespace relucert
