#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

// Scalar geometry shared by pair_geometry() and the inner loops of the
// objective/gradient/Hessian kernels. Keeping one copy guarantees the float
// path is bit-identical no matter which entry point evaluates a pair.

namespace relucert::detail {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// True iff v == t*w entrywise in floating point, t taken from the
// largest-magnitude coordinate of w. This is the exact-parallelism test:
// it catches equal, negated and representable-multiple rows, which are the
// only parallel configurations that occur in evaluated inputs (GD iterates
// are almost surely non-parallel).
inline bool exact_multiple(const double* w, const double* v, int k, double* t_out) {
  int a = 0;
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    const double m = std::abs(w[i]);
    if (m > best) {
      best = m;
      a = i;
    }
  }
  if (best == 0.0) return false;
  const double t = v[a] / w[a];
  for (int i = 0; i < k; ++i) {
    if (v[i] != t * w[i]) return false;
  }
  *t_out = t;
  return true;
}

struct ScalarPair {
  double nw = 0.0;
  double nv = 0.0;
  double cos_t = 1.0;
  double theta = 0.0;
  double sin_t = 0.0;
  bool parallel = false;
};

// Requires nw > 0, nv > 0. cos is clamped to [-1, 1] (float path only; the
// rigorous path never clamps). theta is exact 0 or pi on parallel pairs.
inline ScalarPair scalar_pair(const double* w, const double* v, int k, double nw, double nv) {
  ScalarPair p;
  p.nw = nw;
  p.nv = nv;
  double dot = 0.0;
  for (int i = 0; i < k; ++i) dot += w[i] * v[i];
  double c = dot / (nw * nv);
  if (c > 1.0 - 1e-12 || c < -1.0 + 1e-12) {
    double t = 0.0;
    if (exact_multiple(w, v, k, &t)) {
      p.parallel = true;
      p.cos_t = t > 0.0 ? 1.0 : -1.0;
      p.theta = t > 0.0 ? 0.0 : kPi;
      p.sin_t = 0.0;
      return p;
    }
    c = std::clamp(c, -1.0, 1.0);
    if (c == 1.0 || c == -1.0) {
      // Clamp landed on the boundary: the exact-parallel limit applies.
      p.parallel = true;
      p.cos_t = c;
      p.theta = c == 1.0 ? 0.0 : kPi;
      p.sin_t = 0.0;
      return p;
    }
  }
  p.cos_t = c;
  p.theta = std::acos(c);
  p.sin_t = std::sin(p.theta);
  return p;
}

// f(w,v) = ||w|| ||v|| (sin t + (pi - t) cos t) / (2 pi), written so the
// parallel limits come out exact: t = 0 gives ||w|| ||v|| / 2, t = pi gives 0.
inline double pair_f(const ScalarPair& p) {
  const double angular = p.sin_t / kTwoPi + ((kPi - p.theta) / kTwoPi) * p.cos_t;
  return p.nw * p.nv * angular;
}

// g(w,v) = coef_w * w + coef_v * v with
//   coef_w = ||v|| sin(t) / (2 pi ||w||),  coef_v = (pi - t) / (2 pi).
// Continuous at parallel pairs: coef_w vanishes there, and coef_v is exactly
// 1/2 (t = 0) or 0 (t = pi).
inline void pair_g(const ScalarPair& p, double* coef_w, double* coef_v) {
  *coef_w = p.parallel ? 0.0 : (p.nv * p.sin_t) / (kTwoPi * p.nw);
  *coef_v = (kPi - p.theta) / kTwoPi;
}

}  // namespace relucert::detail
