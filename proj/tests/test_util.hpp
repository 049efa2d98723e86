#pragma once

#include <random>

#include "relucert/types.hpp"

namespace relucert::testutil {

// Random weight points bounded away from the singular set: all row norms in
// [0.4, 1.8] and all pairwise angles (w-w and w-target) at least ~0.1 rad.
// Rejection keeps the generator simple; the acceptance region is large.
inline WeightPoint random_nonsingular(int n, int k, std::mt19937_64& rng, double min_sin = 0.1) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const TargetBasis V = TargetBasis::standard(k);
  for (;;) {
    Matrix W(n, k);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < k; ++a) W(i, a) = gauss(rng) / std::sqrt(static_cast<double>(k));
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const double nw = W.row(i).norm();
      if (nw < 0.4 || nw > 1.8) ok = false;
    }
    for (int i = 0; i < n && ok; ++i) {
      for (int j = i + 1; j < n && ok; ++j) {
        const auto g = pair_geometry(W.row(i).transpose(), W.row(j).transpose());
        if (g.sin_theta < min_sin) ok = false;
      }
      for (int j = 0; j < k && ok; ++j) {
        const auto g = pair_geometry(W.row(i).transpose(), V.row(j));
        if (g.sin_theta < min_sin) ok = false;
      }
    }
    if (ok) return WeightPoint(std::move(W));
  }
}

inline Matrix random_symmetric(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix S(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = uni(rng);
      S(i, j) = v;
      S(j, i) = v;
    }
  return S;
}

}  // namespace relucert::testutil
