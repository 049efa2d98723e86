#include "relucert/closed_form.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "relucert/detail/pair_math.hpp"
#include "relucert/detail/rng.hpp"

namespace relucert {

using detail::kPi;
using detail::kTwoPi;
using detail::pair_f;
using detail::pair_g;
using detail::ScalarPair;

double kernel_f(const Vector& w, const Vector& v) {
  const double nw = w.norm();
  const double nv = v.norm();
  if (nw == 0.0 || nv == 0.0) throw ZeroNeuronError("kernel_f: zero vector");
  return pair_f(detail::scalar_pair(w.data(), v.data(), static_cast<int>(w.size()), nw, nv));
}

Vector kernel_grad_g(const Vector& w, const Vector& v) {
  const double nw = w.norm();
  const double nv = v.norm();
  if (nw == 0.0 || nv == 0.0) throw ZeroNeuronError("kernel_grad_g: zero vector");
  const ScalarPair p = detail::scalar_pair(w.data(), v.data(), static_cast<int>(w.size()), nw, nv);
  double cw = 0.0, cv = 0.0;
  pair_g(p, &cw, &cv);
  return cw * w + cv * v;
}

namespace {

void h1_into(const PairGeometry& g, Matrix* out, double sign) {
  // sin(t) ||v|| / (2 pi ||w||) * (I - w_bar w_bar^T + n_bar n_bar^T)
  const double pref = sign * g.sin_theta * g.norm_v / (kTwoPi * g.norm_w);
  const int k = static_cast<int>(g.w_bar.size());
  for (int a = 0; a < k; ++a) (*out)(a, a) += pref;
  out->noalias() -= (pref * g.w_bar) * g.w_bar.transpose();
  out->noalias() += (pref * g.n_bar_vw) * g.n_bar_vw.transpose();
}

Matrix h2_of(const PairGeometry& g) {
  // (pi - t)/(2 pi) I + (n_bar_wv v_bar^T + n_bar_vw w_bar^T) / (2 pi)
  const int k = static_cast<int>(g.w_bar.size());
  const Vector n_wv = g.w_bar - g.cos_theta * g.v_bar;
  const Vector n_bar_wv = n_wv / n_wv.norm();
  Matrix out = ((kPi - g.theta) / kTwoPi) * Matrix::Identity(k, k);
  out.noalias() += (n_bar_wv / kTwoPi) * g.v_bar.transpose();
  out.noalias() += (g.n_bar_vw / kTwoPi) * g.w_bar.transpose();
  return out;
}

}  // namespace

Matrix hess_block_h1(const Vector& w, const Vector& v) {
  const PairGeometry g = pair_geometry(w, v);
  if (g.parallel) throw SingularPairError("hess_block_h1: parallel pair", 0, 0, false);
  Matrix out = Matrix::Zero(w.size(), w.size());
  h1_into(g, &out, 1.0);
  return out;
}

Matrix hess_block_h2(const Vector& w, const Vector& v) {
  const PairGeometry g = pair_geometry(w, v);
  if (g.parallel) throw SingularPairError("hess_block_h2: parallel pair", 0, 0, false);
  return h2_of(g);
}

namespace {

struct RowNorms {
  std::vector<double> w;
  std::vector<double> v;
};

RowNorms row_norms(const WeightPoint& W, const TargetBasis& V) {
  RowNorms rn;
  rn.w.resize(W.n);
  rn.v.resize(V.k);
  for (int i = 0; i < W.n; ++i) {
    rn.w[i] = W.W.row(i).norm();
    if (rn.w[i] == 0.0) throw ZeroNeuronError("neuron " + std::to_string(i) + " is zero");
  }
  for (int j = 0; j < V.k; ++j) rn.v[j] = V.V.row(j).norm();
  return rn;
}

// Per-row work shared by the objective, gradient and fused kernels. Fixed
// order: j ascending, w-w sums before w-v sums, per-row partial combined as
// 0.5*pww - pwv + 0.5*pvv. The total is then reduced in i order, which keeps
// serial and OpenMP results bit-identical.
void eval_row(int i, const WeightPoint& W, const TargetBasis& V, const RowNorms& rn,
              bool want_obj, bool want_grad, double* obj_partial, Matrix* G) {
  const int k = W.k;
  // Eigen stores column-major; rows are strided. Copy the row once.
  Vector wi_copy = W.W.row(i).transpose();
  double pww = 0.0, pwv = 0.0;
  double coef_self = want_grad ? 0.5 : 0.0;
  Vector grow;
  if (want_grad) grow = Vector::Zero(k);
  for (int j = 0; j < W.n; ++j) {
    Vector wj = W.W.row(j).transpose();
    const ScalarPair p = detail::scalar_pair(wi_copy.data(), wj.data(), k, rn.w[i], rn.w[j]);
    if (want_obj) pww += pair_f(p);
    if (want_grad && j != i) {
      double cw = 0.0, cv = 0.0;
      pair_g(p, &cw, &cv);
      coef_self += cw;
      grow.noalias() += cv * wj;
    }
  }
  for (int j = 0; j < V.k; ++j) {
    Vector vj = V.row(j);
    const ScalarPair p = detail::scalar_pair(wi_copy.data(), vj.data(), k, rn.w[i], rn.v[j]);
    if (want_obj) pwv += pair_f(p);
    if (want_grad) {
      double cw = 0.0, cv = 0.0;
      pair_g(p, &cw, &cv);
      coef_self -= cw;
      grow.noalias() -= cv * vj;
    }
  }
  if (want_obj) {
    double pvv = 0.0;
    if (i < V.k) {
      Vector vi = V.row(i);
      for (int j = 0; j < V.k; ++j) {
        Vector vj = V.row(j);
        const ScalarPair p = detail::scalar_pair(vi.data(), vj.data(), static_cast<int>(vi.size()), rn.v[i], rn.v[j]);
        pvv += pair_f(p);
      }
    }
    *obj_partial = 0.5 * pww - pwv + (i < V.k ? 0.5 * pvv : 0.0);
  }
  if (want_grad) {
    grow.noalias() += coef_self * wi_copy;
    G->row(i) = grow.transpose();
  }
}

double objective_impl(const WeightPoint& W, const TargetBasis& V, bool parallel) {
  const RowNorms rn = row_norms(W, V);
  std::vector<double> partial(W.n, 0.0);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < W.n; ++i) eval_row(i, W, V, rn, true, false, &partial[i], nullptr);
  } else {
    for (int i = 0; i < W.n; ++i) eval_row(i, W, V, rn, true, false, &partial[i], nullptr);
  }
  double F = 0.0;
  for (int i = 0; i < W.n; ++i) F += partial[i];
  return F;
}

Matrix gradient_impl(const WeightPoint& W, const TargetBasis& V, bool parallel) {
  const RowNorms rn = row_norms(W, V);
  Matrix G(W.n, W.k);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < W.n; ++i) eval_row(i, W, V, rn, false, true, nullptr, &G);
  } else {
    for (int i = 0; i < W.n; ++i) eval_row(i, W, V, rn, false, true, nullptr, &G);
  }
  return G;
}

void fused_impl(const WeightPoint& W, const TargetBasis& V, double* F_out, Matrix* G_out, bool parallel) {
  const RowNorms rn = row_norms(W, V);
  std::vector<double> partial(W.n, 0.0);
  G_out->resize(W.n, W.k);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < W.n; ++i) eval_row(i, W, V, rn, true, true, &partial[i], G_out);
  } else {
    for (int i = 0; i < W.n; ++i) eval_row(i, W, V, rn, true, true, &partial[i], G_out);
  }
  double F = 0.0;
  for (int i = 0; i < W.n; ++i) F += partial[i];
  *F_out = F;
}

Matrix hessian_impl(const WeightPoint& W, const TargetBasis& V, bool parallel) {
  row_norms(W, V);  // zero-neuron validation
  const int n = W.n;
  const int k = W.k;
  Matrix H = Matrix::Zero(static_cast<Eigen::Index>(n) * k, static_cast<Eigen::Index>(n) * k);
  std::exception_ptr failure = nullptr;

  auto fill_block_row = [&](int i) {
    Vector wi = W.W.row(i).transpose();
    Matrix diag = 0.5 * Matrix::Identity(k, k);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      Vector wj = W.W.row(j).transpose();
      const PairGeometry g = pair_geometry(wi, wj);
      if (g.parallel)
        throw SingularPairError("hessian_F: neurons " + std::to_string(i) + " and " + std::to_string(j) +
                                    " are parallel",
                                i, j, false);
      h1_into(g, &diag, 1.0);
      H.block(static_cast<Eigen::Index>(i) * k, static_cast<Eigen::Index>(j) * k, k, k) = h2_of(g);
    }
    for (int j = 0; j < V.k; ++j) {
      Vector vj = V.row(j);
      const PairGeometry g = pair_geometry(wi, vj);
      // Exactly parallel w-target pairs contribute the h1 limit 0; this is
      // what makes the global minimum evaluable.
      if (g.parallel) continue;
      h1_into(g, &diag, -1.0);
    }
    H.block(static_cast<Eigen::Index>(i) * k, static_cast<Eigen::Index>(i) * k, k, k) = diag;
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      try {
        fill_block_row(i);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < n; ++i) fill_block_row(i);
  }
  if (failure) std::rethrow_exception(failure);

  // Exact symmetrization: mirror the upper triangle. The two float estimates
  // of a symmetric entry differ by rounding only.
  for (Eigen::Index p = 0; p < H.rows(); ++p)
    for (Eigen::Index q = p + 1; q < H.cols(); ++q) H(q, p) = H(p, q);
  return H;
}

using detail::mix64;

constexpr std::uint64_t kMcChunk = 1u << 16;

struct McChunk {
  double sum = 0.0;
  double sumsq = 0.0;
};

McChunk mc_chunk_sum(const WeightPoint& W, const TargetBasis& V, std::uint64_t count, std::uint64_t chunk_seed) {
  std::mt19937_64 rng(chunk_seed);
  detail::GaussianStream gauss(rng);
  const int d = V.dim();
  std::vector<double> x(d);
  double acc = 0.0;
  double accsq = 0.0;
  for (std::uint64_t s = 0; s < count; ++s) {
    for (int a = 0; a < d; ++a) x[a] = gauss.next();
    // The two sums are accumulated separately so that W == V gives net == 0
    // exactly, matching the identically-zero integrand.
    double sw = 0.0, sv = 0.0;
    for (int i = 0; i < W.n; ++i) {
      double dot = 0.0;
      for (int a = 0; a < d; ++a) dot += W.W(i, a) * x[a];
      if (dot > 0.0) sw += dot;
    }
    for (int j = 0; j < V.k; ++j) {
      double dot = 0.0;
      for (int a = 0; a < d; ++a) dot += V.V(j, a) * x[a];
      if (dot > 0.0) sv += dot;
    }
    const double net = sw - sv;
    const double val = 0.5 * net * net;
    acc += val;
    accsq += val * val;
  }
  return {acc, accsq};
}

McEstimate mc_stats_impl(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed,
                         bool parallel) {
  const std::uint64_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<McChunk> partial(chunks);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
      const std::uint64_t lo = static_cast<std::uint64_t>(c) * kMcChunk;
      const std::uint64_t count = std::min<std::uint64_t>(kMcChunk, samples - lo);
      partial[c] = mc_chunk_sum(W, V, count, mix64(seed ^ (0x9E3779B97F4A7C15ULL * (c + 1))));
    }
  } else {
    for (std::uint64_t c = 0; c < chunks; ++c) {
      const std::uint64_t lo = c * kMcChunk;
      const std::uint64_t count = std::min<std::uint64_t>(kMcChunk, samples - lo);
      partial[c] = mc_chunk_sum(W, V, count, mix64(seed ^ (0x9E3779B97F4A7C15ULL * (c + 1))));
    }
  }
  double total = 0.0;
  double totalsq = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    total += partial[c].sum;
    totalsq += partial[c].sumsq;
  }
  McEstimate e;
  const double ns = static_cast<double>(samples);
  e.mean = total / ns;
  const double var = std::max(0.0, totalsq / ns - e.mean * e.mean);
  e.std_error = std::sqrt(var / ns);
  return e;
}

}  // namespace

double objective_F(const WeightPoint& W, const TargetBasis& V) { return objective_impl(W, V, true); }
Matrix gradient_F(const WeightPoint& W, const TargetBasis& V) { return gradient_impl(W, V, true); }
void objective_and_gradient(const WeightPoint& W, const TargetBasis& V, double* F_out, Matrix* G_out) {
  fused_impl(W, V, F_out, G_out, true);
}
Matrix hessian_F(const WeightPoint& W, const TargetBasis& V) { return hessian_impl(W, V, true); }
double mc_objective_oracle(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed) {
  return mc_stats_impl(W, V, samples, seed, true).mean;
}
McEstimate mc_objective_stats(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed) {
  return mc_stats_impl(W, V, samples, seed, true);
}

namespace serial {
double objective_F(const WeightPoint& W, const TargetBasis& V) { return objective_impl(W, V, false); }
Matrix gradient_F(const WeightPoint& W, const TargetBasis& V) { return gradient_impl(W, V, false); }
void objective_and_gradient(const WeightPoint& W, const TargetBasis& V, double* F_out, Matrix* G_out) {
  fused_impl(W, V, F_out, G_out, false);
}
Matrix hessian_F(const WeightPoint& W, const TargetBasis& V) { return hessian_impl(W, V, false); }
double mc_objective_oracle(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed) {
  return mc_stats_impl(W, V, samples, seed, false).mean;
}
}  // namespace serial

Matrix fd_gradient_oracle(const WeightPoint& W, const TargetBasis& V, double step) {
  Matrix G(W.n, W.k);
  WeightPoint p = W;
  for (int i = 0; i < W.n; ++i) {
    for (int a = 0; a < W.k; ++a) {
      const double orig = p.W(i, a);
      p.W(i, a) = orig + step;
      const double fp = serial::objective_F(p, V);
      p.W(i, a) = orig - step;
      const double fm = serial::objective_F(p, V);
      p.W(i, a) = orig;
      G(i, a) = (fp - fm) / (2.0 * step);
    }
  }
  return G;
}

Matrix fd_hessian_oracle(const WeightPoint& W, const TargetBasis& V, double step) {
  const int nk = W.n * W.k;
  Matrix H(nk, nk);
  WeightPoint p = W;
  for (int i = 0; i < W.n; ++i) {
    for (int a = 0; a < W.k; ++a) {
      const double orig = p.W(i, a);
      p.W(i, a) = orig + step;
      Matrix gp = serial::gradient_F(p, V);
      p.W(i, a) = orig - step;
      Matrix gm = serial::gradient_F(p, V);
      p.W(i, a) = orig;
      Vector col = (WeightPoint(Matrix((gp - gm) / (2.0 * step))).flatten());
      H.col(i * W.k + a) = col;
    }
  }
  return H;
}

}  // namespace relucert
