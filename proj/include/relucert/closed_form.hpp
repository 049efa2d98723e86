#pragma once

#include <cstdint>

#include "relucert/types.hpp"

namespace relucert {

// ---------------------------------------------------------------------------
// Expectation-free evaluation of the population loss
//
//   F(W) = 1/2 sum_{i,j} f(w_i, w_j) - sum_{i,j} f(w_i, v_j)
//        + 1/2 sum_{i,j} f(v_i, v_j)
//
// with f(w,v) = E[relu(w.x) relu(v.x)] over standard Gaussian x, evaluated
// through the arc-cosine closed form
//
//   f(w,v) = ||w|| ||v|| (sin t + (pi - t) cos t) / (2 pi),  t = angle(w, v).
//
// Summation order is fixed (i outer, j inner, per-i partials combined in i
// order), so results are bit-identical between the serial reference and the
// OpenMP kernels and across thread counts.
// ---------------------------------------------------------------------------

// f(w,v). Continuous everywhere away from zero vectors, including parallel
// pairs.
double kernel_f(const Vector& w, const Vector& v);

// d f / d w = (||v|| sin(t) w_bar + (pi - t) v) / (2 pi). Parallel pairs use
// the continuous limit (the sin term vanishes).
Vector kernel_grad_g(const Vector& w, const Vector& v);

// d^2 f / d w^2 and d^2 f / dw dv. Both throw SingularPairError on parallel
// pairs, where f is not twice differentiable in a usable closed form.
Matrix hess_block_h1(const Vector& w, const Vector& v);
Matrix hess_block_h2(const Vector& w, const Vector& v);

double objective_F(const WeightPoint& W, const TargetBasis& V);
// Gradient laid out as an n x k matrix, row i = gradient w.r.t. neuron i.
Matrix gradient_F(const WeightPoint& W, const TargetBasis& V);
// One pass producing both; this is what the GD loop calls.
void objective_and_gradient(const WeightPoint& W, const TargetBasis& V, double* F_out, Matrix* G_out);

// nk x nk symmetric matrix, k x k blocks: diagonal block i carries
// 1/2 I + sum_{j != i} h1(w_i, w_j) - sum_j h1(w_i, v_j), off-diagonal block
// (i, j) carries h2(w_i, w_j). An exactly parallel (w_i, v_j) pair contributes
// the limit 0 for its h1 term (needed to evaluate the global minimum); an
// exactly parallel (w_i, w_j) pair throws SingularPairError.
Matrix hessian_F(const WeightPoint& W, const TargetBasis& V);

// Serial reference implementations, kept for testing and benchmarked against
// the OpenMP kernels above. Must be bit-identical.
namespace serial {
double objective_F(const WeightPoint& W, const TargetBasis& V);
Matrix gradient_F(const WeightPoint& W, const TargetBasis& V);
void objective_and_gradient(const WeightPoint& W, const TargetBasis& V, double* F_out, Matrix* G_out);
Matrix hessian_F(const WeightPoint& W, const TargetBasis& V);
double mc_objective_oracle(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed);
}  // namespace serial

// ---------------------------------------------------------------------------
// Independent oracles (used to test everything else; no shared code path with
// the closed forms beyond relu itself).
// ---------------------------------------------------------------------------

// Monte-Carlo average of 1/2 (sum_i relu(w_i.x) - sum_j relu(v_j.x))^2 over
// `samples` standard Gaussian draws. Deterministic for a fixed seed and
// independent of thread count (fixed-size chunks, ordered reduction).
double mc_objective_oracle(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
McEstimate mc_objective_stats(const WeightPoint& W, const TargetBasis& V, std::uint64_t samples, std::uint64_t seed);

inline constexpr double kFdDefaultStep = 1e-5;

// Central differences of objective_F / gradient_F.
Matrix fd_gradient_oracle(const WeightPoint& W, const TargetBasis& V, double step = kFdDefaultStep);
Matrix fd_hessian_oracle(const WeightPoint& W, const TargetBasis& V, double step = kFdDefaultStep);

}  // namespace relucert
