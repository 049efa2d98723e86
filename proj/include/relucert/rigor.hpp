#pragma once

#include <string>

#include "relucert/enclosure.hpp"
#include "relucert/types.hpp"

namespace relucert {

// The ball over which the third-order and Hessian-norm bounds are taken:
// center plus radius alpha, with certified enclosures of the extreme neuron
// norms over that ball and of the largest target norm.
struct BallSpec {
  WeightPoint center;
  double alpha = 0.0;
  Enclosure w_min;  // lower end strictly positive, or the ball is unusable
  Enclosure w_max;
  Enclosure v_max;
};

// Result of the lower-bound algorithm. A nonnegative lambda_min_lower is a
// certified lower bound on the smallest eigenvalue; the sentinel -1 means
// "not certified positive-definite", never "proved indefinite".
struct EigenBoundReport {
  double lambda_min_lower = -1.0;
  bool certified = false;
  double eps1 = 0.0;  // || A - A' ||_F          (enclosure-vs-double distance)
  double eps2 = 0.0;  // || A' - U D U^T ||_F    (rigorous recomputation)
  double eps3 = 0.0;  // orthogonality defect term, via the inverse-sqrt series
  double B_orth = 0.0;  // 1 + ||U - I||_F  >= ||U||_sp
  double C_orth = 0.0;  // ||I - U^T U||_F  >= ||E||_sp
  bool dominant_ok = false;
  int precision_bits = 0;
};

// Rigorous enclosure of F(W). Parallel pairs are fine here (f is continuous),
// so this also evaluates near-global points.
Enclosure enclose_objective(const WeightPoint& W, const TargetBasis& V, int precision_bits);

// Rigorous enclosure of ||grad F(W)||_2. Refuses (SingularEnclosureError)
// when any pair's sin(theta) enclosure contains 0 — including W == V, where
// every neuron is parallel to its target.
Enclosure enclose_gradient_norm(const WeightPoint& W, const TargetBasis& V, int precision_bits);

// Entrywise enclosure of the nk x nk Hessian; exactly symmetric by
// construction. Same refusal rule as the gradient enclosure.
IntervalMatrix enclose_hessian(const WeightPoint& W, const TargetBasis& V, int precision_bits);

// Lower bound on the smallest eigenvalue of a symmetric A, given as an
// enclosure matrix: an untrusted double eigendecomposition U D U^T is
// corrected by the rigorously computed eps1 + eps2 + eps3 (soundness via
// Weyl's inequality, with the eigenvector basis projected onto the orthogonal
// matrices through the inverse-sqrt binomial series).
// Throws CertRefusalError when U^T U is not diagonally dominant or the
// orthogonality defect C reaches 1.
EigenBoundReport eigen_lower_bound(const IntervalMatrix& A, int precision_bits);
EigenBoundReport eigen_lower_bound(const Matrix& A, int precision_bits);

// Exact big-integer verification of sum_k C(2k,k) C(2n-2k,n-k) == 4^n for all
// n <= n_max; the combinatorial anchor of the series argument behind eps3.
bool central_binomial_identity_check(int n_max);

// Norm extremes over the alpha-ball around W. Throws CertRefusalError
// ("degenerate_ball") when the ball can reach a zero neuron.
BallSpec make_ball(const WeightPoint& W, const TargetBasis& V, double alpha, int precision_bits);

// L_A = n / (pi w_min^2) * ( sqrt(2) (n-1) (w_max + w_min) + k v_max ):
// uniform bound on the third directional derivative over the ball, i.e. the
// Taylor-remainder constant.
Enclosure third_order_bound_LA(const BallSpec& ball, int k, int n);

// LH = 1/2 + n(n-1) (w_max / (2 pi w_min) + 1/2) + n k v_max / (2 pi w_min):
// certified bound on sup of ||hessian||_sp over the ball.
Enclosure hessian_norm_bound_LH(const BallSpec& ball, int k, int n);

// Certifies that F is thrice-differentiable on the closed alpha-ball: no
// neuron can reach zero, and no pair (w-w or w-target) can become parallel,
// by bounding each pair angle's possible travel by
// asin(alpha/||w_i||) (+ asin(alpha/||w_j||)).
bool ball_differentiability_check(const WeightPoint& W, const TargetBasis& V, double alpha, int precision_bits,
                                  std::string* detail = nullptr);

}  // namespace relucert
