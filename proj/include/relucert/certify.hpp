#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relucert/enclosure.hpp"
#include "relucert/rigor.hpp"
#include "relucert/types.hpp"

namespace relucert {

// One member of a dedup class covered by the representative's certificate,
// with the aligned distance the Lipschitz transfer is taken over.
struct TransferLink {
  int member_index = -1;
  double distance = 0.0;
};

// The complete rigorous record proving a strict, non-global local minimum
// within distance r of `point`. All scalar fields are certified one-sided
// bounds (upper for epsilon/B/r, lower for lambda_min/margin).
struct Certificate {
  WeightPoint point;
  int k = 0;
  int n = 0;
  double epsilon = 0.0;      // >= ||grad F(point)||
  double lambda_min = 0.0;   // <= lambda_min(hessian at point)
  double B = 0.0;            // >= third-order bound on the alpha-ball
  double alpha = 0.0;
  double r = 0.0;            // an exact local minimum lies within r
  double objective_lo = 0.0;
  double objective_hi = 0.0;
  double margin = 0.0;       // certified lower bound on F over the r-ball
  bool nonglobal = false;
  bool differentiable_ball = false;
  bool strict = false;       // lambda_min - B r > 0 throughout the ball
  int precision_bits = 0;
  std::vector<TransferLink> transfer_chain;

  bool fully_certified() const { return nonglobal && differentiable_ball && strict; }
};

struct Refusal {
  std::string stage;
  std::string detail;
};

// Refusals are inconclusive by construction: the pipeline certifies
// existence, never absence.
template <typename T>
struct Outcome {
  std::optional<T> value;
  Refusal refusal;

  bool ok() const { return value.has_value(); }
  static Outcome success(T v) {
    Outcome o;
    o.value = std::move(v);
    return o;
  }
  static Outcome refuse(std::string stage, std::string detail) {
    Outcome o;
    o.refusal = {std::move(stage), std::move(detail)};
    return o;
  }
};

// r := (3 lam - sqrt(9 lam^2 - 25 B eps)) / (2 B) in outward-rounded
// arithmetic; the returned enclosure's hi is the certified radius. Throws
// CertRefusalError with stage "discriminant_negative", "radius_exceeds_alpha"
// or "indeterminate_*" (enclosure straddles the deciding inequality).
Enclosure compute_radius(const Enclosure& eps, const Enclosure& lambda_min, const Enclosure& B, double alpha);

struct NonGlobalReport {
  bool nonglobal = false;
  double margin = 0.0;     // objective_lo - rhs_upper
  double rhs_upper = 0.0;  // r^2 LH(r-ball) + r eps
};

// The non-globality test: F(point) must certifiably exceed the largest drop
// the objective can take over the r-ball. Throws CertRefusalError
// ("ball_contains_origin") when r reaches the smallest neuron norm.
NonGlobalReport nonglobal_check(const Enclosure& objective, double r, double eps, const WeightPoint& W,
                                const TargetBasis& V, int precision_bits);

// The full decision procedure: alpha = 1e-3 max_i ||w_i||, then
// eps -> lambda_min -> B -> r -> differentiability -> non-globality ->
// strictness. Retries once with alpha x 10 when r >= alpha, and doubles the
// precision (up to 4096 bits) when a deciding inequality is indeterminate.
Outcome<Certificate> certify_point(const WeightPoint& W, const TargetBasis& V, int precision_bits);

// The n x n matrix whose spectrum (with multiplicity m) is appended to the
// Hessian spectrum when the problem is lifted by m zero-padded dimensions.
Matrix build_M(const WeightPoint& W, const TargetBasis& V);

struct LiftReport {
  Matrix M;
  std::vector<double> spectrum_M;
  bool lift_certified = false;
  double lifted_lambda_min = -1.0;
  std::string m_note;
};

// Certifies the m = 1 zero-padded point by running the eigenvalue bound on
// the padded Hessian; by the block structure the same constants then certify
// every m >= 1.
Outcome<LiftReport> lift_certificate(const Certificate& cert, const TargetBasis& V, int precision_bits);

struct BallCheckReport {
  bool pass = true;
  std::vector<std::string> failures;
};

// Origin exclusion and ball disjointness, with enclosures: per certificate
// every neuron ball of radius r must exclude the origin and stay disjoint
// from the other neuron balls of the same point; across certificates the
// r-balls in R^{nk} must not intersect.
BallCheckReport ball_disjointness_check(const std::vector<Certificate>& certs);

}  // namespace relucert
