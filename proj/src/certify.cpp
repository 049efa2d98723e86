#include "relucert/certify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "relucert/closed_form.hpp"

namespace relucert {

Enclosure compute_radius(const Enclosure& eps, const Enclosure& lambda_min, const Enclosure& B, double alpha) {
  const int prec = std::max({eps.precision(), lambda_min.precision(), B.precision()});
  if (!lambda_min.is_strictly_positive())
    throw CertRefusalError("lambda_not_positive", "compute_radius needs a positive lambda_min bound");
  if (!B.is_strictly_positive()) throw CertRefusalError("degenerate_bound", "compute_radius needs B > 0");
  const Enclosure disc = 9.0 * sqr(lambda_min) - 25.0 * B * eps;
  if (disc.is_strictly_negative())
    throw CertRefusalError("discriminant_negative", "9 lambda^2 - 25 B eps < 0; recertify with tighter eps");
  if (!disc.lo_nonnegative())
    throw CertRefusalError("indeterminate_discriminant", "discriminant enclosure straddles 0");
  const Enclosure r = (3.0 * lambda_min - sqrt(disc)) / (2.0 * B);
  if (!(r.hi_double() < alpha))
    throw CertRefusalError("radius_exceeds_alpha", "certified radius does not fit inside the bound ball");
  return r;
}

NonGlobalReport nonglobal_check(const Enclosure& objective, double r, double eps, const WeightPoint& W,
                                const TargetBasis& V, int precision_bits) {
  const int prec = precision_bits;
  BallSpec ball_r;
  try {
    ball_r = make_ball(W, V, r, prec);
  } catch (const CertRefusalError&) {
    throw CertRefusalError("ball_contains_origin", "r reaches the smallest neuron norm");
  }
  const Enclosure lh = hessian_norm_bound_LH(ball_r, W.k, W.n);
  const Enclosure r_enc = Enclosure::point(r, prec);
  const Enclosure rhs = sqr(r_enc) * lh + r_enc * Enclosure::point(eps, prec);
  NonGlobalReport rep;
  rep.rhs_upper = rhs.hi_double();
  rep.nonglobal = certainly_less(rhs, objective);
  rep.margin = (objective - rhs).lo_double();
  return rep;
}

namespace {

constexpr int kMaxPrecision = 4096;

Certificate certify_attempt(const WeightPoint& W, const TargetBasis& V, int prec, double alpha) {
  Certificate cert;
  cert.point = W;
  cert.k = W.k;
  cert.n = W.n;
  cert.alpha = alpha;
  cert.precision_bits = prec;

  const Enclosure eps_enc = enclose_gradient_norm(W, V, prec);
  cert.epsilon = eps_enc.hi_double();

  const IntervalMatrix H = enclose_hessian(W, V, prec);
  const EigenBoundReport eig = eigen_lower_bound(H, prec);
  if (!eig.certified)
    throw CertRefusalError("eigen_bound", "Hessian not certified positive-definite (sentinel -1)");
  cert.lambda_min = eig.lambda_min_lower;

  const BallSpec ball = make_ball(W, V, alpha, prec);
  const Enclosure B_enc = third_order_bound_LA(ball, W.k, W.n);
  cert.B = B_enc.hi_double();

  // Lemma constants are instantiated at the certified one-sided bounds.
  const Enclosure r_enc = compute_radius(Enclosure::point(cert.epsilon, prec), Enclosure::point(cert.lambda_min, prec),
                                         Enclosure::point(cert.B, prec), alpha);
  cert.r = r_enc.hi_double();

  std::string why;
  cert.differentiable_ball = ball_differentiability_check(W, V, alpha, prec, &why);

  const Enclosure F_enc = enclose_objective(W, V, prec);
  cert.objective_lo = F_enc.lo_double();
  cert.objective_hi = F_enc.hi_double();
  const NonGlobalReport ng = nonglobal_check(F_enc, cert.r, cert.epsilon, W, V, prec);
  cert.nonglobal = ng.nonglobal;
  cert.margin = ng.margin;

  const Enclosure strict_gap =
      Enclosure::point(cert.lambda_min, prec) - Enclosure::point(cert.B, prec) * Enclosure::point(cert.r, prec);
  cert.strict = strict_gap.is_strictly_positive();
  return cert;
}

}  // namespace

Outcome<Certificate> certify_point(const WeightPoint& W, const TargetBasis& V, int precision_bits) {
  double alpha = 1e-3 * W.max_row_norm();
  bool alpha_retry_used = false;
  for (int prec = precision_bits; prec <= kMaxPrecision; prec *= 2) {
    try {
      return Outcome<Certificate>::success(certify_attempt(W, V, prec, alpha));
    } catch (const CertRefusalError& e) {
      const std::string stage = e.stage;
      if (stage == "radius_exceeds_alpha" && !alpha_retry_used) {
        // Restricting alpha further barely moves the bound; growing it once
        // is the useful direction.
        alpha_retry_used = true;
        alpha *= 10.0;
        prec /= 2;  // same precision again
        continue;
      }
      const bool indeterminate = stage.rfind("indeterminate", 0) == 0;
      if (indeterminate && prec * 2 <= kMaxPrecision) continue;
      return Outcome<Certificate>::refuse(stage, e.what());
    } catch (const ZeroNeuronError& e) {
      return Outcome<Certificate>::refuse("zero_neuron", e.what());
    }
  }
  return Outcome<Certificate>::refuse("precision_exhausted", "indeterminate at maximum precision");
}

Matrix build_M(const WeightPoint& W, const TargetBasis& V) {
  const int n = W.n;
  Matrix M(n, n);
  std::vector<double> wnorm(n);
  for (int i = 0; i < n; ++i) {
    wnorm[i] = W.W.row(i).norm();
    if (wnorm[i] == 0.0) throw ZeroNeuronError("build_M: zero neuron " + std::to_string(i));
  }
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double diag = 0.5;
    for (int l = 0; l < n; ++l) {
      if (l == i) continue;
      const PairGeometry g = pair_geometry(W.row(i), W.row(l));
      diag += g.sin_theta * g.norm_v / (two_pi * g.norm_w);
    }
    for (int l = 0; l < V.k; ++l) {
      const PairGeometry g = pair_geometry(W.row(i), V.row(l));
      diag -= g.sin_theta * g.norm_v / (two_pi * g.norm_w);
    }
    M(i, i) = diag;
    for (int j = i + 1; j < n; ++j) {
      const PairGeometry g = pair_geometry(W.row(i), W.row(j));
      const double off = (std::acos(-1.0) - g.theta) / two_pi;
      M(i, j) = off;
      M(j, i) = off;
    }
  }
  return M;
}

namespace {

WeightPoint zero_pad(const WeightPoint& W, int extra) {
  WeightPoint out(W.n, W.k + extra);
  out.W.setZero();
  out.W.leftCols(W.k) = W.W;
  return out;
}

TargetBasis zero_pad(const TargetBasis& V, int extra) {
  Matrix rows = Matrix::Zero(V.k, V.dim() + extra);
  rows.leftCols(V.dim()) = V.V;
  return TargetBasis::from_rows(std::move(rows));
}

}  // namespace

Outcome<LiftReport> lift_certificate(const Certificate& cert, const TargetBasis& V, int precision_bits) {
  LiftReport rep;
  try {
    rep.M = build_M(cert.point, V);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rep.M);
    rep.spectrum_M.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());

    const WeightPoint padded = zero_pad(cert.point, 1);
    const TargetBasis padded_V = zero_pad(V, 1);
    const IntervalMatrix H = enclose_hessian(padded, padded_V, precision_bits);
    const EigenBoundReport eig = eigen_lower_bound(H, precision_bits);
    rep.lifted_lambda_min = eig.lambda_min_lower;
    rep.lift_certified = eig.certified;
    rep.m_note =
        "pad-invariant: ||w|| and all pair angles are unchanged by zero padding, and each further padded "
        "dimension only appends another copy of spec(M); the m = 1 constants therefore certify every m >= 1";
    if (!eig.certified) return Outcome<LiftReport>::refuse("eigen_bound", "padded Hessian not certified PD");
    return Outcome<LiftReport>::success(std::move(rep));
  } catch (const CertRefusalError& e) {
    return Outcome<LiftReport>::refuse(e.stage, e.what());
  } catch (const ZeroNeuronError& e) {
    return Outcome<LiftReport>::refuse("zero_neuron", e.what());
  }
}

BallCheckReport ball_disjointness_check(const std::vector<Certificate>& certs) {
  BallCheckReport rep;
  const int prec = certs.empty() ? Enclosure::kDefaultPrecision : certs.front().precision_bits;
  for (std::size_t a = 0; a < certs.size(); ++a) {
    const Certificate& ca = certs[a];
    if (ca.k != certs[0].k || ca.n != certs[0].n) {
      rep.pass = false;
      rep.failures.push_back("certificate " + std::to_string(a) + ": mismatched (k, n)");
      continue;
    }
    const Enclosure ra = Enclosure::point(ca.r, prec);
    for (int i = 0; i < ca.n; ++i) {
      const Enclosure ni = norm2(IntervalVector::exact(ca.point.row(i), prec));
      if (!certainly_less(ra, ni)) {
        rep.pass = false;
        rep.failures.push_back("certificate " + std::to_string(a) + ": neuron " + std::to_string(i) +
                               " ball may contain the origin");
      }
      for (int j = i + 1; j < ca.n; ++j) {
        IntervalVector diff(ca.k, prec);
        for (int c = 0; c < ca.k; ++c)
          diff[c] = Enclosure::point(ca.point.W(i, c), prec) - Enclosure::point(ca.point.W(j, c), prec);
        if (!certainly_less(ra * 2.0, norm2(diff))) {
          rep.pass = false;
          rep.failures.push_back("certificate " + std::to_string(a) + ": neuron balls " + std::to_string(i) + "," +
                                 std::to_string(j) + " may intersect");
        }
      }
    }
    for (std::size_t b = a + 1; b < certs.size(); ++b) {
      const Certificate& cb = certs[b];
      if (cb.k != ca.k || cb.n != ca.n) continue;
      IntervalVector diff(ca.n * ca.k, prec);
      int idx = 0;
      for (int i = 0; i < ca.n; ++i)
        for (int c = 0; c < ca.k; ++c) {
          diff[idx] = Enclosure::point(ca.point.W(i, c), prec) - Enclosure::point(cb.point.W(i, c), prec);
          ++idx;
        }
      if (!certainly_less(ra + Enclosure::point(cb.r, prec), norm2(diff))) {
        rep.pass = false;
        rep.failures.push_back("certificates " + std::to_string(a) + "," + std::to_string(b) +
                               ": enclosing balls may intersect");
      }
    }
  }
  return rep;
}

}  // namespace relucert
