#include "relucert/rigor.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace relucert {

namespace {

struct PairEnclosure {
  Enclosure norm_w;
  Enclosure norm_v;
  Enclosure cos_t;
  Enclosure theta;
  Enclosure sin_t;
  IntervalVector w_bar;
  IntervalVector v_bar;
  IntervalVector n_bar_vw;
  IntervalVector n_bar_wv;
};

IntervalVector scale(const IntervalVector& x, const Enclosure& c) {
  IntervalVector out(x.size(), c.precision());
  for (int i = 0; i < x.size(); ++i) out[i] = x[i] * c;
  return out;
}

// Geometry of one pair in interval arithmetic. No clamping: the cosine
// enclosure is intersected with the acos domain, which preserves containment
// because the true value is a cosine. When `need_residuals` is set the pair
// must be certifiably non-parallel (sin enclosure strictly positive).
PairEnclosure pair_enclosure(const IntervalVector& w, const IntervalVector& v, int prec, bool need_residuals,
                             int i, int j, bool against_target) {
  PairEnclosure p;
  p.norm_w = norm2(w);
  p.norm_v = norm2(v);
  if (!p.norm_w.is_strictly_positive() || !p.norm_v.is_strictly_positive())
    throw SingularEnclosureError("zero-norm enclosure in pair (" + std::to_string(i) + "," + std::to_string(j) + ")",
                                 i, j, against_target);
  p.cos_t = dot(w, v) / (p.norm_w * p.norm_v);
  p.theta = acos(p.cos_t);
  p.sin_t = sin_on_0_pi(p.theta);
  if (need_residuals) {
    if (!p.sin_t.is_strictly_positive())
      throw SingularEnclosureError("sin(theta) enclosure contains 0 for pair (" + std::to_string(i) + "," +
                                       std::to_string(j) + (against_target ? ") [w-target]" : ") [w-w]"),
                                   i, j, against_target);
    p.w_bar = IntervalVector(w.size(), prec);
    p.v_bar = IntervalVector(w.size(), prec);
    p.n_bar_vw = IntervalVector(w.size(), prec);
    p.n_bar_wv = IntervalVector(w.size(), prec);
    for (int a = 0; a < w.size(); ++a) {
      p.w_bar[a] = w[a] / p.norm_w;
      p.v_bar[a] = v[a] / p.norm_v;
    }
    // ||v_bar - cos w_bar|| == sin(theta) exactly, so dividing by the sin
    // enclosure is a valid normalization.
    for (int a = 0; a < w.size(); ++a) {
      p.n_bar_vw[a] = (p.v_bar[a] - p.cos_t * p.w_bar[a]) / p.sin_t;
      p.n_bar_wv[a] = (p.w_bar[a] - p.cos_t * p.v_bar[a]) / p.sin_t;
    }
  }
  return p;
}

Enclosure pair_f_enc(const PairEnclosure& p, int prec) {
  const Enclosure pi = Enclosure::pi(prec);
  const Enclosure two_pi = pi * 2.0;
  return p.norm_w * p.norm_v * ((p.sin_t + (pi - p.theta) * p.cos_t) / two_pi);
}

std::vector<IntervalVector> exact_rows(const Matrix& m, int prec) {
  std::vector<IntervalVector> rows;
  rows.reserve(m.rows());
  for (int i = 0; i < m.rows(); ++i) rows.push_back(IntervalVector::exact(m.row(i).transpose(), prec));
  return rows;
}

}  // namespace

Enclosure enclose_objective(const WeightPoint& W, const TargetBasis& V, int precision_bits) {
  const int prec = precision_bits;
  const auto wr = exact_rows(W.W, prec);
  const auto vr = exact_rows(V.V, prec);
  // Self-pairs are evaluated as f(w,w) = ||w||^2 / 2 directly; going through
  // acos at cos = 1 would cost a sqrt-of-width blowup for no reason.
  auto self_f = [&](const IntervalVector& w) { return dot(w, w) / 2.0; };
  Enclosure ww(prec), wv(prec), vv(prec);
  for (int i = 0; i < W.n; ++i)
    for (int j = 0; j < W.n; ++j)
      ww = ww + (i == j ? self_f(wr[i]) : pair_f_enc(pair_enclosure(wr[i], wr[j], prec, false, i, j, false), prec));
  for (int i = 0; i < W.n; ++i)
    for (int j = 0; j < V.k; ++j) wv = wv + pair_f_enc(pair_enclosure(wr[i], vr[j], prec, false, i, j, true), prec);
  for (int i = 0; i < V.k; ++i)
    for (int j = 0; j < V.k; ++j)
      vv = vv + (i == j ? self_f(vr[i]) : pair_f_enc(pair_enclosure(vr[i], vr[j], prec, false, i, j, true), prec));
  return ww * 0.5 - wv + vv * 0.5;
}

namespace {

// g(w,v) = (||v|| sin(t) / (2 pi ||w||)) w_bar ... assembled as coefficients
// on w and v directly. Requires a certifiably non-parallel pair, matching the
// refusal semantics of the certification pipeline.
void accumulate_g(const PairEnclosure& p, const IntervalVector& w, const IntervalVector& v, double sign,
                  IntervalVector* acc, int prec) {
  const Enclosure two_pi = Enclosure::pi(prec) * 2.0;
  const Enclosure coef_w = (p.norm_v * p.sin_t) / (two_pi * p.norm_w);
  const Enclosure coef_v = (Enclosure::pi(prec) - p.theta) / two_pi;
  for (int a = 0; a < w.size(); ++a)
    (*acc)[a] = (*acc)[a] + sign * (coef_w * w[a] + coef_v * v[a]);
}

}  // namespace

Enclosure enclose_gradient_norm(const WeightPoint& W, const TargetBasis& V, int precision_bits) {
  const int prec = precision_bits;
  const auto wr = exact_rows(W.W, prec);
  const auto vr = exact_rows(V.V, prec);
  Enclosure acc_sq(prec);
  for (int i = 0; i < W.n; ++i) {
    IntervalVector block(W.k, prec);
    for (int a = 0; a < W.k; ++a) block[a] = wr[i][a] * 0.5;
    for (int j = 0; j < W.n; ++j) {
      if (j == i) continue;
      const PairEnclosure p = pair_enclosure(wr[i], wr[j], prec, true, i, j, false);
      accumulate_g(p, wr[i], wr[j], 1.0, &block, prec);
    }
    for (int j = 0; j < V.k; ++j) {
      const PairEnclosure p = pair_enclosure(wr[i], vr[j], prec, true, i, j, true);
      accumulate_g(p, wr[i], vr[j], -1.0, &block, prec);
    }
    for (int a = 0; a < W.k; ++a) acc_sq = acc_sq + sqr(block[a]);
  }
  return sqrt(acc_sq);
}

IntervalMatrix enclose_hessian(const WeightPoint& W, const TargetBasis& V, int precision_bits) {
  const int prec = precision_bits;
  const int n = W.n;
  const int k = W.k;
  const auto wr = exact_rows(W.W, prec);
  const auto vr = exact_rows(V.V, prec);
  const Enclosure pi = Enclosure::pi(prec);
  const Enclosure two_pi = pi * 2.0;
  IntervalMatrix H(n * k, n * k, prec);

  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      // diagonal block: 1/2 I + sum_{j != i} h1(w_i, w_j) - sum_j h1(w_i, v_j)
      std::vector<Enclosure> diag(static_cast<std::size_t>(k) * k, Enclosure(prec));
      for (int a = 0; a < k; ++a) diag[a * k + a] = Enclosure::point(0.5, prec);
      auto add_h1 = [&](const PairEnclosure& p, double sign) {
        const Enclosure pref = (p.sin_t * p.norm_v) / (two_pi * p.norm_w) * sign;
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) {
            Enclosure term = p.n_bar_vw[a] * p.n_bar_vw[b] - p.w_bar[a] * p.w_bar[b];
            if (a == b) term = term + 1.0;
            diag[a * k + b] = diag[a * k + b] + pref * term;
          }
      };
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const PairEnclosure p = pair_enclosure(wr[i], wr[j], prec, true, i, j, false);
        add_h1(p, 1.0);
        // off-diagonal block (i, j): h2(w_i, w_j)
        const Enclosure coef = (pi - p.theta) / two_pi;
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) {
            Enclosure e = (p.n_bar_wv[a] * p.v_bar[b] + p.n_bar_vw[a] * p.w_bar[b]) / two_pi;
            if (a == b) e = e + coef;
            H.at(i * k + a, j * k + b) = e;
          }
      }
      for (int j = 0; j < V.k; ++j) {
        const PairEnclosure p = pair_enclosure(wr[i], vr[j], prec, true, i, j, true);
        add_h1(p, -1.0);
      }
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) H.at(i * k + a, i * k + b) = diag[a * k + b];
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Mirror the upper triangle; both triangles enclose the true symmetric
  // value, so this only tightens and makes symmetry literal.
  for (int p = 0; p < n * k; ++p)
    for (int q = p + 1; q < n * k; ++q) H.at(q, p) = H.at(p, q);
  return H;
}

EigenBoundReport eigen_lower_bound(const IntervalMatrix& A, int precision_bits) {
  const int prec = precision_bits;
  const int d = A.rows;
  EigenBoundReport rep;
  rep.precision_bits = prec;

  const Matrix A_mid = A.mid();
  const Enclosure eps1 = frobenius_distance_upper(A, A_mid, prec);

  Eigen::SelfAdjointEigenSolver<Matrix> es(A_mid);
  const Matrix U = es.eigenvectors();
  const Vector D = es.eigenvalues();

  // A'' = U D U^T, recomputed rigorously from the untrusted hint.
  const IntervalMatrix Ue = IntervalMatrix::exact(U, prec);
  IntervalMatrix UD(d, d, prec);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) UD.at(r, c) = Ue.at(r, c) * Enclosure::point(D[c], prec);
  IntervalMatrix Ut(d, d, prec);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) Ut.at(r, c) = Ue.at(c, r);
  const IntervalMatrix App = matmul(UD, Ut);
  const Enclosure eps2 = frobenius_distance_upper(App, A_mid, prec);

  const IntervalMatrix UtU = matmul(Ut, Ue);
  IntervalMatrix E(d, d, prec);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      Enclosure e = -UtU.at(r, c);
      if (r == c) e = e + 1.0;
      E.at(r, c) = e;
    }

  // Diagonal dominance of U^T U, the precondition of the series expansion.
  rep.dominant_ok = true;
  for (int r = 0; r < d && rep.dominant_ok; ++r) {
    Enclosure off(prec);
    for (int c = 0; c < d; ++c) {
      if (c == r) continue;
      off = off + abs(UtU.at(r, c));
    }
    if (!certainly_less(off, UtU.at(r, r))) rep.dominant_ok = false;
  }
  if (!rep.dominant_ok) throw CertRefusalError("not_diagonally_dominant", "U^T U failed diagonal dominance");

  const Enclosure C = frobenius_distance_upper(E, Matrix::Zero(d, d), prec);
  Matrix eye = Matrix::Identity(d, d);
  const Enclosure Bnorm = frobenius_distance_upper(IntervalMatrix::exact(U, prec), eye, prec) + 1.0;

  const Enclosure one_minus_C = 1.0 - C;
  if (!one_minus_C.is_strictly_positive())
    throw CertRefusalError("c_enclosure_too_large", "orthogonality defect C reaches 1");

  double lam_min_d = D[0];
  double lam_abs_max = 0.0;
  for (int i = 0; i < d; ++i) {
    lam_min_d = std::min(lam_min_d, D[i]);
    lam_abs_max = std::max(lam_abs_max, std::abs(D[i]));
  }
  // ||D||_sp plus the eps1+eps2 slack; the spectral norm (not the top diagonal
  // entry) keeps eps3 valid when D has negative entries.
  const Enclosure lam_max = Enclosure::point(lam_abs_max, prec) + eps1 + eps2;
  const Enclosure s = 1.0 / sqrt(one_minus_C) - 1.0;
  const Enclosure eps3 = sqr(Bnorm) * (2.0 * lam_max * s + sqr(s));

  const Enclosure bound = Enclosure::point(lam_min_d, prec) - eps1 - eps2 - eps3;

  rep.eps1 = eps1.hi_double();
  rep.eps2 = eps2.hi_double();
  rep.eps3 = eps3.hi_double();
  rep.B_orth = Bnorm.hi_double();
  rep.C_orth = C.hi_double();
  if (bound.lo_double() > 0.0) {
    rep.lambda_min_lower = bound.lo_double();
    rep.certified = true;
  } else {
    rep.lambda_min_lower = -1.0;
    rep.certified = false;
  }
  return rep;
}

EigenBoundReport eigen_lower_bound(const Matrix& A, int precision_bits) {
  return eigen_lower_bound(IntervalMatrix::exact(A, precision_bits), precision_bits);
}

bool central_binomial_identity_check(int n_max) {
  using u128 = unsigned __int128;
  // central binomials C(2m, m) for m <= n_max via the multiplicative formula
  std::vector<u128> central(n_max + 1, 1);
  for (int m = 1; m <= n_max; ++m) {
    // C(2m, m) = C(2m-2, m-1) * (2m-1) * 2 / m
    central[m] = central[m - 1] * (2 * m - 1) * 2 / static_cast<u128>(m);
  }
  for (int n = 0; n <= n_max; ++n) {
    u128 sum = 0;
    for (int j = 0; j <= n; ++j) sum += central[j] * central[n - j];
    const u128 four_n = u128(1) << (2 * n);
    if (sum != four_n) return false;
  }
  return true;
}

BallSpec make_ball(const WeightPoint& W, const TargetBasis& V, double alpha, int precision_bits) {
  const int prec = precision_bits;
  BallSpec ball;
  ball.center = W;
  ball.alpha = alpha;
  bool first = true;
  Enclosure lo(prec), hi(prec);
  for (int i = 0; i < W.n; ++i) {
    const Enclosure nw = norm2(IntervalVector::exact(W.row(i), prec));
    if (first) {
      lo = nw;
      hi = nw;
      first = false;
    } else {
      lo = min(lo, nw);
      hi = max(hi, nw);
    }
  }
  // A total perturbation of norm alpha moves each neuron by at most alpha.
  ball.w_min = lo - Enclosure::point(alpha, prec);
  ball.w_max = hi + Enclosure::point(alpha, prec);
  if (!ball.w_min.is_strictly_positive())
    throw CertRefusalError("degenerate_ball", "alpha-ball may contain a zero neuron");
  first = true;
  for (int j = 0; j < V.k; ++j) {
    const Enclosure nv = norm2(IntervalVector::exact(V.row(j), prec));
    ball.v_max = first ? nv : max(ball.v_max, nv);
    first = false;
  }
  return ball;
}

Enclosure third_order_bound_LA(const BallSpec& ball, int k, int n) {
  const int prec = ball.w_min.precision();
  if (!ball.w_min.is_strictly_positive()) throw CertRefusalError("degenerate_ball", "w_min enclosure touches 0");
  const Enclosure pi = Enclosure::pi(prec);
  const Enclosure sqrt2 = sqrt(Enclosure::point(2.0, prec));
  const Enclosure lead = Enclosure::point(n, prec) / (pi * sqr(ball.w_min));
  return lead * (sqrt2 * static_cast<double>(n - 1) * (ball.w_max + ball.w_min) +
                 Enclosure::point(k, prec) * ball.v_max);
}

Enclosure hessian_norm_bound_LH(const BallSpec& ball, int k, int n) {
  const int prec = ball.w_min.precision();
  if (!ball.w_min.is_strictly_positive()) throw CertRefusalError("degenerate_ball", "w_min enclosure touches 0");
  const Enclosure two_pi = Enclosure::pi(prec) * 2.0;
  const Enclosure half = Enclosure::point(0.5, prec);
  const Enclosure pair_term = ball.w_max / (two_pi * ball.w_min) + half;
  const Enclosure target_term = (Enclosure::point(n, prec) * Enclosure::point(k, prec) * ball.v_max) /
                                (two_pi * ball.w_min);
  return half + Enclosure::point(n, prec) * Enclosure::point(n - 1, prec) * pair_term + target_term;
}

namespace {

Enclosure asin_upper(const Enclosure& x, int prec) {
  // asin(x) = pi/2 - acos(x), monotone pieces handled by the interval acos.
  return Enclosure::pi(prec) / 2.0 - acos(x);
}

}  // namespace

bool ball_differentiability_check(const WeightPoint& W, const TargetBasis& V, double alpha, int precision_bits,
                                  std::string* detail) {
  const int prec = precision_bits;
  const auto set_detail = [&](const std::string& s) {
    if (detail) *detail = s;
  };
  const Enclosure a = Enclosure::point(alpha, prec);
  std::vector<Enclosure> travel;  // per-neuron angular travel bound
  travel.reserve(W.n);
  for (int i = 0; i < W.n; ++i) {
    const Enclosure nw = norm2(IntervalVector::exact(W.row(i), prec));
    const Enclosure margin = nw - a;
    if (!margin.is_strictly_positive()) {
      set_detail("neuron " + std::to_string(i) + ": alpha-ball reaches the origin");
      return false;
    }
    const Enclosure ratio = a / nw;
    if (!(ratio.hi_double() < 1.0)) {
      set_detail("neuron " + std::to_string(i) + ": angular travel unbounded");
      return false;
    }
    travel.push_back(asin_upper(ratio, prec));
  }
  const Enclosure pi = Enclosure::pi(prec);
  auto angle_ok = [&](const Enclosure& theta, const Enclosure& delta) {
    const Enclosure lo = theta - delta;
    const Enclosure hi = theta + delta;
    return lo.is_strictly_positive() && certainly_less(hi, pi);
  };
  const auto wr = exact_rows(W.W, prec);
  const auto vr = exact_rows(V.V, prec);
  for (int i = 0; i < W.n; ++i) {
    for (int j = i + 1; j < W.n; ++j) {
      const PairEnclosure p = pair_enclosure(wr[i], wr[j], prec, false, i, j, false);
      if (!angle_ok(p.theta, travel[i] + travel[j])) {
        set_detail("neurons " + std::to_string(i) + "," + std::to_string(j) + " may become parallel in the ball");
        return false;
      }
    }
    for (int j = 0; j < V.k; ++j) {
      const PairEnclosure p = pair_enclosure(wr[i], vr[j], prec, false, i, j, true);
      if (!angle_ok(p.theta, travel[i])) {
        set_detail("neuron " + std::to_string(i) + " may become parallel to target " + std::to_string(j));
        return false;
      }
    }
  }
  set_detail("");
  return true;
}

}  // namespace relucert
