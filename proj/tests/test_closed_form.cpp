#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "relucert/closed_form.hpp"
#include "reference_points.hpp"
#include "test_util.hpp"

using namespace relucert;
using testutil::random_nonsingular;

namespace {
constexpr double kPi = std::numbers::pi;

Vector e(int i, int k) {
  Vector v = Vector::Zero(k);
  v[i] = 1.0;
  return v;
}
}  // namespace

TEST_CASE("pair_geometry basic angles") {
  auto g = pair_geometry(e(0, 2), e(1, 2));
  CHECK(g.theta == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(!g.parallel);
  CHECK((g.n_bar_vw - e(1, 2)).norm() < 1e-15);

  Vector w(3);
  w << 0.3, -1.1, 0.7;
  auto same = pair_geometry(w, w);
  CHECK(same.parallel);
  CHECK(same.theta == 0.0);
  CHECK(same.sin_theta == 0.0);

  Vector a(2), b(2);
  a << 1.0, 0.0;
  b << -1.0, 0.0;
  auto anti = pair_geometry(a, b);
  CHECK(anti.parallel);
  CHECK(anti.theta == doctest::Approx(kPi));

  CHECK_THROWS_AS(pair_geometry(Vector::Zero(2), a), ZeroNeuronError);
}

TEST_CASE("pair_geometry residual norm equals sin theta") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 200; ++trial) {
    Vector w(4), v(4);
    for (int i = 0; i < 4; ++i) {
      w[i] = gauss(rng);
      v[i] = gauss(rng);
    }
    if (w.norm() < 1e-3 || v.norm() < 1e-3) continue;
    auto g = pair_geometry(w, v);
    if (g.parallel) continue;
    CHECK(g.n_vw.norm() == doctest::Approx(g.sin_theta).epsilon(1e-10));
    CHECK(g.sin_theta >= 0.0);
  }
}

TEST_CASE("kernel_f closed-form values") {
  CHECK(kernel_f(e(0, 2), e(1, 2)) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-15));
  Vector w(3);
  w << 1.5, -0.25, 2.0;
  CHECK(kernel_f(w, w) == doctest::Approx(w.squaredNorm() / 2.0).epsilon(1e-14));
  Vector a(1), b(1);
  a << 1.0;
  b << -1.0;
  CHECK(kernel_f(a, b) == 0.0);
  CHECK_THROWS_AS(kernel_f(Vector::Zero(3), w), ZeroNeuronError);
}

TEST_CASE("kernel_f equals the Gaussian expectation (MC spot check)") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    WeightPoint W = random_nonsingular(2, 3, rng);
    Vector w = W.row(0), v = W.row(1);
    // Direct MC of E[relu(w.x) relu(v.x)].
    std::mt19937_64 mc(99 + trial);
    std::normal_distribution<double> gauss;
    double acc = 0.0;
    const int N = 400000;
    for (int s = 0; s < N; ++s) {
      Vector x(3);
      for (int i = 0; i < 3; ++i) x[i] = gauss(mc);
      acc += std::max(0.0, w.dot(x)) * std::max(0.0, v.dot(x));
    }
    CHECK(kernel_f(w, v) == doctest::Approx(acc / N).epsilon(0.02));
  }
}

TEST_CASE("kernel_grad_g values and limits") {
  Vector w(2);
  w << 0.8, -0.6;
  CHECK((kernel_grad_g(w, w) - 0.5 * w).norm() == 0.0);

  Vector g = kernel_grad_g(e(0, 2), e(1, 2));
  Vector expect = (1.0 / (2.0 * kPi)) * e(0, 2) + 0.25 * e(1, 2);
  CHECK((g - expect).norm() < 1e-15);

  Vector two_e1 = 2.0 * e(0, 2);
  CHECK((kernel_grad_g(e(0, 2), two_e1) - e(0, 2)).norm() == 0.0);
}

TEST_CASE("h1 block: spectrum and null direction") {
  Matrix h = hess_block_h1(e(0, 2), e(1, 2));
  CHECK(h(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h(1, 1) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
  CHECK(std::abs(h(0, 1)) < 1e-16);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    WeightPoint P = random_nonsingular(2, 5, rng);
    Vector w = P.row(0), v = P.row(1);
    auto g = pair_geometry(w, v);
    Matrix h1 = hess_block_h1(w, v);
    CHECK((h1 * g.w_bar).norm() < 1e-14);

    Eigen::SelfAdjointEigenSolver<Matrix> es(h1);
    Vector ev = es.eigenvalues();
    const double big = g.sin_theta * g.norm_v / (kPi * g.norm_w);
    const double mid = big / 2.0;
    // spectrum {0, big, mid x (k-2)} sorted ascending
    std::vector<double> expect{0.0, mid, mid, mid, big};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(ev[i] - expect[i]) < 1e-10);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(big).epsilon(1e-12));
  }
}

TEST_CASE("h2 block: spectral norm and eigenvectors") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    WeightPoint P = random_nonsingular(2, 4, rng);
    Vector w = P.row(0), v = P.row(1);
    auto g = pair_geometry(w, v);
    Matrix h2 = hess_block_h2(w, v);
    CHECK((h2 - hess_block_h2(v, w).transpose()).cwiseAbs().maxCoeff() < 1e-14);

    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (h2 + h2.transpose())));
    const double sp = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(std::abs(sp - (kPi - g.theta + g.sin_theta) / (2.0 * kPi)) < 1e-10);

    Vector n_wv = (g.w_bar - g.cos_theta * g.v_bar);
    n_wv /= n_wv.norm();
    Vector minus = n_wv - g.n_bar_vw;
    Vector lhs = h2 * minus;
    const double lam = (kPi - g.theta - g.sin_theta) / (2.0 * kPi);
    CHECK((lhs - lam * minus).norm() < 1e-12);
  }
  // theta = pi/2 largest eigenvalue
  Matrix h2 = hess_block_h2(e(0, 3), e(1, 3));
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (h2 + h2.transpose())));
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx((kPi / 2 + 1) / (2 * kPi)).epsilon(1e-12));
}

TEST_CASE("objective_F reference values") {
  TargetBasis V = TargetBasis::standard(4);
  WeightPoint W(Matrix(V.V));
  CHECK(objective_F(W, V) == 0.0);

  TargetBasis V1 = TargetBasis::standard(1);
  WeightPoint Wneg(1, 1);
  Wneg.W(0, 0) = -1.0;
  CHECK(objective_F(Wneg, V1) == doctest::Approx(0.5).epsilon(1e-15));

  WeightPoint Wtwo(1, 1);
  Wtwo.W(0, 0) = 2.0;
  CHECK(objective_F(Wtwo, V1) == doctest::Approx(0.25).epsilon(1e-15));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    WeightPoint R = random_nonsingular(3, 3, rng);
    CHECK(objective_F(R, TargetBasis::standard(3)) >= 0.0);
  }
}

TEST_CASE("gradient_F vanishes at the global minimum") {
  TargetBasis V = TargetBasis::standard(3);
  WeightPoint W(Matrix(V.V));
  CHECK(gradient_F(W, V).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient_F on the scaled-target ray matches the 1-D restriction") {
  // n = k = 1, w = s v: F(s v) = (s - 1)^2 / 4, so dF/ds = (s - 1) / 2.
  TargetBasis V1 = TargetBasis::standard(1);
  for (double s : {0.5, 1.0, 2.0, 3.25}) {
    WeightPoint W(1, 1);
    W.W(0, 0) = s;
    CHECK(objective_F(W, V1) == doctest::Approx((s - 1.0) * (s - 1.0) / 4.0).epsilon(1e-14));
    Matrix g = gradient_F(W, V1);
    CHECK(g(0, 0) == doctest::Approx((s - 1.0) / 2.0).epsilon(1e-14));
    CHECK(std::abs(g(0, 0) - fd_gradient_oracle(W, V1)(0, 0)) < 1e-9);
  }
}

TEST_CASE("gradient_F agrees with central differences") {
  std::mt19937_64 rng(13);
  TargetBasis V = TargetBasis::standard(3);
  for (int trial = 0; trial < 5; ++trial) {
    WeightPoint W = random_nonsingular(3, 3, rng);
    Matrix g = gradient_F(W, V);
    Matrix fd = fd_gradient_oracle(W, V);
    const double rel = (g - fd).norm() / std::max(1e-12, fd.norm());
    CHECK(rel <= 1e-6);
  }
}

TEST_CASE("hessian_F matches hand value at a half-parallel point") {
  // one neuron at e1 against targets {e1, e2}: the parallel h1 term is the
  // zero limit, leaving 1/2 I - h1(e1, e2) = diag(1/2, 1/2 - 1/pi).
  TargetBasis V = TargetBasis::standard(2);
  WeightPoint W(1, 2);
  W.W(0, 0) = 1.0;
  Matrix H = hessian_F(W, V);
  CHECK(H(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(H(1, 1) == doctest::Approx(0.5 - 1.0 / kPi).epsilon(1e-14));
  CHECK(std::abs(H(0, 1)) < 1e-16);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.18169).epsilon(1e-4));
}

TEST_CASE("hessian_F agrees with finite differences of the gradient") {
  std::mt19937_64 rng(17);
  TargetBasis V = TargetBasis::standard(2);
  for (int trial = 0; trial < 5; ++trial) {
    WeightPoint W = random_nonsingular(2, 2, rng);
    Matrix H = hessian_F(W, V);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Matrix fd = fd_hessian_oracle(W, V);
    CHECK((H - fd).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("hessian_F rejects parallel neuron pairs") {
  TargetBasis V = TargetBasis::standard(2);
  WeightPoint W(2, 2);
  W.W << 1.0, 0.5, 2.0, 1.0;  // second row = 2 x first
  CHECK_THROWS_AS(hessian_F(W, V), SingularPairError);
}

TEST_CASE("mc oracle hits closed-form targets") {
  TargetBasis V = TargetBasis::standard(2);
  WeightPoint W(Matrix(V.V));
  CHECK(mc_objective_oracle(W, V, 2000, 1) == 0.0);

  TargetBasis V1 = TargetBasis::standard(1);
  WeightPoint Wneg(1, 1);
  Wneg.W(0, 0) = -1.0;
  CHECK(mc_objective_oracle(Wneg, V1, 200000, 2) == doctest::Approx(0.5).epsilon(0.02));

  WeightPoint Wtwo(1, 1);
  Wtwo.W(0, 0) = 2.0;
  CHECK(mc_objective_oracle(Wtwo, V1, 200000, 3) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("mc oracle brackets the closed form within 3 standard errors") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 3);
    const int n = k + static_cast<int>(rng() % 2);
    WeightPoint W = random_nonsingular(n, k, rng);
    TargetBasis V = TargetBasis::standard(k);
    const double F = objective_F(W, V);
    McEstimate est = mc_objective_stats(W, V, 200000, 1000 + trial);
    CHECK(std::abs(F - est.mean) <= 3.0 * est.std_error);
  }
}

TEST_CASE("fd oracles are self-consistent") {
  TargetBasis V4 = TargetBasis::standard(4);
  WeightPoint W4(Matrix(V4.V));
  CHECK(fd_gradient_oracle(W4, V4).cwiseAbs().maxCoeff() < 1e-9);

  std::mt19937_64 rng(29);
  WeightPoint W = random_nonsingular(4, 4, rng);
  Matrix g = gradient_F(W, V4);
  Matrix fd = fd_gradient_oracle(W, V4);
  CHECK((g - fd).norm() / fd.norm() <= 1e-6);

  TargetBasis V3 = TargetBasis::standard(3);
  WeightPoint W3 = random_nonsingular(3, 3, rng);
  CHECK((hessian_F(W3, V3) - fd_hessian_oracle(W3, V3)).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("serial and OpenMP kernels are bit-identical") {
  std::mt19937_64 rng(31);
  TargetBasis V = TargetBasis::standard(4);
  for (int trial = 0; trial < 5; ++trial) {
    WeightPoint W = random_nonsingular(5, 4, rng);
    CHECK(objective_F(W, V) == serial::objective_F(W, V));
    CHECK((gradient_F(W, V) - serial::gradient_F(W, V)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((hessian_F(W, V) - serial::hessian_F(W, V)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(mc_objective_oracle(W, V, 70000, 5) == serial::mc_objective_oracle(W, V, 70000, 5));
    double f1 = 0.0, f2 = 0.0;
    Matrix g1, g2;
    objective_and_gradient(W, V, &f1, &g1);
    serial::objective_and_gradient(W, V, &f2, &g2);
    CHECK(f1 == f2);
    CHECK(f1 == objective_F(W, V));
    CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g1 - gradient_F(W, V)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("known k6 minimum: objective and Hessian floor") {
  WeightPoint W = testutil::known_minimum_k6_n6();
  TargetBasis V = TargetBasis::standard(6);
  const double F = objective_F(W, V);
  CHECK(F == doctest::Approx(0.025).epsilon(0.02));
  Eigen::SelfAdjointEigenSolver<Matrix> es(hessian_F(W, V));
  CHECK(es.eigenvalues()[0] > 0.0);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.0047).epsilon(0.5));
}
