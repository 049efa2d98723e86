#include <doctest.h>

#include <cmath>
#include <random>

#include "relucert/closed_form.hpp"
#include "relucert/search.hpp"
#include "reference_points.hpp"

using namespace relucert;

TEST_CASE("xavier_init: distribution and determinism") {
  std::mt19937_64 rng(123);
  const int k = 10;
  // 1e5 coordinate draws
  WeightPoint W = xavier_init(k, 10000, rng);
  const double mean = W.W.mean();
  const double var = (W.W.array() - mean).square().mean();
  CHECK(var == doctest::Approx(0.1).epsilon(0.05));
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(0.1 / (10000.0 * k)));

  std::mt19937_64 r1(5), r2(5);
  WeightPoint a = xavier_init(4, 3, r1);
  WeightPoint b = xavier_init(4, 3, r2);
  CHECK((a.W - b.W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gd_run from the global minimum stops immediately") {
  TargetBasis V = TargetBasis::standard(4);
  GDConfig cfg;
  cfg.k = 4;
  cfg.n = 4;
  RunRecord rec = gd_run_from(cfg, V, WeightPoint(Matrix(V.V)));
  CHECK(rec.iterations == 0);
  CHECK(rec.objective == 0.0);
  CHECK(rec.classification == RunClass::GlobalLike);
  CHECK(rec.descent_violations == 0);
}

TEST_CASE("gd_run determinism: same seed, same bits") {
  TargetBasis V = TargetBasis::standard(3);
  GDConfig cfg;
  cfg.k = 3;
  cfg.n = 3;
  cfg.seed = 99;
  cfg.max_iters = 30000;
  RunRecord a = gd_run(cfg, V);
  RunRecord b = gd_run(cfg, V);
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective == b.objective);
  CHECK((a.terminal.W - b.terminal.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.classification == b.classification);
}

TEST_CASE("gd descent is monotone on converged small runs") {
  TargetBasis V = TargetBasis::standard(4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GDConfig cfg;
    cfg.k = 4;
    cfg.n = 4;
    cfg.seed = seed;
    cfg.max_iters = 60000;
    RunRecord rec = gd_run(cfg, V);
    CHECK(rec.descent_violations == 0);
    CHECK(!rec.singular_abort);
    if (rec.classification != RunClass::Unconverged) CHECK(rec.max_neuron_grad_norm <= cfg.grad_tol);
  }
}

TEST_CASE("antipodal single neuron slides into the origin, not to the target") {
  // On the ray w = -t v the gradient is w/2: plain GD keeps shrinking the
  // neuron and converges (by gradient norm) next to the origin with
  // F ~ 1/4, a candidate-band value at a singular configuration. This is the
  // exact 1-D dynamics; certification later refuses such points.
  TargetBasis V = TargetBasis::standard(1);
  GDConfig cfg;
  cfg.k = 1;
  cfg.n = 1;
  WeightPoint start(1, 1);
  start.W(0, 0) = -1.0;
  RunRecord rec = gd_run_from(cfg, V, start);
  CHECK(rec.classification == RunClass::Candidate);
  CHECK(rec.objective == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(std::abs(rec.terminal.W(0, 0)) < 1e-8);
  CHECK(rec.terminal.W(0, 0) < 0.0);
}

TEST_CASE("reconvergence from the printed k6 point") {
  TargetBasis V = TargetBasis::standard(6);
  GDConfig cfg;
  cfg.k = 6;
  cfg.n = 6;
  cfg.max_iters = 50000;
  RunRecord rec = gd_run_from(cfg, V, testutil::known_minimum_k6_n6());
  CHECK(rec.objective == doctest::Approx(0.02508).epsilon(1e-3));
  CHECK(rec.classification == RunClass::Candidate);
  CHECK(rec.max_neuron_grad_norm <= 1e-9);
  CHECK(rec.descent_violations == 0);
  MESSAGE("k6 reconvergence took ", rec.iterations, " iterations, grad norm ", rec.grad_norm);
}

TEST_CASE("canonicalize: invariance, idempotence, exactness") {
  TargetBasis V = TargetBasis::standard(4);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  Matrix W(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) W(i, j) = gauss(rng);
  const WeightPoint canon = canonicalize(WeightPoint(W), V);

  // full symmetry group for n = k = 4: 24 x 24 elements
  std::vector<int> rp{0, 1, 2, 3};
  int checked = 0;
  do {
    std::vector<int> cp{0, 1, 2, 3};
    do {
      Matrix M(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = W(rp[i], cp[j]);
      WeightPoint c2 = canonicalize(WeightPoint(M), V);
      if ((c2.W - canon.W).cwiseAbs().maxCoeff() != 0.0) {
        REQUIRE(false);
      }
      ++checked;
    } while (std::next_permutation(cp.begin(), cp.end()));
  } while (std::next_permutation(rp.begin(), rp.end()));
  CHECK(checked == 576);

  WeightPoint twice = canonicalize(canon, V);
  CHECK((twice.W - canon.W).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(canonicalize(WeightPoint(W), TargetBasis::from_rows(Matrix(2.0 * Matrix::Identity(4, 4)))),
                  SymmetryUnavailableError);
}

TEST_CASE("canonicalize: known k6 point with swapped columns") {
  TargetBasis V = TargetBasis::standard(6);
  WeightPoint W = testutil::known_minimum_k6_n6();
  Matrix swapped = W.W;
  swapped.col(0).swap(swapped.col(3));
  CHECK((canonicalize(WeightPoint(swapped), V).W - canonicalize(W, V).W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("equivalence_distance finds permutation alignments") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Matrix W(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) W(i, j) = gauss(rng);
  Matrix M(5, 3);
  const int rp[5] = {3, 0, 4, 1, 2};
  const int cp[3] = {2, 0, 1};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) M(i, j) = W(rp[i], cp[j]);
  CHECK(equivalence_distance(WeightPoint(W), WeightPoint(M)) < 1e-12);
  CHECK(equivalence_distance(WeightPoint(W), WeightPoint(W)) == 0.0);
  Matrix N = W;
  N(0, 0) += 0.5;
  CHECK(equivalence_distance(WeightPoint(W), WeightPoint(N)) <= (W - N).norm() + 1e-15);
}

TEST_CASE("dedup_cluster groups equivalent terminals") {
  TargetBasis V = TargetBasis::standard(3);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss;
  Matrix W(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) W(i, j) = gauss(rng);

  auto mk = [&](const Matrix& m) {
    RunRecord r;
    r.terminal = WeightPoint(m);
    r.classification = RunClass::Candidate;
    return r;
  };

  // three copies of one point (one permuted) -> one class, diameter 0
  Matrix P = W;
  P.row(0).swap(P.row(2));
  auto classes = dedup_cluster({mk(W), mk(W), mk(P)}, V);
  REQUIRE(classes.size() == 1);
  CHECK(classes[0].member_indices.size() == 3);
  CHECK(classes[0].diameter == 0.0);

  // two points at distance 1 -> two classes at threshold 1e-4
  Matrix Q = W;
  Q(1, 1) += 1.0;
  classes = dedup_cluster({mk(W), mk(Q)}, V, 1e-4);
  CHECK(classes.size() == 2);
}
