#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace relucert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Error taxonomy. All of these mean "this input cannot be evaluated here",
// never "the mathematical claim is false".
// ---------------------------------------------------------------------------

struct ZeroNeuronError : std::runtime_error {
  explicit ZeroNeuronError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularPairError : std::runtime_error {
  int i;
  int j;
  bool against_target;
  SingularPairError(const std::string& what, int i_, int j_, bool target)
      : std::runtime_error(what), i(i_), j(j_), against_target(target) {}
};

struct SymmetryUnavailableError : std::runtime_error {
  explicit SymmetryUnavailableError(const std::string& what) : std::runtime_error(what) {}
};

// Rigorous-path refusals (see rigor.hpp / certify.hpp). Inconclusive by design.
struct CertRefusalError : std::runtime_error {
  std::string stage;
  CertRefusalError(std::string stage_, const std::string& what)
      : std::runtime_error(what), stage(std::move(stage_)) {}
};

struct SingularEnclosureError : CertRefusalError {
  int i;
  int j;
  bool against_target;
  SingularEnclosureError(const std::string& what, int i_, int j_, bool target)
      : CertRefusalError("singular_enclosure", what), i(i_), j(j_), against_target(target) {}
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// The full parameter vector of the trained network: row i is neuron w_i in
// R^k. n >= 1 rows, k >= 1 columns. Rows must be nonzero when handed to
// derivative operations; exactly parallel rows are singular for Hessians.
struct WeightPoint {
  int n = 0;
  int k = 0;
  Matrix W;  // n x k

  WeightPoint() = default;
  WeightPoint(int n_, int k_) : n(n_), k(k_), W(Matrix::Zero(n_, k_)) {}
  explicit WeightPoint(Matrix w) : n(static_cast<int>(w.rows())), k(static_cast<int>(w.cols())), W(std::move(w)) {}

  Vector row(int i) const { return W.row(i).transpose(); }
  double min_row_norm() const;
  double max_row_norm() const;

  // Row-major flattening, matching the nk-vector layout of gradients and the
  // block layout of Hessians (block i = coordinates [i*k, (i+1)*k)).
  Vector flatten() const;
  static WeightPoint unflatten(const Vector& x, int n, int k);
};

// The k target neurons, rows of a k x d matrix. Default construction is the
// standard basis of R^k, the canonical orthonormal choice.
struct TargetBasis {
  int k = 0;
  Matrix V;  // k x d, here d == k unless lifted
  bool orthonormal_flag = false;

  static TargetBasis standard(int k);
  static TargetBasis from_rows(Matrix rows);

  int dim() const { return static_cast<int>(V.cols()); }
  Vector row(int j) const { return V.row(j).transpose(); }
  double max_norm() const;
  bool is_standard() const;
};

// Geometry of one (w, v) pair: the angle theta in [0, pi], the residual
// n_vw = v_bar - cos(theta) w_bar and its unit version. ||n_vw|| == sin(theta)
// is an identity of the construction. `parallel` marks the exact sin == 0
// configurations (detected exactly, see pair_geometry).
struct PairGeometry {
  double theta = 0.0;
  double sin_theta = 0.0;
  double cos_theta = 1.0;
  double norm_w = 0.0;
  double norm_v = 0.0;
  Vector w_bar;
  Vector v_bar;
  Vector n_vw;      // v_bar - cos * w_bar
  Vector n_bar_vw;  // unit residual; zero vector when parallel
  bool parallel = false;
};

// Throws ZeroNeuronError on zero inputs. ParallelPair is signalled via the
// flag, not an error: callers choose the continuous limit or a refusal.
PairGeometry pair_geometry(const Vector& w, const Vector& v);

}  // namespace relucert
