#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "relucert/types.hpp"

namespace relucert {

// Classification thresholds. Terminals below kGlobalBand are treated as
// global; candidates must clear kCandidateBand. Terminals in between are
// anomalies and get flagged rather than silently binned.
inline constexpr double kGlobalBand = 1e-3;
inline constexpr double kCandidateBand = 1e-2;

enum class RunClass { GlobalLike, Candidate, Anomaly, Unconverged };

const char* to_string(RunClass c);

struct GDConfig {
  int k = 0;
  int n = 0;
  double step_size = 0.1;
  double grad_tol = 1e-9;  // per-neuron gradient block norm
  std::uint64_t max_iters = 1'000'000;
  std::uint64_t seed = 0;
};

struct RunRecord {
  GDConfig config;
  WeightPoint terminal;
  std::uint64_t iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;            // full nk-vector norm at the terminal
  double max_neuron_grad_norm = 0.0; // stopping-rule quantity
  RunClass classification = RunClass::Unconverged;
  bool singular_abort = false;       // hit a zero neuron mid-run
  std::uint64_t descent_violations = 0;  // steps where F increased
};

// i.i.d. Gaussian rows with per-coordinate variance 1/k.
WeightPoint xavier_init(int k, int n, std::mt19937_64& rng);

// Plain gradient descent, fixed step, no momentum or line search. Stops when
// every neuron's gradient block norm is <= grad_tol, or at max_iters.
RunRecord gd_run(const GDConfig& config, const TargetBasis& V);
// Same driver from an explicit starting point (reconvergence of candidates).
RunRecord gd_run_from(const GDConfig& config, const TargetBasis& V, WeightPoint start);

// The canonical representative of W under the n! row x k! column symmetry
// group of the standard-basis problem. Exact lexicographic minimum for
// k <= 8 (column permutations enumerated; rows sorted, which is optimal per
// column order); a permutation-invariant greedy surrogate above that.
// Throws SymmetryUnavailableError unless V is the standard basis.
WeightPoint canonicalize(const WeightPoint& W, const TargetBasis& V);

// Distance min over row-assignment x column-assignment, refined alternately
// (Hungarian on rows, then best column matching). Upper bound on the true
// orbit distance; used by dedup when canonical keys disagree.
double equivalence_distance(const WeightPoint& A, const WeightPoint& B);

struct CandidateClass {
  WeightPoint canonical;           // canonical form of the first member
  std::vector<int> member_indices; // indices into the input record list
  double diameter = 0.0;           // max pairwise distance after canonicalization
};

inline constexpr double kDedupThreshold = 1e-4;

// Greedy clustering of canonicalized candidate terminals. Two points share a
// class iff their distance is <= threshold. The per-class diameter is what
// certificate transfer consumes, so the threshold affects compute, not
// soundness.
std::vector<CandidateClass> dedup_cluster(const std::vector<RunRecord>& records, const TargetBasis& V,
                                          double threshold = kDedupThreshold);

}  // namespace relucert
