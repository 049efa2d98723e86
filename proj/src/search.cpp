#include "relucert/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "relucert/closed_form.hpp"
#include "relucert/detail/rng.hpp"

namespace relucert {

const char* to_string(RunClass c) {
  switch (c) {
    case RunClass::GlobalLike: return "global_like";
    case RunClass::Candidate: return "candidate";
    case RunClass::Anomaly: return "anomaly";
    case RunClass::Unconverged: return "unconverged";
  }
  return "?";
}

WeightPoint xavier_init(int k, int n, std::mt19937_64& rng) {
  detail::GaussianStream gauss(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  WeightPoint W(n, k);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) W.W(i, a) = gauss.next() * scale;
  return W;
}

namespace {

RunRecord descend(const GDConfig& config, const TargetBasis& V, WeightPoint W) {
  RunRecord rec;
  rec.config = config;
  double F = 0.0;
  Matrix G;
  objective_and_gradient(W, V, &F, &G);
  std::uint64_t iter = 0;
  bool converged = false;
  for (;;) {
    double max_block = 0.0;
    for (int i = 0; i < W.n; ++i) max_block = std::max(max_block, G.row(i).norm());
    if (max_block <= config.grad_tol) {
      converged = true;
      break;
    }
    if (iter >= config.max_iters) break;
    W.W.noalias() -= config.step_size * G;
    ++iter;
    bool singular = false;
    for (int i = 0; i < W.n; ++i)
      if (W.W.row(i).norm() == 0.0) singular = true;
    if (singular || !W.W.allFinite()) {
      rec.singular_abort = true;
      break;
    }
    double F_next = 0.0;
    objective_and_gradient(W, V, &F_next, &G);
    // Accepted-step descent check; the slack covers evaluation round-off at
    // the noise floor, where F flutters by ulps around the minimum value.
    if (F_next > F + 1e-14 * std::max(1.0, F)) ++rec.descent_violations;
    F = F_next;
  }
  rec.terminal = std::move(W);
  rec.iterations = iter;
  rec.objective = F;
  rec.grad_norm = G.norm();
  double max_block = 0.0;
  for (int i = 0; i < rec.terminal.n; ++i) max_block = std::max(max_block, G.row(i).norm());
  rec.max_neuron_grad_norm = max_block;
  if (!converged) {
    rec.classification = RunClass::Unconverged;
  } else if (rec.objective < kGlobalBand) {
    rec.classification = RunClass::GlobalLike;
  } else if (rec.objective >= kCandidateBand) {
    rec.classification = RunClass::Candidate;
  } else {
    rec.classification = RunClass::Anomaly;
  }
  return rec;
}

}  // namespace

RunRecord gd_run(const GDConfig& config, const TargetBasis& V) {
  std::mt19937_64 rng(detail::mix64(config.seed));
  return descend(config, V, xavier_init(config.k, config.n, rng));
}

RunRecord gd_run_from(const GDConfig& config, const TargetBasis& V, WeightPoint start) {
  return descend(config, V, std::move(start));
}

namespace {

// lexicographic flatten-compare of row-major matrices
bool lex_less(const Matrix& a, const Matrix& b) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) < b(i, j)) return true;
      if (a(i, j) > b(i, j)) return false;
    }
  return false;
}

void sort_rows_lex(Matrix* m) {
  const int n = static_cast<int>(m->rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int j = 0; j < m->cols(); ++j) {
      if ((*m)(a, j) < (*m)(b, j)) return true;
      if ((*m)(a, j) > (*m)(b, j)) return false;
    }
    return a < b;
  });
  Matrix sorted(m->rows(), m->cols());
  for (int i = 0; i < n; ++i) sorted.row(i) = m->row(order[i]);
  *m = std::move(sorted);
}

Matrix normalize_zeros(const Matrix& m) {
  Matrix out = m;
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) += 0.0;  // -0.0 -> +0.0
  return out;
}

constexpr int kExactCanonicalMaxK = 8;

Matrix canonical_exact(const Matrix& W) {
  const int k = static_cast<int>(W.cols());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  Matrix best;
  bool have_best = false;
  // For a fixed column order the lex-smallest row arrangement is the sorted
  // one, so only column permutations need enumeration.
  do {
    Matrix cand(W.rows(), k);
    for (int j = 0; j < k; ++j) cand.col(j) = W.col(perm[j]);
    sort_rows_lex(&cand);
    if (!have_best || lex_less(cand, best)) {
      best = cand;
      have_best = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matrix canonical_surrogate(const Matrix& W) {
  const int k = static_cast<int>(W.cols());
  const int n = static_cast<int>(W.rows());
  // Column keys must be invariant under row permutations: the sorted
  // (descending) multiset of entries, led by the column max.
  std::vector<std::vector<double>> keys(k);
  for (int j = 0; j < k; ++j) {
    keys[j].resize(n);
    for (int i = 0; i < n; ++i) keys[j][i] = W(i, j);
    std::sort(keys[j].begin(), keys[j].end(), std::greater<double>());
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] > keys[b]; });
  Matrix cand(n, k);
  for (int j = 0; j < k; ++j) cand.col(j) = W.col(order[j]);
  sort_rows_lex(&cand);
  return cand;
}

}  // namespace

WeightPoint canonicalize(const WeightPoint& W, const TargetBasis& V) {
  if (!V.is_standard())
    throw SymmetryUnavailableError("canonicalize: coordinate-permutation symmetry needs the standard basis");
  const Matrix normalized = normalize_zeros(W.W);
  Matrix canon = (W.k <= kExactCanonicalMaxK) ? canonical_exact(normalized) : canonical_surrogate(normalized);
  return WeightPoint(std::move(canon));
}

namespace {

// Hungarian algorithm (shortest augmenting paths with potentials), O(m^3).
std::vector<int> hungarian(const Matrix& cost) {
  const int m = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0), minv(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= m; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_of_col(m);
  for (int j = 1; j <= m; ++j) row_of_col[j - 1] = p[j] - 1;
  std::vector<int> col_of_row(m);
  for (int j = 0; j < m; ++j) col_of_row[row_of_col[j]] = j;
  return col_of_row;
}

Matrix permute_rows(const Matrix& m, const std::vector<int>& col_of_row) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) out.row(col_of_row[i]) = m.row(i);
  return out;
}

}  // namespace

namespace {

// Alternating row/column assignment refinement from a given starting
// alignment. Coordinate descent over the two permutations: an upper bound on
// the orbit distance, exact when the start is well aligned.
double refine_distance(const Matrix& A, Matrix Bp) {
  const int n = static_cast<int>(A.rows());
  const int k = static_cast<int>(A.cols());
  double best = (A - Bp).norm();
  for (int round = 0; round < 4; ++round) {
    Matrix row_cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row_cost(i, j) = (Bp.row(i) - A.row(j)).squaredNorm();
    Bp = permute_rows(Bp, hungarian(row_cost));
    Matrix col_cost(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) col_cost(a, b) = (Bp.col(a) - A.col(b)).squaredNorm();
    const std::vector<int> cperm = hungarian(col_cost);
    Matrix Bc(n, k);
    for (int a = 0; a < k; ++a) Bc.col(cperm[a]) = Bp.col(a);
    Bp = std::move(Bc);
    const double d = (A - Bp).norm();
    if (d >= best - 1e-15) {
      best = std::min(best, d);
      break;
    }
    best = d;
  }
  return best;
}

}  // namespace

double equivalence_distance(const WeightPoint& A, const WeightPoint& B) {
  if (A.n != B.n || A.k != B.k) throw std::invalid_argument("equivalence_distance: shape mismatch");
  // Two starts: the raw alignment (never worse than plain Frobenius) and the
  // surrogate-canonical alignment (matches exact permutation copies).
  const double from_raw = refine_distance(A.W, B.W);
  const double from_canon =
      refine_distance(canonical_surrogate(normalize_zeros(A.W)), canonical_surrogate(normalize_zeros(B.W)));
  return std::min(from_raw, from_canon);
}

std::vector<CandidateClass> dedup_cluster(const std::vector<RunRecord>& records, const TargetBasis& V,
                                          double threshold) {
  std::vector<CandidateClass> classes;
  std::vector<std::vector<Matrix>> canon_members;  // parallel to classes
  for (int r = 0; r < static_cast<int>(records.size()); ++r) {
    const auto& rec = records[r];
    if (!records.empty()) {
      if (rec.terminal.n != records[0].terminal.n || rec.terminal.k != records[0].terminal.k)
        throw std::invalid_argument("dedup_cluster: records must share (k, n)");
    }
    const WeightPoint canon = canonicalize(rec.terminal, V);
    bool placed = false;
    for (std::size_t c = 0; c < classes.size() && !placed; ++c) {
      double d = (canon.W - classes[c].canonical.W).norm();
      if (d > threshold && rec.terminal.k > kExactCanonicalMaxK) {
        // surrogate keys can split true equivalents; try the assignment route
        d = equivalence_distance(canon, classes[c].canonical);
      }
      if (d <= threshold) {
        for (const Matrix& m : canon_members[c])
          classes[c].diameter = std::max(classes[c].diameter, (canon.W - m).norm());
        classes[c].member_indices.push_back(r);
        canon_members[c].push_back(canon.W);
        placed = true;
      }
    }
    if (!placed) {
      CandidateClass cc;
      cc.canonical = canon;
      cc.member_indices.push_back(r);
      classes.push_back(std::move(cc));
      canon_members.push_back({canon.W});
    }
  }
  return classes;
}

}  // namespace relucert
