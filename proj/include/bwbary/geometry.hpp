#pragma once

// Bures-Wasserstein geometry of centred Gaussians, identified with their
// covariance matrices.

#include <optional>
#include <vector>

#include "bwbary/linalg.hpp"

namespace bwbary {

struct SolverSettings {
  double tol = 1e-10;         // relative Frobenius change between iterates
  int max_iter = 500;
  double ridge = 0.0;         // eps in X_t + eps * I
  double ridge_decay = 0.5;   // eps <- eps * ridge_decay after each iteration

  void validate() const;
};

/// Weighted family of covariances. Weights default to uniform.
class BarycentreProblem {
 public:
  BarycentreProblem(std::vector<CovMatrix> inputs, std::vector<double> weights = {},
                    SolverSettings settings = {});

  const std::vector<CovMatrix>& inputs() const { return inputs_; }
  const std::vector<double>& weights() const { return weights_; }
  const SolverSettings& settings() const { return settings_; }
  Index dim() const { return inputs_.front().dim(); }
  std::size_t size() const { return inputs_.size(); }

 private:
  std::vector<CovMatrix> inputs_;
  std::vector<double> weights_;
  SolverSettings settings_;
};

struct IterationRecord {
  int iteration = 0;
  double change = 0.0;
  double frechet = 0.0;
  double ridge = 0.0;
};

struct BarycentreResult {
  CovMatrix barycentre;
  int iterations = 0;
  double final_change = 0.0;
  double certificate_residual = 0.0;
  bool converged = false;
  /// Iterations where the Frechet value rose by more than 1e-9.
  int monotonicity_violations = 0;
  std::vector<IterationRecord> history;
};

/// d^2(A, B) = tr A + tr B - 2 tr (A^{1/2} B A^{1/2})^{1/2}
double bw_distance_sq(const CovMatrix& a, const CovMatrix& b);

/// Optimal transport map pushing N(0, from) to N(0, to):
///   M = A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}
/// with pseudo-inverses on range(A). Requires ker(A) to lie in ker(B), and
/// throws KernelNotIncluded otherwise.
SymMap optimal_map(const CovMatrix& from, const CovMatrix& to, double rank_tol = kRankTol);

double frechet_functional(const CovMatrix& candidate, const BarycentreProblem& problem);

/// Weighted arithmetic mean of the inputs.
CovMatrix euclidean_mean(const BarycentreProblem& problem);

/// Fixed-point iteration
///   X_{t+1} = K^{-1/2} (sum_i w_i (K^{1/2} S_i K^{1/2})^{1/2})^2 K^{-1/2},
///   K = X_t + ridge_t I.
/// The default init is the Euclidean mean. init + ridge * I must be positive
/// definite.
BarycentreResult barycentre_fixed_point(const BarycentreProblem& problem,
                                        std::optional<CovMatrix> init = std::nullopt);

/// Residual of the fixed-point identity
///   C = sum_i w_i (C^{1/2} S_i C^{1/2})^{1/2},
/// i.e. ||C - sum_i w_i R_i||_F / max(1, ||C||_F). Uses only square roots, so
/// singular candidates are handled exactly.
double verify_barycentre_certificate(const CovMatrix& candidate, const BarycentreProblem& problem);

}  // namespace bwbary
