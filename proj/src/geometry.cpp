#include "bwbary/geometry.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace bwbary {

namespace {

// Cutoff used when the solver inverts K = X_t + ridge * I. Much lower than
// kRankTol: truncating near-kernel directions of an iterate freezes them, and
// the iteration then settles on a wrong singular fixed point.
constexpr double kSolverInverseCutoff = 64.0 * std::numeric_limits<double>::epsilon();

constexpr double kMonotonicitySlack = 1e-9;

void require_same_dim(const CovMatrix& a, const CovMatrix& b, const char* where) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(where) + ": " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

// Factors L_i (S_i = L_i L_i^T) and traces of the inputs, reused across calls.
struct FactoredInputs {
  std::vector<Matrix> factors;
  std::vector<double> traces;
};

FactoredInputs factor_inputs(const BarycentreProblem& problem) {
  FactoredInputs out;
  out.factors.reserve(problem.size());
  out.traces.reserve(problem.size());
  for (const auto& s : problem.inputs()) {
    out.factors.push_back(psd_factor(s));
    out.traces.push_back(s.trace());
  }
  return out;
}

double clamp_distance(double d2, double scale) {
  if (d2 >= 0.0) return d2;
  if (d2 >= -1e-10 * std::max(1.0, scale)) return 0.0;
  throw Error(ErrorKind::NonFinite, "negative squared distance " + std::to_string(d2));
}

// tr A + tr B - 2 ||L_B^T A^{1/2}||_*
double distance_sq_factored(double trace_a, const Matrix& sqrt_a, double trace_b,
                            const Matrix& factor_b) {
  const double cross = nuclear_norm(factor_b.transpose() * sqrt_a);
  return clamp_distance(trace_a + trace_b - 2.0 * cross, trace_a + trace_b);
}

double frechet_factored(const CovMatrix& candidate, const BarycentreProblem& problem,
                        const FactoredInputs& f) {
  const Matrix root = sqrt_psd(candidate).matrix();
  const double tr = candidate.trace();
  double value = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    value += problem.weights()[i] * distance_sq_factored(tr, root, f.traces[i], f.factors[i]);
  }
  return value;
}

// sum_i w_i |L_i^T root| = sum_i w_i (root S_i root)^{1/2}
Matrix weighted_polar_sum(const Matrix& root, const BarycentreProblem& problem,
                          const FactoredInputs& f) {
  Matrix sum = Matrix::Zero(root.rows(), root.cols());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    if (problem.weights()[i] == 0.0) continue;
    sum += problem.weights()[i] * polar_abs(f.factors[i].transpose() * root);
  }
  return sum;
}

double certificate_factored(const CovMatrix& candidate, const BarycentreProblem& problem,
                            const FactoredInputs& f) {
  const Matrix root = sqrt_psd(candidate).matrix();
  const Matrix diff = candidate.matrix() - weighted_polar_sum(root, problem, f);
  return diff.norm() / std::max(1.0, candidate.matrix().norm());
}

}  // namespace

void SolverSettings::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "solver tol must be > 0");
  if (max_iter < 1) throw Error(ErrorKind::InvalidInput, "solver max_iter must be >= 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw Error(ErrorKind::InvalidInput, "solver ridge must be finite and >= 0");
  }
  if (!(ridge_decay > 0.0 && ridge_decay < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "solver ridge_decay must lie in (0, 1)");
  }
}

BarycentreProblem::BarycentreProblem(std::vector<CovMatrix> inputs, std::vector<double> weights,
                                     SolverSettings settings)
    : inputs_(std::move(inputs)), weights_(std::move(weights)), settings_(settings) {
  if (inputs_.empty()) throw Error(ErrorKind::InvalidInput, "barycentre problem needs >= 1 input");
  for (const auto& s : inputs_) require_same_dim(inputs_.front(), s, "barycentre inputs");
  if (weights_.empty()) {
    weights_.assign(inputs_.size(), 1.0 / static_cast<double>(inputs_.size()));
  }
  if (weights_.size() != inputs_.size()) {
    throw Error(ErrorKind::InvalidInput, "weights and inputs differ in length");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidInput, "weights must be finite and nonnegative");
    }
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidInput, "weights sum to " + std::to_string(total) + ", not 1");
  }
  settings_.validate();
}

double bw_distance_sq(const CovMatrix& a, const CovMatrix& b) {
  require_same_dim(a, b, "bw_distance_sq");
  return distance_sq_factored(a.trace(), sqrt_psd(a).matrix(), b.trace(), psd_factor(b));
}

SymMap optimal_map(const CovMatrix& from, const CovMatrix& to, double rank_tol) {
  require_same_dim(from, to, "optimal_map");
  const Index n = from.dim();

  const auto da = eig_sym(from);
  if (da.eigenvalues(n - 1) < -kPsdTol * std::max(1.0, da.eigenvalues(0))) {
    throw Error(ErrorKind::NotPSD, "optimal_map: source is not PSD");
  }
  const auto db = eig_sym(to);
  if (db.eigenvalues(n - 1) < -kPsdTol * std::max(1.0, db.eigenvalues(0))) {
    throw Error(ErrorKind::NotPSD, "optimal_map: target is not PSD");
  }

  const double cut = rank_threshold(da.eigenvalues, rank_tol);
  const double allowed = rank_tol * std::max(db.eigenvalues(0), 0.0) * static_cast<double>(n);
  Vector root(n), inv_root(n), keep(n);
  for (Index i = 0; i < n; ++i) {
    const double lambda = std::max(da.eigenvalues(i), 0.0);
    root(i) = std::sqrt(lambda);
    const bool in_range = da.eigenvalues(i) >= cut && lambda > 0.0;
    inv_root(i) = in_range ? 1.0 / root(i) : 0.0;
    keep(i) = in_range ? 1.0 : 0.0;
    if (!in_range) {
      const double leak = (to.matrix() * da.eigenvectors.col(i)).norm();
      if (leak > allowed) {
        throw Error(ErrorKind::KernelNotIncluded,
                    "target does not vanish on ker(source): |B v| = " + std::to_string(leak));
      }
    }
  }
  const Matrix& v = da.eigenvectors;
  const Matrix sqrt_a = symmetrize(v * root.asDiagonal() * v.transpose());
  const Matrix pinv_sqrt_a = symmetrize(v * inv_root.asDiagonal() * v.transpose());
  const Matrix projector = symmetrize(v * keep.asDiagonal() * v.transpose());

  const Vector lb = db.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const Matrix factor_b = db.eigenvectors * lb.asDiagonal();
  const Matrix middle = polar_abs(factor_b.transpose() * sqrt_a);
  Matrix map = symmetrize(pinv_sqrt_a * middle * pinv_sqrt_a);

  const Matrix pushed = map * from.matrix() * map;
  const double err = (pushed - projector * to.matrix() * projector).norm();
  if (!std::isfinite(err) || err > 1e-7 * std::max(1.0, to.matrix().norm())) {
    throw Error(ErrorKind::NonFinite, "optimal_map: pushforward check failed, error " + std::to_string(err));
  }
  return SymMap(std::move(map));
}

double frechet_functional(const CovMatrix& candidate, const BarycentreProblem& problem) {
  require_same_dim(candidate, problem.inputs().front(), "frechet_functional");
  return frechet_factored(candidate, problem, factor_inputs(problem));
}

CovMatrix euclidean_mean(const BarycentreProblem& problem) {
  Matrix sum = Matrix::Zero(problem.dim(), problem.dim());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    sum += problem.weights()[i] * problem.inputs()[i].matrix();
  }
  return CovMatrix(CovMatrix::Trusted{}, symmetrize(sum));
}

BarycentreResult barycentre_fixed_point(const BarycentreProblem& problem,
                                        std::optional<CovMatrix> init) {
  const auto& settings = problem.settings();
  const Index n = problem.dim();
  CovMatrix current = init ? *init : euclidean_mean(problem);
  require_same_dim(current, problem.inputs().front(), "barycentre_fixed_point init");

  {
    const auto d = eig_sym(current.matrix() + settings.ridge * Matrix::Identity(n, n));
    if (!(d.eigenvalues(n - 1) > 0.0)) {
      throw Error(ErrorKind::NotPSD, "initial iterate plus ridge is not positive definite");
    }
  }

  const FactoredInputs factors = factor_inputs(problem);
  BarycentreResult result{current, 0, std::numeric_limits<double>::infinity(), 0.0, false, 0, {}};
  double previous_value = frechet_factored(current, problem, factors);
  double ridge = settings.ridge;

  for (int it = 1; it <= settings.max_iter; ++it) {
    const auto d = eig_sym(current.matrix() + ridge * Matrix::Identity(n, n));
    const double cut = kSolverInverseCutoff * std::max(1.0, d.eigenvalues(0));
    Vector root(n), inv_root(n);
    for (Index i = 0; i < n; ++i) {
      const double lambda = std::max(d.eigenvalues(i), 0.0);
      root(i) = std::sqrt(lambda);
      inv_root(i) = lambda > cut ? 1.0 / root(i) : 0.0;
    }
    const Matrix& v = d.eigenvectors;
    const Matrix sqrt_k = v * root.asDiagonal() * v.transpose();
    const Matrix inv_sqrt_k = v * inv_root.asDiagonal() * v.transpose();

    const Matrix mean_root = weighted_polar_sum(sqrt_k, problem, factors);
    Matrix next = symmetrize(inv_sqrt_k * mean_root * mean_root * inv_sqrt_k);
    if (!all_finite(next)) {
      throw Error(ErrorKind::NonFinite, "iterate " + std::to_string(it) + " diverged");
    }

    const double scale = current.matrix().norm();
    const double change =
        (next - current.matrix()).norm() / (scale > 0.0 ? scale : 1.0);
    current = CovMatrix(CovMatrix::Trusted{}, std::move(next));

    const double value = frechet_factored(current, problem, factors);
    if (value > previous_value + kMonotonicitySlack) ++result.monotonicity_violations;
    previous_value = value;

    result.history.push_back({it, change, value, ridge});
    result.iterations = it;
    result.final_change = change;
    ridge *= settings.ridge_decay;
    if (change <= settings.tol) {
      result.converged = true;
      break;
    }
  }

  result.barycentre = current;
  result.certificate_residual = certificate_factored(current, problem, factors);
  return result;
}

double verify_barycentre_certificate(const CovMatrix& candidate, const BarycentreProblem& problem) {
  require_same_dim(candidate, problem.inputs().front(), "verify_barycentre_certificate");
  return certificate_factored(candidate, problem, factor_inputs(problem));
}

}  // namespace bwbary
