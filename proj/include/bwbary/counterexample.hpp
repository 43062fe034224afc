#pragma once

// Finite truncations of a singular covariance that is nonetheless the exact
// barycentre of covariances T_i Sigma T_i whose maps T_i average to the
// identity. Coordinates are 1-based in the mathematical description
// (phi_1, phi_2, ...) and 0-based in the matrices.
//
// The doubling shift F sends phi_k to phi_{2k}; columns whose image would
// leave the truncation are zero. The maps built from F + F^T are chosen so
// that T x can only land in span{phi_odd} when x = 0; the coordinates of
// such an x obey the recurrence x_{4k} = -2 x_{2k} - x_k, whose nonzero
// solutions never decay. The recurrence helpers below reproduce that
// argument numerically.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bwbary/geometry.hpp"
#include "bwbary/linalg.hpp"

namespace bwbary {

struct GeometricDecay {
  double ratio = 0.5;  // k-th retained direction gets ratio^k
};

struct ExplicitDecay {
  std::vector<double> values;  // one per retained direction, in index order
};

using DecayLaw = std::variant<GeometricDecay, ExplicitDecay>;

/// Parses "geometric:<r>" or "list:<v1,v2,...>".
DecayLaw parse_decay(const std::string& text);
std::string to_string(const DecayLaw& decay);

struct TruncationConfig {
  Index dim = 64;
  DecayLaw decay = GeometricDecay{};
  /// 1-based indices of the zero directions. Empty means all odd indices.
  std::vector<Index> kernel_pattern;

  /// The effective kernel pattern (default filled in), validated.
  std::vector<Index> kernel_indices() const;
};

/// F with F e_k = e_{2k} for 2k <= dim (1-based); dim >= 2.
Matrix doubling_shift(Index dim);

/// T = F + F^T + c I. Needs c >= 2 unless allow_indefinite is set.
SymMap build_T(Index dim, double c, bool allow_indefinite = false);

/// T1 = (F + F^T)/2 + I, T2 = -(F + F^T)/2 + I. T1 + T2 == 2I exactly.
std::pair<SymMap, SymMap> build_pair_maps(Index dim);

/// T = I + a (F + F^T); positive semidefinite for |a| <= 1/2.
SymMap map_from_coefficient(Index dim, double a);

/// Equally spaced coefficients a_i in [-1/2, 1/2], symmetric about 0.
std::vector<double> default_coefficients(std::size_t n);

/// Maps I + a_i (F + F^T). Requires |a_i| <= 1/2 and sum_i w_i a_i = 0
/// (uniform weights when omitted), so the maps average to the identity.
std::vector<SymMap> build_nfold_maps(Index dim, const std::vector<double>& coefficients,
                                     const std::vector<double>& weights = {});

/// Diagonal Sigma, zero on the kernel pattern, decay law elsewhere.
CovMatrix build_sigma(const TruncationConfig& config);

/// T Sigma T, symmetrized. PSD by construction; checked against tau_psd.
CovMatrix conjugate(const SymMap& t, const CovMatrix& sigma);

enum class RecurrenceSign { Plus, Minus };

/// Plus:  y_j = -2 y_{j-1} - y_{j-2}  (denominator 1 + 2t + t^2)
/// Minus: y_j = +2 y_{j-1} - y_{j-2}  (denominator 1 - 2t + t^2)
struct RecurrenceParams {
  double y0 = 0.0;
  double y1 = 0.0;
  RecurrenceSign sign = RecurrenceSign::Plus;
  int horizon = 30;  // J >= 2; sequences have J + 1 terms
};

RecurrenceSign parse_sign(const std::string& text);
const char* to_string(RecurrenceSign sign);

/// Iterates the recurrence from the seeds.
std::vector<double> kernel_recurrence_solve(const RecurrenceParams& p);

/// Partial-fraction coefficients: y_j = s^j (b + a (j + 1)) with s = -1 for
/// Plus (a = -y0 - y1, b = 2 y0 + y1) and s = +1 for Minus
/// (a = y1 - y0, b = 2 y0 - y1).
struct ClosedForm {
  double a = 0.0;
  double b = 0.0;
};
ClosedForm closed_form_coefficients(const RecurrenceParams& p);

/// Evaluates the closed form term by term.
std::vector<double> generating_coefficients(const RecurrenceParams& p);

enum class GrowthKind { Zero, Bounded, Linear };

struct GrowthWitness {
  GrowthKind kind = GrowthKind::Zero;
  ClosedForm form;
  /// From j0 on, |y_j| >= |a| (j + 1) / 2 (Linear) or |y_j| = |b| (Bounded).
  int j0 = 0;
  double slope = 0.0;
  /// Whether the bound held on every j0 <= j <= horizon of the iterated sequence.
  bool verified = false;
};

/// Certificate that a nonzero seed never produces a decaying sequence.
GrowthWitness growth_witness(const RecurrenceParams& p);

/// Symmetric law of the coefficient a on [-1/2, 1/2].
struct RandomMapLaw {
  enum class Kind {
    Uniform,             // never exactly 0
    TwoPoint,            // +-1/2 with equal probability
    AntitheticTwoPoint,  // +1/2 on even draws, -1/2 on odd draws
    Triangular,          // (u1 + u2 - 1) / 2
  };
  Kind kind = Kind::Uniform;
  bool excludes_zero = true;

  static RandomMapLaw parse(const std::string& text);
  std::string name() const;

  /// Coefficient of draw `index` under `seed`. Deterministic and
  /// independent of evaluation order.
  double draw(std::uint64_t seed, std::uint64_t index) const;
};

/// I + a (F + F^T) with a = law.draw(seed, 0).
SymMap random_map_sample(const RandomMapLaw& law, std::uint64_t seed, Index dim);

struct PopulationReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double mean_coefficient = 0.0;
  /// ||(1/n) sum_i T_i - I||_F
  double mean_deviation = 0.0;
  /// Certificate residual of Sigma against {T_i Sigma T_i}, uniform weights.
  double certificate_residual = 0.0;
  BarycentreResult solver;
  double solver_distance_to_sigma = 0.0;  // Frobenius
};

/// Draws T_1..T_n, forms S_i = T_i Sigma T_i, checks the certificate for
/// Sigma and runs the ridge-regularized solver on the empirical family.
PopulationReport population_mc_experiment(const TruncationConfig& config, const RandomMapLaw& law,
                                          std::size_t n, std::uint64_t seed,
                                          const SolverSettings& settings);

struct KernelComparison {
  Index kernel_dim_a = 0;
  Index kernel_dim_b = 0;
  Vector angles;          // ascending, radians
  Index shared_dim = 0;   // angles below 1e-8
  double min_angle = 0.0;
  /// Smallest angle above 1e-8; NaN if every angle is shared.
  double min_nonzero_angle = 0.0;
};

KernelComparison compare_kernels(const CovMatrix& a, const CovMatrix& b, double rank_tol);

}  // namespace bwbary
