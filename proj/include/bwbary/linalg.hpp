#pragma once

// Dense symmetric linear algebra used by the rest of the toolkit. Every
// matrix function goes through a full eigendecomposition; sizes are small
// (N <= 512) so the O(N^3) cost is fine and results stay reproducible.

#include <Eigen/Dense>

#include "bwbary/error.hpp"

namespace bwbary {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative symmetry tolerance: |m(i,j) - m(j,i)| <= kSymmetryTol * max(1, max|m|).
inline constexpr double kSymmetryTol = 1e-12;
/// Eigenvalues in [-kPsdTol * max(1, lambda_max), 0) are clamped to zero.
inline constexpr double kPsdTol = 1e-8;
/// Default rank threshold, relative to max(1, lambda_max).
inline constexpr double kRankTol = 1e-10;

/// Self-adjoint map. Symmetric, no sign constraint.
class SymMap {
 public:
  explicit SymMap(Matrix m);

  static SymMap identity(Index dim);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  /// Computed on demand: smallest eigenvalue >= -tol * max(1, lambda_max).
  bool is_psd(double tol = kPsdTol) const;

 private:
  Matrix m_;
};

/// Symmetric positive semidefinite matrix; a truncated covariance operator.
class CovMatrix {
 public:
  /// Validates finiteness, symmetry and PSD (up to kPsdTol).
  explicit CovMatrix(Matrix m);

  /// Skips the eigenvalue check. Only for matrices that are PSD by
  /// construction (products T S T, results of clamped matrix functions).
  struct Trusted {};
  CovMatrix(Trusted, Matrix m);

  static CovMatrix zeros(Index dim);
  static CovMatrix identity(Index dim);
  static CovMatrix diagonal(const Vector& d);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

struct SpectralDecomp {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns
};

/// Symmetrizes (M + M^T)/2 and decomposes. Each eigenvector is signed so
/// that its largest-magnitude component (lowest index on ties) is positive.
SpectralDecomp eig_sym(const Matrix& m);
SpectralDecomp eig_sym(const SymMap& m);
SpectralDecomp eig_sym(const CovMatrix& m);

/// Threshold below which a computed eigenvalue counts as zero.
double rank_threshold(const Vector& eigenvalues_desc, double rank_tol);

CovMatrix sqrt_psd(const CovMatrix& m);

/// Pseudo-inverse square root on the eigenspace with eigenvalues at or above
/// rank_tol * max(1, lambda_max).
CovMatrix pinv_sqrt(const CovMatrix& m, double rank_tol = kRankTol);

/// Orthogonal projector onto the eigenspace above the rank threshold.
Matrix range_projector(const CovMatrix& m, double rank_tol = kRankTol);

double operator_norm(const SymMap& m);

/// Largest singular value; for non-symmetric matrices such as the shift F.
double spectral_norm(const Matrix& m);

Index kernel_dim(const CovMatrix& m, double rank_tol = kRankTol);
Index rank(const CovMatrix& m, double rank_tol = kRankTol);

/// Orthonormal basis (columns) of the numerical kernel.
Matrix kernel_basis(const CovMatrix& m, double rank_tol = kRankTol);

/// Some L with L L^T = M (L = V diag(sqrt(lambda)), clamped).
Matrix psd_factor(const CovMatrix& m);

/// (G^T G)^{1/2} computed from the SVD of G, without forming G^T G.
/// Squaring first and taking an eigenvalue square root would turn O(eps)
/// rounding into O(sqrt(eps)) error on nearly singular products.
Matrix polar_abs(const Matrix& g);

/// Sum of singular values.
double nuclear_norm(const Matrix& g);

/// Principal angles (radians, ascending) between span(a) and span(b).
/// Columns of a and b must be orthonormal. Small angles come from sines,
/// large ones from cosines, so both ends are accurate.
Vector principal_angles(const Matrix& a, const Matrix& b);

/// (M + M^T) / 2
Matrix symmetrize(const Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace bwbary
