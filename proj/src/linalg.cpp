#include "bwbary/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bwbary {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a non-empty square matrix");
  }
}

void require_symmetric(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " is not symmetric");
  }
}

double psd_floor(const Vector& eigenvalues_desc) {
  return -kPsdTol * std::max(1.0, eigenvalues_desc(0));
}

// Eigenvalues clamped at zero; throws if any is below -tau_psd.
Vector clamped_eigenvalues(const SpectralDecomp& d) {
  const Index n = d.eigenvalues.size();
  if (d.eigenvalues(n - 1) < psd_floor(d.eigenvalues)) {
    throw Error(ErrorKind::NotPSD, "smallest eigenvalue " + std::to_string(d.eigenvalues(n - 1)));
  }
  return d.eigenvalues.cwiseMax(0.0);
}

Matrix reconstruct(const Matrix& v, const Vector& values) {
  return symmetrize(v * values.asDiagonal() * v.transpose());
}

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

SymMap::SymMap(Matrix m) : m_(std::move(m)) {
  require_square(m_, "SymMap");
  if (!all_finite(m_)) throw Error(ErrorKind::InvalidInput, "SymMap has non-finite entries");
  require_symmetric(m_, "SymMap");
}

SymMap SymMap::identity(Index dim) { return SymMap(Matrix::Identity(dim, dim)); }

bool SymMap::is_psd(double tol) const {
  const auto d = eig_sym(m_);
  return d.eigenvalues(dim() - 1) >= -tol * std::max(1.0, d.eigenvalues(0));
}

CovMatrix::CovMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "CovMatrix");
  if (!all_finite(m_)) throw Error(ErrorKind::InvalidInput, "CovMatrix has non-finite entries");
  require_symmetric(m_, "CovMatrix");
  const auto d = eig_sym(m_);
  if (d.eigenvalues(dim() - 1) < psd_floor(d.eigenvalues)) {
    throw Error(ErrorKind::NotPSD,
                "CovMatrix smallest eigenvalue " + std::to_string(d.eigenvalues(dim() - 1)));
  }
}

CovMatrix::CovMatrix(Trusted, Matrix m) : m_(std::move(m)) {
  require_square(m_, "CovMatrix");
  if (!all_finite(m_)) throw Error(ErrorKind::NonFinite, "CovMatrix has non-finite entries");
}

CovMatrix CovMatrix::zeros(Index dim) { return CovMatrix(Trusted{}, Matrix::Zero(dim, dim)); }

CovMatrix CovMatrix::identity(Index dim) {
  return CovMatrix(Trusted{}, Matrix::Identity(dim, dim));
}

CovMatrix CovMatrix::diagonal(const Vector& d) {
  if ((d.array() < 0.0).any() || !d.allFinite()) {
    throw Error(ErrorKind::NotPSD, "diagonal covariance needs finite nonnegative entries");
  }
  return CovMatrix(Trusted{}, d.asDiagonal().toDenseMatrix());
}

SpectralDecomp eig_sym(const Matrix& m) {
  require_square(m, "eig_sym input");
  if (!all_finite(m)) throw Error(ErrorKind::InvalidInput, "eig_sym: non-finite entries");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFinite, "eig_sym: eigensolver did not converge");
  }
  const Index n = m.rows();
  SpectralDecomp out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};

  for (Index j = 0; j < n; ++j) {
    auto col = out.eigenvectors.col(j);
    Index pivot = 0;
    for (Index i = 1; i < n; ++i) {
      if (std::abs(col(i)) > std::abs(col(pivot))) pivot = i;
    }
    if (col(pivot) < 0.0) col = -col;
  }
  return out;
}

SpectralDecomp eig_sym(const SymMap& m) { return eig_sym(m.matrix()); }
SpectralDecomp eig_sym(const CovMatrix& m) { return eig_sym(m.matrix()); }

double rank_threshold(const Vector& eigenvalues_desc, double rank_tol) {
  return rank_tol * std::max(1.0, eigenvalues_desc(0));
}

CovMatrix sqrt_psd(const CovMatrix& m) {
  const auto d = eig_sym(m);
  return CovMatrix(CovMatrix::Trusted{},
                   reconstruct(d.eigenvectors, clamped_eigenvalues(d).cwiseSqrt()));
}

CovMatrix pinv_sqrt(const CovMatrix& m, double rank_tol) {
  const auto d = eig_sym(m);
  const Vector lambda = clamped_eigenvalues(d);
  const double cut = rank_threshold(d.eigenvalues, rank_tol);
  Vector g(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    g(i) = lambda(i) >= cut && lambda(i) > 0.0 ? 1.0 / std::sqrt(lambda(i)) : 0.0;
  }
  return CovMatrix(CovMatrix::Trusted{}, reconstruct(d.eigenvectors, g));
}

Matrix range_projector(const CovMatrix& m, double rank_tol) {
  const auto d = eig_sym(m);
  const double cut = rank_threshold(d.eigenvalues, rank_tol);
  Vector keep = (d.eigenvalues.array() >= cut).cast<double>();
  return reconstruct(d.eigenvectors, keep);
}

double operator_norm(const SymMap& m) {
  const auto d = eig_sym(m);
  return std::max(std::abs(d.eigenvalues(0)), std::abs(d.eigenvalues(m.dim() - 1)));
}

double spectral_norm(const Matrix& m) {
  if (!all_finite(m)) throw Error(ErrorKind::InvalidInput, "spectral_norm: non-finite entries");
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Index kernel_dim(const CovMatrix& m, double rank_tol) {
  const auto d = eig_sym(m);
  clamped_eigenvalues(d);
  const double cut = rank_threshold(d.eigenvalues, rank_tol);
  return (d.eigenvalues.array() < cut).count();
}

Index rank(const CovMatrix& m, double rank_tol) { return m.dim() - kernel_dim(m, rank_tol); }

Matrix kernel_basis(const CovMatrix& m, double rank_tol) {
  const auto d = eig_sym(m);
  clamped_eigenvalues(d);
  const double cut = rank_threshold(d.eigenvalues, rank_tol);
  const Index k = (d.eigenvalues.array() < cut).count();
  return d.eigenvectors.rightCols(k);
}

Matrix psd_factor(const CovMatrix& m) {
  const auto d = eig_sym(m);
  return d.eigenvectors * clamped_eigenvalues(d).cwiseSqrt().asDiagonal();
}

Matrix polar_abs(const Matrix& g) {
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinV);
  const Matrix& v = svd.matrixV();
  return symmetrize(v * svd.singularValues().asDiagonal() * v.transpose());
}

double nuclear_norm(const Matrix& g) {
  Eigen::JacobiSVD<Matrix> svd(g);
  return svd.singularValues().sum();
}

Vector principal_angles(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "principal_angles: ambient dimensions differ");
  }
  // Take the smaller subspace as reference so the result has min(k_a, k_b) angles.
  const Matrix& p = a.cols() <= b.cols() ? a : b;
  const Matrix& q = a.cols() <= b.cols() ? b : a;
  const Index k = p.cols();
  if (k == 0) return Vector();

  const Matrix cross = q.transpose() * p;
  Eigen::JacobiSVD<Matrix> cos_svd(cross);
  Vector cosines = cos_svd.singularValues().cwiseMin(1.0);  // descending
  if (cosines.size() < k) {
    cosines.conservativeResize(k);
    cosines.tail(k - cross.rows()).setZero();
  }

  const Matrix residual = p - q * cross;
  Eigen::JacobiSVD<Matrix> sin_svd(residual);
  Vector sines = sin_svd.singularValues().cwiseMin(1.0).reverse();  // ascending

  Vector angles(k);
  for (Index i = 0; i < k; ++i) {
    const double c = cosines(i);
    angles(i) = c * c >= 0.5 ? std::asin(sines(i)) : std::acos(c);
  }
  std::sort(angles.data(), angles.data() + k);
  return angles;
}

}  // namespace bwbary
