#include "bwbary/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bwbary/rng.hpp"

namespace bwbary {

namespace {

constexpr double kSharedAngle = 1e-8;
constexpr int kMaxWitnessHorizon = 1 << 20;

void require_dim(Index dim) {
  if (dim < 2) throw Error(ErrorKind::InvalidInput, "truncation dimension must be >= 2");
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidInput, "cannot parse " + what + " '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidInput, "cannot parse " + what + " '" + text + "'");
  }
  return v;
}

Matrix shift_symmetrization(Index dim) {
  const Matrix f = doubling_shift(dim);
  return f + f.transpose();
}

}  // namespace

DecayLaw parse_decay(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::InvalidInput, "decay must be geometric:<r> or list:<v,...>");
  }
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "geometric") {
    const double r = parse_double(rest, "geometric ratio");
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::InvalidInput, "geometric ratio must lie in (0, 1)");
    return GeometricDecay{r};
  }
  if (kind == "list") {
    ExplicitDecay out;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) out.values.push_back(parse_double(item, "decay value"));
    if (out.values.empty()) throw Error(ErrorKind::InvalidInput, "empty decay list");
    return out;
  }
  throw Error(ErrorKind::InvalidInput, "unknown decay law '" + kind + "'");
}

std::string to_string(const DecayLaw& decay) {
  std::ostringstream out;
  out.precision(17);
  if (const auto* g = std::get_if<GeometricDecay>(&decay)) {
    out << "geometric:" << g->ratio;
  } else {
    const auto& values = std::get<ExplicitDecay>(decay).values;
    out << "list:";
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  }
  return out.str();
}

std::vector<Index> TruncationConfig::kernel_indices() const {
  require_dim(dim);
  std::vector<Index> out = kernel_pattern;
  if (out.empty()) {
    for (Index k = 1; k <= dim; k += 2) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(ErrorKind::InvalidInput, "kernel pattern has repeated indices");
  }
  if (out.front() < 1 || out.back() > dim) {
    throw Error(ErrorKind::InvalidInput, "kernel pattern indices must lie in 1..dim");
  }
  return out;
}

Matrix doubling_shift(Index dim) {
  require_dim(dim);
  Matrix f = Matrix::Zero(dim, dim);
  for (Index k = 1; 2 * k <= dim; ++k) f(2 * k - 1, k - 1) = 1.0;
  return f;
}

SymMap build_T(Index dim, double c, bool allow_indefinite) {
  require_dim(dim);
  if (!std::isfinite(c)) throw Error(ErrorKind::InvalidInput, "identity multiple must be finite");
  if (c < 2.0 && !allow_indefinite) {
    throw Error(ErrorKind::InvalidInput, "identity multiple c < 2 gives an indefinite T");
  }
  SymMap t(shift_symmetrization(dim) + c * Matrix::Identity(dim, dim));
  if (c >= 2.0 && !t.is_psd(1e-12)) {
    throw Error(ErrorKind::NotPSD, "T = F + F^T + cI is not PSD");
  }
  return t;
}

std::pair<SymMap, SymMap> build_pair_maps(Index dim) {
  require_dim(dim);
  const Matrix half = 0.5 * shift_symmetrization(dim);
  const Matrix id = Matrix::Identity(dim, dim);
  return {SymMap(half + id), SymMap(id - half)};
}

SymMap map_from_coefficient(Index dim, double a) {
  require_dim(dim);
  if (!(std::abs(a) <= 0.5)) throw Error(ErrorKind::InvalidInput, "coefficient must satisfy |a| <= 1/2");
  return SymMap(Matrix::Identity(dim, dim) + a * shift_symmetrization(dim));
}

std::vector<double> default_coefficients(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::NInsufficient, "need at least two maps");
  std::vector<double> a(n);
  const double step = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) a[i] = -0.5 + step * static_cast<double>(i);
  // Pin exact antisymmetry: a[n-1-i] = -a[i].
  for (std::size_t i = 0; i < n / 2; ++i) a[n - 1 - i] = -a[i];
  if (n % 2 == 1) a[n / 2] = 0.0;
  return a;
}

std::vector<SymMap> build_nfold_maps(Index dim, const std::vector<double>& coefficients,
                                     const std::vector<double>& weights) {
  const std::size_t n = coefficients.size();
  if (n < 2) throw Error(ErrorKind::NInsufficient, "need at least two maps");
  std::vector<double> w = weights;
  if (w.empty()) w.assign(n, 1.0 / static_cast<double>(n));
  if (w.size() != n) throw Error(ErrorKind::InvalidInput, "weights and coefficients differ in length");
  double balance = 0.0;
  for (std::size_t i = 0; i < n; ++i) balance += w[i] * coefficients[i];
  if (std::abs(balance) > 1e-15) {
    throw Error(ErrorKind::InvalidInput, "weighted coefficients must sum to zero");
  }
  std::vector<SymMap> maps;
  maps.reserve(n);
  for (double a : coefficients) maps.push_back(map_from_coefficient(dim, a));
  return maps;
}

CovMatrix build_sigma(const TruncationConfig& config) {
  const auto kernel = config.kernel_indices();
  std::vector<Index> retained;
  for (Index k = 1, next = 0; k <= config.dim; ++k) {
    if (next < static_cast<Index>(kernel.size()) && kernel[next] == k) {
      ++next;
    } else {
      retained.push_back(k);
    }
  }

  Vector diag = Vector::Zero(config.dim);
  if (const auto* g = std::get_if<GeometricDecay>(&config.decay)) {
    if (!(g->ratio > 0.0 && g->ratio < 1.0)) {
      throw Error(ErrorKind::InvalidInput, "geometric ratio must lie in (0, 1)");
    }
    double value = 1.0;
    for (Index k : retained) {
      value *= g->ratio;
      diag(k - 1) = value;
    }
  } else {
    const auto& values = std::get<ExplicitDecay>(config.decay).values;
    if (values.size() != retained.size()) {
      throw Error(ErrorKind::InvalidInput,
                  "decay list has " + std::to_string(values.size()) + " values for " +
                      std::to_string(retained.size()) + " retained directions");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw Error(ErrorKind::InvalidInput, "decay values must be finite and positive");
      }
      diag(retained[i] - 1) = values[i];
    }
  }
  return CovMatrix::diagonal(diag);
}

CovMatrix conjugate(const SymMap& t, const CovMatrix& sigma) {
  if (t.dim() != sigma.dim()) throw Error(ErrorKind::DimensionMismatch, "conjugate: dimensions differ");
  Matrix s = symmetrize(t.matrix() * sigma.matrix() * t.matrix());
  const auto d = eig_sym(s);
  if (d.eigenvalues(s.rows() - 1) < -kPsdTol * std::max(1.0, d.eigenvalues(0))) {
    throw Error(ErrorKind::NotPSD, "conjugate: T Sigma T is not PSD");
  }
  return CovMatrix(CovMatrix::Trusted{}, std::move(s));
}

RecurrenceSign parse_sign(const std::string& text) {
  if (text == "plus" || text == "+") return RecurrenceSign::Plus;
  if (text == "minus" || text == "-") return RecurrenceSign::Minus;
  throw Error(ErrorKind::InvalidInput, "sign must be plus or minus");
}

const char* to_string(RecurrenceSign sign) { return sign == RecurrenceSign::Plus ? "plus" : "minus"; }

namespace {

void require_params(const RecurrenceParams& p) {
  if (p.horizon < 2) throw Error(ErrorKind::InvalidInput, "recurrence horizon must be >= 2");
  if (!std::isfinite(p.y0) || !std::isfinite(p.y1)) {
    throw Error(ErrorKind::InvalidInput, "recurrence seeds must be finite");
  }
}

std::vector<double> iterate(double y0, double y1, RecurrenceSign sign, int horizon) {
  const double lead = sign == RecurrenceSign::Plus ? -2.0 : 2.0;
  std::vector<double> y(static_cast<std::size_t>(horizon) + 1);
  y[0] = y0;
  y[1] = y1;
  for (std::size_t j = 2; j < y.size(); ++j) y[j] = lead * y[j - 1] - y[j - 2];
  return y;
}

}  // namespace

std::vector<double> kernel_recurrence_solve(const RecurrenceParams& p) {
  require_params(p);
  return iterate(p.y0, p.y1, p.sign, p.horizon);
}

ClosedForm closed_form_coefficients(const RecurrenceParams& p) {
  if (p.sign == RecurrenceSign::Plus) return {-p.y0 - p.y1, 2.0 * p.y0 + p.y1};
  return {p.y1 - p.y0, 2.0 * p.y0 - p.y1};
}

std::vector<double> generating_coefficients(const RecurrenceParams& p) {
  require_params(p);
  const auto [a, b] = closed_form_coefficients(p);
  std::vector<double> y(static_cast<std::size_t>(p.horizon) + 1);
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double magnitude = b + a * static_cast<double>(j + 1);
    y[j] = (p.sign == RecurrenceSign::Plus && j % 2 == 1) ? -magnitude : magnitude;
  }
  return y;
}

GrowthWitness growth_witness(const RecurrenceParams& p) {
  require_params(p);
  GrowthWitness w;
  w.form = closed_form_coefficients(p);
  const double a = w.form.a;
  const double b = w.form.b;

  if (a == 0.0 && b == 0.0) {
    const auto y = iterate(p.y0, p.y1, p.sign, p.horizon);
    w.kind = GrowthKind::Zero;
    w.verified = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
    return w;
  }

  if (a == 0.0) {
    const auto y = iterate(p.y0, p.y1, p.sign, p.horizon);
    w.kind = GrowthKind::Bounded;
    const double slack = 1e-9 * std::max(1.0, std::abs(b));
    w.verified = std::all_of(y.begin(), y.end(),
                             [&](double v) { return std::abs(std::abs(v) - std::abs(b)) <= slack; });
    return w;
  }

  // |b + a (j+1)| >= |a| (j+1) / 2 as soon as |a| (j+1) >= 2 |b|.
  w.kind = GrowthKind::Linear;
  w.slope = std::abs(a);
  const double start = std::ceil(2.0 * std::abs(b) / std::abs(a)) - 1.0;
  if (!(start <= kMaxWitnessHorizon)) {
    w.j0 = kMaxWitnessHorizon;
    w.verified = false;
    return w;
  }
  w.j0 = std::max(0, static_cast<int>(start));
  const int horizon = std::max(p.horizon, w.j0 + 8);
  const auto y = iterate(p.y0, p.y1, p.sign, horizon);
  const double scale = std::max({1.0, std::abs(p.y0), std::abs(p.y1)});
  w.verified = true;
  for (int j = w.j0; j <= horizon; ++j) {
    const double bound = 0.5 * w.slope * static_cast<double>(j + 1);
    if (std::abs(y[static_cast<std::size_t>(j)]) < bound - 1e-9 * scale * (j + 1)) {
      w.verified = false;
      break;
    }
  }
  return w;
}

RandomMapLaw RandomMapLaw::parse(const std::string& text) {
  RandomMapLaw law;
  if (text == "uniform") {
    law.kind = Kind::Uniform;
  } else if (text == "two-point") {
    law.kind = Kind::TwoPoint;
  } else if (text == "antithetic") {
    law.kind = Kind::AntitheticTwoPoint;
  } else if (text == "triangular") {
    law.kind = Kind::Triangular;
  } else {
    throw Error(ErrorKind::InvalidInput,
                "law must be uniform, two-point, antithetic or triangular, got '" + text + "'");
  }
  return law;
}

std::string RandomMapLaw::name() const {
  switch (kind) {
    case Kind::Uniform: return "uniform";
    case Kind::TwoPoint: return "two-point";
    case Kind::AntitheticTwoPoint: return "antithetic";
    case Kind::Triangular: return "triangular";
  }
  return "unknown";
}

double RandomMapLaw::draw(std::uint64_t seed, std::uint64_t index) const {
  CounterRng rng = CounterRng(seed).stream(index);
  switch (kind) {
    case Kind::Uniform:
      return rng.next_open_unit() - 0.5;
    case Kind::TwoPoint:
      return (rng.next() >> 63) ? 0.5 : -0.5;
    case Kind::AntitheticTwoPoint:
      return index % 2 == 0 ? 0.5 : -0.5;
    case Kind::Triangular:
      for (;;) {
        const double u1 = rng.next_open_unit();
        const double u2 = rng.next_open_unit();
        const double a = 0.5 * (u1 + u2 - 1.0);
        if (a != 0.0 || !excludes_zero) return a;
      }
  }
  return 0.0;
}

SymMap random_map_sample(const RandomMapLaw& law, std::uint64_t seed, Index dim) {
  return map_from_coefficient(dim, law.draw(seed, 0));
}

PopulationReport population_mc_experiment(const TruncationConfig& config, const RandomMapLaw& law,
                                          std::size_t n, std::uint64_t seed,
                                          const SolverSettings& settings) {
  if (n < 2) throw Error(ErrorKind::NInsufficient, "population experiment needs n >= 2");
  const CovMatrix sigma = build_sigma(config);
  const Index dim = config.dim;

  std::vector<CovMatrix> family;
  family.reserve(n);
  Matrix map_sum = Matrix::Zero(dim, dim);
  double coefficient_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = law.draw(seed, i);
    const SymMap t = map_from_coefficient(dim, a);
    map_sum += t.matrix();
    coefficient_sum += a;
    family.push_back(conjugate(t, sigma));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double deviation = (map_sum * inv_n - Matrix::Identity(dim, dim)).norm();

  const BarycentreProblem problem(std::move(family), {}, settings);
  const double residual = verify_barycentre_certificate(sigma, problem);
  BarycentreResult solved = barycentre_fixed_point(problem);
  const double distance = (solved.barycentre.matrix() - sigma.matrix()).norm();
  return PopulationReport{n,        seed,     coefficient_sum * inv_n, deviation,
                          residual, std::move(solved), distance};
}

KernelComparison compare_kernels(const CovMatrix& a, const CovMatrix& b, double rank_tol) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "compare_kernels: dimensions differ");
  const Matrix ka = kernel_basis(a, rank_tol);
  const Matrix kb = kernel_basis(b, rank_tol);
  KernelComparison out;
  out.kernel_dim_a = ka.cols();
  out.kernel_dim_b = kb.cols();
  out.angles = principal_angles(ka, kb);
  out.shared_dim = (out.angles.array() < kSharedAngle).count();
  out.min_angle = out.angles.size() ? out.angles(0) : std::numeric_limits<double>::quiet_NaN();
  out.min_nonzero_angle = std::numeric_limits<double>::quiet_NaN();
  for (Index i = 0; i < out.angles.size(); ++i) {
    if (out.angles(i) >= kSharedAngle) {
      out.min_nonzero_angle = out.angles(i);
      break;
    }
  }
  return out;
}

}  // namespace bwbary
