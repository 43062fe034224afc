#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bwbary/counterexample.hpp"
#include "oracles.hpp"

using namespace bwbary;

TEST(DoublingShift, Examples) {
  Matrix expected = Matrix::Zero(4, 4);
  expected(1, 0) = 1.0;  // e1 -> e2
  expected(3, 1) = 1.0;  // e2 -> e4
  EXPECT_EQ(doubling_shift(4), expected);

  Matrix two = Matrix::Zero(2, 2);
  two(1, 0) = 1.0;
  EXPECT_EQ(doubling_shift(2), two);
  EXPECT_THROW(doubling_shift(1), Error);
}

TEST(DoublingShift, IsPartialIsometry) {
  for (Index n : {2, 5, 16, 33}) {
    const Matrix f = doubling_shift(n);
    EXPECT_NEAR(spectral_norm(f), 1.0, 1e-14);
    EXPECT_EQ(f.sum(), static_cast<double>(n / 2));
  }
}

TEST(BuildT, Examples) {
  Matrix expected(2, 2);
  expected << 2.0, 1.0, 1.0, 2.0;
  EXPECT_EQ(build_T(2, 2.0).matrix(), expected);

  const auto base = eig_sym(build_T(8, 2.0).matrix());
  const auto shifted = eig_sym(build_T(8, 3.0).matrix());
  EXPECT_LE((shifted.eigenvalues - base.eigenvalues - Vector::Ones(8)).norm(), 1e-12);

  EXPECT_THROW(build_T(8, 1.0), Error);
  EXPECT_NO_THROW(build_T(2, 1.0, true));
}

TEST(BuildT, SpectrumWithinBounds) {
  for (Index n : {2, 7, 16, 64}) {
    const auto d = eig_sym(build_T(n, 2.0).matrix());
    EXPECT_GE(d.eigenvalues.minCoeff(), -1e-12);
    EXPECT_LE(d.eigenvalues.maxCoeff(), 4.0 + 1e-12);
  }
}

TEST(PairMaps, AverageIsIdentityBitExact) {
  for (Index n : {2, 8, 64, 128}) {
    const auto [t1, t2] = build_pair_maps(n);
    const Matrix sum = t1.matrix() + t2.matrix();
    EXPECT_TRUE((sum.array() == 2.0 * Matrix::Identity(n, n).array()).all());
  }
}

TEST(PairMaps, MirroredSpectra) {
  // F + F^T is the adjacency matrix of a bipartite forest, so its spectrum is
  // symmetric about 0 and T1, T2 are isospectral and positive definite.
  const auto [t1, t2] = build_pair_maps(32);
  const auto d1 = eig_sym(t1.matrix());
  const auto d2 = eig_sym(t2.matrix());
  EXPECT_LE((d1.eigenvalues - d2.eigenvalues).norm(), 1e-12);
  EXPECT_GT(d1.eigenvalues.minCoeff(), 0.0);
}

TEST(Coefficients, MapAndNFold) {
  const auto [t1, t2] = build_pair_maps(16);
  EXPECT_EQ(map_from_coefficient(16, 0.5).matrix(), t1.matrix());
  EXPECT_EQ(map_from_coefficient(16, -0.5).matrix(), t2.matrix());
  EXPECT_THROW(map_from_coefficient(16, 0.6), Error);

  for (std::size_t n : {2u, 3u, 7u, 10u}) {
    const auto coeffs = default_coefficients(n);
    ASSERT_EQ(coeffs.size(), n);
    const auto maps = build_nfold_maps(16, coeffs);
    Matrix mean = Matrix::Zero(16, 16);
    for (const auto& t : maps) mean += t.matrix() / static_cast<double>(n);
    EXPECT_LE((mean - Matrix::Identity(16, 16)).norm(), 1e-14);
  }
  EXPECT_THROW(build_nfold_maps(8, {0.5, 0.25}), Error);
  EXPECT_NO_THROW(build_nfold_maps(8, {0.5, -0.25}, {1.0 / 3.0, 2.0 / 3.0}));
}

TEST(Sigma, Examples) {
  TruncationConfig config;
  config.dim = 4;
  EXPECT_EQ(build_sigma(config).matrix(), Vector((Vector(4) << 0.0, 0.5, 0.0, 0.25).finished()).asDiagonal().toDenseMatrix());

  config.decay = ExplicitDecay{{3.0, 7.0}};
  EXPECT_EQ(build_sigma(config)(1, 1), 3.0);
  EXPECT_EQ(build_sigma(config)(3, 3), 7.0);

  config.decay = ExplicitDecay{{1.0}};
  EXPECT_THROW(build_sigma(config), Error);

  config = TruncationConfig{};
  config.dim = 16;
  EXPECT_EQ(kernel_dim(build_sigma(config)), 8);
  EXPECT_EQ(kernel_dim(build_sigma(config), 1e-13), 8);
}

TEST(Sigma, ParseDecay) {
  const auto g = parse_decay("geometric:0.25");
  ASSERT_TRUE(std::holds_alternative<GeometricDecay>(g));
  EXPECT_EQ(std::get<GeometricDecay>(g).ratio, 0.25);
  const auto l = parse_decay("list:1,2.5");
  ASSERT_TRUE(std::holds_alternative<ExplicitDecay>(l));
  EXPECT_EQ(std::get<ExplicitDecay>(l).values, (std::vector<double>{1.0, 2.5}));
  EXPECT_THROW(parse_decay("geometric:1.5"), Error);
  EXPECT_THROW(parse_decay("cubic:2"), Error);
  EXPECT_EQ(parse_decay(to_string(l)).index(), l.index());
}

TEST(Conjugate, Examples) {
  TruncationConfig config;
  config.dim = 8;
  const CovMatrix sigma = build_sigma(config);
  EXPECT_EQ(conjugate(SymMap::identity(8), sigma).matrix(), sigma.matrix());
  EXPECT_EQ(conjugate(SymMap(Matrix(2.0 * Matrix::Identity(8, 8))), sigma).matrix(), 4.0 * sigma.matrix());

  const auto [t1, t2] = build_pair_maps(8);
  const CovMatrix s1 = conjugate(t1, sigma);
  EXPECT_NEAR(s1.trace(), (t1.matrix() * t1.matrix() * sigma.matrix()).trace(), 1e-14);
  EXPECT_EQ(s1.matrix(), s1.matrix().transpose());
}

TEST(Recurrence, ExamplesMatchIntegerOracle) {
  RecurrenceParams p;
  p.y0 = 1.0;
  p.y1 = 0.0;
  p.horizon = 6;
  const auto y = kernel_recurrence_solve(p);
  const auto exact = oracle::recurrence_int(1, 0, -2, 6);
  ASSERT_EQ(y.size(), 7u);
  for (std::size_t j = 0; j < y.size(); ++j) EXPECT_EQ(y[j], static_cast<double>(exact[j]));
  EXPECT_EQ(y[3], 2.0);

  p.sign = RecurrenceSign::Minus;
  const auto ym = kernel_recurrence_solve(p);
  const auto exact_minus = oracle::recurrence_int(1, 0, 2, 6);
  for (std::size_t j = 0; j < ym.size(); ++j) EXPECT_EQ(ym[j], static_cast<double>(exact_minus[j]));

  p.y0 = p.y1 = 0.0;
  for (double v : kernel_recurrence_solve(p)) EXPECT_EQ(v, 0.0);
}

TEST(Recurrence, ClosedFormCoefficients) {
  RecurrenceParams p;
  p.y0 = 2.0;
  p.y1 = -1.0;
  const auto f = closed_form_coefficients(p);
  EXPECT_EQ(f.a, -1.0);
  EXPECT_EQ(f.b, 3.0);
  p.sign = RecurrenceSign::Minus;
  const auto m = closed_form_coefficients(p);
  EXPECT_EQ(m.a, -3.0);
  EXPECT_EQ(m.b, 5.0);
  EXPECT_EQ(parse_sign("minus"), RecurrenceSign::Minus);
  EXPECT_THROW(parse_sign("times"), Error);
}

TEST(Recurrence, ClosedFormAgreesOnRandomSeeds) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    RecurrenceParams p;
    p.y0 = u(rng);
    p.y1 = u(rng);
    p.sign = trial % 2 ? RecurrenceSign::Minus : RecurrenceSign::Plus;
    p.horizon = 30;
    const auto y = kernel_recurrence_solve(p);
    const auto g = generating_coefficients(p);
    ASSERT_EQ(y.size(), g.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) worst = std::max(worst, std::abs(y[j] - g[j]));
    EXPECT_LE(worst, 1e-9);
  }
}

TEST(Recurrence, IntegerSeedsAreExact) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    RecurrenceParams p;
    const int y0 = u(rng), y1 = u(rng);
    p.y0 = y0;
    p.y1 = y1;
    p.horizon = 60;
    const auto y = kernel_recurrence_solve(p);
    const auto exact = oracle::recurrence_int(y0, y1, -2, 60);
    for (std::size_t j = 0; j < y.size(); ++j) ASSERT_EQ(y[j], static_cast<double>(exact[j]));
  }
}

TEST(GrowthWitness, Examples) {
  RecurrenceParams p;
  p.y0 = 1.0;
  p.y1 = 0.0;
  const auto w = growth_witness(p);
  EXPECT_EQ(w.kind, GrowthKind::Linear);
  EXPECT_EQ(w.form.a, -1.0);
  EXPECT_EQ(w.form.b, 2.0);
  EXPECT_EQ(w.j0, 3);
  EXPECT_TRUE(w.verified);

  p.y0 = p.y1 = 0.0;
  EXPECT_EQ(growth_witness(p).kind, GrowthKind::Zero);

  // Minus sign with y0 == y1 is the constant sequence.
  p.y0 = p.y1 = 2.5;
  p.sign = RecurrenceSign::Minus;
  const auto bounded = growth_witness(p);
  EXPECT_EQ(bounded.kind, GrowthKind::Bounded);
  EXPECT_TRUE(bounded.verified);
}

TEST(GrowthWitness, NonzeroSeedsNeverDecay) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    RecurrenceParams p;
    p.y0 = u(rng);
    p.y1 = u(rng);
    p.sign = trial % 2 ? RecurrenceSign::Minus : RecurrenceSign::Plus;
    const auto w = growth_witness(p);
    EXPECT_NE(w.kind, GrowthKind::Zero);
    EXPECT_TRUE(w.verified);
  }
}

TEST(RandomLaw, ParseAndSupport) {
  for (const char* name : {"uniform", "two-point", "antithetic", "triangular"}) {
    const auto law = RandomMapLaw::parse(name);
    EXPECT_EQ(law.name(), name);
    for (std::uint64_t i = 0; i < 200; ++i) {
      const double a = law.draw(5, i);
      EXPECT_LE(std::abs(a), 0.5);
      EXPECT_NE(a, 0.0);
    }
  }
  EXPECT_THROW(RandomMapLaw::parse("cauchy"), Error);
  const auto antithetic = RandomMapLaw::parse("antithetic");
  EXPECT_EQ(antithetic.draw(9, 0), 0.5);
  EXPECT_EQ(antithetic.draw(9, 1), -0.5);
}

TEST(RandomLaw, DeterministicAndOrderFree) {
  const auto law = RandomMapLaw::parse("uniform");
  std::vector<double> forward, backward(50);
  for (std::uint64_t i = 0; i < 50; ++i) forward.push_back(law.draw(77, i));
  for (std::uint64_t i = 50; i-- > 0;) backward[i] = law.draw(77, i);
  EXPECT_EQ(forward, backward);
  EXPECT_NE(law.draw(77, 0), law.draw(78, 0));
  EXPECT_EQ(random_map_sample(law, 77, 8).matrix(), map_from_coefficient(8, law.draw(77, 0)).matrix());
}

TEST(RandomLaw, UniformMeanWithinClt) {
  const auto law = RandomMapLaw::parse("uniform");
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += law.draw(2024, static_cast<std::uint64_t>(i));
  // sd of the mean is sqrt(1/12 / n); allow four of them.
  EXPECT_LE(std::abs(sum / n), 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Population, AntitheticPairsGiveExactCertificate) {
  TruncationConfig config;
  config.dim = 16;
  SolverSettings settings;
  settings.ridge = 1e-6;
  const auto r = population_mc_experiment(config, RandomMapLaw::parse("antithetic"), 10, 3, settings);
  EXPECT_EQ(r.mean_coefficient, 0.0);
  EXPECT_LE(r.mean_deviation, 1e-14);
  EXPECT_LE(r.certificate_residual, 1e-9);
  EXPECT_LE(r.solver_distance_to_sigma, 1e-6);
}

TEST(Population, TwoPointResidualTracksMeanCoefficient) {
  TruncationConfig config;
  config.dim = 16;
  const auto law = RandomMapLaw::parse("two-point");
  SolverSettings settings;
  settings.ridge = 1e-6;
  int cancelled = 0, biased = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto r = population_mc_experiment(config, law, 2, seed, settings);
    if (r.mean_coefficient == 0.0) {
      ++cancelled;
      EXPECT_LE(r.certificate_residual, 1e-9);
    } else {
      ++biased;
      EXPECT_GT(r.certificate_residual, 1e-3);
    }
  }
  EXPECT_GT(cancelled, 0);
  EXPECT_GT(biased, 0);
}

TEST(Population, NeedsTwoDraws) {
  try {
    population_mc_experiment(TruncationConfig{}, RandomMapLaw{}, 1, 0, SolverSettings{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NInsufficient);
  }
}

TEST(KernelComparison, SigmaAgainstConjugate) {
  for (Index n : {8, 16, 32}) {
    TruncationConfig config;
    config.dim = n;
    const CovMatrix sigma = build_sigma(config);
    const auto [t1, t2] = build_pair_maps(n);
    const auto c = compare_kernels(sigma, conjugate(t1, sigma), 1e-13);
    EXPECT_EQ(c.kernel_dim_a, n / 2);
    EXPECT_EQ(c.kernel_dim_b, n / 2);
    EXPECT_EQ(c.shared_dim, n / 4);
    EXPECT_EQ(c.min_angle, c.angles(0));
    EXPECT_NEAR(c.min_nonzero_angle, std::atan(0.5), 1e-10);
  }
}
