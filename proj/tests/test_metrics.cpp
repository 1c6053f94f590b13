#include "privae/factor_dataset.hpp"
#include "privae/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace {

Eigen::MatrixXd factor_latents(const Eigen::MatrixXi& f) { return f.cast<double>(); }

}  // namespace

TEST(EqualCountBins, TiesShareTheLowestRank) {
  const std::vector<double> v{3.0, 1.0, 1.0, 2.0, 5.0, 4.0, 1.0, 6.0};
  // ranks of ties: the three 1.0 values take rank 0
  const auto b = privae::equal_count_bins(v, 4);
  EXPECT_EQ(b, (std::vector<int>{2, 0, 0, 1, 3, 2, 0, 3}));
  EXPECT_THROW(privae::equal_count_bins(v, 1), std::invalid_argument);
}

TEST(DiscreteInformation, KnownValues) {
  const std::vector<int> a{0, 0, 1, 1};
  const std::vector<int> b{0, 1, 0, 1};
  EXPECT_NEAR(privae::discrete_entropy(a), std::log(2.0), 1e-15);
  EXPECT_NEAR(privae::discrete_mutual_information(a, a), std::log(2.0), 1e-15);
  EXPECT_NEAR(privae::discrete_mutual_information(a, b), 0.0, 1e-15);
  EXPECT_THROW(privae::discrete_mutual_information(a, std::vector<int>{0}), std::invalid_argument);
}

TEST(Mig, FactorCopiesScorePerfectly) {
  const privae::FactorGrid grid;
  const auto f = grid.factor_table();
  Eigen::MatrixXd z(768, 6);
  z << factor_latents(f), oracle::gaussian_matrix(768, 2, 1);
  const auto r = privae::mig(z, f, 8);
  EXPECT_GE(r.score, 0.9);
  EXPECT_EQ(r.scored.size(), 4u);
}

TEST(Mig, IndependentLatentsScoreNearZero) {
  const privae::FactorGrid grid;
  const auto r = privae::mig(oracle::gaussian_matrix(768, 10, 2), grid.factor_table());
  EXPECT_LT(r.score, 0.05);
}

TEST(Mig, DuplicatedLatentsHaveNoGap) {
  const privae::FactorGrid grid;
  const auto f = grid.factor_table();
  const Eigen::MatrixXd c = factor_latents(f);
  Eigen::MatrixXd z(768, 8);
  z << c, c;
  EXPECT_NEAR(privae::mig(z, f, 8).score, 0.0, 1e-12);
}

TEST(Mig, ConstantFactorIsSkipped) {
  const privae::FactorGrid grid;
  Eigen::MatrixXi f = grid.factor_table();
  f.col(0).setZero();
  const auto r = privae::mig(factor_latents(grid.factor_table()), f, 8);
  EXPECT_EQ(r.scored.size(), 3u);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_THROW(privae::mig(Eigen::MatrixXd::Zero(768, 2), Eigen::MatrixXi::Zero(768, 2)), std::invalid_argument);
  EXPECT_THROW(privae::mig(Eigen::MatrixXd::Zero(50, 2), Eigen::MatrixXi::Zero(50, 2)), std::invalid_argument);
}

TEST(MigProperty, InvariantToMonotoneTransformsAndRowOrder) {
  const privae::FactorGrid grid;
  const auto f = grid.factor_table();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd z = oracle::gaussian_matrix(768, 5, 10 + seed);
    z.col(0) += 2.0 * f.col(2).cast<double>();
    z.col(3) += 0.7 * f.col(1).cast<double>();
    const double base = privae::mig(z, f).score;
    Eigen::MatrixXd warped = z;
    warped.col(0) = z.col(0).array().exp();
    warped.col(3) = z.col(3).array().cube() * 5.0 + 1.0;
    EXPECT_NEAR(privae::mig(warped, f).score, base, 1e-12);

    Eigen::PermutationMatrix<Eigen::Dynamic> p(768);
    p.setIdentity();
    std::mt19937_64 rng(seed);
    std::shuffle(p.indices().data(), p.indices().data() + 768, rng);
    const Eigen::MatrixXi pf = p * f;
    EXPECT_NEAR(privae::mig(p * z, pf).score, base, 1e-12);
  }
}

TEST(Pearson, KnownValuesAndAffineInvariance) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 4, 6, 8, 10};
  const std::vector<double> c{5, 4, 3, 2, 1};
  EXPECT_NEAR(privae::pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(privae::pearson(a, c), -1.0, 1e-15);
  const Eigen::MatrixXd xy = oracle::gaussian_matrix(200, 2, 3);
  std::vector<double> x(200), y(200), y2(200);
  for (int i = 0; i < 200; ++i) {
    x[i] = xy(i, 0);
    y[i] = xy(i, 0) + xy(i, 1);
    y2[i] = 3.0 * y[i] - 7.0;
  }
  EXPECT_NEAR(privae::pearson(x, y), oracle::pearson(x, y), 1e-12);
  EXPECT_NEAR(privae::pearson(x, y2), privae::pearson(x, y), 1e-12);
  EXPECT_THROW(privae::pearson(a, std::vector<double>{1, 1, 1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(privae::pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(PhaseDetect, RiseThenFall) {
  std::vector<double> s;
  for (int i = 0; i < 30; ++i) s.push_back(i < 10 ? i : 18 - i);
  const auto r = privae::phase_detect(s, 1);
  EXPECT_EQ(r.peak_index, 9u);
  EXPECT_TRUE(r.final_below_peak);
}

TEST(PhaseDetect, MonotoneRiseHasNoCompression) {
  std::vector<double> s(20);
  std::iota(s.begin(), s.end(), 1.0);
  const auto r = privae::phase_detect(s, 2);
  EXPECT_EQ(r.peak_index, 19u);
  EXPECT_FALSE(r.final_below_peak);
  EXPECT_THROW(privae::phase_detect(std::vector<double>{1, 2, 3}, 2), std::invalid_argument);
}

TEST(TrendSlope, Linear) {
  EXPECT_NEAR(privae::trend_slope(std::vector<double>{1, 3, 5, 7}), 2.0, 1e-15);
  EXPECT_THROW(privae::trend_slope(std::vector<double>{1}), std::invalid_argument);
}
