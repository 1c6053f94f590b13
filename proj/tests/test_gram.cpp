#include "privae/gram.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using privae::KernelSpec;
using privae::Matrix;
using privae::NormalizedGram;

namespace {

void expect_invariants(const NormalizedGram& a) {
  const auto& m = a.entries();
  const double n = static_cast<double>(a.n());
  EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m.trace(), 1.0, 1e-10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_NEAR(m(i, i), 1.0 / n, 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * n);
}

}  // namespace

TEST(Gram, IdenticalPointsGiveRankOneMatrix) {
  const Matrix x = Matrix::Constant(5, 3, 0.25);
  const auto a = privae::gram_with_width(x, 1.0);
  EXPECT_LT((a.entries().array() - 0.2).abs().maxCoeff(), 1e-15);
}

TEST(Gram, FarApartPointsGiveScaledIdentity) {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  const auto a = privae::gram_with_width(x, 1e-3);
  EXPECT_LT((a.entries() - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gram, ThreePointsByHand) {
  Matrix x(3, 1);
  x << 0, 1, 2;
  const auto a = privae::gram_with_width(x, 1.0);
  EXPECT_NEAR(a.entries()(0, 1), std::exp(-0.5) / 3.0, 1e-15);
  EXPECT_NEAR(a.entries()(1, 2), std::exp(-0.5) / 3.0, 1e-15);
  EXPECT_NEAR(a.entries()(0, 2), std::exp(-2.0) / 3.0, 1e-15);
}

TEST(Gram, MatchesLoopOracle) {
  const Matrix x = oracle::gaussian_matrix(12, 4, 3);
  const auto a = privae::gram_with_width(x, 1.3);
  EXPECT_LT((a.entries() - oracle::normalized_gram(x, 1.3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gram, MedianRuleUsesMedianPairwiseDistance) {
  Matrix x(3, 1);
  x << 0, 1, 3;  // distances 1, 2, 3
  EXPECT_DOUBLE_EQ(privae::median_pairwise_distance(x), 2.0);
  EXPECT_DOUBLE_EQ(privae::resolve_width(x, KernelSpec::median(0.5)), 1.0);
}

TEST(Gram, SatisfiesInvariantsForEveryWidthRule) {
  const Matrix x = oracle::gaussian_matrix(30, 3, 4);
  for (const auto& k : {KernelSpec::median(1.0), KernelSpec::median(0.5), KernelSpec::silverman(),
                        KernelSpec::fixed(0.7)}) {
    expect_invariants(privae::gram(x, k));
  }
}

TEST(Gram, Errors) {
  EXPECT_THROW(privae::gram(Matrix::Zero(1, 2), KernelSpec::fixed(1.0)), std::invalid_argument);
  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(privae::gram(bad, KernelSpec::fixed(1.0)), std::invalid_argument);
  EXPECT_THROW(KernelSpec::fixed(0.0), std::invalid_argument);
  try {
    privae::gram(Matrix::Ones(4, 2), KernelSpec::median(1.0));
    FAIL() << "degenerate median rule accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("median"), std::string::npos) << e.what();
  }
}

TEST(Gram, FromEntriesValidates) {
  EXPECT_THROW(NormalizedGram::from_entries(Matrix::Identity(3, 3)), std::invalid_argument);
  Matrix asym = Matrix::Identity(2, 2) / 2.0;
  asym(0, 1) = 0.1;
  EXPECT_THROW(NormalizedGram::from_entries(asym), std::invalid_argument);
  EXPECT_NO_THROW(NormalizedGram::from_entries(Matrix::Identity(3, 3) / 3.0));
}

TEST(HadamardJoint, ConstantVariableIsAbsorbed) {
  const auto a = privae::gram(oracle::gaussian_matrix(10, 2, 5), KernelSpec::median());
  const auto j = privae::hadamard_joint(a, NormalizedGram::constant(10));
  EXPECT_LT((j.entries() - a.entries()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HadamardJoint, IdentityWithItself) {
  const auto j = privae::hadamard_joint(NormalizedGram::identity(6), NormalizedGram::identity(6));
  EXPECT_LT((j.entries() - Matrix::Identity(6, 6) / 6.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HadamardJoint, TraceOfProductBeforeNormalization) {
  const auto a = privae::gram(oracle::gaussian_matrix(16, 2, 6), KernelSpec::median());
  const auto b = privae::gram(oracle::gaussian_matrix(16, 3, 7), KernelSpec::median());
  EXPECT_NEAR(a.entries().cwiseProduct(b.entries()).trace(), 1.0 / 16.0, 1e-15);
  const auto j = privae::hadamard_joint(a, b);
  EXPECT_LT((j.entries() - oracle::hadamard_normalized(a.entries(), b.entries())).cwiseAbs().maxCoeff(),
            1e-15);
  expect_invariants(j);
}

TEST(HadamardJoint, Errors) {
  const std::vector<NormalizedGram> one{NormalizedGram::identity(3)};
  EXPECT_THROW(privae::hadamard_joint(one), std::invalid_argument);
  EXPECT_THROW(privae::hadamard_joint(NormalizedGram::identity(3), NormalizedGram::identity(4)),
               std::invalid_argument);
}

TEST(GramProperty, PermutationEquivariant) {
  const Matrix x = oracle::gaussian_matrix(9, 3, 8);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(9);
  p.setIdentity();
  std::mt19937_64 rng(1);
  std::shuffle(p.indices().data(), p.indices().data() + 9, rng);
  const Matrix px = p * x;
  const auto a = privae::gram(x, KernelSpec::median());
  const auto b = privae::gram(px, KernelSpec::median());
  EXPECT_LT((b.entries() - p * a.entries() * p.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GramProperty, RigidMotionInvariant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = oracle::gaussian_matrix(15, 3, 100 + seed);
    Eigen::HouseholderQR<Matrix> qr(oracle::gaussian_matrix(3, 3, 200 + seed));
    const Matrix rot = qr.householderQ();
    const Eigen::RowVector3d shift(3.0, -1.0, 0.5);
    const Matrix moved = (x * rot.transpose()).rowwise() + shift;
    const auto a = privae::gram(x, KernelSpec::median());
    const auto b = privae::gram(moved, KernelSpec::median());
    EXPECT_LT((a.entries() - b.entries()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GramProperty, HadamardCommutativeAndAssociative) {
  const auto a = privae::gram(oracle::gaussian_matrix(12, 2, 9), KernelSpec::median());
  const auto b = privae::gram(oracle::gaussian_matrix(12, 2, 10), KernelSpec::median());
  const auto c = privae::gram(oracle::gaussian_matrix(12, 2, 11), KernelSpec::median());
  const auto ab = privae::hadamard_joint(a, b);
  const auto ba = privae::hadamard_joint(b, a);
  EXPECT_LT((ab.entries() - ba.entries()).cwiseAbs().maxCoeff(), 1e-12);
  const auto left = privae::hadamard_joint(ab, c);
  const auto right = privae::hadamard_joint(a, privae::hadamard_joint(b, c));
  const std::vector<NormalizedGram> all{a, b, c};
  const auto flat = privae::hadamard_joint(all);
  EXPECT_LT((left.entries() - right.entries()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((left.entries() - flat.entries()).cwiseAbs().maxCoeff(), 1e-12);
}
