#include <gtest/gtest.h>

#include "qmsep/jordan.hpp"

using namespace qmsep;

namespace {

Matrix sum_outer(const JordanDecomposition& jd, bool use_v) {
  Matrix s = Matrix::Zero(jd.dimension, jd.dimension);
  for (const auto& b : jd.blocks) {
    const auto& x = use_v ? b.v : b.w;
    if (x) s += *x * x->adjoint();
  }
  return s;
}

}  // namespace

TEST(Jordan, QubitAtFortyFiveDegrees) {
  const Projector p1(gates::ket_bra(0, 0, 2));
  Vector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const Projector p2(plus * plus.adjoint());
  const auto jd = jordan_decompose(p1, p2);
  ASSERT_EQ(jd.blocks.size(), 1U);
  EXPECT_EQ(jd.blocks[0].dim, 2);
  EXPECT_NEAR(jd.blocks[0].p, 0.5, 1e-12);
  EXPECT_EQ(jd.kernel_dimension, 0);
}

TEST(Jordan, CommutingDiagonalProjectors) {
  Matrix a = Matrix::Zero(4, 4), b = Matrix::Zero(4, 4);
  a(0, 0) = a(1, 1) = 1.0;
  b(0, 0) = b(2, 2) = 1.0;
  const auto jd = jordan_decompose(Projector(a), Projector(b));
  ASSERT_EQ(jd.blocks.size(), 3U);
  EXPECT_DOUBLE_EQ(jd.blocks[0].p, 1.0);
  EXPECT_DOUBLE_EQ(jd.blocks[1].p, 0.0);
  EXPECT_FALSE(jd.blocks[2].v.has_value());
  EXPECT_EQ(jd.kernel_dimension, 1);
}

TEST(Jordan, RandomPairsReconstructAndAreInvariant) {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const auto d = static_cast<Eigen::Index>(2 + rng.below(10));
    const auto p1 = random_projector(d, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d) + 1)), rng);
    const auto p2 = random_projector(d, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d) + 1)), rng);
    const auto jd = jordan_decompose(p1, p2);
    EXPECT_LT((sum_outer(jd, true) - p1.matrix()).norm(), 1e-8);
    EXPECT_LT((sum_outer(jd, false) - p2.matrix()).norm(), 1e-8);
    Eigen::Index total = jd.kernel_dimension;
    for (const auto& b : jd.blocks) {
      const Matrix pb = b.projector();
      total += b.dim;
      EXPECT_LT((p1.matrix() * pb - pb * p1.matrix()).norm(), 1e-8);
      EXPECT_LT((p2.matrix() * pb - pb * p2.matrix()).norm(), 1e-8);
      if (b.v && b.w) {
        EXPECT_NEAR(std::norm(b.v->dot(*b.w)), b.p, 1e-8);
      }
    }
    EXPECT_EQ(total, d);
  }
}

TEST(Jordan, MaxOverlapTiesGoToLowestIndex) {
  JordanDecomposition jd;
  jd.dimension = 2;
  JordanBlock a, b;
  a.dim = b.dim = 1;
  a.p = b.p = 0.5;
  a.v = Vector::Unit(2, 0);
  b.v = Vector::Unit(2, 1);
  jd.blocks = {a, b};
  EXPECT_EQ(max_overlap(jd).block, 0U);
}

TEST(Jordan, EmptyRangeIsAnError) {
  const auto jd = jordan_decompose(Projector::zero(3), Projector::identity(3));
  try {
    max_overlap(jd);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_spectrum);
  }
  EXPECT_THROW(jordan_decompose(Projector::zero(2), Projector::zero(3)), Error);
}
