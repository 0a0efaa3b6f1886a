#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qmsep/hilbert.hpp"

namespace qmsep {

// Eigenvalues of P1 P2 P1 this close to 0 or 1 are snapped, and the block is
// treated as one-dimensional.
inline constexpr double kJordanSnap = 1e-10;
inline constexpr Eigen::Index kJordanMaxDim = 256;

// One invariant block of a projector pair. Two-dimensional blocks carry both
// v (in range P1) and w = P2 v / |P2 v|, with p = |<v|w>|^2. One-dimensional
// blocks carry whichever of v, w spans them; when both are present they are
// equal (p = 1).
struct JordanBlock {
  int dim = 0;
  double p = 0.0;
  std::optional<Vector> v;
  std::optional<Vector> w;

  Matrix projector() const {
    if (dim == 1) {
      const Vector& x = v ? *v : *w;
      return x * x.adjoint();
    }
    Vector e2 = *w - v->dot(*w) * *v;
    e2 /= e2.norm();
    return *v * v->adjoint() + e2 * e2.adjoint();
  }
};

struct JordanDecomposition {
  Eigen::Index dimension = 0;
  std::vector<JordanBlock> blocks;
  // Joint kernel of both projectors; counted, not enumerated.
  Eigen::Index kernel_dimension = 0;
};

namespace detail {

inline Matrix range_basis(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::numeric_failure, "eigensolver failed on projector");
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 0.5) cols.push_back(i);
  Matrix out(p.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cols[j]);
  return out;
}

}  // namespace detail

// Blocks are ordered: those meeting range(P1) by descending p, then the
// one-dimensional blocks of range(P2) orthogonal to range(P1).
inline JordanDecomposition jordan_decompose(const Projector& p1, const Projector& p2) {
  if (p1.dim() != p2.dim()) throw Error(ErrorKind::dimension_mismatch, "projectors act on different spaces");
  if (p1.dim() > kJordanMaxDim) throw Error(ErrorKind::budget_exceeded, "Jordan decomposition is capped at dimension 256");
  const Eigen::Index d = p1.dim();
  JordanDecomposition out;
  out.dimension = d;

  const Matrix v1 = detail::range_basis(p1.matrix());
  const Matrix& q = p2.matrix();
  Matrix covered_w = Matrix::Zero(d, d);
  Eigen::Index total = 0;

  if (v1.cols() > 0) {
    Matrix m = v1.adjoint() * q * v1;
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numeric_failure, "eigensolver failed on compressed product");
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
      double p = std::clamp(es.eigenvalues()[i], 0.0, 1.0);
      Vector v = v1 * es.eigenvectors().col(i);
      v /= v.norm();
      JordanBlock b;
      b.v = v;
      if (p < kJordanSnap) {
        b.dim = 1;
        b.p = 0.0;
      } else if (p > 1.0 - kJordanSnap) {
        b.dim = 1;
        b.p = 1.0;
        b.w = v;
      } else {
        Vector w = q * v;
        w /= w.norm();
        b.dim = 2;
        b.p = p;
        b.w = w;
      }
      if (b.w) covered_w += *b.w * b.w->adjoint();
      total += b.dim;
      out.blocks.push_back(std::move(b));
    }
  }

  // Directions of range(P2) not reached from range(P1); P1 vanishes on them.
  Matrix residual = q - covered_w;
  residual = 0.5 * (residual + residual.adjoint()).eval();
  const Matrix rest = detail::range_basis(residual);
  for (Eigen::Index j = 0; j < rest.cols(); ++j) {
    JordanBlock b;
    b.dim = 1;
    b.p = 0.0;
    b.w = rest.col(j);
    total += 1;
    out.blocks.push_back(std::move(b));
  }
  out.kernel_dimension = d - total;
  if (out.kernel_dimension < 0) throw Error(ErrorKind::numeric_failure, "Jordan blocks overfill the space");
  return out;
}

struct Overlap {
  double p = 0.0;
  Vector v;
  std::size_t block = 0;
};

// Largest p among blocks that carry a v; ties go to the lowest block index.
inline Overlap max_overlap(const JordanDecomposition& jd) {
  std::optional<Overlap> best;
  for (std::size_t i = 0; i < jd.blocks.size(); ++i) {
    const auto& b = jd.blocks[i];
    if (!b.v) continue;
    if (!best || b.p > best->p) best = Overlap{b.p, *b.v, i};
  }
  if (!best) throw Error(ErrorKind::empty_spectrum, "no block meets the range of the first projector");
  return *best;
}

}  // namespace qmsep
