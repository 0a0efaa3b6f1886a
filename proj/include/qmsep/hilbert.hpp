#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmsep/error.hpp"
#include "qmsep/rng.hpp"

namespace qmsep {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
// Norms, traces, idempotence, Hermiticity.
inline constexpr double structural = 1e-9;
// Admission check for caller-supplied unitaries.
inline constexpr double unitarity = 1e-6;
}  // namespace tol

// Largest simulated register, in qubits. QMSEP_QUBIT_CAP overrides.
inline int qubit_cap() {
  if (const char* env = std::getenv("QMSEP_QUBIT_CAP")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 22;
}

inline bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::uint64_t n) {
  if (!is_power_of_two(n)) throw Error(ErrorKind::dimension_mismatch, "dimension " + std::to_string(n) + " is not a power of two");
  int k = 0;
  while ((std::uint64_t{1} << k) < n) ++k;
  return k;
}

inline int ceil_log2(std::uint64_t n) {
  int k = 0;
  while ((std::uint64_t{1} << k) < n) ++k;
  return k;
}

struct Register {
  std::string name;
  int qubits = 0;
};

// Named registers over a qubit string. Ordering is big-endian throughout:
// the first register holds the most significant bits of a basis index, and
// within a register the first qubit is the most significant.
class RegisterLayout {
 public:
  RegisterLayout() = default;

  explicit RegisterLayout(std::vector<Register> regs) : regs_(std::move(regs)) {
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      if (regs_[i].qubits < 1) throw Error(ErrorKind::invalid_argument, "register '" + regs_[i].name + "' must hold at least one qubit");
      for (std::size_t j = 0; j < i; ++j)
        if (regs_[j].name == regs_[i].name) throw Error(ErrorKind::invalid_argument, "duplicate register '" + regs_[i].name + "'");
    }
  }

  const std::vector<Register>& registers() const { return regs_; }

  int total_qubits() const {
    int n = 0;
    for (const auto& r : regs_) n += r.qubits;
    return n;
  }

  std::uint64_t dimension() const { return std::uint64_t{1} << total_qubits(); }

  bool contains(const std::string& name) const {
    return std::any_of(regs_.begin(), regs_.end(), [&](const Register& r) { return r.name == name; });
  }

  int offset_of(const std::string& name) const {
    int off = 0;
    for (const auto& r : regs_) {
      if (r.name == name) return off;
      off += r.qubits;
    }
    throw Error(ErrorKind::unknown_register, "no register named '" + name + "'");
  }

  int qubits_of(const std::string& name) const {
    for (const auto& r : regs_)
      if (r.name == name) return r.qubits;
    throw Error(ErrorKind::unknown_register, "no register named '" + name + "'");
  }

  // Qubit indices of the named registers, concatenated in the order given.
  std::vector<int> qubit_indices(std::span<const std::string> names) const {
    std::vector<int> out;
    for (const auto& n : names) {
      const int off = offset_of(n);
      const int q = qubits_of(n);
      for (int i = 0; i < q; ++i) {
        if (std::find(out.begin(), out.end(), off + i) != out.end())
          throw Error(ErrorKind::invalid_argument, "register '" + n + "' listed twice");
        out.push_back(off + i);
      }
    }
    return out;
  }

  std::vector<int> qubit_indices(std::initializer_list<std::string> names) const {
    std::vector<std::string> v(names);
    return qubit_indices(std::span<const std::string>(v));
  }

  RegisterLayout appended(const Register& r) const {
    auto regs = regs_;
    regs.push_back(r);
    return RegisterLayout(std::move(regs));
  }

  RegisterLayout concat(const RegisterLayout& other) const {
    auto regs = regs_;
    regs.insert(regs.end(), other.regs_.begin(), other.regs_.end());
    return RegisterLayout(std::move(regs));
  }

  RegisterLayout subset(std::span<const std::string> names) const {
    std::vector<Register> regs;
    for (const auto& n : names) regs.push_back({n, qubits_of(n)});
    return RegisterLayout(std::move(regs));
  }

  RegisterLayout without(std::span<const std::string> names) const {
    std::vector<Register> regs;
    for (const auto& r : regs_)
      if (std::find(names.begin(), names.end(), r.name) == names.end()) regs.push_back(r);
    return RegisterLayout(std::move(regs));
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& r : regs_) out.push_back(r.name);
    return out;
  }

  friend bool operator==(const RegisterLayout& a, const RegisterLayout& b) {
    if (a.regs_.size() != b.regs_.size()) return false;
    for (std::size_t i = 0; i < a.regs_.size(); ++i)
      if (a.regs_[i].name != b.regs_[i].name || a.regs_[i].qubits != b.regs_[i].qubits) return false;
    return true;
  }

 private:
  std::vector<Register> regs_;
};

namespace detail {

inline void check_budget(int qubits) {
  if (qubits > qubit_cap())
    throw Error(ErrorKind::budget_exceeded, std::to_string(qubits) + " qubits exceeds cap " + std::to_string(qubit_cap()));
}

// offs[a] is the basis-index bit pattern placing sub-index a (big-endian over
// `qubits`) into an n-qubit index.
inline std::vector<std::uint64_t> target_offsets(int n, std::span<const int> qubits) {
  const std::size_t r = qubits.size();
  std::vector<std::uint64_t> offs(std::size_t{1} << r, 0);
  for (std::size_t a = 0; a < offs.size(); ++a) {
    std::uint64_t o = 0;
    for (std::size_t j = 0; j < r; ++j)
      if ((a >> (r - 1 - j)) & 1U) o |= std::uint64_t{1} << (n - 1 - qubits[j]);
    offs[a] = o;
  }
  return offs;
}

inline std::vector<int> complement(int n, std::span<const int> qubits) {
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) rest.push_back(q);
  return rest;
}

inline std::uint64_t extract(std::uint64_t index, int n, std::span<const int> qubits) {
  std::uint64_t a = 0;
  for (int q : qubits) a = (a << 1) | ((index >> (n - 1 - q)) & 1U);
  return a;
}

// m applied to the listed qubits of an n-qubit amplitude vector. No checks.
inline Vector apply_matrix(const Vector& in, int n, const Matrix& m, std::span<const int> qubits) {
  const auto offs = target_offsets(n, qubits);
  const std::uint64_t mask = offs.back();
  const auto d = static_cast<Eigen::Index>(offs.size());
  if (m.rows() != d || m.cols() != d) throw Error(ErrorKind::dimension_mismatch, "operator does not match target registers");
  Vector out = Vector::Zero(in.size());
  Vector buf(d), res(d);
  const auto total = static_cast<std::uint64_t>(in.size());
  for (std::uint64_t base = 0; base < total; ++base) {
    if (base & mask) continue;
    for (Eigen::Index a = 0; a < d; ++a) buf[a] = in[static_cast<Eigen::Index>(base + offs[a])];
    res.noalias() = m * buf;
    for (Eigen::Index a = 0; a < d; ++a) out[static_cast<Eigen::Index>(base + offs[a])] = res[a];
  }
  return out;
}

}  // namespace detail

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline bool is_unitary(const Matrix& u, double tolerance = tol::unitarity) {
  if (u.rows() != u.cols()) return false;
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

inline bool is_hermitian(const Matrix& m, double tolerance = tol::structural) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

class DensityOp;

class QState {
 public:
  QState(RegisterLayout layout, Vector amps) : layout_(std::move(layout)), amps_(std::move(amps)) {
    detail::check_budget(layout_.total_qubits());
    if (static_cast<std::uint64_t>(amps_.size()) != layout_.dimension())
      throw Error(ErrorKind::dimension_mismatch, "amplitude vector has length " + std::to_string(amps_.size()) + ", layout needs " + std::to_string(layout_.dimension()));
    if (std::abs(amps_.squaredNorm() - 1.0) > tol::structural)
      throw Error(ErrorKind::invalid_argument, "state norm deviates from 1 by " + std::to_string(std::abs(amps_.squaredNorm() - 1.0)));
  }

  static QState basis(RegisterLayout layout, std::uint64_t index) {
    detail::check_budget(layout.total_qubits());
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
    if (index >= layout.dimension()) throw Error(ErrorKind::invalid_argument, "basis index out of range");
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return QState(std::move(layout), std::move(v));
  }

  static QState zero(RegisterLayout layout) { return basis(std::move(layout), 0); }

  // Normalises first; rejects the zero vector.
  static QState normalized(RegisterLayout layout, Vector amps) {
    const double n = amps.norm();
    if (n < tol::structural) throw Error(ErrorKind::numeric_failure, "cannot normalise a zero vector");
    return QState(std::move(layout), amps / n);
  }

  const RegisterLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amps_; }
  int qubits() const { return layout_.total_qubits(); }

  QState tensor(const QState& other) const {
    Vector v(amps_.size() * other.amps_.size());
    for (Eigen::Index i = 0; i < amps_.size(); ++i) v.segment(i * other.amps_.size(), other.amps_.size()) = amps_[i] * other.amps_;
    return QState(layout_.concat(other.layout_), std::move(v));
  }

  cplx inner(const QState& other) const {
    if (amps_.size() != other.amps_.size()) throw Error(ErrorKind::dimension_mismatch, "inner product of mismatched states");
    return amps_.dot(other.amps_);
  }

  DensityOp density() const;

 private:
  RegisterLayout layout_;
  Vector amps_;
};

// Hermitian, unit trace, PSD. The constructor checks the first two; full PSD
// validation is an eigendecomposition and is opt-in via validate().
class DensityOp {
 public:
  DensityOp(RegisterLayout layout, Matrix m) : layout_(std::move(layout)), m_(std::move(m)) {
    const auto d = static_cast<Eigen::Index>(layout_.dimension());
    if (m_.rows() != d || m_.cols() != d) throw Error(ErrorKind::dimension_mismatch, "density matrix does not match layout");
    if (!is_hermitian(m_)) throw Error(ErrorKind::invalid_argument, "density matrix is not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > tol::structural) throw Error(ErrorKind::invalid_argument, "density matrix trace is not 1");
  }

  static DensityOp maximally_mixed(RegisterLayout layout) {
    const auto d = static_cast<Eigen::Index>(layout.dimension());
    return DensityOp(std::move(layout), Matrix::Identity(d, d) / static_cast<double>(d));
  }

  const RegisterLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  void validate() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::numeric_failure, "eigensolver failed");
    if (es.eigenvalues().minCoeff() < -tol::structural) throw Error(ErrorKind::invalid_argument, "density matrix has a negative eigenvalue");
  }

  double expectation(const Matrix& op) const { return (op * m_).trace().real(); }

  double purity() const { return (m_ * m_).trace().real(); }

 private:
  RegisterLayout layout_;
  Matrix m_;
};

inline DensityOp QState::density() const { return DensityOp(layout_, amps_ * amps_.adjoint()); }

class Projector {
 public:
  explicit Projector(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw Error(ErrorKind::dimension_mismatch, "projector must be square");
    if (!is_hermitian(m_)) throw Error(ErrorKind::invalid_argument, "projector is not Hermitian");
    if (m_.size() > 0 && (m_ * m_ - m_).cwiseAbs().maxCoeff() > tol::structural)
      throw Error(ErrorKind::invalid_argument, "projector is not idempotent");
  }

  // Projector onto the span of orthonormal columns.
  static Projector onto(const Matrix& columns) { return Projector(columns * columns.adjoint()); }

  static Projector identity(Eigen::Index d) { return Projector(Matrix::Identity(d, d)); }
  static Projector zero(Eigen::Index d) { return Projector(Matrix::Zero(d, d)); }

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  int rank() const { return static_cast<int>(std::lround(m_.trace().real())); }

  Projector complement() const { return Projector(Matrix::Identity(dim(), dim()) - m_); }

 private:
  Matrix m_;
};

// (1/sqrt(dim)) sum_i |i>|i> on registers (a, b), each log2(dim) qubits.
inline QState max_entangled(std::uint64_t dim, const std::string& a = "A", const std::string& b = "B") {
  if (dim < 2 || !is_power_of_two(dim))
    throw Error(ErrorKind::dimension_mismatch, "maximally entangled state needs a power-of-two dimension, got " + std::to_string(dim));
  const int q = log2_exact(dim);
  RegisterLayout layout({{a, q}, {b, q}});
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim * dim));
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::uint64_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i * dim + i)] = amp;
  return QState(std::move(layout), std::move(v));
}

// Full-space matrix of `op` acting on the listed qubits of an n-qubit space.
inline Matrix embed_on_qubits(const Matrix& op, int n, std::span<const int> qs) {
  detail::check_budget(n);
  const auto offs = detail::target_offsets(n, qs);
  if (static_cast<std::size_t>(op.rows()) != offs.size() || op.rows() != op.cols())
    throw Error(ErrorKind::dimension_mismatch, "operator does not match target qubits");
  const std::uint64_t mask = offs.back();
  const std::uint64_t dim = std::uint64_t{1} << n;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    for (std::size_t a = 0; a < offs.size(); ++a)
      for (std::size_t b = 0; b < offs.size(); ++b)
        out(static_cast<Eigen::Index>(base + offs[a]), static_cast<Eigen::Index>(base + offs[b])) = op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return out;
}

// Full-space matrix of `op` acting on `targets`, identity elsewhere.
inline Matrix embed(const Matrix& op, const RegisterLayout& layout, std::span<const std::string> targets) {
  const auto qs = layout.qubit_indices(targets);
  return embed_on_qubits(op, layout.total_qubits(), qs);
}

inline Matrix embed(const Matrix& op, const RegisterLayout& layout, std::initializer_list<std::string> targets) {
  std::vector<std::string> t(targets);
  return embed(op, layout, std::span<const std::string>(t));
}

inline QState apply_on(const QState& state, const Matrix& u, std::span<const std::string> targets) {
  const auto qs = state.layout().qubit_indices(targets);
  const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << qs.size());
  if (u.rows() != d || u.cols() != d)
    throw Error(ErrorKind::dimension_mismatch, "unitary is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) + ", targets need " + std::to_string(d));
  if (!is_unitary(u)) throw Error(ErrorKind::not_unitary, "operator fails the unitarity check");
  return QState(state.layout(), detail::apply_matrix(state.amplitudes(), state.qubits(), u, qs));
}

inline QState apply_on(const QState& state, const Matrix& u, std::initializer_list<std::string> targets) {
  std::vector<std::string> t(targets);
  return apply_on(state, u, std::span<const std::string>(t));
}

inline DensityOp partial_trace(const QState& state, std::span<const std::string> keep) {
  const int n = state.qubits();
  const auto kq = state.layout().qubit_indices(keep);
  const auto rq = detail::complement(n, kq);
  const auto ko = detail::target_offsets(n, kq);
  const auto ro = detail::target_offsets(n, rq);
  Matrix psi(static_cast<Eigen::Index>(ko.size()), static_cast<Eigen::Index>(ro.size()));
  for (std::size_t a = 0; a < ko.size(); ++a)
    for (std::size_t b = 0; b < ro.size(); ++b)
      psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = state.amplitudes()[static_cast<Eigen::Index>(ko[a] + ro[b])];
  Matrix rho = psi * psi.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityOp(state.layout().subset(keep), std::move(rho));
}

inline DensityOp partial_trace(const QState& state, std::initializer_list<std::string> keep) {
  std::vector<std::string> k(keep);
  return partial_trace(state, std::span<const std::string>(k));
}

inline DensityOp partial_trace(const DensityOp& rho, std::span<const std::string> keep) {
  const int n = rho.layout().total_qubits();
  const auto kq = rho.layout().qubit_indices(keep);
  const auto rq = detail::complement(n, kq);
  const auto ko = detail::target_offsets(n, kq);
  const auto ro = detail::target_offsets(n, rq);
  const auto d = static_cast<Eigen::Index>(ko.size());
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      cplx s = 0.0;
      for (std::uint64_t r : ro) s += rho.matrix()(static_cast<Eigen::Index>(ko[a] + r), static_cast<Eigen::Index>(ko[b] + r));
      out(a, b) = s;
    }
  return DensityOp(rho.layout().subset(keep), std::move(out));
}

inline DensityOp partial_trace(const DensityOp& rho, std::initializer_list<std::string> keep) {
  std::vector<std::string> k(keep);
  return partial_trace(rho, std::span<const std::string>(k));
}

struct MeasureResult {
  bool outcome;
  QState post;
  double prob_one;
};

namespace detail {

inline MeasureResult collapse(const QState& state, const Vector& projected, Rng& rng) {
  double p = std::clamp(projected.squaredNorm(), 0.0, 1.0);
  const bool outcome = rng.uniform() < p;
  if (outcome) return {true, QState::normalized(state.layout(), projected), p};
  return {false, QState::normalized(state.layout(), state.amplitudes() - projected), p};
}

}  // namespace detail

// Two-outcome measurement {pi, I - pi}; pi acts on the full space.
inline MeasureResult measure_projective(const QState& state, const Projector& pi, Rng& rng) {
  if (static_cast<std::uint64_t>(pi.dim()) != state.layout().dimension())
    throw Error(ErrorKind::dimension_mismatch, "projector does not act on the full state space");
  return detail::collapse(state, pi.matrix() * state.amplitudes(), rng);
}

// As above with pi acting on `targets` (identity elsewhere).
inline MeasureResult measure_projective(const QState& state, const Projector& pi, std::span<const std::string> targets, Rng& rng) {
  const auto qs = state.layout().qubit_indices(targets);
  return detail::collapse(state, detail::apply_matrix(state.amplitudes(), state.qubits(), pi.matrix(), qs), rng);
}

inline MeasureResult measure_projective(const QState& state, const Projector& pi, std::initializer_list<std::string> targets, Rng& rng) {
  std::vector<std::string> t(targets);
  return measure_projective(state, pi, std::span<const std::string>(t), rng);
}

// pi (x) X + (I - pi) (x) I, with the one-qubit `outcome` register required to
// start in |0>.
inline QState measure_coherently(const QState& state, const Projector& pi, std::span<const std::string> targets, const std::string& outcome) {
  const auto& layout = state.layout();
  if (layout.qubits_of(outcome) != 1) throw Error(ErrorKind::invalid_argument, "outcome register must be a single qubit");
  if (std::find(targets.begin(), targets.end(), outcome) != targets.end())
    throw Error(ErrorKind::invalid_argument, "outcome register overlaps the measured registers");
  const int n = state.qubits();
  const int oq = layout.offset_of(outcome);
  const std::uint64_t obit = std::uint64_t{1} << (n - 1 - oq);
  double busy = 0.0;
  for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i)
    if (static_cast<std::uint64_t>(i) & obit) busy += std::norm(state.amplitudes()[i]);
  if (std::sqrt(busy) > tol::structural) throw Error(ErrorKind::invalid_argument, "outcome qubit is not fresh");
  const auto qs = layout.qubit_indices(targets);
  const Vector phi = detail::apply_matrix(state.amplitudes(), n, pi.matrix(), qs);
  Vector out = state.amplitudes() - phi;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const auto flipped = static_cast<Eigen::Index>(static_cast<std::uint64_t>(i) ^ obit);
    out[flipped] += phi[i];
  }
  return QState::normalized(layout, std::move(out));
}

inline QState measure_coherently(const QState& state, const Projector& pi, std::initializer_list<std::string> targets, const std::string& outcome) {
  std::vector<std::string> t(targets);
  return measure_coherently(state, pi, std::span<const std::string>(t), outcome);
}

struct RegisterMeasurement {
  std::uint64_t value;
  QState post;
  double probability;
};

// Computational-basis measurement of one register.
inline RegisterMeasurement measure_register(const QState& state, const std::string& reg, Rng& rng) {
  const int n = state.qubits();
  const auto qs = state.layout().qubit_indices({reg});
  const std::size_t d = std::size_t{1} << qs.size();
  std::vector<double> probs(d, 0.0);
  for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i)
    probs[detail::extract(static_cast<std::uint64_t>(i), n, qs)] += std::norm(state.amplitudes()[i]);
  double u = rng.uniform();
  std::uint64_t value = d - 1;
  for (std::size_t v = 0; v < d; ++v) {
    if (u < probs[v]) {
      value = v;
      break;
    }
    u -= probs[v];
  }
  while (probs[value] <= 0.0 && value > 0) --value;
  Vector out = state.amplitudes();
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (detail::extract(static_cast<std::uint64_t>(i), n, qs) != value) out[i] = 0.0;
  return {value, QState::normalized(state.layout(), std::move(out)), probs[value]};
}

// (1/2) * sum of singular values of (a - b).
inline double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::dimension_mismatch, "trace distance of mismatched operators");
  Eigen::BDCSVD<Matrix> svd(a - b);
  return std::clamp(0.5 * svd.singularValues().sum(), 0.0, 1.0);
}

inline double trace_distance(const DensityOp& a, const DensityOp& b) { return trace_distance(a.matrix(), b.matrix()); }

inline double trace_distance(const QState& a, const QState& b) {
  return trace_distance(Matrix(a.amplitudes() * a.amplitudes().adjoint()), Matrix(b.amplitudes() * b.amplitudes().adjoint()));
}

namespace gates {

inline Matrix hadamard() {
  Matrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

inline Matrix pauli_x() {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

inline Matrix t_gate() {
  Matrix t = Matrix::Identity(2, 2);
  t(1, 1) = std::polar(1.0, 3.14159265358979323846 / 4.0);
  return t;
}

// Control is the first (more significant) qubit.
inline Matrix cnot() {
  Matrix c = Matrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

inline Matrix controlled(const Matrix& u) {
  Matrix c = Matrix::Identity(2 * u.rows(), 2 * u.cols());
  c.bottomRightCorner(u.rows(), u.cols()) = u;
  return c;
}

inline Matrix ket_bra(std::uint64_t i, std::uint64_t j, std::uint64_t dim) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return m;
}

}  // namespace gates

// Haar-random unitary (QR of a complex Ginibre matrix with phase correction).
inline Matrix random_unitary(Eigen::Index dim, Rng& rng) {
  Matrix g(dim, dim);
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = cplx(rng.normal() * s, rng.normal() * s);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    const double ad = std::abs(d);
    q.col(j) *= (ad > 0 ? d / ad : cplx(1.0));
  }
  return q;
}

inline Vector random_vector(Eigen::Index dim, Rng& rng) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(rng.normal(), rng.normal());
  return v / v.norm();
}

inline QState random_state(const RegisterLayout& layout, Rng& rng) {
  return QState(layout, random_vector(static_cast<Eigen::Index>(layout.dimension()), rng));
}

// Projector onto a Haar-random subspace of the given rank.
inline Projector random_projector(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  const Matrix u = random_unitary(dim, rng);
  Matrix p = u.leftCols(rank) * u.leftCols(rank).adjoint();
  p = 0.5 * (p + p.adjoint()).eval();
  return Projector(std::move(p));
}

}  // namespace qmsep
