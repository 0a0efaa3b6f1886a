#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmsep/hilbert.hpp"

namespace qmsep {

// A verifier circuit on a witness register M (m qubits) and an ancilla
// register K (k qubits, prepared in |0^k>). The qubit at ans_index is the
// accept bit after v_hat. Qubit 0 is the first qubit of M.
struct VerifierSpec {
  int m = 0;
  int k = 0;
  Matrix v_hat;
  int ans_index = 0;

  int qubits() const { return m + k; }

  void validate() const {
    if (m < 1) throw Error(ErrorKind::invalid_argument, "witness register needs at least one qubit");
    if (k < 0) throw Error(ErrorKind::invalid_argument, "negative ancilla count");
    detail::check_budget(m + k);
    const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << (m + k));
    if (v_hat.rows() != d || v_hat.cols() != d) throw Error(ErrorKind::dimension_mismatch, "verifier unitary does not match m + k");
    if (ans_index < 0 || ans_index >= m + k) throw Error(ErrorKind::invalid_argument, "accept qubit index out of range");
    if (!is_unitary(v_hat)) throw Error(ErrorKind::not_unitary, "verifier is not unitary");
  }
};

inline VerifierSpec random_verifier(int m, int k, Rng& rng) {
  VerifierSpec spec{m, k, random_unitary(static_cast<Eigen::Index>(std::uint64_t{1} << (m + k)), rng), 0};
  return spec;
}

// JSON form: {"m", "k", "ans_index", "gates": [{"name", "targets", "matrix"?}]}
// with gate names H, X, T, CNOT (control first) or U (matrix given as rows of
// [re, im] pairs). Gates apply in list order.
inline VerifierSpec verifier_from_json(const nlohmann::json& j) {
  try {
    VerifierSpec spec;
    spec.m = j.at("m").get<int>();
    spec.k = j.value("k", 0);
    spec.ans_index = j.value("ans_index", 0);
    const int n = spec.m + spec.k;
    if (spec.m < 1 || spec.k < 0) throw Error(ErrorKind::parse_error, "m must be >= 1 and k >= 0");
    detail::check_budget(n);
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    Matrix v = Matrix::Identity(dim, dim);
    int gi = 0;
    for (const auto& g : j.value("gates", nlohmann::json::array())) {
      const auto name = g.at("name").get<std::string>();
      const auto targets = g.at("targets").get<std::vector<int>>();
      for (int t : targets)
        if (t < 0 || t >= n) throw Error(ErrorKind::parse_error, "gate " + std::to_string(gi) + " targets qubit " + std::to_string(t) + " outside 0.." + std::to_string(n - 1));
      Matrix u;
      if (name == "H") u = gates::hadamard();
      else if (name == "X") u = gates::pauli_x();
      else if (name == "T") u = gates::t_gate();
      else if (name == "CNOT") u = gates::cnot();
      else if (name == "U") {
        const auto rows = g.at("matrix");
        const auto d = static_cast<Eigen::Index>(rows.size());
        u = Matrix(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
          if (static_cast<Eigen::Index>(rows[r].size()) != d) throw Error(ErrorKind::parse_error, "gate " + std::to_string(gi) + " matrix is not square");
          for (Eigen::Index c = 0; c < d; ++c) u(r, c) = cplx(rows[r][c].at(0).get<double>(), rows[r][c].at(1).get<double>());
        }
      } else {
        throw Error(ErrorKind::parse_error, "gate " + std::to_string(gi) + " has unknown name '" + name + "'");
      }
      if (u.rows() != (Eigen::Index{1} << targets.size()))
        throw Error(ErrorKind::parse_error, "gate " + std::to_string(gi) + " has " + std::to_string(targets.size()) + " targets for a " + std::to_string(u.rows()) + "-dim matrix");
      if (!is_unitary(u)) throw Error(ErrorKind::not_unitary, "gate " + std::to_string(gi) + " is not unitary");
      v = embed_on_qubits(u, n, targets) * v;
      ++gi;
    }
    spec.v_hat = std::move(v);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse_error, e.what());
  }
}

inline VerifierSpec verifier_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  return verifier_from_json(j);
}

// Serialises with a single U gate holding the full verifier matrix.
inline nlohmann::json verifier_to_json(const VerifierSpec& spec) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < spec.v_hat.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < spec.v_hat.cols(); ++c) row.push_back({spec.v_hat(r, c).real(), spec.v_hat(r, c).imag()});
    rows.push_back(row);
  }
  std::vector<int> targets(static_cast<std::size_t>(spec.qubits()));
  for (int i = 0; i < spec.qubits(); ++i) targets[static_cast<std::size_t>(i)] = i;
  return {{"m", spec.m}, {"k", spec.k}, {"ans_index", spec.ans_index}, {"gates", {{{"name", "U"}, {"targets", targets}, {"matrix", rows}}}}};
}

struct ProjectorPair {
  Projector p1;
  Projector q1;
};

// P1 = I_M (x) |0^k><0^k|,  Q1 = V^dagger (|1><1|_ans (x) I) V.
inline ProjectorPair build_pq(const VerifierSpec& spec) {
  spec.validate();
  const int n = spec.qubits();
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
  const std::uint64_t kmask = (std::uint64_t{1} << spec.k) - 1;
  const std::uint64_t abit = std::uint64_t{1} << (n - 1 - spec.ans_index);
  Matrix p = Matrix::Zero(dim, dim);
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((static_cast<std::uint64_t>(i) & kmask) == 0) p(i, i) = 1.0;
    if (static_cast<std::uint64_t>(i) & abit) a(i, i) = 1.0;
  }
  Matrix q = spec.v_hat.adjoint() * a * spec.v_hat;
  q = 0.5 * (q + q.adjoint()).eval();
  return {Projector(std::move(p)), Projector(std::move(q))};
}

namespace detail {

// The 2^m x 2^m operator <0^k| Q1 |0^k>: acceptance of rho on M is Tr(A rho).
inline Matrix acceptance_operator(const VerifierSpec& spec) {
  const int n = spec.qubits();
  const auto dm = static_cast<Eigen::Index>(std::uint64_t{1} << spec.m);
  const std::uint64_t abit = std::uint64_t{1} << (n - 1 - spec.ans_index);
  Matrix cols(spec.v_hat.rows(), dm);
  for (Eigen::Index j = 0; j < dm; ++j) cols.col(j) = spec.v_hat.col(j << spec.k);
  for (Eigen::Index r = 0; r < cols.rows(); ++r)
    if (!(static_cast<std::uint64_t>(r) & abit)) cols.row(r).setZero();
  Matrix a = cols.adjoint() * cols;
  return 0.5 * (a + a.adjoint());
}

}  // namespace detail

inline RegisterLayout witness_layout(int m) { return RegisterLayout({{"M", m}}); }

// Pr[V accepts rho (x) |0^k>] for rho on M.
inline double acceptance(const VerifierSpec& spec, const DensityOp& rho) {
  spec.validate();
  if (rho.dim() != (Eigen::Index{1} << spec.m)) throw Error(ErrorKind::dimension_mismatch, "state does not live on the witness register");
  return std::clamp(rho.expectation(detail::acceptance_operator(spec)), 0.0, 1.0);
}

struct MaxAcceptance {
  double value = 0.0;
  Vector witness_vector;
  DensityOp witness;
};

// Top eigenvalue of P1 Q1 P1, computed on range(P1) where the operator is
// <0^k| Q1 |0^k>; the eigenvector there is the optimal witness.
inline MaxAcceptance max_acceptance(const VerifierSpec& spec) {
  spec.validate();
  Eigen::SelfAdjointEigenSolver<Matrix> es(detail::acceptance_operator(spec));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::numeric_failure, "eigensolver failed");
  const Eigen::Index top = es.eigenvalues().size() - 1;
  Vector v = es.eigenvectors().col(top);
  v /= v.norm();
  return {std::clamp(es.eigenvalues()[top], 0.0, 1.0), v, DensityOp(witness_layout(spec.m), v * v.adjoint())};
}

// Destructive alternating measurements Q1, P1, Q1, P1, ... (n rounds, 2n
// outcomes) on `start`, which must span the projectors' space.
inline std::vector<bool> alternating_sample(const Projector& p1, const Projector& q1, const QState& start, int n, Rng& rng) {
  if (p1.dim() != q1.dim() || static_cast<std::uint64_t>(p1.dim()) != start.layout().dimension())
    throw Error(ErrorKind::dimension_mismatch, "projectors and state disagree on dimension");
  std::vector<bool> out;
  out.reserve(static_cast<std::size_t>(2 * n));
  QState s = start;
  for (int i = 0; i < n; ++i) {
    auto rq = measure_projective(s, q1, rng);
    out.push_back(rq.outcome);
    auto rp = measure_projective(rq.post, p1, rng);
    out.push_back(rp.outcome);
    s = std::move(rp.post);
  }
  return out;
}

enum class Backend { trial, eigen };

inline std::string to_string(Backend b) { return b == Backend::trial ? "trial" : "eigen"; }

inline Backend backend_from_string(const std::string& s) {
  if (s == "trial") return Backend::trial;
  if (s == "eigen") return Backend::eigen;
  throw Error(ErrorKind::invalid_argument, "unknown backend '" + s + "'");
}

// Alternation count max(((3a+b)/(b-a)^2)(m+2-log2(b-a)), 16b/(b-a)^2), rounded up.
inline long analytic_alternations(int m, double a, double b) {
  if (!(0.0 < a && a < b && b <= 1.0)) throw Error(ErrorKind::invalid_params, "need 0 < a < b <= 1");
  const double gap = b - a;
  const double n1 = (3.0 * a + b) / (gap * gap) * (m + 2.0 - std::log2(gap));
  const double n2 = 16.0 * b / (gap * gap);
  return static_cast<long>(std::ceil(std::max(n1, n2) - 1e-9));
}

// Trial budget 2^(m+2) * q.
inline long analytic_trial_budget(int m, double q_factor) {
  return static_cast<long>(std::ceil(std::ldexp(1.0, m + 2) * q_factor - 1e-9));
}

struct SynthesisParams {
  double a = 0.5;
  double b = 0.9;
  long n_alternations = 0;
  long t_trials = 0;
  Backend backend = Backend::eigen;

  static SynthesisParams defaults(int m, double a = 0.5, double b = 0.9, Backend backend = Backend::eigen, double q_factor = 8.0) {
    return {a, b, analytic_alternations(m, a, b), analytic_trial_budget(m, q_factor), backend};
  }

  // Agreements needed: ceil(N (a + b)).
  long count_threshold() const {
    return static_cast<long>(std::ceil(static_cast<double>(n_alternations) * (a + b) - 1e-9));
  }

  void validate() const {
    if (!(0.0 < a && a < b && b <= 1.0)) throw Error(ErrorKind::invalid_params, "need 0 < a < b <= 1");
    if (n_alternations < 1) throw Error(ErrorKind::invalid_params, "need at least one alternation");
    if (count_threshold() >= 2 * n_alternations + 1) throw Error(ErrorKind::invalid_params, "agreement threshold N(a+b) is unreachable");
  }
};

enum class TrialMode {
  // Each outcome bit is measured as it is produced; only (last bit, count)
  // is kept. Same outcome statistics and conditional states as coherent mode.
  deferred,
  // Outcome bits are written coherently into a 2N+1 qubit register, the count
  // is computed unitarily and the test is a single projective measurement.
  coherent,
};

struct TrialResult {
  bool success = false;
  // Registers M, K (if k > 0), Aux, plus Y0..Y2N and C in coherent mode.
  QState state;
  // Agreement count; -1 in coherent mode, where it is never measured.
  long est_count = -1;
  bool last_bit = false;
  // Pr[success] as computed by the final projective test (coherent mode only).
  double success_probability = -1.0;
  double accept_prob_of_reduced = 0.0;
};

namespace detail {

inline RegisterLayout trial_layout(int m, int k) {
  std::vector<Register> regs{{"M", m}};
  if (k > 0) regs.push_back({"K", k});
  regs.push_back({"Aux", m});
  return RegisterLayout(std::move(regs));
}

inline std::vector<std::string> mk_names(int k) {
  return k > 0 ? std::vector<std::string>{"M", "K"} : std::vector<std::string>{"M"};
}

// Precomputed pieces shared by repeated trials of the same verifier.
struct TrialEngine {
  const VerifierSpec& spec;
  SynthesisParams params;
  Matrix q1;
  Matrix accept_op;
  Eigen::Index dmk;
  Eigen::Index dm;

  TrialEngine(const VerifierSpec& s, const SynthesisParams& p)
      : spec(s), params(p), q1(build_pq(s).q1.matrix()), accept_op(acceptance_operator(s)),
        dmk(Eigen::Index{1} << (s.m + s.k)), dm(Eigen::Index{1} << s.m) {
    params.validate();
  }

  // psi is stored as a dmk x dm matrix: rows index (M, K), columns index Aux.
  TrialResult run_deferred(Rng& rng) const {
    Matrix psi = Matrix::Zero(dmk, dm);
    const double amp = 1.0 / std::sqrt(static_cast<double>(dm));
    for (Eigen::Index i = 0; i < dm; ++i) psi(i << spec.k, i) = amp;
    const std::uint64_t kmask = (std::uint64_t{1} << spec.k) - 1;
    bool last = true;
    long count = 0;
    Matrix proj(dmk, dm);
    auto step = [&](bool is_q) {
      if (is_q) {
        proj.noalias() = q1 * psi;
      } else {
        proj = psi;
        for (Eigen::Index r = 0; r < dmk; ++r)
          if (static_cast<std::uint64_t>(r) & kmask) proj.row(r).setZero();
      }
      const double p = std::clamp(proj.squaredNorm(), 0.0, 1.0);
      const bool y = rng.uniform() < p;
      if (y) {
        psi = proj / std::sqrt(p);
      } else {
        psi -= proj;
        psi /= psi.norm();
      }
      if (y == last) ++count;
      last = y;
    };
    for (long i = 0; i < params.n_alternations; ++i) {
      step(true);
      step(false);
    }
    TrialResult r{false, QState::zero(trial_layout(spec.m, spec.k)), count, last, -1.0, 0.0};
    r.success = last && count >= params.count_threshold();
    Vector flat(dmk * dm);
    for (Eigen::Index row = 0; row < dmk; ++row)
      for (Eigen::Index c = 0; c < dm; ++c) flat[row * dm + c] = psi(row, c);
    r.state = QState::normalized(trial_layout(spec.m, spec.k), std::move(flat));
    r.accept_prob_of_reduced = reduced_acceptance(r.state);
    return r;
  }

  TrialResult run_coherent(Rng& rng) const {
    const long n = params.n_alternations;
    const long ylen = 2 * n + 1;
    const int cbits = ceil_log2(static_cast<std::uint64_t>(ylen));
    auto layout = trial_layout(spec.m, spec.k);
    for (long j = 0; j < ylen; ++j) layout = layout.appended({"Y" + std::to_string(j), 1});
    layout = layout.appended({"C", cbits});
    detail::check_budget(layout.total_qubits());

    // |Phi>_{M,Aux} |0^k>_K |1>_Y0 |0...0> |0>_C
    const int nq = layout.total_qubits();
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
    const auto mq = layout.qubit_indices({"M"});
    const auto aq = layout.qubit_indices({"Aux"});
    const std::uint64_t y0 = std::uint64_t{1} << (nq - 1 - layout.offset_of("Y0"));
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(dm); ++i) {
      std::uint64_t idx = y0;
      for (std::size_t b = 0; b < mq.size(); ++b)
        if ((i >> (mq.size() - 1 - b)) & 1U) idx |= (std::uint64_t{1} << (nq - 1 - mq[b])) | (std::uint64_t{1} << (nq - 1 - aq[b]));
      v[static_cast<Eigen::Index>(idx)] = 1.0 / std::sqrt(static_cast<double>(dm));
    }
    QState s(layout, std::move(v));

    const auto mk = mk_names(spec.k);
    const Projector q_proj(q1);
    Matrix pk = Matrix::Zero(dmk, dmk);
    for (Eigen::Index i = 0; i < dmk; ++i)
      if ((static_cast<std::uint64_t>(i) & ((std::uint64_t{1} << spec.k) - 1)) == 0) pk(i, i) = 1.0;
    const Projector p_proj(pk);
    for (long i = 1; i <= n; ++i) {
      s = measure_coherently(s, q_proj, mk, "Y" + std::to_string(2 * i - 1));
      s = measure_coherently(s, p_proj, mk, "Y" + std::to_string(2 * i));
    }

    // C += #{j : y_j = y_{j-1}}, a permutation of basis states.
    std::vector<std::uint64_t> ybits;
    for (long j = 0; j < ylen; ++j) ybits.push_back(std::uint64_t{1} << (nq - 1 - layout.offset_of("Y" + std::to_string(j))));
    const int coff = layout.offset_of("C");
    const int cshift = nq - coff - cbits;
    const std::uint64_t cmask = ((std::uint64_t{1} << cbits) - 1) << cshift;
    Vector counted = Vector::Zero(s.amplitudes().size());
    for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      std::uint64_t agree = 0;
      for (long j = 1; j < ylen; ++j) agree += (((idx & ybits[j]) != 0) == ((idx & ybits[j - 1]) != 0)) ? 1 : 0;
      const std::uint64_t c = ((idx & cmask) >> cshift);
      const std::uint64_t c2 = (c + agree) & ((std::uint64_t{1} << cbits) - 1);
      counted[static_cast<Eigen::Index>((idx & ~cmask) | (c2 << cshift))] = s.amplitudes()[i];
    }
    s = QState(layout, std::move(counted));

    const auto dyc = Eigen::Index{1} << (cbits + 1);
    Matrix yes = Matrix::Zero(dyc, dyc);
    for (Eigen::Index c = params.count_threshold(); c < (Eigen::Index{1} << cbits); ++c) yes((Eigen::Index{1} << cbits) + c, (Eigen::Index{1} << cbits) + c) = 1.0;
    const std::vector<std::string> test_regs{"Y" + std::to_string(ylen - 1), "C"};
    auto meas = measure_projective(s, Projector(std::move(yes)), test_regs, rng);
    TrialResult r{meas.outcome, std::move(meas.post), -1, false, meas.prob_one, 0.0};
    r.accept_prob_of_reduced = reduced_acceptance(r.state);
    return r;
  }

  double reduced_acceptance(const QState& s) const {
    return std::clamp(partial_trace(s, {"M"}).expectation(accept_op), 0.0, 1.0);
  }
};

}  // namespace detail

inline TrialResult run_trial(const VerifierSpec& spec, const SynthesisParams& params, Rng& rng, TrialMode mode = TrialMode::deferred) {
  detail::TrialEngine eng(spec, params);
  return mode == TrialMode::deferred ? eng.run_deferred(rng) : eng.run_coherent(rng);
}

struct SynthesisResult {
  DensityOp state;
  // Every trial failed and the maximally mixed state was returned.
  bool fallback = false;
  long trials_used = 0;
};

inline SynthesisResult synthesize(const VerifierSpec& spec, const SynthesisParams& params, Rng& rng) {
  if (params.backend == Backend::eigen) return {max_acceptance(spec).witness, false, 0};
  detail::TrialEngine eng(spec, params);
  for (long t = 0; t < params.t_trials; ++t) {
    auto r = eng.run_deferred(rng);
    if (r.success) return {partial_trace(r.state, {"M"}), false, t + 1};
  }
  return {DensityOp::maximally_mixed(witness_layout(spec.m)), true, params.t_trials};
}

}  // namespace qmsep
