#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmsep/hilbert.hpp"
#include "qmsep/oracle.hpp"

// Toy private-key money schemes over a one-bit random oracle, and the world
// they execute in.
namespace qmsep::money {

enum class QueryMode { classical, quantum };

inline std::string to_string(QueryMode m) { return m == QueryMode::classical ? "classical" : "quantum"; }

// l: oracle input bits. m: note qubits. q: verification queries.
// q_prime: key-generation plus minting queries.
struct SchemeProfile {
  std::string name;
  int l = 0;
  int m = 0;
  int q = 0;
  int q_prime = 0;
  QueryMode mint_query_mode = QueryMode::classical;
};

enum class WorldMode { sampled, purified };

// The joint state of every note held in the world, plus the oracle. In
// sampled mode the oracle is a truth table; in purified mode it is a dense
// register F of 2^l qubits starting in |+>^(2^l). A classical query measures
// the queried table entry, which is what the recorded query followed by a
// measurement of its answer does to the rest of the system.
class World {
 public:
  static World sampled(oracle::TruthTable table) {
    World w(WorldMode::sampled, table.l);
    w.table_ = table;
    return w;
  }

  static World purified(int l) {
    World w(WorldMode::purified, l);
    w.state_ = oracle::purified_init(l, "F");
    return w;
  }

  WorldMode mode() const { return mode_; }
  int l() const { return l_; }
  const std::optional<QState>& state() const { return state_; }
  const oracle::ClassicalDB& record() const { return record_; }
  const std::set<std::uint32_t>& setup_positions() const { return setup_; }
  const std::optional<oracle::TruthTable>& table() const { return table_; }

  void begin_setup() { in_setup_ = true; }
  void end_setup() { in_setup_ = false; }

  void allocate(const std::string& name, int qubits) {
    QState fresh = QState::zero(RegisterLayout({{name, qubits}}));
    state_ = state_ ? state_->tensor(fresh) : fresh;
  }

  // Removes a register that is in a computational basis state.
  void release(const std::string& name) {
    const auto& layout = state_->layout();
    const int n = layout.total_qubits();
    const auto qs = layout.qubit_indices({name});
    const std::vector<std::string> drop{name};
    const auto rest_layout = layout.without(drop);
    std::vector<double> probs(std::size_t{1} << qs.size(), 0.0);
    for (Eigen::Index i = 0; i < state_->amplitudes().size(); ++i)
      probs[qmsep::detail::extract(static_cast<std::uint64_t>(i), n, qs)] += std::norm(state_->amplitudes()[i]);
    const auto v = static_cast<std::uint64_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (probs[v] < 1.0 - tol::structural) throw Error(ErrorKind::invalid_argument, "register '" + name + "' is entangled or not in a basis state");
    if (rest_layout.registers().empty()) {
      state_.reset();
      return;
    }
    const auto rq = qmsep::detail::complement(n, qs);
    const auto ro = qmsep::detail::target_offsets(n, rq);
    const auto vo = qmsep::detail::target_offsets(n, qs)[v];
    Vector out(static_cast<Eigen::Index>(ro.size()));
    for (std::size_t r = 0; r < ro.size(); ++r) out[static_cast<Eigen::Index>(r)] = state_->amplitudes()[static_cast<Eigen::Index>(ro[r] + vo)];
    state_ = QState::normalized(rest_layout, std::move(out));
  }

  void apply(const Matrix& u, std::span<const std::string> regs) { state_ = apply_on(*state_, u, regs); }
  void apply(const Matrix& u, std::initializer_list<std::string> regs) { state_ = apply_on(*state_, u, regs); }

  // U_Q with a basis input x: flips `target` (one qubit) by R(x).
  void query_into(std::uint32_t x, const std::string& target) {
    check_position(x);
    if (in_setup_) setup_.insert(x);
    if (mode_ == WorldMode::sampled) {
      if ((*table_)(x)) apply(gates::pauli_x(), {target});
      return;
    }
    const auto& layout = state_->layout();
    const int n = layout.total_qubits();
    const std::uint64_t fbit = std::uint64_t{1} << (n - 1 - (layout.offset_of("F") + static_cast<int>(x)));
    const std::uint64_t tbit = std::uint64_t{1} << (n - 1 - layout.offset_of(target));
    if (layout.qubits_of(target) != 1) throw Error(ErrorKind::invalid_argument, "query target must be one qubit");
    Vector out(state_->amplitudes().size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      out[static_cast<Eigen::Index>((idx & fbit) ? idx ^ tbit : idx)] = state_->amplitudes()[i];
    }
    state_ = QState(layout, std::move(out));
  }

  // U_Q on a (possibly superposed) l-qubit input register.
  void quantum_query(const std::string& q_reg, const std::string& a_reg) {
    if (mode_ == WorldMode::sampled) state_ = oracle::apply_table_query(*state_, *table_, q_reg, a_reg);
    else state_ = oracle::apply_quantum_query_dense(*state_, q_reg, a_reg, "F");
  }

  // Classical query; the pair lands in the oracle-side record.
  std::uint8_t classical_query(std::uint32_t x, Rng& rng) {
    check_position(x);
    if (in_setup_) setup_.insert(x);
    std::uint8_t z;
    if (mode_ == WorldMode::sampled) {
      z = (*table_)(x) ? 1 : 0;
    } else {
      const auto& layout = state_->layout();
      const int n = layout.total_qubits();
      const std::uint64_t fbit = std::uint64_t{1} << (n - 1 - (layout.offset_of("F") + static_cast<int>(x)));
      double p1 = 0.0;
      for (Eigen::Index i = 0; i < state_->amplitudes().size(); ++i)
        if (static_cast<std::uint64_t>(i) & fbit) p1 += std::norm(state_->amplitudes()[i]);
      z = rng.uniform() < p1 ? 1 : 0;
      Vector out = state_->amplitudes();
      for (Eigen::Index i = 0; i < out.size(); ++i)
        if (((static_cast<std::uint64_t>(i) & fbit) != 0) != (z == 1)) out[i] = 0.0;
      state_ = QState::normalized(layout, std::move(out));
    }
    record_ = record_.appended(x, z);
    return z;
  }

  std::uint64_t measure(const std::string& reg, Rng& rng) {
    auto r = measure_register(*state_, reg, rng);
    state_ = std::move(r.post);
    return r.value;
  }

  bool measure(const Projector& pi, std::span<const std::string> regs, Rng& rng) {
    auto r = measure_projective(*state_, pi, regs, rng);
    state_ = std::move(r.post);
    return r.outcome;
  }

  DensityOp reduced(std::span<const std::string> regs) const { return partial_trace(*state_, regs); }

  // Probability that every position in `xs` answers as in `answers`, with
  // the (unnormalised) branch state; nothing is collapsed.
  Vector branch(std::span<const std::uint32_t> xs, std::span<const std::uint8_t> answers) const {
    if (mode_ == WorldMode::sampled) {
      for (std::size_t i = 0; i < xs.size(); ++i)
        if ((*table_)(xs[i]) != (answers[i] == 1)) return Vector::Zero(state_ ? state_->amplitudes().size() : 1);
      return state_ ? state_->amplitudes() : Vector::Ones(1);
    }
    const auto& layout = state_->layout();
    const int n = layout.total_qubits();
    const int foff = layout.offset_of("F");
    Vector out = state_->amplitudes();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      for (std::size_t j = 0; j < xs.size(); ++j) {
        const bool bit = (idx >> (n - 1 - (foff + static_cast<int>(xs[j])))) & 1U;
        if (bit != (answers[j] == 1)) {
          out[i] = 0.0;
          break;
        }
      }
    }
    return out;
  }

 private:
  World(WorldMode mode, int l) : mode_(mode), l_(l) { oracle::check_input_bits(l); }

  void check_position(std::uint32_t x) const {
    if (x >= (1U << l_)) throw Error(ErrorKind::invalid_argument, "query position outside the oracle domain");
  }

  WorldMode mode_;
  int l_;
  std::optional<oracle::TruthTable> table_;
  std::optional<QState> state_;
  oracle::ClassicalDB record_;
  std::set<std::uint32_t> setup_;
  bool in_setup_ = false;
};

using Serial = std::vector<std::uint32_t>;

struct KeyPair {
  // Oracle-based toy schemes carry no key material beyond the oracle itself.
  std::string sk;
  std::string pk;
};

// A note: its public serial and the world registers holding its qubits.
struct Banknote {
  Serial serial;
  std::vector<std::string> registers;
};

class Scheme {
 public:
  virtual ~Scheme() = default;

  virtual const SchemeProfile& profile() const = 0;

  KeyPair key_gen(World& w, Rng&) const {
    if (profile().mint_query_mode == QueryMode::quantum && w.mode() != WorldMode::purified)
      throw Error(ErrorKind::wrong_mode, "scheme '" + profile().name + "' mints with quantum queries and needs a purified oracle");
    if (w.l() != profile().l) throw Error(ErrorKind::invalid_argument, "world oracle length does not match the scheme");
    return {};
  }

  // Registers are named prefix + "." + index.
  virtual Banknote mint(const KeyPair& key, World& w, Rng& rng, const std::string& prefix) const = 0;

  // Verification is non-adaptive: the queried positions depend only on the
  // serial, and acceptance is a projective measurement on the note selected
  // by the answers.
  virtual std::vector<std::uint32_t> query_positions(const KeyPair& key, const Serial& serial) const = 0;
  virtual Matrix accept_projector(const KeyPair& key, const Serial& serial, std::span<const std::uint8_t> answers) const = 0;
};

inline std::vector<std::string> note_registers(const std::string& prefix, int m) {
  std::vector<std::string> out;
  for (int i = 0; i < m; ++i) out.push_back(prefix + "." + std::to_string(i));
  return out;
}

// Classical note |R(s||1) ... R(s||m)>. Position layout: s (l - ceil(log2 m)
// bits) followed by the index i.
class HashTagScheme : public Scheme {
 public:
  HashTagScheme(int l, int m) : index_bits_(ceil_log2(static_cast<std::uint64_t>(m))) {
    oracle::check_input_bits(l);
    if (m < 1 || l - index_bits_ < 1) throw Error(ErrorKind::invalid_argument, "hash-tag needs m >= 1 and at least one serial bit");
    profile_ = {"hash-tag", l, m, m, m, QueryMode::classical};
  }

  const SchemeProfile& profile() const override { return profile_; }
  int serial_bits() const { return profile_.l - index_bits_; }

  std::uint32_t position(std::uint32_t s, int i) const { return (s << index_bits_) | static_cast<std::uint32_t>(i); }

  Banknote mint(const KeyPair&, World& w, Rng& rng, const std::string& prefix) const override {
    const auto s = static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << serial_bits()));
    auto regs = note_registers(prefix, profile_.m);
    w.begin_setup();
    for (int i = 0; i < profile_.m; ++i) {
      const auto z = w.classical_query(position(s, i), rng);
      w.allocate(regs[static_cast<std::size_t>(i)], 1);
      if (z) w.apply(gates::pauli_x(), {regs[static_cast<std::size_t>(i)]});
    }
    w.end_setup();
    return {{s}, regs};
  }

  std::vector<std::uint32_t> query_positions(const KeyPair&, const Serial& serial) const override {
    std::vector<std::uint32_t> out;
    for (int i = 0; i < profile_.m; ++i) out.push_back(position(serial.at(0), i));
    return out;
  }

  Matrix accept_projector(const KeyPair&, const Serial&, std::span<const std::uint8_t> answers) const override {
    std::uint64_t idx = 0;
    for (auto z : answers) idx = (idx << 1) | z;
    return gates::ket_bra(idx, idx, std::uint64_t{1} << profile_.m);
  }

 private:
  int index_bits_;
  SchemeProfile profile_;
};

// Conjugate coding: qubit i is H^theta |b> with theta = R(s||i||0) and
// b = R(s||i||1). Position layout: s, then i (ceil(log2 m) bits), then the
// final selector bit.
class ConjugateScheme : public Scheme {
 public:
  ConjugateScheme(int l, int m, std::uint32_t domain_prefix = 0, int prefix_bits = 0)
      : index_bits_(ceil_log2(static_cast<std::uint64_t>(m))), prefix_(domain_prefix), prefix_bits_(prefix_bits) {
    oracle::check_input_bits(l);
    if (m < 1 || serial_bits_for(l) < 1) throw Error(ErrorKind::invalid_argument, "conjugate scheme needs m >= 1 and at least one serial bit");
    profile_ = {"conjugate", l, m, 2 * m, 2 * m, QueryMode::classical};
  }

  const SchemeProfile& profile() const override { return profile_; }
  int serial_bits() const { return serial_bits_for(profile_.l); }

  std::uint32_t position(std::uint32_t s, int i, int sel) const {
    const std::uint32_t local = (((s << index_bits_) | static_cast<std::uint32_t>(i)) << 1) | static_cast<std::uint32_t>(sel);
    return (prefix_ << (profile_.l - prefix_bits_)) | local;
  }

  std::uint32_t draw_serial(Rng& rng) const { return static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << serial_bits())); }

  Banknote mint(const KeyPair&, World& w, Rng& rng, const std::string& prefix) const override {
    const auto s = draw_serial(rng);
    auto regs = note_registers(prefix, profile_.m);
    w.begin_setup();
    for (int i = 0; i < profile_.m; ++i) {
      const auto& r = regs[static_cast<std::size_t>(i)];
      const auto theta = w.classical_query(position(s, i, 0), rng);
      const auto b = w.classical_query(position(s, i, 1), rng);
      w.allocate(r, 1);
      if (b) w.apply(gates::pauli_x(), {r});
      if (theta) w.apply(gates::hadamard(), {r});
    }
    w.end_setup();
    return {{s}, regs};
  }

  // Coherent preparation with basis-input queries, 3 per qubit: b into the
  // note qubit, then theta computed into a scratch qubit, used as the control
  // of a Hadamard and uncomputed.
  void mint_coherent(std::uint32_t s, World& w, const std::vector<std::string>& regs) const {
    for (int i = 0; i < profile_.m; ++i) {
      const auto& r = regs[static_cast<std::size_t>(i)];
      w.allocate(r, 1);
      w.query_into(position(s, i, 1), r);
      w.allocate("scratch", 1);
      w.query_into(position(s, i, 0), "scratch");
      w.apply(gates::controlled(gates::hadamard()), {"scratch", r});
      w.query_into(position(s, i, 0), "scratch");
      w.release("scratch");
    }
  }

  std::vector<std::uint32_t> query_positions(const KeyPair&, const Serial& serial) const override {
    std::vector<std::uint32_t> out;
    for (int i = 0; i < profile_.m; ++i) {
      out.push_back(position(serial.at(0), i, 0));
      out.push_back(position(serial.at(0), i, 1));
    }
    return out;
  }

  Matrix accept_projector(const KeyPair&, const Serial&, std::span<const std::uint8_t> answers) const override {
    Matrix p = Matrix::Identity(1, 1);
    for (int i = 0; i < profile_.m; ++i) {
      Vector v = Vector::Zero(2);
      v[answers[static_cast<std::size_t>(2 * i + 1)]] = 1.0;
      if (answers[static_cast<std::size_t>(2 * i)]) v = gates::hadamard() * v;
      p = kron(p, v * v.adjoint());
    }
    return p;
  }

 private:
  int serial_bits_for(int l) const { return l - prefix_bits_ - index_bits_ - 1; }

  int index_bits_;
  std::uint32_t prefix_;
  int prefix_bits_;
  SchemeProfile profile_;
};

// A conjugate note wrapped with a tag h = R(s) minted by one quantum query on
// a uniform superposition of outer serials s, after which s is measured. The
// top position bit splits the domain: 0 for outer serials, 1 for the inner
// conjugate scheme (minted with basis-input quantum queries). Verification
// checks h = R(s) and runs the inner verification.
class CounterexampleScheme : public Scheme {
 public:
  CounterexampleScheme(int l, int m_inner) : inner_(l, m_inner, 1, 1) {
    if (l < 3) throw Error(ErrorKind::invalid_argument, "counterexample scheme needs l >= 3");
    profile_ = {"counterexample", l, 1 + m_inner, 1 + 2 * m_inner, 1 + 3 * m_inner, QueryMode::quantum};
  }

  const SchemeProfile& profile() const override { return profile_; }
  const ConjugateScheme& inner() const { return inner_; }

  Banknote mint(const KeyPair&, World& w, Rng& rng, const std::string& prefix) const override {
    if (w.mode() != WorldMode::purified) throw Error(ErrorKind::wrong_mode, "quantum minting needs a purified oracle");
    const int l = profile_.l;
    const std::string sreg = prefix + ".serial";
    const std::string h = prefix + ".0";
    w.begin_setup();
    w.allocate(sreg, l);
    // Uniform superposition over serials with the top bit 0.
    Matrix hs = Matrix::Identity(1, 1);
    for (int i = 0; i < l - 1; ++i) hs = kron(hs, gates::hadamard());
    w.apply(kron(Matrix::Identity(2, 2), hs), {sreg});
    w.allocate(h, 1);
    w.quantum_query(sreg, h);
    const auto s = static_cast<std::uint32_t>(w.measure(sreg, rng));
    w.release(sreg);
    const auto s_inner = inner_.draw_serial(rng);
    std::vector<std::string> inner_regs;
    for (int i = 0; i < inner_.profile().m; ++i) inner_regs.push_back(prefix + "." + std::to_string(i + 1));
    inner_.mint_coherent(s_inner, w, inner_regs);
    w.end_setup();
    std::vector<std::string> regs{h};
    regs.insert(regs.end(), inner_regs.begin(), inner_regs.end());
    return {{s, s_inner}, regs};
  }

  std::vector<std::uint32_t> query_positions(const KeyPair& key, const Serial& serial) const override {
    std::vector<std::uint32_t> out{serial.at(0)};
    const auto in = inner_.query_positions(key, Serial{serial.at(1)});
    out.insert(out.end(), in.begin(), in.end());
    return out;
  }

  Matrix accept_projector(const KeyPair& key, const Serial& serial, std::span<const std::uint8_t> answers) const override {
    const Matrix tag = gates::ket_bra(answers[0], answers[0], 2);
    return kron(tag, inner_.accept_projector(key, Serial{serial.at(1)}, answers.subspan(1)));
  }

 private:
  ConjugateScheme inner_;
  SchemeProfile profile_;
};

inline std::unique_ptr<Scheme> make_scheme(const std::string& name, int l, int m) {
  if (name == "hash-tag") return std::make_unique<HashTagScheme>(l, m);
  if (name == "conjugate") return std::make_unique<ConjugateScheme>(l, m);
  if (name == "counterexample") return std::make_unique<CounterexampleScheme>(l, m);
  throw Error(ErrorKind::invalid_argument, "unknown scheme '" + name + "'");
}

// Desk-scale defaults (l, m) per scheme.
inline std::pair<int, int> default_size(const std::string& name) {
  if (name == "hash-tag") return {3, 2};
  if (name == "conjugate") return {4, 2};
  if (name == "counterexample") return {3, 1};
  throw Error(ErrorKind::invalid_argument, "unknown scheme '" + name + "'");
}

inline World make_world(const Scheme& scheme, Rng& rng) {
  const auto& p = scheme.profile();
  return p.mint_query_mode == QueryMode::quantum ? World::purified(p.l) : World::sampled(oracle::sample_oracle(p.l, rng));
}

// Issues the verification queries, appending each pair to `adversary_record`
// when given.
inline std::vector<std::uint8_t> verification_answers(const Scheme& scheme, const KeyPair& key, const Serial& serial, World& w, Rng& rng,
                                                      oracle::ClassicalDB* adversary_record) {
  std::vector<std::uint8_t> answers;
  for (auto x : scheme.query_positions(key, serial)) {
    const auto z = w.classical_query(x, rng);
    if (adversary_record) *adversary_record = adversary_record->appended(x, z);
    answers.push_back(z);
  }
  return answers;
}

// Ver on a note held in the world; on acceptance the note stays in the
// post-measurement state.
inline bool verify(const Scheme& scheme, const KeyPair& key, const Banknote& note, World& w, Rng& rng,
                   oracle::ClassicalDB* adversary_record = nullptr) {
  const auto answers = verification_answers(scheme, key, note.serial, w, rng, adversary_record);
  return w.measure(Projector(scheme.accept_projector(key, note.serial, answers)), note.registers, rng);
}

// Ver on a free-standing state (e.g. a forgery) against the world's oracle.
inline bool verify_state(const Scheme& scheme, const KeyPair& key, const Serial& serial, const DensityOp& rho, World& w, Rng& rng,
                         oracle::ClassicalDB* adversary_record = nullptr) {
  const auto answers = verification_answers(scheme, key, serial, w, rng, adversary_record);
  const double p = std::clamp(rho.expectation(scheme.accept_projector(key, serial, answers)), 0.0, 1.0);
  return rng.uniform() < p;
}

namespace detail {

// Distinct positions of `xs` and, for each x in xs, its index among them.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::size_t>> distinct_positions(const std::vector<std::uint32_t>& xs) {
  std::vector<std::uint32_t> uniq;
  std::vector<std::size_t> where;
  for (auto x : xs) {
    auto it = std::find(uniq.begin(), uniq.end(), x);
    where.push_back(static_cast<std::size_t>(it - uniq.begin()));
    if (it == uniq.end()) uniq.push_back(x);
  }
  return {uniq, where};
}

}  // namespace detail

// Exact Pr[Ver accepts] for a note in the world, summing over answer branches
// without collapsing anything.
inline double acceptance_probability(const Scheme& scheme, const KeyPair& key, const Banknote& note, const World& w) {
  const auto xs = scheme.query_positions(key, note.serial);
  const auto [uniq, where] = detail::distinct_positions(xs);
  const int n = w.state()->qubits();
  const auto nq = w.state()->layout().qubit_indices(note.registers);
  double total = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << uniq.size()); ++bits) {
    std::vector<std::uint8_t> ua(uniq.size());
    for (std::size_t j = 0; j < uniq.size(); ++j) ua[j] = static_cast<std::uint8_t>((bits >> j) & 1U);
    const Vector br = w.branch(uniq, ua);
    if (br.squaredNorm() < 1e-300) continue;
    std::vector<std::uint8_t> answers;
    for (auto idx : where) answers.push_back(ua[idx]);
    const Matrix pi = scheme.accept_projector(key, note.serial, answers);
    total += qmsep::detail::apply_matrix(br, n, pi, nq).squaredNorm();
  }
  return std::clamp(total, 0.0, 1.0);
}

// Exact Pr[every state in `rhos` is accepted] when each is verified against
// the world's oracle, without touching the world.
inline double states_acceptance_probability(const Scheme& scheme, const KeyPair& key, const Serial& serial,
                                            std::span<const DensityOp* const> rhos, const World& w) {
  const auto xs = scheme.query_positions(key, serial);
  const auto [uniq, where] = detail::distinct_positions(xs);
  double total = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << uniq.size()); ++bits) {
    std::vector<std::uint8_t> ua(uniq.size());
    for (std::size_t j = 0; j < uniq.size(); ++j) ua[j] = static_cast<std::uint8_t>((bits >> j) & 1U);
    const double pa = w.branch(uniq, ua).squaredNorm();
    if (pa < 1e-300) continue;
    std::vector<std::uint8_t> answers;
    for (auto idx : where) answers.push_back(ua[idx]);
    const Matrix pi = scheme.accept_projector(key, serial, answers);
    double prod = pa;
    for (const auto* rho : rhos) prod *= std::clamp(rho->expectation(pi), 0.0, 1.0);
    total += prod;
  }
  return std::clamp(total, 0.0, 1.0);
}

inline double state_acceptance_probability(const Scheme& scheme, const KeyPair& key, const Serial& serial, const DensityOp& rho, const World& w) {
  const DensityOp* one[] = {&rho};
  return states_acceptance_probability(scheme, key, serial, one, w);
}

// Repeated verification of one note; stops counting after the first reject.
inline std::vector<bool> reuse_loop(const Scheme& scheme, const KeyPair& key, const Banknote& note, World& w, int rounds, Rng& rng) {
  std::vector<bool> out;
  for (int i = 0; i < rounds; ++i) out.push_back(verify(scheme, key, note, w, rng));
  return out;
}

// Fraction of freshly minted notes that pass `rounds` consecutive
// verifications: an empirical reusability parameter.
inline double estimate_reusability(const Scheme& scheme, int notes, int rounds, Rng& rng) {
  int passed = 0;
  for (int i = 0; i < notes; ++i) {
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    World w = make_world(scheme, r);
    const auto key = scheme.key_gen(w, r);
    const auto note = scheme.mint(key, w, r, "note");
    const auto res = reuse_loop(scheme, key, note, w, rounds, r);
    if (std::all_of(res.begin(), res.end(), [](bool b) { return b; })) ++passed;
  }
  return static_cast<double>(passed) / notes;
}

inline nlohmann::json note_to_json(const Banknote& note, const World& w) {
  const auto rho = w.reduced(note.registers);
  nlohmann::json diag = nlohmann::json::array();
  for (Eigen::Index i = 0; i < rho.dim(); ++i) diag.push_back(rho.matrix()(i, i).real());
  return {{"serial", note.serial}, {"registers", note.registers}, {"diagonal", diag}, {"purity", rho.purity()}};
}

}  // namespace qmsep::money
