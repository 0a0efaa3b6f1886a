#pragma once

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qmsep/hilbert.hpp"

// Random oracles R : {0,1}^l -> {0,1} in three views.
//
//  * sampled:    an explicit truth table.
//  * purified:   the table register F in superposition, starting as |+>^(2^l)
//                (every position in the Fourier state 0-hat).
//  * compressed: only positions that differ from 0-hat are stored, as a
//                Fourier database D_F, next to the classical query record D_R.
//
// The purified and compressed views are held as keyed superpositions: each
// basis key carries the non-oracle ("work") register index plus the oracle
// side (table or D_F bitmask) and the classical databases D_R and D_A. The
// databases are append-only sequences, so they live in an enumerated symbolic
// basis rather than fixed qubit slots.
namespace qmsep::oracle {

inline constexpr int kMaxInputBits = 6;

inline std::uint64_t full_mask(int l) {
  const std::uint64_t n = std::uint64_t{1} << l;
  return n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

inline void check_input_bits(int l) {
  if (l < 1 || l > kMaxInputBits) throw Error(ErrorKind::invalid_argument, "oracle input length must be in 1..6");
}

struct TruthTable {
  int l = 0;
  // Bit x holds R(x).
  std::uint64_t bits = 0;

  bool operator()(std::uint64_t x) const { return (bits >> x) & 1U; }
  std::uint64_t size() const { return std::uint64_t{1} << l; }
};

inline TruthTable sample_oracle(int l, Rng& rng) {
  check_input_bits(l);
  return {l, rng() & full_mask(l)};
}

// Append-only list of (position, answer) pairs. Duplicates are allowed and
// must agree.
struct ClassicalDB {
  std::vector<std::pair<std::uint32_t, std::uint8_t>> entries;

  std::optional<std::uint8_t> lookup(std::uint32_t x) const {
    for (const auto& [p, z] : entries)
      if (p == x) return z;
    return std::nullopt;
  }

  bool contains(std::uint32_t x) const { return lookup(x).has_value(); }

  ClassicalDB appended(std::uint32_t x, std::uint8_t z) const {
    if (auto prev = lookup(x); prev && *prev != z)
      throw Error(ErrorKind::invalid_database, "conflicting answers recorded for position " + std::to_string(x));
    ClassicalDB out = *this;
    out.entries.emplace_back(x, z);
    return out;
  }

  std::uint64_t position_mask() const {
    std::uint64_t m = 0;
    for (const auto& e : entries) m |= std::uint64_t{1} << e.first;
    return m;
  }

  // Table bits at recorded positions.
  std::uint64_t value_mask() const {
    std::uint64_t m = 0;
    for (const auto& e : entries)
      if (e.second) m |= std::uint64_t{1} << e.first;
    return m;
  }

  std::set<std::uint32_t> positions() const {
    std::set<std::uint32_t> s;
    for (const auto& e : entries) s.insert(e.first);
    return s;
  }

  std::size_t distinct() const { return positions().size(); }

  bool consistent() const {
    for (std::size_t i = 0; i < entries.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (entries[i].first == entries[j].first && entries[i].second != entries[j].second) return false;
    return true;
  }

  auto operator<=>(const ClassicalDB&) const = default;
};

// Positions whose Fourier value is 1-hat. With one-bit outputs this is the
// whole content of a Fourier database; kept sorted and distinct.
struct FourierDB {
  std::vector<std::uint32_t> positions;

  static FourierDB from_mask(std::uint64_t mask) {
    FourierDB d;
    for (std::uint32_t x = 0; mask; ++x, mask >>= 1)
      if (mask & 1U) d.positions.push_back(x);
    return d;
  }

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (auto x : positions) m |= std::uint64_t{1} << x;
    return m;
  }

  std::size_t size() const { return positions.size(); }
};

enum class View { purified, compressed };

inline std::string to_string(View v) { return v == View::purified ? "purified" : "compressed"; }

struct Key {
  std::uint64_t work = 0;
  // Purified: truth-table bits. Compressed: D_F mask.
  std::uint64_t f = 0;
  ClassicalDB d_r;
  ClassicalDB d_a;

  auto operator<=>(const Key&) const = default;
};

using Amplitudes = std::map<Key, cplx>;

inline constexpr double kPrune = 1e-15;

class OracleWorld {
 public:
  OracleWorld(View view, int l, RegisterLayout work, Amplitudes amps)
      : view_(view), l_(l), work_(std::move(work)), amps_(std::move(amps)) {
    check_input_bits(l_);
    if (std::abs(norm_squared() - 1.0) > tol::structural) throw Error(ErrorKind::invalid_argument, "oracle world is not normalised");
  }

  // Work registers in `work`; F = |0-hat>^(2^l), i.e. the uniform superposition over tables.
  static OracleWorld purified(int l, const QState& work) {
    check_input_bits(l);
    if (l > 4) throw Error(ErrorKind::budget_exceeded, "purified tables are enumerated only for l <= 4");
    const std::uint64_t tables = std::uint64_t{1} << (std::uint64_t{1} << l);
    const double amp = 1.0 / std::sqrt(static_cast<double>(tables));
    Amplitudes a;
    for (Eigen::Index i = 0; i < work.amplitudes().size(); ++i) {
      if (std::abs(work.amplitudes()[i]) < kPrune) continue;
      for (std::uint64_t f = 0; f < tables; ++f) a[Key{static_cast<std::uint64_t>(i), f, {}, {}}] = work.amplitudes()[i] * amp;
    }
    return OracleWorld(View::purified, l, work.layout(), std::move(a));
  }

  // Work registers in `work`; D_F = D_R = D_A = empty.
  static OracleWorld compressed(int l, const QState& work) {
    Amplitudes a;
    for (Eigen::Index i = 0; i < work.amplitudes().size(); ++i)
      if (std::abs(work.amplitudes()[i]) >= kPrune) a[Key{static_cast<std::uint64_t>(i), 0, {}, {}}] = work.amplitudes()[i];
    return OracleWorld(View::compressed, l, work.layout(), std::move(a));
  }

  // A dense state whose register `f_reg` (2^l qubits) is the oracle table;
  // every other register becomes a work register.
  static OracleWorld from_dense(int l, const QState& state, const std::string& f_reg) {
    check_input_bits(l);
    const auto& layout = state.layout();
    if (layout.qubits_of(f_reg) != (1 << l)) throw Error(ErrorKind::dimension_mismatch, "table register must have 2^l qubits");
    const std::vector<std::string> fr{f_reg};
    const auto work_layout = layout.without(fr);
    const auto work_names = work_layout.names();
    const auto wq = layout.qubit_indices(work_names);
    const auto fq = layout.qubit_indices(fr);
    const int n = layout.total_qubits();
    Amplitudes a;
    for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i) {
      if (std::abs(state.amplitudes()[i]) < kPrune) continue;
      const auto idx = static_cast<std::uint64_t>(i);
      std::uint64_t f = 0;
      for (std::size_t x = 0; x < fq.size(); ++x)
        if ((idx >> (n - 1 - fq[x])) & 1U) f |= std::uint64_t{1} << x;
      a[Key{qmsep::detail::extract(idx, n, wq), f, {}, {}}] += state.amplitudes()[i];
    }
    return OracleWorld(View::purified, l, work_layout, std::move(a));
  }

  View view() const { return view_; }
  int l() const { return l_; }
  const RegisterLayout& work_layout() const { return work_; }
  const Amplitudes& amplitudes() const { return amps_; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [k, a] : amps_) s += std::norm(a);
    return s;
  }

  // Appends a work register in |0>.
  void add_work_register(const std::string& name, int qubits) {
    work_ = work_.appended({name, qubits});
    Amplitudes out;
    for (auto& [k, a] : amps_) {
      Key k2 = k;
      k2.work <<= qubits;
      out.emplace(std::move(k2), a);
    }
    amps_ = std::move(out);
  }

  void apply(const Matrix& u, std::span<const std::string> regs) {
    if (!is_unitary(u)) throw Error(ErrorKind::not_unitary, "work operator fails the unitarity check");
    const int n = work_.total_qubits();
    const auto qs = work_.qubit_indices(regs);
    const auto offs = qmsep::detail::target_offsets(n, qs);
    if (static_cast<std::size_t>(u.rows()) != offs.size()) throw Error(ErrorKind::dimension_mismatch, "operator does not match work registers");
    const std::uint64_t mask = offs.back();
    std::map<Key, Vector> groups;
    for (const auto& [k, a] : amps_) {
      Key base = k;
      base.work &= ~mask;
      auto [it, fresh] = groups.try_emplace(base, Vector::Zero(u.rows()));
      it->second[static_cast<Eigen::Index>(qmsep::detail::extract(k.work, n, qs))] += a;
    }
    Amplitudes out;
    for (auto& [base, v] : groups) {
      const Vector r = u * v;
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (std::abs(r[i]) < kPrune) continue;
        Key k = base;
        k.work |= offs[static_cast<std::size_t>(i)];
        out.emplace(std::move(k), r[i]);
      }
    }
    amps_ = std::move(out);
  }

  void apply(const Matrix& u, std::initializer_list<std::string> regs) {
    std::vector<std::string> r(regs);
    apply(u, std::span<const std::string>(r));
  }

  // Reduced state of the named work registers (all of them if empty).
  DensityOp reduced_work(std::vector<std::string> keep = {}) const {
    if (keep.empty()) keep = work_.names();
    const int n = work_.total_qubits();
    const auto kq = work_.qubit_indices(keep);
    const auto d = Eigen::Index{1} << kq.size();
    std::uint64_t kmask = 0;
    for (int q : kq) kmask |= std::uint64_t{1} << (n - 1 - q);
    std::map<Key, Vector> groups;
    for (const auto& [k, a] : amps_) {
      Key rest = k;
      rest.work &= ~kmask;
      auto [it, fresh] = groups.try_emplace(rest, Vector::Zero(d));
      it->second[static_cast<Eigen::Index>(qmsep::detail::extract(k.work, n, kq))] += a;
    }
    Matrix rho = Matrix::Zero(d, d);
    for (const auto& [rest, v] : groups) rho += v * v.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOp(work_.subset(keep), std::move(rho));
  }

  std::uint64_t work_value(const Key& k, const std::string& reg) const {
    const auto qs = work_.qubit_indices({reg});
    return qmsep::detail::extract(k.work, work_.total_qubits(), qs);
  }

  std::uint64_t work_bit(const std::string& reg) const {
    if (work_.qubits_of(reg) != 1) throw Error(ErrorKind::invalid_argument, "register '" + reg + "' must be a single qubit");
    return std::uint64_t{1} << (work_.total_qubits() - 1 - work_.offset_of(reg));
  }

  void replace(View view, Amplitudes amps) {
    view_ = view;
    amps_ = std::move(amps);
  }

 private:
  View view_;
  int l_;
  RegisterLayout work_;
  Amplitudes amps_;
};

// <a|b> over keyed superpositions.
inline cplx inner(const Amplitudes& a, const Amplitudes& b) {
  cplx s = 0.0;
  for (const auto& [k, x] : a)
    if (auto it = b.find(k); it != b.end()) s += std::conj(x) * it->second;
  return s;
}

// Trace distance of two pure keyed states. With d = || |a> - e^{i phi} |b> ||
// at the aligning phase, 1 - |<a|b>|^2 = d^2 (1 - d^2 / 4), which avoids the
// cancellation near |<a|b>| = 1.
inline double pure_trace_distance(const Amplitudes& a, const Amplitudes& b) {
  const cplx ov = inner(a, b);
  const cplx phase = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx(1.0);
  Amplitudes diff = a;
  for (const auto& [k, x] : b) diff[k] -= phase * x;
  double d2 = 0.0;
  for (const auto& [k, x] : diff) d2 += std::norm(x);
  return std::sqrt(std::max(0.0, d2 * (1.0 - d2 / 4.0)));
}

// Same quantity from density matrices over the union of supports.
inline double dense_trace_distance(const Amplitudes& a, const Amplitudes& b) {
  std::map<Key, Eigen::Index> index;
  for (const auto& [k, x] : a) index.try_emplace(k, static_cast<Eigen::Index>(index.size()));
  for (const auto& [k, x] : b) index.try_emplace(k, static_cast<Eigen::Index>(index.size()));
  const auto d = static_cast<Eigen::Index>(index.size());
  Vector va = Vector::Zero(d), vb = Vector::Zero(d);
  for (const auto& [k, x] : a) va[index[k]] = x;
  for (const auto& [k, x] : b) vb[index[k]] = x;
  return trace_distance(Matrix(va * va.adjoint()), Matrix(vb * vb.adjoint()));
}

namespace detail {

inline void add(Amplitudes& out, Key k, cplx a) {
  auto [it, fresh] = out.try_emplace(std::move(k), a);
  if (!fresh) it->second += a;
}

inline Amplitudes pruned(Amplitudes in) {
  for (auto it = in.begin(); it != in.end();)
    it = std::abs(it->second) < kPrune ? in.erase(it) : std::next(it);
  return in;
}

inline void require_fresh_answer(const OracleWorld& w, const std::string& a_reg) {
  const std::uint64_t bit = w.work_bit(a_reg);
  for (const auto& [k, a] : w.amplitudes())
    if ((k.work & bit) && std::abs(a) > tol::structural) throw Error(ErrorKind::invalid_argument, "answer register '" + a_reg + "' is not fresh");
}

inline void require_position_width(const OracleWorld& w, const std::string& q_reg) {
  if (w.work_layout().qubits_of(q_reg) != w.l()) throw Error(ErrorKind::dimension_mismatch, "query register must have l qubits");
}

inline void require_disjoint(const Key& k) {
  if (k.f & k.d_r.position_mask()) throw Error(ErrorKind::invalid_database, "Fourier and classical databases overlap");
}

}  // namespace detail

// U_Q : |x>|y>|f> -> |x>|y + f(x)>|f>. In the compressed view this is
// Comp . U_Q . Decomp evaluated in closed form.
inline void apply_quantum_query(OracleWorld& w, const std::string& q_reg, const std::string& a_reg) {
  detail::require_position_width(w, q_reg);
  const std::uint64_t abit = w.work_bit(a_reg);
  Amplitudes out;
  for (const auto& [k, a] : w.amplitudes()) {
    const auto x = static_cast<std::uint32_t>(w.work_value(k, q_reg));
    if (w.view() == View::purified) {
      Key k2 = k;
      if ((k.f >> x) & 1U) k2.work ^= abit;
      detail::add(out, std::move(k2), a);
      continue;
    }
    detail::require_disjoint(k);
    if (auto z = k.d_r.lookup(x)) {
      Key k2 = k;
      if (*z) k2.work ^= abit;
      detail::add(out, std::move(k2), a);
      continue;
    }
    // Position x holds a Fourier value c; CNOT from it into A is the
    // Fourier-basis CNOT in the other direction:
    //   |y>|c-hat> -> (1/2) sum_{t,y'} (-1)^{t (y + y')} |y'>|(c + t)-hat>.
    const std::uint64_t y = (k.work & abit) ? 1 : 0;
    for (std::uint64_t t = 0; t < 2; ++t)
      for (std::uint64_t y2 = 0; y2 < 2; ++y2) {
        Key k2 = k;
        k2.work = y2 ? (k.work | abit) : (k.work & ~abit);
        if (t) k2.f ^= std::uint64_t{1} << x;
        const double sign = (t & (y ^ y2)) ? -1.0 : 1.0;
        detail::add(out, std::move(k2), 0.5 * sign * a);
      }
  }
  w.replace(w.view(), detail::pruned(std::move(out)));
}

struct ClassicalQueryOptions {
  // Also append the pair to D_A (the recorded query U_R).
  bool record = false;
  // Fault injection for mutation tests: leave x in D_F in the third case.
  bool skip_df_deletion = false;
};

// Compressed U_C / U_R, three cases on basis inputs |x>|0>|D_F>|D_R>:
//   x in D_R:           answer D_R(x), append (x, D_R(x)).
//   x not in D_R, D_F:  (1/sqrt2) sum_z |z>, append (x, z).
//   x in D_F:           (1/sqrt2) sum_z (-1)^z |z>, remove x from D_F, append (x, z).
inline void compressed_classical_query(OracleWorld& w, const std::string& q_reg, const std::string& a_reg, ClassicalQueryOptions opt = {}) {
  if (w.view() != View::compressed) throw Error(ErrorKind::wrong_mode, "compressed query on a non-compressed world");
  detail::require_position_width(w, q_reg);
  detail::require_fresh_answer(w, a_reg);
  const std::uint64_t abit = w.work_bit(a_reg);
  const double s = 1.0 / std::sqrt(2.0);
  Amplitudes out;
  for (const auto& [k, a] : w.amplitudes()) {
    detail::require_disjoint(k);
    const auto x = static_cast<std::uint32_t>(w.work_value(k, q_reg));
    auto emit = [&](std::uint8_t z, std::uint64_t f, cplx amp) {
      Key k2{z ? (k.work | abit) : k.work, f, k.d_r.appended(x, z), opt.record ? k.d_a.appended(x, z) : k.d_a};
      detail::add(out, std::move(k2), amp);
    };
    if (auto z = k.d_r.lookup(x)) {
      emit(*z, k.f, a);
    } else if (!((k.f >> x) & 1U)) {
      emit(0, k.f, s * a);
      emit(1, k.f, s * a);
    } else {
      const std::uint64_t f2 = opt.skip_df_deletion ? k.f : (k.f & ~(std::uint64_t{1} << x));
      emit(0, f2, s * a);
      emit(1, f2, -s * a);
    }
  }
  w.replace(View::compressed, detail::pruned(std::move(out)));
}

// U_C (record = false) or U_R (record = true); dispatches on the view.
inline void apply_classical_query(OracleWorld& w, const std::string& q_reg, const std::string& a_reg, bool record = false) {
  if (w.view() == View::compressed) {
    compressed_classical_query(w, q_reg, a_reg, {record, false});
    return;
  }
  detail::require_position_width(w, q_reg);
  detail::require_fresh_answer(w, a_reg);
  const std::uint64_t abit = w.work_bit(a_reg);
  Amplitudes out;
  for (const auto& [k, a] : w.amplitudes()) {
    const auto x = static_cast<std::uint32_t>(w.work_value(k, q_reg));
    const auto z = static_cast<std::uint8_t>((k.f >> x) & 1U);
    Key k2{z ? (k.work | abit) : k.work, k.f, k.d_r.appended(x, z), record ? k.d_a.appended(x, z) : k.d_a};
    detail::add(out, std::move(k2), a);
  }
  w.replace(View::purified, detail::pruned(std::move(out)));
}

inline void apply_recorded_query(OracleWorld& w, const std::string& q_reg, const std::string& a_reg) {
  apply_classical_query(w, q_reg, a_reg, true);
}

enum class DbSource {
  // U_D: answers from, and appends to, the adversary's record D_A.
  adversary,
  // U_D': the same map driven by the oracle's record D_R.
  oracle_record,
};

// Answers from the database when x is recorded there; otherwise a uniformly
// random answer (1/sqrt2) sum_z |z> that is then recorded. Never touches F.
inline void apply_db_query(OracleWorld& w, const std::string& q_reg, const std::string& a_reg, DbSource src) {
  detail::require_position_width(w, q_reg);
  detail::require_fresh_answer(w, a_reg);
  const std::uint64_t abit = w.work_bit(a_reg);
  const double s = 1.0 / std::sqrt(2.0);
  Amplitudes out;
  for (const auto& [k, a] : w.amplitudes()) {
    const auto x = static_cast<std::uint32_t>(w.work_value(k, q_reg));
    const ClassicalDB& db = src == DbSource::adversary ? k.d_a : k.d_r;
    auto emit = [&](std::uint8_t z, cplx amp) {
      Key k2 = k;
      if (z) k2.work |= abit;
      (src == DbSource::adversary ? k2.d_a : k2.d_r) = db.appended(x, z);
      detail::add(out, std::move(k2), amp);
    };
    if (auto z = db.lookup(x)) {
      emit(*z, a);
    } else {
      emit(0, s * a);
      emit(1, s * a);
    }
  }
  w.replace(w.view(), detail::pruned(std::move(out)));
}

// Compressed -> purified. Positions recorded in D_R hold their recorded
// value; positions in D_F hold 1-hat; all others hold 0-hat.
inline OracleWorld decomp(const OracleWorld& w) {
  if (w.view() != View::compressed) throw Error(ErrorKind::wrong_mode, "decompression needs a compressed world");
  const std::uint64_t all = full_mask(w.l());
  Amplitudes out;
  for (const auto& [k, a] : w.amplitudes()) {
    detail::require_disjoint(k);
    if (!k.d_r.consistent()) throw Error(ErrorKind::invalid_database, "inconsistent classical database");
    const std::uint64_t fixed = k.d_r.position_mask();
    const std::uint64_t free = all & ~fixed;
    const double coef = std::pow(2.0, -0.5 * std::popcount(free));
    const std::uint64_t base = k.d_r.value_mask();
    // Enumerate subsets of `free` as table values on the free positions.
    for (std::uint64_t s = free;; s = (s - 1) & free) {
      const double sign = (std::popcount(s & k.f) & 1) ? -1.0 : 1.0;
      detail::add(out, Key{k.work, base | s, k.d_r, k.d_a}, sign * coef * a);
      if (s == 0) break;
    }
  }
  return OracleWorld(View::purified, w.l(), w.work_layout(), detail::pruned(std::move(out)));
}

// Purified -> compressed; the inverse of decomp on tables consistent with D_R.
inline OracleWorld comp(const OracleWorld& w) {
  if (w.view() != View::purified) throw Error(ErrorKind::wrong_mode, "compression needs a purified world");
  const std::uint64_t all = full_mask(w.l());
  Amplitudes out;
  for (const auto& [k, a] : w.amplitudes()) {
    const std::uint64_t fixed = k.d_r.position_mask();
    if (!k.d_r.consistent() || ((k.f & fixed) != k.d_r.value_mask()))
      throw Error(ErrorKind::invalid_database, "table disagrees with the classical record");
    const std::uint64_t free = all & ~fixed;
    const double coef = std::pow(2.0, -0.5 * std::popcount(free));
    for (std::uint64_t t = free;; t = (t - 1) & free) {
      const double sign = (std::popcount(t & k.f) & 1) ? -1.0 : 1.0;
      detail::add(out, Key{k.work, t, k.d_r, k.d_a}, sign * coef * a);
      if (t == 0) break;
    }
  }
  return OracleWorld(View::compressed, w.l(), w.work_layout(), detail::pruned(std::move(out)));
}

// <O> with O = sum |D_F| |D_F><D_F|.
inline double pair_count_expectation(const OracleWorld& w) {
  if (w.view() != View::compressed) throw Error(ErrorKind::wrong_mode, "pair count is defined on the compressed view");
  double s = 0.0;
  for (const auto& [k, a] : w.amplitudes()) s += std::norm(a) * std::popcount(k.f);
  return s;
}

// Weight of basis terms whose query position (register q_reg) lies in D_F.
inline double bad_query_weight(const OracleWorld& w, const std::string& q_reg) {
  if (w.view() != View::compressed) throw Error(ErrorKind::wrong_mode, "bad-query weight is defined on the compressed view");
  double s = 0.0;
  for (const auto& [k, a] : w.amplitudes())
    if ((k.f >> w.work_value(k, q_reg)) & 1U) s += std::norm(a);
  return s;
}

// Dense F register (2^l qubits) in |+>^(2^l).
inline QState purified_init(int l, const std::string& name = "F") {
  check_input_bits(l);
  const int n = 1 << l;
  qmsep::detail::check_budget(n);
  const auto d = Eigen::Index{1} << n;
  return QState(RegisterLayout({{name, n}}), Vector::Constant(d, cplx(1.0 / std::sqrt(static_cast<double>(d)))));
}

// U_Q on a dense state: |x>_q |y>_a |f>_F -> |x> |y + f(x)> |f>, where qubit x
// of register F holds f(x).
inline QState apply_quantum_query_dense(const QState& s, const std::string& q_reg, const std::string& a_reg, const std::string& f_reg) {
  const auto& layout = s.layout();
  const int n = layout.total_qubits();
  const int l = layout.qubits_of(q_reg);
  if (layout.qubits_of(f_reg) != (1 << l)) throw Error(ErrorKind::dimension_mismatch, "table register must have 2^l qubits");
  if (layout.qubits_of(a_reg) != 1) throw Error(ErrorKind::dimension_mismatch, "answer register must be one qubit");
  const auto qq = layout.qubit_indices({q_reg});
  const int foff = layout.offset_of(f_reg);
  const std::uint64_t abit = std::uint64_t{1} << (n - 1 - layout.offset_of(a_reg));
  Vector out(s.amplitudes().size());
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    const auto x = static_cast<int>(qmsep::detail::extract(idx, n, qq));
    const bool fx = (idx >> (n - 1 - (foff + x))) & 1U;
    out[static_cast<Eigen::Index>(fx ? idx ^ abit : idx)] = s.amplitudes()[i];
  }
  return QState(layout, std::move(out));
}

// U_f on a dense state for a sampled table (no F register).
inline QState apply_table_query(const QState& s, const TruthTable& f, const std::string& q_reg, const std::string& a_reg) {
  const auto& layout = s.layout();
  const int n = layout.total_qubits();
  if (layout.qubits_of(q_reg) != f.l) throw Error(ErrorKind::dimension_mismatch, "query register must have l qubits");
  const auto qq = layout.qubit_indices({q_reg});
  const std::uint64_t abit = std::uint64_t{1} << (n - 1 - layout.offset_of(a_reg));
  Vector out(s.amplitudes().size());
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    out[static_cast<Eigen::Index>(f(qmsep::detail::extract(idx, n, qq)) ? idx ^ abit : idx)] = s.amplitudes()[i];
  }
  return QState(layout, std::move(out));
}

// One JSON-lines record summarising the world after an operation.
inline nlohmann::json trace_record(const OracleWorld& w, const std::string& op) {
  nlohmann::json j{{"op", op}, {"view", to_string(w.view())}, {"terms", w.amplitudes().size()}, {"norm", w.norm_squared()}};
  if (w.view() == View::compressed) j["pair_count"] = pair_count_expectation(w);
  return j;
}

}  // namespace qmsep::oracle
