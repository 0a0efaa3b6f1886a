#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "qmsep/oracle.hpp"

// Numerical checks of the compressed-oracle facts, shared by the test suite
// and `qmsep oracle-check`.
namespace qmsep::oracle {

// All consistent D_R sequences of length <= capacity over l-bit positions.
inline std::vector<ClassicalDB> enumerate_databases(int l, int capacity) {
  std::vector<ClassicalDB> out{ClassicalDB{}};
  std::vector<ClassicalDB> frontier{ClassicalDB{}};
  const std::uint32_t n = 1U << l;
  for (int len = 1; len <= capacity; ++len) {
    std::vector<ClassicalDB> next;
    for (const auto& db : frontier)
      for (std::uint32_t x = 0; x < n; ++x)
        for (std::uint8_t z = 0; z < 2; ++z) {
          if (auto prev = db.lookup(x); prev && *prev != z) continue;
          next.push_back(db.appended(x, z));
        }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

struct IdentityReport {
  double comp_decomp = 0.0;
  double decomp_comp = 0.0;
  std::size_t compressed_dim = 0;
  std::size_t purified_dim = 0;
};

// Sparse matrices of Comp and Decomp on the valid subspaces (D_F disjoint from
// D_R; tables agreeing with D_R), and max-entry deviation of both products
// from the identity.
inline IdentityReport comp_decomp_identity(int l, int capacity) {
  check_input_bits(l);
  const std::uint64_t all = full_mask(l);
  std::map<Key, Eigen::Index> cidx, pidx;
  for (const auto& db : enumerate_databases(l, capacity)) {
    const std::uint64_t free = all & ~db.position_mask();
    for (std::uint64_t s = free;; s = (s - 1) & free) {
      cidx.try_emplace(Key{0, s, db, {}}, static_cast<Eigen::Index>(cidx.size()));
      pidx.try_emplace(Key{0, db.value_mask() | s, db, {}}, static_cast<Eigen::Index>(pidx.size()));
      if (s == 0) break;
    }
  }
  const RegisterLayout empty;
  using Sparse = Eigen::SparseMatrix<cplx>;
  using Entry = Eigen::Triplet<cplx>;
  const auto nc = static_cast<Eigen::Index>(cidx.size());
  const auto np = static_cast<Eigen::Index>(pidx.size());
  std::vector<Entry> de, ce;
  for (const auto& [k, j] : cidx) {
    const auto out = decomp(OracleWorld(View::compressed, l, empty, Amplitudes{{k, 1.0}}));
    for (const auto& [k2, a] : out.amplitudes()) de.emplace_back(pidx.at(k2), j, a);
  }
  for (const auto& [k, j] : pidx) {
    const auto out = comp(OracleWorld(View::purified, l, empty, Amplitudes{{k, 1.0}}));
    for (const auto& [k2, a] : out.amplitudes()) ce.emplace_back(cidx.at(k2), j, a);
  }
  Sparse dm(np, nc), cm(nc, np);
  dm.setFromTriplets(de.begin(), de.end());
  cm.setFromTriplets(ce.begin(), ce.end());
  auto deviation = [](const Sparse& prod) {
    Sparse id(prod.rows(), prod.cols());
    id.setIdentity();
    const Sparse diff = prod - id;
    double worst = 0.0;
    for (Eigen::Index c = 0; c < diff.outerSize(); ++c)
      for (Sparse::InnerIterator it(diff, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
  };
  IdentityReport r;
  r.compressed_dim = cidx.size();
  r.purified_dim = pidx.size();
  r.comp_decomp = deviation(Sparse(cm * dm));
  r.decomp_comp = deviation(Sparse(dm * cm));
  return r;
}

namespace detail {

inline ClassicalDB random_database(int l, int max_len, Rng& rng) {
  ClassicalDB db;
  const auto len = rng.below(static_cast<std::uint64_t>(max_len) + 1);
  for (std::uint64_t i = 0; i < len; ++i) {
    const auto x = static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << l));
    const auto z = db.lookup(x).value_or(static_cast<std::uint8_t>(rng.below(2)));
    db = db.appended(x, z);
  }
  return db;
}

inline ClassicalDB random_subsequence(const ClassicalDB& db, Rng& rng) {
  ClassicalDB out;
  for (const auto& e : db.entries)
    if (rng.bernoulli(0.5)) out.entries.push_back(e);
  return out;
}

inline Amplitudes normalised(Amplitudes a) {
  double n = 0.0;
  for (const auto& [k, x] : a) n += std::norm(x);
  for (auto& [k, x] : a) x /= std::sqrt(n);
  return a;
}

}  // namespace detail

struct RecordedQueryReport {
  double alpha = 0.0;
  double decrement = 0.0;
  double trace_distance = 0.0;
  double trace_distance_dense = 0.0;
  double bound = 0.0;

  bool decrement_matches() const { return std::abs(alpha - decrement) <= 1e-9; }
  bool within_bound() const { return trace_distance <= bound + 1e-9 && trace_distance_dense <= bound + 1e-9; }
  bool ok() const { return decrement_matches() && within_bound(); }
};

// Random pre-query state sum a |x>_Q |0>_A |D_F> |D_R> |h>_H with D_F and D_R
// disjoint; compares the compressed classical query against U_D'.
inline RecordedQueryReport recorded_query_check(int l, Rng& rng, bool skip_df_deletion = false) {
  const RegisterLayout layout({{"Q", l}, {"A", 1}, {"H", 1}});
  const std::uint64_t all = full_mask(l);
  Amplitudes amps;
  const auto terms = 2 + rng.below(7);
  for (std::uint64_t t = 0; t < terms; ++t) {
    const auto x = rng.below(std::uint64_t{1} << l);
    const auto h = rng.below(2);
    auto d_r = detail::random_database(l, 2, rng);
    const std::uint64_t free = all & ~d_r.position_mask();
    std::uint64_t df = rng() & free;
    // Bias towards queries landing in D_F so alpha is rarely zero.
    if (rng.bernoulli(0.5) && ((free >> x) & 1U)) df |= std::uint64_t{1} << x;
    detail::add(amps, Key{(x << 2) | h, df, d_r, {}}, cplx(rng.normal(), rng.normal()));
  }
  OracleWorld w(View::compressed, l, layout, detail::normalised(detail::pruned(std::move(amps))));

  RecordedQueryReport r;
  r.alpha = bad_query_weight(w, "Q");
  OracleWorld wc = w;
  compressed_classical_query(wc, "Q", "A", {false, skip_df_deletion});
  OracleWorld wd = w;
  apply_db_query(wd, "Q", "A", DbSource::oracle_record);
  r.decrement = pair_count_expectation(w) - pair_count_expectation(wc);
  r.trace_distance = pure_trace_distance(wc.amplitudes(), wd.amplitudes());
  r.trace_distance_dense = dense_trace_distance(wc.amplitudes(), wd.amplitudes());
  r.bound = 6.0 * std::sqrt(std::max(0.0, r.alpha));
  return r;
}

struct InterposedQueryReport {
  double weight_before = 0.0;
  double weight_after = 0.0;
  double decrement_before = 0.0;
  double decrement_after = 0.0;

  bool ok() const {
    return weight_after <= weight_before + 1e-9 && decrement_after <= decrement_before + 1e-9 &&
           std::abs(weight_before - decrement_before) <= 1e-9 && std::abs(weight_after - decrement_after) <= 1e-9;
  }
};

// Two parallel queries: a recorded query on (Q1, A1) followed by a plain one
// on (Q2, A2). Checks that the interposed recorded query cannot raise the
// weight of Q2 landing in D_F.
inline InterposedQueryReport interposed_query_check(int l, Rng& rng) {
  const RegisterLayout layout({{"Q1", l}, {"A1", 1}, {"Q2", l}, {"A2", 1}, {"H", 1}});
  const std::uint64_t all = full_mask(l);
  Amplitudes amps;
  const auto terms = 2 + rng.below(9);
  for (std::uint64_t t = 0; t < terms; ++t) {
    const auto x1 = rng.below(std::uint64_t{1} << l);
    const auto x2 = rng.below(std::uint64_t{1} << l);
    const auto h = rng.below(2);
    auto d_r = detail::random_database(l, 2, rng);
    auto d_a = detail::random_subsequence(d_r, rng);
    const std::uint64_t free = all & ~d_r.position_mask();
    std::uint64_t df = rng() & free;
    if (rng.bernoulli(0.5) && ((free >> x2) & 1U)) df |= std::uint64_t{1} << x2;
    if (rng.bernoulli(0.5) && ((free >> x1) & 1U)) df |= std::uint64_t{1} << x1;
    const std::uint64_t work = (((x1 << 1) << l | x2) << 2) | h;
    detail::add(amps, Key{work, df, d_r, d_a}, cplx(rng.normal(), rng.normal()));
  }
  OracleWorld phi(View::compressed, l, layout, detail::normalised(detail::pruned(std::move(amps))));

  InterposedQueryReport r;
  r.weight_before = bad_query_weight(phi, "Q2");
  OracleWorld c0 = phi;
  compressed_classical_query(c0, "Q2", "A2");
  r.decrement_before = pair_count_expectation(phi) - pair_count_expectation(c0);

  OracleWorld after = phi;
  compressed_classical_query(after, "Q1", "A1", {true, false});
  r.weight_after = bad_query_weight(after, "Q2");
  OracleWorld c1 = after;
  compressed_classical_query(c1, "Q2", "A2");
  r.decrement_after = pair_count_expectation(after) - pair_count_expectation(c1);
  return r;
}

struct CircuitOp {
  enum class Kind { unitary, quantum_query, classical_query };
  Kind kind;
  Matrix u;
  std::vector<std::string> regs;
  // Query registers; for classical queries `a` is created fresh.
  std::string q;
  std::string a;
};

struct Circuit {
  int l = 0;
  std::vector<CircuitOp> ops;
};

// Random interleaving of work unitaries with `queries` oracle queries, at most
// `max_classical` of them classical. Work registers: Q (l qubits), Y (one
// qubit, answer for quantum queries) and A0, A1, ... (fresh answers of
// classical queries).
inline Circuit random_circuit(int l, int queries, int max_classical, Rng& rng) {
  Circuit c{l, {}};
  int classical = 0;
  std::vector<std::string> answers;
  for (int i = 0; i < queries; ++i) {
    c.ops.push_back({CircuitOp::Kind::unitary, random_unitary(Eigen::Index{2} << l, rng), {"Q", "Y"}, "", ""});
    if (!answers.empty() && rng.bernoulli(0.5)) {
      const auto& a = answers[rng.below(answers.size())];
      c.ops.push_back({CircuitOp::Kind::unitary, random_unitary(4, rng), {"Y", a}, "", ""});
    }
    if (classical < max_classical && rng.bernoulli(0.5)) {
      const std::string a = "A" + std::to_string(classical++);
      c.ops.push_back({CircuitOp::Kind::classical_query, {}, {}, "Q", a});
      answers.push_back(a);
    } else {
      c.ops.push_back({CircuitOp::Kind::quantum_query, {}, {}, "Q", "Y"});
    }
  }
  c.ops.push_back({CircuitOp::Kind::unitary, random_unitary(Eigen::Index{2} << l, rng), {"Q", "Y"}, "", ""});
  return c;
}

inline QState circuit_initial_state(int l) { return QState::zero(RegisterLayout({{"Q", l}, {"Y", 1}})); }

inline OracleWorld run_circuit(const Circuit& c, View view) {
  const auto init = circuit_initial_state(c.l);
  OracleWorld w = view == View::purified ? OracleWorld::purified(c.l, init) : OracleWorld::compressed(c.l, init);
  for (const auto& op : c.ops) {
    switch (op.kind) {
      case CircuitOp::Kind::unitary: w.apply(op.u, op.regs); break;
      case CircuitOp::Kind::quantum_query: apply_quantum_query(w, op.q, op.a); break;
      case CircuitOp::Kind::classical_query:
        w.add_work_register(op.a, 1);
        apply_classical_query(w, op.q, op.a);
        break;
    }
  }
  return w;
}

// Average work state over sampled tables; a classical query measures the
// query register and writes R(x) into the fresh answer register.
inline Matrix sampled_average(const Circuit& c, int samples, Rng& rng) {
  Matrix acc;
  for (int s = 0; s < samples; ++s) {
    const auto f = sample_oracle(c.l, rng);
    QState st = circuit_initial_state(c.l);
    for (const auto& op : c.ops) {
      switch (op.kind) {
        case CircuitOp::Kind::unitary: st = apply_on(st, op.u, op.regs); break;
        case CircuitOp::Kind::quantum_query: st = apply_table_query(st, f, op.q, op.a); break;
        case CircuitOp::Kind::classical_query: {
          auto m = measure_register(st, op.q, rng);
          st = m.post.tensor(QState::zero(RegisterLayout({{op.a, 1}})));
          if (f(m.value)) st = apply_on(st, gates::pauli_x(), {op.a});
          break;
        }
      }
    }
    const Matrix rho = st.amplitudes() * st.amplitudes().adjoint();
    if (s == 0) acc = rho;
    else acc += rho;
  }
  return acc / static_cast<double>(samples);
}

struct EquivalenceReport {
  // Purified vs compressed reduced work states.
  double td_views = 0.0;
  // Purified vs Monte Carlo over sampled tables: TV of the computational-basis
  // distributions and trace distance of the averaged states.
  double tv_sampled = 0.0;
  double td_sampled = 0.0;
};

inline EquivalenceReport representation_equivalence(const Circuit& c, int samples, Rng& rng) {
  const auto rp = run_circuit(c, View::purified).reduced_work();
  const auto rc = run_circuit(c, View::compressed).reduced_work();
  EquivalenceReport r;
  r.td_views = trace_distance(rp, rc);
  if (samples > 0) {
    const Matrix avg = sampled_average(c, samples, rng);
    r.td_sampled = trace_distance(rp.matrix(), avg);
    double tv = 0.0;
    for (Eigen::Index i = 0; i < avg.rows(); ++i) tv += std::abs(rp.matrix()(i, i).real() - avg(i, i).real());
    r.tv_sampled = 0.5 * tv;
  }
  return r;
}

}  // namespace qmsep::oracle
