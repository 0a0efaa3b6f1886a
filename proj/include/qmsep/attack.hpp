#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmsep/money.hpp"
#include "qmsep/synth.hpp"

// The counterfeiting adversary: learn a database by verifying the honest note,
// refine it by verifying synthesized states, then synthesize two notes
// against a simulated oracle.
namespace qmsep::attack {

using money::Scheme;
using money::Serial;
using oracle::ClassicalDB;

enum class Variant { classical_mint, quantum_mint };

inline std::string to_string(Variant v) { return v == Variant::classical_mint ? "classical_mint" : "quantum_mint"; }

inline Variant variant_for(const money::SchemeProfile& p) {
  return p.mint_query_mode == money::QueryMode::classical ? Variant::classical_mint : Variant::quantum_mint;
}

// 1 - sqrt(1 - delta_r + eps), the synthesizer threshold the analysis uses.
inline double threshold_b(double eps, double delta_r) {
  const double inside = 1.0 - delta_r + eps;
  if (!(inside >= 0.0 && inside < 1.0)) throw Error(ErrorKind::invalid_params, "need eps < delta_r <= 1 + eps");
  return 1.0 - std::sqrt(inside);
}

// Pr[both forgeries accepted] >= 1.8 b^2 - 1.
inline double success_bound(double eps, double delta_r) {
  const double b = threshold_b(eps, delta_r);
  return 1.8 * b * b - 1.0;
}

// q_total is the number of oracle queries made by key generation plus minting.
inline long analytic_t_max(Variant v, int q, int q_total, double eps) {
  if (v == Variant::classical_mint) return static_cast<long>(std::ceil(q_total / eps - 1e-9));
  return static_cast<long>(std::ceil(36.0 * q * q_total / (eps * eps) - 1e-9));
}

inline long analytic_n_updates(Variant v, int q, int q_total, double eps, double delta_r) {
  const double b = threshold_b(eps, delta_r);
  if (v == Variant::classical_mint) return static_cast<long>(std::ceil(100.0 * q_total / (b * b) - 1e-9));
  return static_cast<long>(std::ceil(q * q_total / (eps * eps * b * b * b * b) - 1e-9));
}

struct AttackConfig {
  double epsilon = 0.1;
  double delta_r = 0.99;
  long t_max = 1;
  long n_updates = 1;
  SynthesisParams synth;
  Variant variant = Variant::classical_mint;
  bool scaled = false;

  static AttackConfig defaults(const money::SchemeProfile& p, double eps, double delta_r) {
    AttackConfig c;
    c.epsilon = eps;
    c.delta_r = delta_r;
    c.variant = variant_for(p);
    c.t_max = analytic_t_max(c.variant, p.q, p.q_prime, eps);
    c.n_updates = analytic_n_updates(c.variant, p.q, p.q_prime, eps, delta_r);
    c.synth = SynthesisParams::defaults(p.m);
    return c;
  }

  void validate(const money::SchemeProfile& p) const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::invalid_params, "epsilon must lie in (0, 1)");
    if (t_max < 1 || n_updates < 1) throw Error(ErrorKind::invalid_params, "t_max and n_updates must be positive");
    if (variant != variant_for(p)) throw Error(ErrorKind::invalid_params, "variant does not match the scheme's minting queries");
    synth.validate();
  }
};

struct UpdateStep {
  std::size_t db_size = 0;
  bool accepted = false;
  // Exact acceptance of the synthesized state under the true oracle and
  // under the simulated verifier for D_k.
  double p_true = 0.0;
  double p_sim = 0.0;
  double max_acceptance = 0.0;
  // Verification queries some key-generation/minting position missing from D_k.
  bool misses_setup = false;
  bool fallback = false;
};

struct AttackTranscript {
  std::string scheme;
  Variant variant = Variant::classical_mint;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  long t_max = 0;
  long n_updates = 0;
  long t_drawn = 0;
  long j_drawn = 0;
  Serial serial;
  // D_0, D_1, ...: one snapshot per update step.
  std::vector<ClassicalDB> databases;
  std::vector<UpdateStep> updates;
  std::optional<DensityOp> forged1;
  std::optional<DensityOp> forged2;
  bool accept1 = false;
  bool accept2 = false;
  bool success = false;
  double success_probability = 0.0;

  // Test phase: per verification, queries landing in the setup set but not
  // yet in D.
  std::vector<int> bad_query_counts;
  // The verification after the test phase would query a setup position not in D.
  bool bad_query_after_test = false;
  std::size_t setup_size = 0;
  // Sum over update steps of new setup positions discovered.
  std::size_t telescoped_discoveries = 0;
  // Acceptance of the honest note after the test phase, true oracle vs the
  // simulated verifier for D_j.
  double note_p_true = 0.0;
  double note_p_sim = 0.0;
};

namespace detail {

inline ClassicalDB merged(const ClassicalDB& d, const ClassicalDB& more) {
  ClassicalDB out = d;
  for (const auto& [x, z] : more.entries)
    if (!out.contains(x)) out = out.appended(x, z);
    else if (*out.lookup(x) != z) throw Error(ErrorKind::invalid_database, "conflicting answers for position " + std::to_string(x));
  return out;
}

inline std::size_t count_missing(const std::vector<std::uint32_t>& xs, const std::set<std::uint32_t>& setup, const ClassicalDB& d) {
  std::set<std::uint32_t> miss;
  for (auto x : xs)
    if (setup.count(x) && !d.contains(x)) miss.insert(x);
  return miss.size();
}

inline std::size_t setup_overlap(const std::set<std::uint32_t>& setup, const ClassicalDB& d) {
  std::size_t n = 0;
  for (auto x : d.positions()) n += setup.count(x);
  return n;
}

}  // namespace detail

// The verifier with every oracle call answered from D: positions in D are
// hard-wired, the rest get fresh uniform answers from Hadamard'd ancillas
// (consistent across repeated positions). M is the note; K holds one ancilla
// per fresh position followed by the accept qubit.
inline VerifierSpec build_sim_verifier(const Scheme& scheme, const money::KeyPair& key, const Serial& serial, const ClassicalDB& d) {
  if (!d.consistent()) throw Error(ErrorKind::invalid_database, "database holds conflicting answers");
  const int m = scheme.profile().m;
  const auto xs = scheme.query_positions(key, serial);
  std::vector<std::uint32_t> fresh;
  for (auto x : xs)
    if (!d.contains(x) && std::find(fresh.begin(), fresh.end(), x) == fresh.end()) fresh.push_back(x);
  const int r = static_cast<int>(fresh.size());
  const int n = m + r + 1;
  qmsep::detail::check_budget(n);
  const auto dm = Eigen::Index{1} << m;
  const auto dim = Eigen::Index{1} << n;
  Matrix block = Matrix::Zero(dim, dim);
  const Matrix x = gates::pauli_x();
  const Matrix i2 = Matrix::Identity(2, 2);
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << r); ++a) {
    std::vector<std::uint8_t> answers;
    for (auto p : xs) {
      if (auto z = d.lookup(p)) {
        answers.push_back(*z);
      } else {
        const auto idx = static_cast<int>(std::find(fresh.begin(), fresh.end(), p) - fresh.begin());
        answers.push_back(static_cast<std::uint8_t>((a >> (r - 1 - idx)) & 1U));
      }
    }
    const Matrix pi = scheme.accept_projector(key, serial, answers);
    const Matrix pa = Matrix::Identity(dm, dm) - pi;
    // Pi (x) X + (I - Pi) (x) I on (M, accept), selected by the ancilla value a.
    const Matrix local = kron(pi, x) + kron(pa, i2);
    const Matrix sel = gates::ket_bra(a, a, std::uint64_t{1} << r);
    std::vector<int> qs;
    for (int q = 0; q < m; ++q) qs.push_back(q);
    qs.push_back(n - 1);
    std::vector<int> anc;
    for (int q = m; q < m + r; ++q) anc.push_back(q);
    block += embed_on_qubits(sel, n, anc) * embed_on_qubits(local, n, qs);
  }
  Matrix hs = Matrix::Identity(1, 1);
  for (int q = 0; q < r; ++q) hs = kron(hs, gates::hadamard());
  std::vector<int> anc;
  for (int q = m; q < m + r; ++q) anc.push_back(q);
  const Matrix prep = r > 0 ? embed_on_qubits(hs, n, anc) : Matrix::Identity(dim, dim);
  return VerifierSpec{m, r + 1, block * prep, n - 1};
}

// Synthesis against D with memoization of the deterministic eigen backend.
class Synthesizer {
 public:
  Synthesizer(const Scheme& scheme, const money::KeyPair& key, Serial serial, SynthesisParams params)
      : scheme_(scheme), key_(key), serial_(std::move(serial)), params_(params) {}

  struct Output {
    DensityOp state;
    bool fallback;
    double max_acceptance;
    double p_sim;
  };

  const VerifierSpec& spec(const ClassicalDB& d) {
    auto it = specs_.find(d);
    if (it == specs_.end()) {
      auto spec = build_sim_verifier(scheme_, key_, serial_, d);
      const double best = max_acceptance(spec).value;
      it = specs_.emplace(d, Entry{std::move(spec), best}).first;
    }
    return it->second.spec;
  }

  double best(const ClassicalDB& d) {
    spec(d);
    return specs_.at(d).best;
  }

  Output run(const ClassicalDB& d, Rng& rng) {
    const auto& s = spec(d);
    const double best = specs_.at(d).best;
    if (params_.backend == Backend::eigen) {
      auto it = eigen_.find(d);
      if (it == eigen_.end()) it = eigen_.emplace(d, max_acceptance(s).witness).first;
      return {it->second, false, best, acceptance(s, it->second)};
    }
    auto r = synthesize(s, params_, rng);
    const double p = acceptance(s, r.state);
    return {std::move(r.state), r.fallback, best, p};
  }

 private:
  struct Entry {
    VerifierSpec spec;
    double best;
  };
  const Scheme& scheme_;
  const money::KeyPair& key_;
  Serial serial_;
  SynthesisParams params_;
  std::map<ClassicalDB, Entry> specs_;
  std::map<ClassicalDB, DensityOp> eigen_;
};

// Verifies the note t times, t uniform in [0, t_max); D collects every
// query-answer pair.
inline ClassicalDB test_phase(const Scheme& scheme, const money::KeyPair& key, const money::Banknote& note, money::World& w,
                              const AttackConfig& cfg, Rng& rng, AttackTranscript& tr) {
  tr.t_drawn = static_cast<long>(rng.below(static_cast<std::uint64_t>(cfg.t_max)));
  ClassicalDB d;
  const auto xs = scheme.query_positions(key, note.serial);
  for (long i = 0; i < tr.t_drawn; ++i) {
    tr.bad_query_counts.push_back(static_cast<int>(detail::count_missing(xs, w.setup_positions(), d)));
    ClassicalDB seen;
    money::verify(scheme, key, note, w, rng, &seen);
    d = detail::merged(d, seen);
  }
  return d;
}

// `steps` rounds of: synthesize against D_k, verify against the true oracle,
// D_{k+1} = D_k plus the new pairs. Returns D_0 ... D_steps.
inline std::vector<ClassicalDB> update_phase(const Scheme& scheme, const money::KeyPair& key, const Serial& serial, money::World& w,
                                             const ClassicalDB& d0, long steps, Synthesizer& syn, Rng& rng, AttackTranscript& tr) {
  std::vector<ClassicalDB> dbs{d0};
  const auto xs = scheme.query_positions(key, serial);
  const auto& setup = w.setup_positions();
  for (long k = 0; k < steps; ++k) {
    const auto& dk = dbs.back();
    auto out = syn.run(dk, rng);
    UpdateStep st;
    st.db_size = dk.distinct();
    st.fallback = out.fallback;
    st.max_acceptance = out.max_acceptance;
    st.p_sim = out.p_sim;
    st.p_true = money::state_acceptance_probability(scheme, key, serial, out.state, w);
    st.misses_setup = detail::count_missing(xs, setup, dk) > 0;
    ClassicalDB seen;
    st.accepted = money::verify_state(scheme, key, serial, out.state, w, rng, &seen);
    auto next = detail::merged(dk, seen);
    tr.telescoped_discoveries += detail::setup_overlap(setup, next) - detail::setup_overlap(setup, dk);
    tr.updates.push_back(st);
    dbs.push_back(std::move(next));
  }
  return dbs;
}

// Two independent syntheses against D_j.
inline std::pair<DensityOp, DensityOp> synthesize_phase(const ClassicalDB& dj, Synthesizer& syn, Rng& rng) {
  auto a = syn.run(dj, rng);
  auto b = syn.run(dj, rng);
  return {std::move(a.state), std::move(b.state)};
}

// Full experiment: fresh oracle, one honest note, the three phases, then both
// forgeries verified against the true oracle.
inline AttackTranscript run_attack(const Scheme& scheme, const AttackConfig& cfg, Rng& rng) {
  const auto& prof = scheme.profile();
  cfg.validate(prof);
  AttackTranscript tr;
  tr.scheme = prof.name;
  tr.variant = cfg.variant;
  tr.seed = rng.seed();
  tr.epsilon = cfg.epsilon;
  tr.t_max = cfg.t_max;
  tr.n_updates = cfg.n_updates;

  money::World w = money::make_world(scheme, rng);
  const auto key = scheme.key_gen(w, rng);
  const auto note = scheme.mint(key, w, rng, "note");
  tr.serial = note.serial;
  tr.setup_size = w.setup_positions().size();

  // The quantum variant fixes j before the test phase and runs j updates.
  if (cfg.variant == Variant::quantum_mint) tr.j_drawn = static_cast<long>(rng.below(static_cast<std::uint64_t>(cfg.n_updates)));

  const ClassicalDB d0 = test_phase(scheme, key, note, w, cfg, rng, tr);
  tr.bad_query_after_test = detail::count_missing(scheme.query_positions(key, note.serial), w.setup_positions(), d0) > 0;
  tr.note_p_true = money::acceptance_probability(scheme, key, note, w);
  const DensityOp note_rho = w.reduced(note.registers);

  Synthesizer syn(scheme, key, note.serial, cfg.synth);
  const long steps = cfg.variant == Variant::quantum_mint ? tr.j_drawn : cfg.n_updates;
  tr.databases = update_phase(scheme, key, note.serial, w, d0, steps, syn, rng, tr);
  if (cfg.variant == Variant::classical_mint) tr.j_drawn = static_cast<long>(rng.below(static_cast<std::uint64_t>(cfg.n_updates)));

  const ClassicalDB& dj = tr.databases.at(static_cast<std::size_t>(tr.j_drawn));
  tr.note_p_sim = acceptance(syn.spec(dj), note_rho);
  auto [phi1, phi2] = synthesize_phase(dj, syn, rng);
  const DensityOp* pair[] = {&phi1, &phi2};
  tr.success_probability = money::states_acceptance_probability(scheme, key, note.serial, pair, w);
  tr.accept1 = money::verify_state(scheme, key, note.serial, phi1, w, rng);
  tr.accept2 = money::verify_state(scheme, key, note.serial, phi2, w, rng);
  tr.success = tr.accept1 && tr.accept2;
  tr.forged1 = std::move(phi1);
  tr.forged2 = std::move(phi2);
  return tr;
}

// "size x count" runs joined by ';', e.g. "0x1;4x200".
inline std::string db_sizes_rle(const std::vector<ClassicalDB>& dbs) {
  std::ostringstream os;
  std::size_t i = 0;
  bool first = true;
  while (i < dbs.size()) {
    std::size_t j = i;
    while (j < dbs.size() && dbs[j].distinct() == dbs[i].distinct()) ++j;
    if (!first) os << ';';
    os << dbs[i].distinct() << 'x' << (j - i);
    first = false;
    i = j;
  }
  return os.str();
}

inline nlohmann::json density_to_json(const DensityOp& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < rho.dim(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < rho.dim(); ++c) row.push_back({rho.matrix()(r, c).real(), rho.matrix()(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json transcript_to_json(const AttackTranscript& tr) {
  nlohmann::json dbs = nlohmann::json::array();
  for (const auto& d : tr.databases) {
    nlohmann::json e = nlohmann::json::array();
    for (const auto& [x, z] : d.entries) e.push_back({x, z});
    dbs.push_back(e);
  }
  nlohmann::json ups = nlohmann::json::array();
  for (const auto& u : tr.updates)
    ups.push_back({{"db_size", u.db_size}, {"accepted", u.accepted}, {"p_true", u.p_true}, {"p_sim", u.p_sim},
                   {"max_acceptance", u.max_acceptance}, {"misses_setup", u.misses_setup}, {"fallback", u.fallback}});
  nlohmann::json j = {{"scheme", tr.scheme},
                      {"variant", to_string(tr.variant)},
                      {"seed", tr.seed},
                      {"epsilon", tr.epsilon},
                      {"t_max", tr.t_max},
                      {"n_updates", tr.n_updates},
                      {"t_drawn", tr.t_drawn},
                      {"j_drawn", tr.j_drawn},
                      {"serial", tr.serial},
                      {"databases", dbs},
                      {"updates", ups},
                      {"accept1", tr.accept1},
                      {"accept2", tr.accept2},
                      {"success", tr.success},
                      {"success_probability", tr.success_probability},
                      {"bad_query_counts", tr.bad_query_counts},
                      {"bad_query_after_test", tr.bad_query_after_test},
                      {"setup_size", tr.setup_size},
                      {"telescoped_discoveries", tr.telescoped_discoveries},
                      {"note_p_true", tr.note_p_true},
                      {"note_p_sim", tr.note_p_sim}};
  if (tr.forged1) j["forged1"] = density_to_json(*tr.forged1);
  if (tr.forged2) j["forged2"] = density_to_json(*tr.forged2);
  return j;
}

}  // namespace qmsep::attack
