#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qmsep/attack.hpp"
#include "qmsep/oracle_checks.hpp"
#include "qmsep/synth.hpp"

namespace qmsep::harness {

inline constexpr const char* kCsvHeader = "# qmsep-csv v1";

struct SummaryStats {
  double mean = 0.0;
  double std_error = 0.0;
  long count = 0;
  // Wilson 95% interval; only meaningful for Bernoulli outcomes.
  double lo = 0.0;
  double hi = 1.0;
};

inline std::pair<double, double> wilson_interval(long successes, long n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline SummaryStats bernoulli_summary(long successes, long n) {
  SummaryStats s;
  s.count = n;
  s.mean = n > 0 ? static_cast<double>(successes) / n : 0.0;
  s.std_error = n > 0 ? std::sqrt(s.mean * (1.0 - s.mean) / n) : 0.0;
  std::tie(s.lo, s.hi) = wilson_interval(successes, n);
  return s;
}

inline SummaryStats summarize(const std::vector<double>& xs) {
  SummaryStats s;
  s.count = static_cast<long>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  if (xs.size() > 1) var /= static_cast<double>(xs.size() - 1);
  s.std_error = std::sqrt(var / xs.size());
  s.lo = s.mean - 1.959963984540054 * s.std_error;
  s.hi = s.mean + 1.959963984540054 * s.std_error;
  return s;
}

inline nlohmann::json to_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"std_error", s.std_error}, {"count", s.count}, {"wilson95", {s.lo, s.hi}}};
}

inline int default_workers() { return std::max(1U, std::thread::hardware_concurrency()); }

// Runs f(0) ... f(n-1) on a pool of threads; results come back in index order.
template <class F>
auto parallel_map(long n, int workers, F f) -> std::vector<decltype(f(0L))> {
  using R = decltype(f(0L));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(std::max(0L, n)));
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (long i = next++; i < n; i = next++) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(f(i));
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  const int w = static_cast<int>(std::clamp<long>(workers, 1, std::max(1L, n)));
  std::vector<std::thread> pool;
  for (int i = 1; i < w; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io_error, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorKind::io_error, "write failed for '" + path + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io_error, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") fallback << text;
  else write_text(path, text);
}

// ---- synth -----------------------------------------------------------------

struct SynthConfig {
  std::string verifier;
  double a = 0.5;
  double b = 0.9;
  Backend backend = Backend::eigen;
  long trials = 200;
  std::uint64_t seed = 1;
  std::string out;
  // Overrides of the alternation count and trial budget; require `scaled`.
  long n_alternations = 0;
  long t_trials = 0;
  bool scaled = false;
  int workers = default_workers();
};

inline nlohmann::json cmd_synth(const SynthConfig& cfg, std::ostream& out) {
  if (cfg.trials < 1) throw Error(ErrorKind::invalid_params, "trials must be >= 1");
  const VerifierSpec spec = verifier_from_json_text(read_text(cfg.verifier));
  if ((cfg.n_alternations > 0 || cfg.t_trials > 0) && !cfg.scaled)
    throw Error(ErrorKind::invalid_params, "overriding N or T needs --scaled");
  const auto analytic = SynthesisParams::defaults(spec.m, cfg.a, cfg.b);
  SynthesisParams used = analytic;
  if (cfg.n_alternations > 0) used.n_alternations = cfg.n_alternations;
  if (cfg.t_trials > 0) used.t_trials = cfg.t_trials;
  used.validate();

  const auto best = max_acceptance(spec);
  auto eigen_params = used;
  eigen_params.backend = Backend::eigen;
  Rng er(cfg.seed);
  const auto eigen_out = synthesize(spec, eigen_params, er);

  auto trial_params = used;
  trial_params.backend = Backend::trial;
  struct Row {
    bool trial_success;
    double synth_acceptance;
    bool fallback;
  };
  const auto rows = parallel_map(cfg.trials, cfg.workers, [&](long i) {
    Rng r(cfg.seed + static_cast<std::uint64_t>(i));
    const bool ok = run_trial(spec, trial_params, r).success;
    Rng s = r.split(1);
    const auto res = synthesize(spec, trial_params, s);
    return Row{ok, acceptance(spec, res.state), res.fallback};
  });
  long successes = 0, fallbacks = 0;
  std::vector<double> accs;
  for (const auto& r : rows) {
    successes += r.trial_success;
    fallbacks += r.fallback;
    accs.push_back(r.synth_acceptance);
  }
  const double floor = std::ldexp(1.0, -(spec.m + 2));
  nlohmann::json rep = {
      {"m", spec.m},
      {"k", spec.k},
      {"max_acceptance", best.value},
      {"a", cfg.a},
      {"b", cfg.b},
      {"backend", to_string(cfg.backend)},
      {"analytic", {{"n_alternations", analytic.n_alternations}, {"t_trials", analytic.t_trials}}},
      {"used", {{"n_alternations", used.n_alternations}, {"t_trials", used.t_trials}, {"scaled", cfg.scaled}}},
      {"eigen", {{"acceptance", acceptance(spec, eigen_out.state)}, {"below_threshold", best.value < cfg.b}}},
      {"trial",
       {{"success_rate", to_json(bernoulli_summary(successes, cfg.trials))},
        {"success_floor", floor},
        {"synth_acceptance", to_json(summarize(accs))},
        {"fallback_rate", to_json(bernoulli_summary(fallbacks, cfg.trials))},
        {"fallback", fallbacks == cfg.trials}}},
      {"trials", cfg.trials},
      {"seed", cfg.seed}};
  emit(cfg.out, rep.dump(2) + "\n", out);
  return rep;
}

// ---- attack ----------------------------------------------------------------

struct AttackCmdConfig {
  std::string scheme = "hash-tag";
  int l = 0;
  int m = 0;
  double eps = 0.1;
  // Negative: measure it on the scheme.
  double delta_r = -1.0;
  long trials = 20;
  std::uint64_t seed = 1;
  std::string out;
  std::string summary;
  std::string transcripts;
  long t_max = 0;
  long n_updates = 0;
  bool scaled = false;
  Backend backend = Backend::eigen;
  double a = 0.5;
  double b = 0.9;
  int workers = default_workers();
  int reuse_notes = 100;
  int reuse_rounds = 20;
};

struct AttackResult {
  std::string csv;
  nlohmann::json summary;
  std::vector<attack::AttackTranscript> transcripts;
};

inline AttackResult run_attack_experiment(const AttackCmdConfig& cfg) {
  if (cfg.trials < 1) throw Error(ErrorKind::invalid_params, "trials must be >= 1");
  auto [dl, dm] = money::default_size(cfg.scheme);
  const auto scheme = money::make_scheme(cfg.scheme, cfg.l > 0 ? cfg.l : dl, cfg.m > 0 ? cfg.m : dm);
  const auto& prof = scheme->profile();

  double delta_r = cfg.delta_r;
  bool measured = false;
  if (delta_r < 0.0) {
    Rng rr = Rng(cfg.seed).split(0x7265757365ULL);
    delta_r = money::estimate_reusability(*scheme, cfg.reuse_notes, cfg.reuse_rounds, rr);
    measured = true;
  }
  const auto analytic = attack::AttackConfig::defaults(prof, cfg.eps, delta_r);
  auto used = analytic;
  if ((cfg.t_max > 0 || cfg.n_updates > 0) && !cfg.scaled) throw Error(ErrorKind::invalid_params, "overriding t_max or N needs --scaled");
  if (cfg.t_max > 0) used.t_max = cfg.t_max;
  if (cfg.n_updates > 0) used.n_updates = cfg.n_updates;
  used.scaled = cfg.scaled;
  used.synth = SynthesisParams::defaults(prof.m, cfg.a, cfg.b, cfg.backend);
  used.validate(prof);

  auto trs = parallel_map(cfg.trials, cfg.workers, [&](long i) {
    Rng r(cfg.seed + static_cast<std::uint64_t>(i));
    return attack::run_attack(*scheme, used, r);
  });

  std::ostringstream csv;
  csv << kCsvHeader << "\n";
  csv << "# scaled=" << (cfg.scaled ? "true" : "false") << " analytic_t_max=" << analytic.t_max << " analytic_n_updates=" << analytic.n_updates << "\n";
  csv << "scheme,variant,seed,eps,t_max,N,t_drawn,j_drawn,accept1,accept2,success,db_sizes\n";
  long succ = 0, bad = 0;
  std::size_t tele_max = 0;
  bool tele_ok = true;
  std::vector<double> pexact, note_gap;
  for (const auto& t : trs) {
    csv << t.scheme << ',' << attack::to_string(t.variant) << ',' << t.seed << ',' << fmt_double(t.epsilon) << ',' << t.t_max << ',' << t.n_updates << ','
        << t.t_drawn << ',' << t.j_drawn << ',' << int(t.accept1) << ',' << int(t.accept2) << ',' << int(t.success) << ','
        << attack::db_sizes_rle(t.databases) << "\n";
    succ += t.success;
    bad += t.bad_query_after_test;
    tele_max = std::max(tele_max, t.telescoped_discoveries);
    tele_ok = tele_ok && t.telescoped_discoveries <= static_cast<std::size_t>(prof.q_prime);
    pexact.push_back(t.success_probability);
    note_gap.push_back(std::abs(t.note_p_true - t.note_p_sim));
  }

  const auto ss = bernoulli_summary(succ, cfg.trials);
  nlohmann::json summary = {
      {"scheme", prof.name},
      {"variant", attack::to_string(used.variant)},
      {"l", prof.l},
      {"m", prof.m},
      {"q", prof.q},
      {"q_prime", prof.q_prime},
      {"eps", cfg.eps},
      {"delta_r", delta_r},
      {"delta_r_measured", measured},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"scaled", cfg.scaled},
      {"backend", to_string(cfg.backend)},
      {"analytic", {{"t_max", analytic.t_max}, {"n_updates", analytic.n_updates}, {"a", 0.99 * attack::threshold_b(cfg.eps, delta_r)}, {"b", attack::threshold_b(cfg.eps, delta_r)}}},
      {"used", {{"t_max", used.t_max}, {"n_updates", used.n_updates}, {"a", cfg.a}, {"b", cfg.b}}},
      {"success", to_json(ss)},
      {"success_probability_exact", to_json(summarize(pexact))},
      {"success_bound", attack::success_bound(cfg.eps, delta_r)},
      {"bad_query_rate", to_json(bernoulli_summary(bad, cfg.trials))},
      {"telescoped_max", tele_max},
      {"telescoped_within_q_prime", tele_ok},
      {"note_sim_gap", to_json(summarize(note_gap))}};
  if (used.variant == attack::Variant::quantum_mint)
    summary["note_sim_gap_bound"] = 6.0 * std::sqrt(static_cast<double>(prof.q) * prof.q_prime / static_cast<double>(used.t_max));
  return {csv.str(), summary, std::move(trs)};
}

inline nlohmann::json cmd_attack(const AttackCmdConfig& cfg, std::ostream& out) {
  auto res = run_attack_experiment(cfg);
  emit(cfg.out, res.csv, out);
  if (!cfg.transcripts.empty()) {
    std::ostringstream jl;
    for (const auto& t : res.transcripts) jl << attack::transcript_to_json(t).dump() << "\n";
    write_text(cfg.transcripts, jl.str());
  }
  if (!cfg.summary.empty()) write_text(cfg.summary, res.summary.dump(2) + "\n");
  else if (!cfg.out.empty() && cfg.out != "-") out << res.summary.dump(2) << "\n";
  return res.summary;
}

// ---- oracle-check ----------------------------------------------------------

struct OracleCheckConfig {
  int l = 2;
  int queries = 6;
  long trials = 100;
  std::uint64_t seed = 1;
  int samples = 10000;
  std::string out;
  // Test hook: the recorded-query check skips the D_F deletion.
  bool skip_df_deletion = false;
};

struct OracleCheckThresholds {
  double exact = 1e-9;
  double tv = 0.03;
};

inline nlohmann::json cmd_oracle_check(const OracleCheckConfig& cfg, std::ostream& out, bool& all_ok) {
  if (cfg.l < 1 || cfg.l > 3) throw Error(ErrorKind::invalid_params, "exact checks need 1 <= l <= 3");
  if (cfg.trials < 1 || cfg.queries < 1) throw Error(ErrorKind::invalid_params, "trials and queries must be >= 1");
  const OracleCheckThresholds th;
  Rng rng(cfg.seed);

  const auto id = oracle::comp_decomp_identity(cfg.l, std::min(cfg.queries, 1 << cfg.l));
  const bool id_ok = id.comp_decomp <= th.exact;

  double td_max = 0.0, tv_max = 0.0;
  const long circuits = std::max(1L, std::min(cfg.trials, 5L));
  for (long i = 0; i < circuits; ++i) {
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    const auto c = oracle::random_circuit(cfg.l, cfg.queries, std::min(2, cfg.queries), r);
    const auto rep = oracle::representation_equivalence(c, cfg.samples, r);
    td_max = std::max(td_max, rep.td_views);
    tv_max = std::max(tv_max, rep.tv_sampled);
  }
  const bool eq_ok = td_max <= th.exact && tv_max <= th.tv;

  long a_ok = 0, b_ok = 0;
  double a_worst_dec = 0.0;
  for (long i = 0; i < cfg.trials; ++i) {
    Rng ra = rng.split(1000 + static_cast<std::uint64_t>(i));
    const auto ar = oracle::recorded_query_check(cfg.l, ra, cfg.skip_df_deletion);
    a_ok += ar.ok();
    a_worst_dec = std::max(a_worst_dec, std::abs(ar.alpha - ar.decrement));
    Rng rb = rng.split(5000 + static_cast<std::uint64_t>(i));
    b_ok += oracle::interposed_query_check(cfg.l, rb).ok();
  }
  all_ok = id_ok && eq_ok && a_ok == cfg.trials && b_ok == cfg.trials;
  nlohmann::json rep = {{"l", cfg.l},
                        {"queries", cfg.queries},
                        {"trials", cfg.trials},
                        {"seed", cfg.seed},
                        {"comp_decomp", {{"max_error", id.comp_decomp}, {"dim", id.compressed_dim}, {"ok", id_ok}}},
                        {"equivalence", {{"circuits", circuits}, {"td_views_max", td_max}, {"tv_sampled_max", tv_max}, {"samples", cfg.samples}, {"ok", eq_ok}}},
                        {"recorded_query", {{"passed", a_ok}, {"worst_decrement_error", a_worst_dec}, {"ok", a_ok == cfg.trials}}},
                        {"interposed_query", {{"passed", b_ok}, {"ok", b_ok == cfg.trials}}},
                        {"ok", all_ok}};
  emit(cfg.out, rep.dump(2) + "\n", out);
  return rep;
}

}  // namespace qmsep::harness
