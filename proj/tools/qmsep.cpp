// qmsep: synthesizer reports, forgery experiments and oracle self-checks.
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmsep/harness.hpp"

using namespace qmsep;
using nlohmann::json;

namespace {

// Fields in the JSON config apply first; flags given on the command line win.
template <class T>
void from_config(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

template <class T>
void from_flag(const CLI::Option* opt, const T& value, T& field) {
  if (opt->count() > 0) field = value;
}

json load_config(const std::string& path, const char* section) {
  if (path.empty()) return json::object();
  json all;
  try {
    all = json::parse(harness::read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, path + ": " + e.what());
  }
  json merged = json::object();
  for (const char* shared : {"trials", "seed", "scaled", "workers"})
    if (all.contains(shared)) merged[shared] = all[shared];
  if (all.contains(section)) merged.update(all[section]);
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmsep: quantum money forgery simulator"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override it");

  // synth
  auto* synth = app.add_subcommand("synth", "Witness synthesis report for a verifier circuit");
  harness::SynthConfig sc;
  std::string s_backend = "eigen";
  auto* s_ver = synth->add_option("--verifier", sc.verifier, "Verifier circuit JSON");
  auto* s_a = synth->add_option("--a", sc.a, "Guarantee a");
  auto* s_b = synth->add_option("--b", sc.b, "Threshold b");
  auto* s_be = synth->add_option("--backend", s_backend, "trial|eigen");
  auto* s_tr = synth->add_option("--trials", sc.trials, "Trial repetitions");
  auto* s_seed = synth->add_option("--seed", sc.seed, "Base seed");
  auto* s_out = synth->add_option("--out", sc.out, "Report path (default stdout)");
  auto* s_n = synth->add_option("--n-alternations", sc.n_alternations, "Override N (needs --scaled)");
  auto* s_t = synth->add_option("--t-trials", sc.t_trials, "Override T (needs --scaled)");
  auto* s_sc = synth->add_flag("--scaled", sc.scaled, "Allow parameter overrides");
  auto* s_w = synth->add_option("--workers", sc.workers, "Worker threads");

  // attack
  auto* atk = app.add_subcommand("attack", "Run forgery experiments");
  harness::AttackCmdConfig ac;
  std::string a_backend = "eigen";
  auto* a_scheme = atk->add_option("--scheme", ac.scheme, "hash-tag|conjugate|counterexample");
  auto* a_l = atk->add_option("--l", ac.l, "Oracle input bits");
  auto* a_m = atk->add_option("--m", ac.m, "Note size parameter");
  auto* a_eps = atk->add_option("--eps", ac.eps, "epsilon");
  auto* a_dr = atk->add_option("--delta-r", ac.delta_r, "Reusability (measured when omitted)");
  auto* a_tr = atk->add_option("--trials", ac.trials, "Independent runs");
  auto* a_seed = atk->add_option("--seed", ac.seed, "Base seed; run i uses seed + i");
  auto* a_out = atk->add_option("--out", ac.out, "CSV path (default stdout)");
  auto* a_sum = atk->add_option("--summary", ac.summary, "Summary JSON path");
  auto* a_trs = atk->add_option("--transcripts", ac.transcripts, "Transcript JSON lines path");
  auto* a_tm = atk->add_option("--t-max", ac.t_max, "Test-phase range (needs --scaled)");
  auto* a_nu = atk->add_option("--n-updates", ac.n_updates, "Update count N (needs --scaled)");
  auto* a_sc = atk->add_flag("--scaled", ac.scaled, "Allow parameter overrides");
  auto* a_be = atk->add_option("--backend", a_backend, "trial|eigen");
  auto* a_a = atk->add_option("--a", ac.a, "Synthesizer guarantee a");
  auto* a_b = atk->add_option("--b", ac.b, "Synthesizer threshold b");
  auto* a_w = atk->add_option("--workers", ac.workers, "Worker threads");

  // oracle-check
  auto* orc = app.add_subcommand("oracle-check", "Oracle representation self-checks");
  harness::OracleCheckConfig oc;
  auto* o_l = orc->add_option("--l", oc.l, "Oracle input bits (1..3)");
  auto* o_q = orc->add_option("--queries", oc.queries, "Queries per random circuit");
  auto* o_tr = orc->add_option("--trials", oc.trials, "Random instances per check");
  auto* o_seed = orc->add_option("--seed", oc.seed, "Seed");
  auto* o_s = orc->add_option("--samples", oc.samples, "Sampled-oracle Monte Carlo size");
  auto* o_out = orc->add_option("--out", oc.out, "Report path (default stdout)");
  std::string fault;
  orc->add_option("--inject-fault", fault, "")->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      harness::SynthConfig cfg;
      const json j = load_config(config_path, "synth");
      std::string backend = "eigen";
      from_config(j, "verifier", cfg.verifier);
      from_config(j, "a", cfg.a);
      from_config(j, "b", cfg.b);
      from_config(j, "backend", backend);
      from_config(j, "trials", cfg.trials);
      from_config(j, "seed", cfg.seed);
      from_config(j, "out", cfg.out);
      from_config(j, "n_alternations", cfg.n_alternations);
      from_config(j, "t_trials", cfg.t_trials);
      from_config(j, "scaled", cfg.scaled);
      from_config(j, "workers", cfg.workers);
      from_flag(s_ver, sc.verifier, cfg.verifier);
      from_flag(s_a, sc.a, cfg.a);
      from_flag(s_b, sc.b, cfg.b);
      from_flag(s_be, s_backend, backend);
      from_flag(s_tr, sc.trials, cfg.trials);
      from_flag(s_seed, sc.seed, cfg.seed);
      from_flag(s_out, sc.out, cfg.out);
      from_flag(s_n, sc.n_alternations, cfg.n_alternations);
      from_flag(s_t, sc.t_trials, cfg.t_trials);
      from_flag(s_sc, sc.scaled, cfg.scaled);
      from_flag(s_w, sc.workers, cfg.workers);
      cfg.backend = backend_from_string(backend);
      if (cfg.verifier.empty()) throw Error(ErrorKind::invalid_argument, "--verifier is required");
      harness::cmd_synth(cfg, std::cout);
      return 0;
    }
    if (atk->parsed()) {
      harness::AttackCmdConfig cfg;
      const json j = load_config(config_path, "attack");
      std::string backend = "eigen";
      from_config(j, "scheme", cfg.scheme);
      from_config(j, "l", cfg.l);
      from_config(j, "m", cfg.m);
      from_config(j, "eps", cfg.eps);
      from_config(j, "delta_r", cfg.delta_r);
      from_config(j, "trials", cfg.trials);
      from_config(j, "seed", cfg.seed);
      from_config(j, "out", cfg.out);
      from_config(j, "summary", cfg.summary);
      from_config(j, "transcripts", cfg.transcripts);
      from_config(j, "t_max", cfg.t_max);
      from_config(j, "n_updates", cfg.n_updates);
      from_config(j, "scaled", cfg.scaled);
      from_config(j, "backend", backend);
      from_config(j, "a", cfg.a);
      from_config(j, "b", cfg.b);
      from_config(j, "workers", cfg.workers);
      from_flag(a_scheme, ac.scheme, cfg.scheme);
      from_flag(a_l, ac.l, cfg.l);
      from_flag(a_m, ac.m, cfg.m);
      from_flag(a_eps, ac.eps, cfg.eps);
      from_flag(a_dr, ac.delta_r, cfg.delta_r);
      from_flag(a_tr, ac.trials, cfg.trials);
      from_flag(a_seed, ac.seed, cfg.seed);
      from_flag(a_out, ac.out, cfg.out);
      from_flag(a_sum, ac.summary, cfg.summary);
      from_flag(a_trs, ac.transcripts, cfg.transcripts);
      from_flag(a_tm, ac.t_max, cfg.t_max);
      from_flag(a_nu, ac.n_updates, cfg.n_updates);
      from_flag(a_sc, ac.scaled, cfg.scaled);
      from_flag(a_be, a_backend, backend);
      from_flag(a_a, ac.a, cfg.a);
      from_flag(a_b, ac.b, cfg.b);
      from_flag(a_w, ac.workers, cfg.workers);
      cfg.backend = backend_from_string(backend);
      harness::cmd_attack(cfg, std::cout);
      return 0;
    }
    if (orc->parsed()) {
      harness::OracleCheckConfig cfg;
      const json j = load_config(config_path, "oracle_check");
      from_config(j, "l", cfg.l);
      from_config(j, "queries", cfg.queries);
      from_config(j, "trials", cfg.trials);
      from_config(j, "seed", cfg.seed);
      from_config(j, "samples", cfg.samples);
      from_config(j, "out", cfg.out);
      from_flag(o_l, oc.l, cfg.l);
      from_flag(o_q, oc.queries, cfg.queries);
      from_flag(o_tr, oc.trials, cfg.trials);
      from_flag(o_seed, oc.seed, cfg.seed);
      from_flag(o_s, oc.samples, cfg.samples);
      from_flag(o_out, oc.out, cfg.out);
      if (!fault.empty()) {
        if (fault != "skip-df-deletion") throw Error(ErrorKind::invalid_argument, "unknown fault '" + fault + "'");
        cfg.skip_df_deletion = true;
      }
      bool ok = false;
      harness::cmd_oracle_check(cfg, std::cout, ok);
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "qmsep: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
