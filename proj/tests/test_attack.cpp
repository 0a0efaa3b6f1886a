#include <gtest/gtest.h>

#include "qmsep/attack.hpp"

using namespace qmsep;
using namespace qmsep::attack;

namespace {

struct Setup {
  std::unique_ptr<money::Scheme> scheme;
  money::World world;
  money::KeyPair key;
  money::Banknote note;
};

Setup make(const std::string& name, Rng& rng) {
  auto [l, m] = money::default_size(name);
  auto s = money::make_scheme(name, l, m);
  auto w = money::make_world(*s, rng);
  auto key = s->key_gen(w, rng);
  auto note = s->mint(key, w, rng, "n");
  return {std::move(s), std::move(w), key, note};
}

ClassicalDB full_db(const Setup& st) {
  ClassicalDB d;
  for (auto x : st.scheme->query_positions(st.key, st.note.serial)) d = d.appended(x, (*st.world.table())(x) ? 1 : 0);
  return d;
}

}  // namespace

TEST(Formulas, AnalyticParameters) {
  // 100 / (1 - sqrt(0.02))^2 = 135.66 per query at eps = 0.01, delta_r = 0.99.
  EXPECT_EQ(analytic_n_updates(Variant::classical_mint, 1, 1, 0.01, 0.99), 136);
  EXPECT_EQ(analytic_t_max(Variant::classical_mint, 4, 4, 0.1), 40);
  EXPECT_EQ(analytic_t_max(Variant::quantum_mint, 3, 4, 0.1), 43200);
  // 1.8 (1 - sqrt(0.02))^2 - 1
  EXPECT_NEAR(success_bound(0.01, 0.99), 0.326883, 1e-6);
  EXPECT_GE(success_bound(0.01, 0.99), 0.1);
  EXPECT_LT(success_bound(0.1, 0.99), 0.0);
}

TEST(SimVerifier, FullCoverageMatchesTrueOracle) {
  Rng rng(1);
  for (auto name : {"hash-tag", "conjugate"}) {
    auto st = make(name, rng);
    const auto spec = build_sim_verifier(*st.scheme, st.key, st.note.serial, full_db(st));
    EXPECT_EQ(spec.k, 1);
    const int m = st.scheme->profile().m;
    for (int rep = 0; rep < 5; ++rep) {
      const Vector v = random_vector(Eigen::Index{1} << m, rng);
      const DensityOp rho(witness_layout(m), v * v.adjoint());
      EXPECT_NEAR(acceptance(spec, rho), money::state_acceptance_probability(*st.scheme, st.key, st.note.serial, rho, st.world), 1e-10);
    }
  }
}

TEST(SimVerifier, EmptyDatabaseOnHashTag) {
  Rng rng(2);
  auto st = make("hash-tag", rng);
  const auto spec = build_sim_verifier(*st.scheme, st.key, st.note.serial, {});
  EXPECT_EQ(spec.k, 3);
  // Each of the m = 2 tag bits matches a fresh answer with probability 1/2.
  EXPECT_NEAR(acceptance(spec, st.world.reduced(st.note.registers)), 0.25, 1e-12);
}

TEST(SimVerifier, InconsistentDatabase) {
  Rng rng(3);
  auto st = make("hash-tag", rng);
  ClassicalDB bad;
  bad.entries = {{0, 0}, {0, 1}};
  try {
    build_sim_verifier(*st.scheme, st.key, st.note.serial, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_database);
  }
}

TEST(TestPhase, ZeroDrawLeavesEverythingAlone) {
  Rng rng(4);
  auto st = make("hash-tag", rng);
  auto cfg = AttackConfig::defaults(st.scheme->profile(), 0.1, 1.0);
  cfg.t_max = 1;
  AttackTranscript tr;
  const auto d = test_phase(*st.scheme, st.key, st.note, st.world, cfg, rng, tr);
  EXPECT_EQ(tr.t_drawn, 0);
  EXPECT_TRUE(d.entries.empty());
  EXPECT_TRUE(tr.bad_query_counts.empty());
}

TEST(TestPhase, HashTagLearnsAllTagPositions) {
  Rng rng(5);
  auto st = make("hash-tag", rng);
  auto cfg = AttackConfig::defaults(st.scheme->profile(), 0.1, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    AttackTranscript tr;
    const auto d = test_phase(*st.scheme, st.key, st.note, st.world, cfg, rng, tr);
    if (tr.t_drawn == 0) continue;
    for (auto x : st.scheme->query_positions(st.key, st.note.serial)) EXPECT_TRUE(d.contains(x));
  }
}

TEST(UpdatePhase, HashTagCoversTagsAfterOneStep) {
  Rng rng(6);
  auto st = make("hash-tag", rng);
  auto cfg = AttackConfig::defaults(st.scheme->profile(), 0.1, 1.0);
  Synthesizer syn(*st.scheme, st.key, st.note.serial, cfg.synth);
  AttackTranscript tr;
  const auto dbs = update_phase(*st.scheme, st.key, st.note.serial, st.world, {}, 5, syn, rng, tr);
  ASSERT_EQ(dbs.size(), 6U);
  EXPECT_EQ(dbs[0].distinct(), 0U);
  for (std::size_t k = 1; k < dbs.size(); ++k) EXPECT_EQ(dbs[k].distinct(), 2U);
  for (std::size_t k = 1; k < tr.updates.size(); ++k) {
    EXPECT_NEAR(tr.updates[k].p_true, 1.0, 1e-12);
    EXPECT_TRUE(tr.updates[k].accepted);
  }
  EXPECT_EQ(tr.telescoped_discoveries, 2U);
}

TEST(SynthesizePhase, SingleUpdateForcesJZero) {
  Rng rng(7);
  auto [l, m] = money::default_size("conjugate");
  const auto s = money::make_scheme("conjugate", l, m);
  auto cfg = AttackConfig::defaults(s->profile(), 0.1, 1.0);
  cfg.n_updates = 1;
  cfg.scaled = true;
  for (int rep = 0; rep < 5; ++rep) EXPECT_EQ(run_attack(*s, cfg, rng).j_drawn, 0);
}

TEST(Transcript, DatabasesGrowMonotonically) {
  for (auto name : {"hash-tag", "conjugate", "counterexample"}) {
    auto [l, m] = money::default_size(name);
    const auto s = money::make_scheme(name, l, m);
    auto cfg = AttackConfig::defaults(s->profile(), 0.1, 1.0);
    cfg.scaled = true;
    cfg.n_updates = std::min<long>(cfg.n_updates, 20);
    cfg.t_max = std::min<long>(cfg.t_max, 20);
    for (int seed = 0; seed < 5; ++seed) {
      Rng rng(100 + seed);
      const auto tr = run_attack(*s, cfg, rng);
      for (std::size_t k = 1; k < tr.databases.size(); ++k)
        for (const auto& [x, z] : tr.databases[k - 1].entries) EXPECT_EQ(tr.databases[k].lookup(x), std::optional<std::uint8_t>(z));
      EXPECT_LE(tr.telescoped_discoveries, static_cast<std::size_t>(s->profile().q_prime));
      // The simulated verifier can only be wrong when it misses a setup query.
      for (const auto& u : tr.updates) EXPECT_LE(std::abs(u.p_true - u.p_sim), u.misses_setup ? 1.0 : 1e-9);
    }
  }
}

TEST(Transcript, SameSeedSameTranscript) {
  auto [l, m] = money::default_size("conjugate");
  const auto s = money::make_scheme("conjugate", l, m);
  auto cfg = AttackConfig::defaults(s->profile(), 0.1, 1.0);
  Rng a(9), b(9);
  EXPECT_EQ(transcript_to_json(run_attack(*s, cfg, a)).dump(), transcript_to_json(run_attack(*s, cfg, b)).dump());
}

TEST(Transcript, RunLengthSizes) {
  std::vector<ClassicalDB> dbs(4);
  dbs[1] = dbs[1].appended(0, 1);
  dbs[2] = dbs[1];
  dbs[3] = dbs[2].appended(2, 0);
  EXPECT_EQ(db_sizes_rle(dbs), "0x1;1x2;2x1");
}

TEST(Config, VariantMustMatchScheme) {
  auto [l, m] = money::default_size("counterexample");
  const auto s = money::make_scheme("counterexample", l, m);
  auto cfg = AttackConfig::defaults(s->profile(), 0.1, 1.0);
  EXPECT_EQ(cfg.variant, Variant::quantum_mint);
  cfg.variant = Variant::classical_mint;
  EXPECT_THROW(cfg.validate(s->profile()), Error);
}
