#include <gtest/gtest.h>

#include "qmsep/money.hpp"

using namespace qmsep;
using namespace qmsep::money;

TEST(Profiles, QueryCounts) {
  HashTagScheme h(3, 2);
  EXPECT_EQ(h.profile().q, 2);
  EXPECT_EQ(h.profile().q_prime, 2);
  ConjugateScheme c(4, 2);
  EXPECT_EQ(c.profile().q, 4);
  EXPECT_EQ(c.profile().q_prime, 4);
  CounterexampleScheme x(3, 1);
  EXPECT_EQ(x.profile().m, 2);
  EXPECT_EQ(x.profile().q, 3);
  EXPECT_EQ(x.profile().q_prime, 4);
  EXPECT_EQ(x.profile().mint_query_mode, QueryMode::quantum);
  EXPECT_THROW(make_scheme("nope", 3, 2), Error);
  EXPECT_THROW(HashTagScheme(1, 2), Error);
}

TEST(HashTag, NoteIsTheTagBasisState) {
  Rng rng(1);
  HashTagScheme s(3, 2);
  auto w = make_world(s, rng);
  const auto key = s.key_gen(w, rng);
  const auto note = s.mint(key, w, rng, "n");
  const auto& t = *w.table();
  const std::uint64_t idx = (t(s.position(note.serial[0], 0)) ? 2U : 0U) | (t(s.position(note.serial[0], 1)) ? 1U : 0U);
  EXPECT_NEAR(w.reduced(note.registers).matrix()(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)).real(), 1.0, 1e-12);
  EXPECT_EQ(w.setup_positions().size(), 2U);
  EXPECT_NEAR(acceptance_probability(s, key, note, w), 1.0, 1e-12);
  for (bool b : reuse_loop(s, key, note, w, 5, rng)) EXPECT_TRUE(b);
}

TEST(HashTag, WrongTagIsRejected) {
  Rng rng(2);
  HashTagScheme s(3, 2);
  auto w = make_world(s, rng);
  const auto key = s.key_gen(w, rng);
  const auto note = s.mint(key, w, rng, "n");
  // Flip the first tag bit.
  const Matrix x = kron(gates::pauli_x(), Matrix::Identity(2, 2));
  Matrix rho = w.reduced(note.registers).matrix();
  rho = x * rho * x.adjoint();
  const DensityOp forged(RegisterLayout({{"M", 2}}), rho);
  EXPECT_NEAR(state_acceptance_probability(s, key, note.serial, forged, w), 0.0, 1e-12);
  EXPECT_FALSE(verify_state(s, key, note.serial, forged, w, rng));
}

TEST(Conjugate, QubitsFollowTheOracle) {
  Rng rng(3);
  ConjugateScheme s(4, 2);
  auto w = make_world(s, rng);
  const auto key = s.key_gen(w, rng);
  const auto note = s.mint(key, w, rng, "n");
  const auto& t = *w.table();
  for (int i = 0; i < 2; ++i) {
    Vector v = Vector::Zero(2);
    v[t(s.position(note.serial[0], i, 1)) ? 1 : 0] = 1.0;
    if (t(s.position(note.serial[0], i, 0))) v = gates::hadamard() * v;
    const std::vector<std::string> r{note.registers[static_cast<std::size_t>(i)]};
    EXPECT_LT((w.reduced(r).matrix() - v * v.adjoint()).norm(), 1e-12);
  }
  EXPECT_NEAR(acceptance_probability(s, key, note, w), 1.0, 1e-12);
  const auto rho = w.reduced(note.registers);
  EXPECT_NEAR(state_acceptance_probability(s, key, note.serial, rho, w), 1.0, 1e-12);
}

TEST(Counterexample, NeedsPurifiedOracle) {
  Rng rng(4);
  CounterexampleScheme s(3, 1);
  auto sampled = World::sampled(oracle::sample_oracle(3, rng));
  try {
    s.key_gen(sampled, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::wrong_mode);
  }
}

TEST(Counterexample, HonestNoteAcceptedRepeatedly) {
  Rng rng(5);
  CounterexampleScheme s(3, 1);
  auto w = make_world(s, rng);
  ASSERT_EQ(w.mode(), WorldMode::purified);
  const auto key = s.key_gen(w, rng);
  const auto note = s.mint(key, w, rng, "n");
  // Only the table and the note remain.
  EXPECT_EQ(w.state()->qubits(), 8 + 2);
  EXPECT_LT(note.serial[0], 4U);
  EXPECT_NEAR(acceptance_probability(s, key, note, w), 1.0, 1e-9);
  for (bool b : reuse_loop(s, key, note, w, 4, rng)) EXPECT_TRUE(b);
  // Verification queries fixed the tag's table entry.
  EXPECT_TRUE(w.record().contains(note.serial[0]));
}

TEST(PurifiedWorld, ClassicalQueriesAreConsistentAndUniform) {
  Rng rng(6);
  int ones = 0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    auto w = World::purified(2);
    const auto z = w.classical_query(1, rng);
    EXPECT_EQ(w.classical_query(1, rng), z);
    ones += z;
  }
  EXPECT_NEAR(ones / double(n), 0.5, 4 * std::sqrt(0.25 / n));
}

TEST(Reusability, ToySchemesArePerfectlyReusable) {
  Rng rng(7);
  for (auto name : {"hash-tag", "conjugate", "counterexample"}) {
    auto [l, m] = default_size(name);
    const auto s = make_scheme(name, l, m);
    EXPECT_DOUBLE_EQ(estimate_reusability(*s, 10, 5, rng), 1.0) << name;
  }
}

TEST(Json, NoteSerialization) {
  Rng rng(8);
  HashTagScheme s(3, 2);
  auto w = make_world(s, rng);
  const auto note = s.mint(s.key_gen(w, rng), w, rng, "n");
  const auto j = note_to_json(note, w);
  EXPECT_EQ(j["serial"][0].get<std::uint32_t>(), note.serial[0]);
  EXPECT_NEAR(j["purity"].get<double>(), 1.0, 1e-12);
}
