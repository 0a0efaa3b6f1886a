#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmsep/jordan.hpp"
#include "qmsep/synth.hpp"

using namespace qmsep;

namespace {

// m = 1, k = 1, accept bit in K. With flip = true the accept bit is set
// unconditionally.
VerifierSpec constant_verifier(bool flip) {
  const std::vector<int> q1{1};
  const Matrix v = flip ? embed_on_qubits(gates::pauli_x(), 2, q1) : Matrix::Identity(4, 4);
  return VerifierSpec{1, 1, v, 1};
}

// Acceptance by explicit simulation: V (rho (x) |0><0|) V^dagger, then the
// weight on accept-bit 1.
double simulate_acceptance(const VerifierSpec& s, const Matrix& rho) {
  const Eigen::Index dk = Eigen::Index{1} << s.k;
  Matrix k0 = Matrix::Zero(dk, dk);
  k0(0, 0) = 1.0;
  const Matrix out = s.v_hat * kron(rho, k0) * s.v_hat.adjoint();
  const int n = s.m + s.k;
  double p = 0.0;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    if ((static_cast<std::uint64_t>(i) >> (n - 1 - s.ans_index)) & 1U) p += out(i, i).real();
  return p;
}

}  // namespace

TEST(Params, AnalyticDefaults) {
  // (3a+b)/(b-a)^2 (m+2-log2(b-a)) = 79.8; 16b/(b-a)^2 = 90.
  EXPECT_EQ(analytic_alternations(2, 0.5, 0.9), 90);
  EXPECT_EQ(analytic_trial_budget(2, 1.0), 16);
  auto p = SynthesisParams::defaults(2);
  EXPECT_EQ(p.count_threshold(), 126);
  p.a = 0.9;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Synth, AcceptAllAndRejectAll) {
  Rng rng(1);
  const auto yes = constant_verifier(true);
  EXPECT_NEAR(max_acceptance(yes).value, 1.0, 1e-12);
  auto params = SynthesisParams::defaults(1, 0.5, 0.9, Backend::trial);
  const auto r = synthesize(yes, params, rng);
  EXPECT_FALSE(r.fallback);
  EXPECT_NEAR(acceptance(yes, r.state), 1.0, 1e-9);

  const auto no = constant_verifier(false);
  EXPECT_NEAR(max_acceptance(no).value, 0.0, 1e-12);
  const auto f = synthesize(no, params, rng);
  EXPECT_TRUE(f.fallback);
  EXPECT_EQ(f.trials_used, params.t_trials);
}

TEST(Synth, AcceptanceMatchesSimulation) {
  Rng rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    const auto spec = random_verifier(2, 1, rng);
    const auto psi = random_vector(4, rng);
    const Matrix rho = psi * psi.adjoint();
    EXPECT_NEAR(acceptance(spec, DensityOp(witness_layout(2), rho)), simulate_acceptance(spec, rho), 1e-10);
  }
}

TEST(Synth, MaxAcceptanceAgreesWithJordan) {
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto spec = random_verifier(2, static_cast<int>(rng.below(3)), rng);
    const auto pq = build_pq(spec);
    const auto best = max_acceptance(spec);
    EXPECT_NEAR(best.value, max_overlap(jordan_decompose(pq.p1, pq.q1)).p, 1e-9);
    EXPECT_NEAR(acceptance(spec, best.witness), best.value, 1e-9);
  }
}

TEST(Trial, CoherentSuccessMatchesChainOracle) {
  Rng rng(17);
  const auto spec = random_verifier(1, 1, rng);
  SynthesisParams params{0.5, 0.9, 3, 4, Backend::trial};
  const auto pq = build_pq(spec);
  const auto jd = jordan_decompose(pq.p1, pq.q1);
  double expected = 0.0;
  for (const auto& b : jd.blocks)
    if (b.v) expected += oracles::good_probability(b.p, params.n_alternations, params.count_threshold()) / 2.0;
  const auto r = run_trial(spec, params, rng, TrialMode::coherent);
  EXPECT_NEAR(r.success_probability, expected, 1e-9);

  // Deferred measurement has the same success statistics.
  const int n = 4000;
  int ok = 0;
  for (int i = 0; i < n; ++i) ok += run_trial(spec, params, rng, TrialMode::deferred).success;
  EXPECT_NEAR(ok / double(n), expected, 4 * std::sqrt(expected * (1 - expected) / n) + 1e-3);
}

TEST(Trial, SuccessfulStateIsAccepted) {
  Rng rng(23);
  VerifierSpec spec;
  do spec = random_verifier(2, 1, rng);
  while (max_acceptance(spec).value < 0.9);
  auto params = SynthesisParams::defaults(2, 0.5, 0.9, Backend::trial);
  int seen = 0;
  for (int i = 0; i < 200 && seen < 10; ++i) {
    const auto r = run_trial(spec, params, rng);
    if (!r.success) continue;
    ++seen;
    EXPECT_GE(r.accept_prob_of_reduced, params.a);
  }
  EXPECT_GT(seen, 0);
}

TEST(Json, RoundTripAndDiagnostics) {
  Rng rng(2);
  const auto spec = random_verifier(1, 1, rng);
  const auto back = verifier_from_json(verifier_to_json(spec));
  EXPECT_LT((back.v_hat - spec.v_hat).norm(), 1e-12);

  const auto h = verifier_from_json_text(R"({"m": 1, "gates": [{"name": "H", "targets": [0]}]})");
  EXPECT_LT((h.v_hat - gates::hadamard()).norm(), 1e-12);

  try {
    verifier_from_json_text("{\n  \"m\": 1,\n  \"gates\": [}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(verifier_from_json_text(R"({"m": 1, "gates": [{"name": "H", "targets": [4]}]})"), Error);
  EXPECT_THROW(verifier_from_json_text(R"({"m": 1, "gates": [{"name": "Q", "targets": [0]}]})"), Error);
}
