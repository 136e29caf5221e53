#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace qwalk;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ComplexMatrix direct_power(const ComplexMatrix& m, int t) {
  ComplexMatrix out = ComplexMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < t; ++i) out = out * m;
  return out;
}

CoinOperator two_axis_coin() {
  const std::vector<CoinOperator> parts{build_coin({kPi / 3, kPi / 5, kPi / 7}), build_coin({kPi / 5, kPi / 11, kPi / 13})};
  return tensor_coin(parts);
}

// Writes out ((C_k)^t G_k)^{N-1} term by term: the wrap-around term, the
// |phi_{N-1}><phi_N| term and the j = 1..N-2 sum.
ComplexMatrix reversal_precursor_oracle(const SpectralCoin& sc, int t) {
  const int n = static_cast<int>(sc.dim());
  const ComplexVector lam = sc.phases.unaryExpr([t](double w) { return std::polar(1.0, w * t); });
  auto prod = [&](int a, int b) {
    Complex p = 1.0;
    for (int l = a; l <= b; ++l) p *= lam(l - 1);
    return p;
  };
  auto phi = [&](int j) { return sc.vectors.col(j - 1); };
  ComplexMatrix out = prod(2, n) * phi(n) * phi(1).adjoint() + prod(1, n - 1) * phi(n - 1) * phi(n).adjoint();
  for (int j = 1; j <= n - 2; ++j) out += prod(1, j) * prod(j + 2, n) * phi(j) * phi(j + 1).adjoint();
  return out;
}

}  // namespace

TEST(BuildCk, HadamardAtZeroAndPi) {
  const DisplacementMap disp(1);
  const ComplexMatrix h = hadamard_coin().matrix();
  const std::vector<double> zero{0.0}, pi{kPi};
  EXPECT_LE(max_abs(build_ck(h, zero, disp) - h), 1e-15);
  EXPECT_LE(max_abs(build_ck(h, pi, disp) + h), 1e-15);
}

TEST(BuildCk, OneAxisProjectorForm) {
  const DisplacementMap disp(1);
  const ComplexMatrix c = build_coin({1.0, 0.3, 2.0}).matrix();
  const double k = 0.77;
  ComplexMatrix pr = ComplexMatrix::Zero(2, 2), pl = ComplexMatrix::Zero(2, 2);
  pr(1, 1) = 1.0;
  pl(0, 0) = 1.0;
  const std::vector<double> kv{k};
  EXPECT_LE(max_abs(build_ck(c, kv, disp) - (std::polar(1.0, -k) * pr + std::polar(1.0, k) * pl) * c), 1e-15);
}

TEST(BuildCk, TensorCoinUnitary) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> kd(0, 2 * kPi);
  const std::vector<double> k{kd(rng), kd(rng)};
  EXPECT_LE(unitarity_defect(build_ck(two_axis_coin().matrix(), k, DisplacementMap(2))), 1e-14);
  const std::vector<double> bad{0.1};
  EXPECT_THROW(build_ck(two_axis_coin().matrix(), bad, DisplacementMap(2)), ContractError);
}

TEST(BuildCk, MatchesShiftInMomentumSpace) {
  // FFT of S (I x C) psi equals C_k applied to the FFT of psi
  std::mt19937_64 rng(2);
  const LatticeSpec lat({8, 4});
  const CoinOperator c = two_axis_coin();
  const WalkerState psi(lat, oracle::random_state_matrix(4, lat.sites(), rng));
  const ComplexMatrix lhs = to_momentum(step(psi, c));
  const ComplexMatrix psik = to_momentum(psi);
  const MomentumGrid grid(lat);
  double worst = 0.0;
  for (Eigen::Index p = 0; p < grid.points(); ++p) {
    const auto k = grid.momentum(p);
    const ComplexVector v = build_ck(c.matrix(), k, DisplacementMap(2)) * psik.col(p);
    worst = std::max(worst, (lhs.col(p) - v).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-14);
}

TEST(SpectralDecompose, HadamardAtZero) {
  const SpectralCoin sc = spectral_decompose(hadamard_coin().matrix());
  EXPECT_NEAR(sc.phases(0), 0.0, 1e-14);
  EXPECT_NEAR(sc.phases(1), kPi, 1e-14);
  const ComplexMatrix h = hadamard_coin().matrix();
  for (Eigen::Index j = 0; j < 2; ++j)
    EXPECT_LE((h * sc.vectors.col(j) - std::polar(1.0, sc.phases(j)) * sc.vectors.col(j)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpectralDecompose, GroverDegenerate) {
  EXPECT_THROW(spectral_decompose(grover_coin(4).matrix()), DegenerateSpectrum);
}

TEST(SpectralDecompose, RandomReconstruction) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix u = support::random_nondegenerate_unitary(8, rng);
    EXPECT_LE(max_abs(spectral_decompose(u).reconstruct() - u), 1e-10);
  }
}

TEST(BuildGk, TwoCycle) {
  const SpectralCoin sc = spectral_decompose(hadamard_coin().matrix());
  const ComplexMatrix g = build_gk(sc);
  const ComplexMatrix expected =
      sc.vectors.col(1) * sc.vectors.col(0).adjoint() + sc.vectors.col(0) * sc.vectors.col(1).adjoint();
  EXPECT_LE(max_abs(g - expected), 1e-15);
  EXPECT_LE(max_abs(g * g - ComplexMatrix::Identity(2, 2)), 1e-12);
}

TEST(BuildGk, FourCycleOrder) {
  std::mt19937_64 rng(4);
  const SpectralCoin sc = spectral_decompose(support::random_nondegenerate_unitary(4, rng));
  const ComplexMatrix g = build_gk(sc);
  EXPECT_LE(max_abs(direct_power(g, 4) - ComplexMatrix::Identity(4, 4)), 1e-12);
  EXPECT_GT(max_abs(direct_power(g, 2) - ComplexMatrix::Identity(4, 4)), 0.5);
  EXPECT_LE(unitarity_defect(g), 1e-12);
}

TEST(BuildGk, ShiftsEigenbasis) {
  std::mt19937_64 rng(5);
  for (Eigen::Index n : {2, 4, 8}) {
    const SpectralCoin sc = spectral_decompose(support::random_nondegenerate_unitary(n, rng));
    const ComplexMatrix g = build_gk(sc);
    for (Eigen::Index j = 0; j < n; ++j)
      EXPECT_LE((g * sc.vectors.col(j) - sc.vectors.col((j + 1) % n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(max_abs(direct_power(g, static_cast<int>(n)) - ComplexMatrix::Identity(n, n)), 1e-11);
  }
}

TEST(PowerViaSpectrum, AgreesWithProducts) {
  std::mt19937_64 rng(6);
  const ComplexMatrix u = support::random_nondegenerate_unitary(4, rng);
  const SpectralCoin sc = spectral_decompose(u);
  EXPECT_LE(max_abs(power_via_spectrum(sc, 0) - ComplexMatrix::Identity(4, 4)), 1e-12);
  EXPECT_LE(max_abs(power_via_spectrum(sc, 1) - u), 1e-10);
  EXPECT_LE(max_abs(power_via_spectrum(sc, 7) - direct_power(u, 7)), 1e-10);
}

TEST(ClosedFormPower, BaseCase) {
  std::mt19937_64 rng(7);
  const SpectralCoin sc = spectral_decompose(support::random_nondegenerate_unitary(4, rng));
  const int t = 4;
  const ComplexMatrix direct = direct_power(sc.reconstruct(), t) * build_gk(sc);
  // single-product form: sum_{k>=2} e^{i w_k t}|phi_k><phi_{k-1}| + e^{i w_1 t}|phi_1><phi_N|
  ComplexMatrix single = std::polar(1.0, sc.phases(0) * t) * sc.vectors.col(0) * sc.vectors.col(3).adjoint();
  for (int k = 1; k < 4; ++k)
    single += std::polar(1.0, sc.phases(k) * t) * sc.vectors.col(k) * sc.vectors.col(k - 1).adjoint();
  EXPECT_LE(max_abs(closed_form_m_power(sc, t, 1) - direct), 1e-9);
  EXPECT_LE(max_abs(single - direct), 1e-9);
}

TEST(ClosedFormPower, TopPowerDim4) {
  std::mt19937_64 rng(8);
  const SpectralCoin sc = spectral_decompose(support::random_nondegenerate_unitary(4, rng));
  const ComplexMatrix a = direct_power(sc.reconstruct(), 3) * build_gk(sc);
  const ComplexMatrix closed = closed_form_m_power(sc, 3, 3);
  EXPECT_LE(max_abs(closed - direct_power(a, 3)), 1e-9);
  EXPECT_LE(max_abs(closed - reversal_precursor_oracle(sc, 3)), 1e-12);
}

TEST(ClosedFormPower, AllPowersDim8) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> td(1, 10);
  const SpectralCoin sc = spectral_decompose(support::random_nondegenerate_unitary(8, rng));
  const int t = td(rng);
  const ComplexMatrix a = direct_power(sc.reconstruct(), t) * build_gk(sc);
  double worst = 0.0;
  for (int m = 1; m <= 7; ++m) worst = std::max(worst, max_abs(closed_form_m_power(sc, t, m) - direct_power(a, m)));
  EXPECT_LE(worst, 1e-9);
  EXPECT_THROW(closed_form_m_power(sc, t, 0), ContractError);
  EXPECT_THROW(closed_form_m_power(sc, t, 8), ContractError);
}

TEST(PhaseIdentity, RandomSpectra) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> w(0, 2 * kPi);
  double worst = 0.0;
  for (int n : {2, 4, 8, 16}) {
    SpectralCoin sc{RealVector(n), ComplexMatrix::Identity(n, n)};
    for (int j = 0; j < n; ++j) sc.phases(j) = w(rng);
    for (int t = 0; t <= 50; ++t) {
      Complex full = 1.0;
      for (int j = 0; j < n; ++j) full *= std::polar(1.0, sc.phases(j) * t);
      for (int j = 1; j <= n; ++j) worst = std::max(worst, std::abs(phase_product_for(sc, t, j) - full));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(ReversalForm, ZeroSteps) {
  std::mt19937_64 rng(11);
  const SpectralCoin sc = spectral_decompose(support::random_nondegenerate_unitary(4, rng));
  const ReversalCheck r = verify_reversal_form(sc, 0);
  EXPECT_EQ(r.phase, Complex(1.0, 0.0));
  EXPECT_LE(r.defect, 1e-12);
}

TEST(ReversalForm, TwoAndFourDimensional) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> td(1, 20);
  const SpectralCoin sc2 = spectral_decompose(support::random_nondegenerate_unitary(2, rng));
  const int t = td(rng);
  const ReversalCheck r2 = verify_reversal_form(sc2, t);
  EXPECT_LE(r2.defect, 1e-10);
  EXPECT_NEAR(std::abs(r2.phase - std::polar(1.0, (sc2.phases(0) + sc2.phases(1)) * t)), 0.0, 1e-12);
  const ReversalCheck r4 = verify_reversal_form(spectral_decompose(support::random_nondegenerate_unitary(4, rng)), 5);
  EXPECT_LE(r4.defect, 1e-9);
  EXPECT_LE(r4.phase_identity_defect, 1e-12);
  EXPECT_LE(r4.product_form_defect, 1e-9);
}

TEST(Protocol, OneDimensionalHadamard) {
  const WalkerState psi0 = support::coin_basis_at_origin(LatticeSpec::line(64), 2, 1);
  const ProtocolResult r = run_protocol(psi0, hadamard_coin(), 5);
  EXPECT_GE(r.fidelity, 1 - 1e-9);
  EXPECT_EQ(r.total_steps, 12);
  EXPECT_EQ(r.operations.size(), 12u);
  EXPECT_EQ(r.operations[0], ProtocolOp::Gk);
  EXPECT_EQ(r.operations[6], ProtocolOp::Gk);
  EXPECT_LE(r.per_k_defect, 1e-10);
}

TEST(Protocol, TwoDimensionalProductCoin) {
  const LatticeSpec lat({32, 32});
  ASSERT_TRUE(support::nondegenerate_on_grid(two_axis_coin(), lat));
  const WalkerState psi0 = support::coin_basis_at_origin(lat, 4, 2);
  const ProtocolResult r = run_protocol(psi0, two_axis_coin(), 3);
  EXPECT_GE(r.fidelity, 1 - 1e-9);
  EXPECT_EQ(r.total_steps, 16);
  EXPECT_LE(r.per_k_defect, 1e-9);
  EXPECT_NEAR(std::abs(r.overlap), r.fidelity, 1e-12);
}

TEST(Protocol, PerKPhaseMatchesSpectrum) {
  const LatticeSpec lat = LatticeSpec::line(16);
  std::mt19937_64 rng(13);
  const WalkerState psi0(lat, oracle::random_state_matrix(2, 16, rng));
  const int l = 4;
  const ProtocolResult r = run_protocol(psi0, hadamard_coin(), l);
  const MomentumGrid grid(lat);
  const ComplexMatrix before = to_momentum(psi0);
  const ComplexMatrix after = to_momentum(r.final_state);
  for (Eigen::Index p = 0; p < grid.points(); ++p) {
    const auto k = grid.momentum(p);
    const SpectralCoin sc = spectral_decompose(build_ck(hadamard_coin().matrix(), k, DisplacementMap(1)));
    const Complex phase = std::polar(1.0, (sc.phases(0) + sc.phases(1)) * l);
    EXPECT_LE((after.col(p) - phase * before.col(p)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Protocol, DegenerateCoinsRefused) {
  const LatticeSpec lat({8, 8});
  const WalkerState psi0 = support::coin_basis_at_origin(lat, 4, 0);
  EXPECT_THROW(run_protocol(psi0, grover_coin(4), 2), ProtocolInapplicable);
  const std::vector<CoinOperator> real_reflections{build_coin({kPi / 3, 0, 0}), build_coin({kPi / 5, 0, 0})};
  try {
    run_protocol(psi0, tensor_coin(real_reflections), 3);
    FAIL() << "expected ProtocolInapplicable";
  } catch (const ProtocolInapplicable& e) {
    EXPECT_NE(std::string(e.what()).find("k = (0, 0)"), std::string::npos) << e.what();
  }
}

TEST(Protocol, RandomProductCoins) {
  std::mt19937_64 rng(14);
  for (int n = 1; n <= 3; ++n) {
    const int per_axis = n == 3 ? 8 : 16;
    const LatticeSpec lat(std::vector<int>(static_cast<std::size_t>(n), per_axis));
    const CoinOperator coin = support::random_product_coin(n, lat, rng);
    const WalkerState psi0(lat, oracle::random_state_matrix(coin.dim(), lat.sites(), rng));
    for (int l : {1, 4, 8}) {
      const ProtocolResult r = run_protocol(psi0, coin, l);
      EXPECT_GE(r.fidelity, 1 - 1e-9) << "n=" << n << " l=" << l;
      EXPECT_EQ(r.total_steps, (1 << n) * (l + 1));
    }
  }
}

TEST(Protocol, GaugeIndependent) {
  std::mt19937_64 rng(15);
  const LatticeSpec lat({8, 8});
  const WalkerState psi0(lat, oracle::random_state_matrix(4, lat.sites(), rng));
  const ProtocolResult a = run_protocol(psi0, two_axis_coin(), 3);
  const ProtocolResult b = run_protocol(psi0, two_axis_coin(), 3, {.gauge_seed = 99});
  EXPECT_NEAR(a.fidelity, b.fidelity, 1e-10);
  EXPECT_LE((a.final_state.amps() - b.final_state.amps()).cwiseAbs().maxCoeff(), 1e-10);

  SpectralCoin sc = spectral_decompose(two_axis_coin().matrix() * Complex(0, 1));
  const ComplexMatrix g0 = build_gk(sc);
  sc.vectors.col(1) *= std::polar(1.0, 0.4);
  EXPECT_GT(max_abs(build_gk(sc) - g0), 1e-3);
}

TEST(MomentumEvolve, MatchesPositionBackend) {
  const WalkerState psi0 = support::coin_basis_at_origin(LatticeSpec::line(256), 2, 1);
  const WalkerState pos = evolve(psi0, hadamard_coin(), 100).state;
  const WalkerState mom = momentum_evolve(psi0, hadamard_coin(), 100, InterventionSchedule::none(100));
  EXPECT_LE((pos.amps() - mom.amps()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(mom.step_count(), 100);
}

TEST(MomentumEvolve, ReturnsToOrigin) {
  const WalkerState psi0 = support::coin_basis_at_origin(LatticeSpec::line(256), 2, 1);
  const WalkerState mom =
      momentum_evolve(psi0, hadamard_coin(), 100, InterventionSchedule::v_at(100, {51}), build_g(0, 0));
  EXPECT_NEAR(position_distribution(mom)(0), 1.0, 1e-10);
}

TEST(MomentumEvolve, ZeroSteps) {
  std::mt19937_64 rng(16);
  const WalkerState psi0(LatticeSpec::line(32), oracle::random_state_matrix(2, 32, rng));
  const WalkerState out = momentum_evolve(psi0, hadamard_coin(), 0, InterventionSchedule::none(0));
  EXPECT_LE((out.amps() - psi0.amps()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MomentumEvolve, CrossBackendRandomConfigs) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> steps_d(0, 64);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 2;
    const LatticeSpec lat = n == 1 ? LatticeSpec::line(128) : LatticeSpec({32, 32});
    const CoinOperator coin(oracle::random_unitary(Eigen::Index{1} << n, rng));
    const CoinOperator g(oracle::random_unitary(Eigen::Index{1} << n, rng));
    const int steps = steps_d(rng);
    std::vector<int> at;
    for (int t = 1; t <= steps; ++t)
      if (rng() % 5 == 0) at.push_back(t);
    const InterventionSchedule sched = InterventionSchedule::v_at(steps, at);
    const WalkerState psi0(lat, oracle::random_state_matrix(coin.dim(), lat.sites(), rng));
    const WalkerState a = evolve(psi0, coin, steps, sched, g).state;
    const WalkerState b = momentum_evolve(psi0, coin, steps, sched, g);
    worst = std::max(worst, (a.amps() - b.amps()).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(MomentumEvolve, GkScheduleReproducesProtocol) {
  std::mt19937_64 rng(18);
  const LatticeSpec lat({8, 8});
  const WalkerState psi0(lat, oracle::random_state_matrix(4, lat.sites(), rng));
  const int l = 2;
  std::vector<ScheduledIntervention> entries;
  for (int pair = 0; pair < 4; ++pair) entries.push_back({pair * (l + 1) + 1, InterventionKind::Gk});
  const InterventionSchedule sched(4 * (l + 1), entries);
  const WalkerState out = momentum_evolve(psi0, two_axis_coin(), sched.total_steps(), sched);
  const ProtocolResult r = run_protocol(psi0, two_axis_coin(), l);
  EXPECT_LE((out.amps() - r.final_state.amps()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(momentum_evolve(psi0, grover_coin(4), sched.total_steps(), sched), ProtocolInapplicable);
  EXPECT_THROW(momentum_evolve(psi0, two_axis_coin(), 3, InterventionSchedule::v_at(3, {1})), ContractError);
}
