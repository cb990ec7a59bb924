#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qfals/dilation.hpp"
#include "qfals/error.hpp"

using namespace qfals;

namespace {

ComplexVector bell() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

double max_choi_distance(const Instrument& a, const Instrument& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, hs_distance(a.operation(i).choi(), b.operation(i).choi()));
  }
  return worst;
}

}  // namespace

TEST(DoubleKet, ScaledIdentityIsBell) {
  EXPECT_LE((double_ket(identity(2) / std::sqrt(2.0)) - bell()).norm(), 1e-15);
}

TEST(DoubleKet, SingleEntry) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  ComplexVector expected = ComplexVector::Zero(4);
  expected(1) = 1.0;  // |0> (x) |1>
  EXPECT_EQ(double_ket(m), expected);
  EXPECT_EQ(from_double_ket(expected, 2, 2), m);
}

TEST(DoubleKet, InnerProductIsTraceInner) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = gaussian_matrix(3, 2, rng);
    const ComplexMatrix b = gaussian_matrix(3, 2, rng);
    EXPECT_LE(std::abs(double_ket(a).dot(double_ket(b)) - oracle::trace_inner(a, b)), 1e-14);
  }
}

TEST(MaxEntangled, IdentityIsBellProjector) {
  const State s = max_entangled_from_isometry(identity(2));
  EXPECT_LE(oracle::max_abs(s.matrix() - oracle::bell_projector()), 1e-15);
}

TEST(MaxEntangled, StackedIsometryMarginals) {
  ComplexMatrix v = ComplexMatrix::Zero(3, 2);
  v(0, 0) = v(1, 1) = 1.0;
  const State s = max_entangled_from_isometry(v);
  EXPECT_LE(oracle::max_abs(oracle::trace_first(s.matrix(), 3, 2) - identity(2) / 2.0), 1e-15);
  ComplexMatrix ma = ComplexMatrix::Zero(3, 3);
  ma(0, 0) = ma(1, 1) = 0.5;
  EXPECT_LE(oracle::max_abs(oracle::trace_second(s.matrix(), 3, 2) - ma), 1e-15);
}

TEST(MaxEntangled, SchmidtNumberIsDB) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const State s = max_entangled_from_isometry(haar_isometry(4, 3, rng));
    EXPECT_EQ(numerical_rank(oracle::trace_second(s.matrix(), 4, 3)), 3u);
    EXPECT_EQ(numerical_rank(s.matrix()), 1u);
  }
}

TEST(MaxEntangled, InverseRecoversIsometryUpToPhase) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix v = haar_isometry(3, 2, rng);
    const ComplexMatrix back = isometry_from_max_entangled(max_entangled_from_isometry(v), 3, 2);
    const Complex phase = back.cwiseProduct(v.conjugate()).sum() / 2.0;
    EXPECT_NEAR(std::abs(phase), 1.0, 1e-10);
    EXPECT_LE(oracle::max_abs(back - phase * v), 1e-10);
  }
}

TEST(MaxEntangled, InverseRejectsNonMaximal) {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(0) = 1.0;
  const State prod(System{"AB", 4}, psi * psi.adjoint());
  try {
    isometry_from_max_entangled(prod, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotMaxEntangled);
  }
  try {
    isometry_from_max_entangled(State(System{"AB", 4}, identity(4) / 4.0), 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotRank1);
  }
}

TEST(Purify, MaximallyMixedQubitGivesBell) {
  const auto r = purify(State(System{"A", 2}, identity(2) / 2.0), 2, identity(2));
  EXPECT_LE(oracle::max_abs(r.pure_state.matrix() - oracle::bell_projector()), 1e-14);
}

TEST(Purify, SchmidtCoefficientsFromEigenvalues) {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 0.64;
  rho(1, 1) = 0.36;
  const auto r = purify(State(System{"A", 2}, rho));
  ASSERT_EQ(r.schmidt_coefficients.size(), 2u);
  EXPECT_NEAR(r.schmidt_coefficients[0], 0.8, 1e-15);
  EXPECT_NEAR(r.schmidt_coefficients[1], 0.6, 1e-15);
  EXPECT_EQ(numerical_rank(r.pure_state.matrix()), 1u);
  EXPECT_LE(oracle::max_abs(oracle::trace_second(r.pure_state.matrix(), 2, 2) - rho), 1e-15);
}

TEST(Purify, PureInputGivesProduct) {
  Rng rng(4);
  const ComplexVector psi = random_pure(3, rng);
  const auto r = purify(State(System{"A", 3}, psi * psi.adjoint()));
  EXPECT_EQ(r.schmidt_coefficients.size(), 1u);
  // Marginal on E is pure as well: product state.
  const ComplexMatrix me = oracle::trace_first(r.pure_state.matrix(), 3, 3);
  EXPECT_NEAR((me * me).trace().real(), 1.0, 1e-12);
}

TEST(Purify, MarginalAndPurityOnRandom) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto d = static_cast<Eigen::Index>(2 + t % 3);
    const ComplexMatrix rho = oracle::random_density(d, rng);
    const auto r = purify(State(System{"A", static_cast<std::size_t>(d)}, rho));
    EXPECT_LE(oracle::max_abs(oracle::trace_second(r.pure_state.matrix(), d, d) - rho), 1e-12);
    EXPECT_LE(std::abs(eig_hermitian(r.pure_state.matrix()).values[1]), 1e-12);
  }
}

TEST(Purify, SmallEnvironmentUsesSupport) {
  Rng rng(6);
  const ComplexVector a = random_pure(3, rng);
  ComplexVector b = random_pure(3, rng);
  b -= a.dot(b) * a;
  b.normalize();
  const ComplexMatrix rho = 0.7 * a * a.adjoint() + 0.3 * b * b.adjoint();
  const auto r = purify(State(System{"A", 3}, rho), 2);
  EXPECT_EQ(r.environment.dim, 2u);
  EXPECT_LE(oracle::max_abs(oracle::trace_second(r.pure_state.matrix(), 3, 2) - rho), 1e-12);
  try {
    purify(State(System{"A", 3}, identity(3) / 3.0), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankExceedsEnvironment);
  }
}

TEST(Dilation, UnitaryChannelHasTrivialEnvironment) {
  Rng rng(7);
  const System a{"A", 3};
  const ComplexMatrix u = haar_unitary(3, rng);
  const Instrument inst({"0"}, {QuantumOperation::unitary(a, u)});
  const DilationResult d = stinespring_dilate(inst);
  EXPECT_EQ(d.environment.dim, 1u);
  EXPECT_EQ(d.ancilla.dim, 1u);
  EXPECT_LE(oracle::max_abs(d.unitary - u), 1e-12);
}

TEST(Dilation, QubitPvmGivesCnot) {
  const System a{"A", 2};
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  const Instrument inst({"0", "1"}, {QuantumOperation(a, a, {p0}), QuantumOperation(a, a, {p1})});
  const DilationResult d = stinespring_dilate(inst);
  ComplexMatrix cnot = ComplexMatrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(3, 2) = cnot(2, 3) = 1.0;
  EXPECT_LE(oracle::max_abs(d.unitary - cnot), 1e-15);
  EXPECT_LE(max_choi_distance(inst, instrument_from_dilation(d, a)), 1e-14);
  ASSERT_EQ(d.block_map.size(), 2u);
  EXPECT_EQ(d.block_map[1], (std::pair<std::size_t, long>{1, 0}));
}

TEST(Dilation, RandomRoundTrip) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const std::size_t din = 1 + t % 3, dout = 1 + (t / 3) % 3, outcomes = 1 + t % 3;
    const Instrument inst =
        random_instrument(System{"A", din}, System{"B", dout}, outcomes, 1 + t % 2, rng);
    const DilationResult d = stinespring_dilate(inst);
    const auto n = d.unitary.rows();
    EXPECT_LE((d.unitary.adjoint() * d.unitary - ComplexMatrix::Identity(n, n)).norm(), 1e-10);
    EXPECT_LE(max_choi_distance(inst, instrument_from_dilation(d, inst.input())), 1e-10);
  }
}

TEST(Dilation, IdentityChannel) {
  const System a{"A", 2};
  const Instrument inst({"0"}, {QuantumOperation::identity(a)});
  const Instrument back = instrument_from_dilation(stinespring_dilate(inst), a);
  EXPECT_LE(hs_distance(back.operation(0).choi(), QuantumOperation::identity(a).choi()), 1e-14);
}

TEST(Dilation, CoarseGrainedPvmGivesSum) {
  Rng rng(9);
  const Instrument inst = random_instrument(System{"A", 2}, System{"B", 2}, 2, 1, rng);
  DilationResult d = stinespring_dilate(inst);
  const System env = d.environment;
  d.pvm = {Effect(env, d.pvm[0].matrix() + d.pvm[1].matrix())};
  const Instrument merged = instrument_from_dilation(d, inst.input());
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_LE(hs_distance(merged.operation(0).choi(), inst.coarse_grained().choi()), 1e-10);
}
