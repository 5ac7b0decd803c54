#include <gtest/gtest.h>

#include <numbers>

#include "dense_oracle.hpp"
#include "holomera/optimizer.hpp"
#include "holomera/superoperator.hpp"
#include "ising_ed.hpp"
#include "test_util.hpp"

using namespace holomera;
using namespace holomera::testing;

TEST(Hamiltonian, IsingTerm) {
  const auto h = ising_critical_hamiltonian();
  EXPECT_EQ(max_abs(h.h - h.h.adjoint()), 0.0);
  // A single bond can do better than the chain average, never worse.
  EXPECT_LE(hermitian_eigenvalues(h.h).minCoeff(), ising_exact_energy());
}

TEST(Hamiltonian, ExactEnergyAgainstDiagonalization) {
  EXPECT_NEAR(ising_exact_energy(), -4.0 / std::numbers::pi, 1e-12);
  // Periodic chain: E0/L = e_inf - pi c v / (6 L^2) with c = 1/2, v = 2.
  const int l = 12;
  const double e0 = IsingChain(l).lowest(+1, 1)[0] / l;
  EXPECT_NEAR(e0 + std::numbers::pi / (6.0 * l * l), ising_exact_energy(), 2e-5);
}

TEST(FixedPoint, IdentityLayersFlowToReferenceState) {
  const auto m = make_scale_invariant(identity_layer(2, 3));
  const auto fp = fixed_point_density(m);
  Matrix ref = Matrix::Zero(4, 4);
  ref(0, 0) = 1.0;
  EXPECT_LT(max_abs(fp.rho2 - ref), 1e-10);
  // Energy reduces to the diagonal entry of h on that state.
  LocalHamiltonian h;
  h.h = Matrix::Zero(4, 4);
  h.h.diagonal() << 0.3, -1.0, 2.0, 0.5;
  EXPECT_NEAR(energy_per_site(m, h, fp), 0.3, 1e-10);
}

TEST(FixedPoint, SelfConsistentDensity) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto m = build_scale_invariant(3, 3, seed);
    const auto fp = fixed_point_density(m);
    EXPECT_LT(max_abs(descend_two_site(fp.rho2, m.layer) - fp.rho2), 1e-9);
    EXPECT_NEAR(fp.rho2.trace().real(), 1.0, 1e-12);
    EXPECT_GE(hermitian_eigenvalues(fp.rho2).minCoeff(), -1e-10);
    EXPECT_LT(max_abs(fp.rho2 - fp.rho2.adjoint()), 1e-12);
  }
}

TEST(FixedPoint, IterationCapReported) {
  FixedPointOptions o;
  o.max_iterations = 1;
  o.tol = 1e-15;
  EXPECT_THROW(fixed_point_density(build_scale_invariant(2, 3, 1), o), NumericalError);
}

TEST(Optimize, ChiTwoReachesBound) {
  OptimizeOptions o;
  o.sweeps = 50;
  o.seed = 3;
  const auto h = ising_critical_hamiltonian();
  const auto r = optimize(h, 2, o);
  const double e = r.report.energies.back();
  EXPECT_LE(e, -1.24);
  EXPECT_GE(e, ising_exact_energy() - 1e-9);
  for (double res : r.report.isometry_residuals) EXPECT_LT(res, 1e-12);
  EXPECT_LT(layer_residual(r.mera.layer), 1e-12);
  // Deterministic per seed.
  const auto again = optimize(h, 2, o);
  EXPECT_EQ(again.report.energies, r.report.energies);
}

TEST(Optimize, EnergyGaugeInvariant) {
  OptimizeOptions o;
  o.sweeps = 20;
  const auto h = ising_critical_hamiltonian();
  const auto r = optimize(h, 2, o);
  const double e = energy_per_site(r.mera, h);

  const Matrix v = random_isometry(2, 2, 77);
  const Matrix vv = kron(v, v), vvv = kron(vv, v);
  const Matrix u2 = vv * r.mera.layer.u_matrix() * vv.adjoint();
  const Matrix w2 = vvv * r.mera.layer.w_matrix() * v.adjoint();
  const auto rotated = make_scale_invariant(make_layer(u2, w2, 3));
  LocalHamiltonian h2 = h;
  h2.h = vv * h.h * vv.adjoint();
  EXPECT_NEAR(energy_per_site(rotated, h2), e, 1e-10);

  const auto phased = make_scale_invariant(make_layer(std::polar(1.0, 0.9) * r.mera.layer.u_matrix(), r.mera.layer.w_matrix(), 3));
  EXPECT_NEAR(energy_per_site(phased, h), e, 1e-10);
}

TEST(Optimize, TransitionalLayerShapes) {
  OptimizeOptions o;
  o.sweeps = 2;
  const auto r = optimize(ising_critical_hamiltonian(), 4, o);
  ASSERT_EQ(r.mera.transitional.size(), 1u);
  EXPECT_EQ(r.mera.transitional[0].chi_in(), 2u);
  EXPECT_EQ(r.mera.transitional[0].chi_out(), 4u);
  EXPECT_THROW(optimize(ising_critical_hamiltonian(), 1, o), InvalidArgument);
}

TEST(Optimize, ChiFourScalingDimensionsNearDiagonalization) {
  OptimizeOptions o;
  o.sweeps = 600;
  const auto r = optimize(ising_critical_hamiltonian(), 4, o);
  const auto ops = spectral_decompose(build_scaling_superoperator(r.mera));
  const auto ed = ising_dimensions_from_gaps(12);
  EXPECT_NEAR(ed.sigma, 0.125, 2e-3);
  EXPECT_NEAR(ed.epsilon, 1.0, 2e-2);
  EXPECT_NEAR(ops.dimensions[1], ed.sigma, 0.1 * ed.sigma);
  EXPECT_NEAR(ops.dimensions[2], ed.epsilon, 0.1 * ed.epsilon);
  EXPECT_LT(r.report.energies.back() - ising_exact_energy(), 5e-3);
}
