#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "holomera/mera.hpp"
#include "test_util.hpp"

using namespace holomera;
using namespace holomera::testing;

TEST(Layers, IsometricAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (int b : {2, 3}) {
      const auto m = build_scale_invariant(2, b, seed);
      EXPECT_LT(layer_residual(m.layer), 1e-12);
    }
  EXPECT_NO_THROW(make_scale_invariant(identity_layer(2, 3)));
  EXPECT_THROW(build_scale_invariant(1, 3, 0), InvalidArgument);
  EXPECT_THROW(build_scale_invariant(2, 4, 0), InvalidArgument);
}

TEST(Layers, DeterministicPerSeed) {
  const auto a = build_scale_invariant(3, 3, 7), b = build_scale_invariant(3, 3, 7);
  EXPECT_EQ(a.layer.u.data(), b.layer.u.data());
  EXPECT_EQ(a.layer.w.data(), b.layer.w.data());
}

TEST(FiniteRange, LengthAndCopies) {
  const auto src = build_scale_invariant(2, 3, 3);
  const auto f = build_finite_range(src, 4, CapState::product(2));
  EXPECT_EQ(f.xi(), 81);
  for (const auto& l : f.layers) {
    EXPECT_EQ(l.u.data(), src.layer.u.data());
    EXPECT_EQ(l.w.data(), src.layer.w.data());
  }
  EXPECT_EQ(build_finite_range(2, 3, 1, CapState::product(2), 0).depth(), 1);
  EXPECT_THROW(build_finite_range(2, 3, 0, CapState::product(2), 0), InvalidArgument);
  CapState bad = CapState::product(2);
  bad.vector(0) = 2.0;
  EXPECT_THROW(build_finite_range(2, 3, 2, bad, 0), InvalidArgument);
}

TEST(Channels, Unital) {
  for (int chi : {2, 3, 4}) {
    const auto m = build_scale_invariant(chi, 3, 11);
    EXPECT_LT(max_abs(ascend_one_site(Matrix::Identity(chi, chi), m.layer) - Matrix::Identity(chi, chi)), 1e-12);
    const int n = chi * chi;
    EXPECT_LT(max_abs(ascend_two_site(Matrix::Identity(n, n), m.layer) - Matrix::Identity(n, n)), 1e-12);
  }
}

TEST(Channels, OneSiteMatchesDenseOracle) {
  const auto m = build_scale_invariant(3, 3, 12);
  const Matrix op = random_matrix(3, 3, 1);
  const Matrix wm = m.layer.w_matrix();
  const Matrix id = Matrix::Identity(3, 3);
  const Matrix ref = wm.adjoint() * kron_all({id, op, id}) * wm;
  EXPECT_LT(max_abs(ascend_one_site(op, m.layer) - ref), 1e-12);
}

TEST(Channels, TwoSiteMatchesDenseOracle) {
  const int chi = 2;
  const auto m = build_scale_invariant(chi, 3, 13);
  const Matrix h = random_hermitian(chi * chi, 2);
  const Matrix id = Matrix::Identity(chi, chi);
  const Matrix wm = m.layer.w_matrix();
  const Matrix v = kron_all({id, id, m.layer.u_matrix(), id, id}) * kron(wm, wm);
  Matrix ref = Matrix::Zero(chi * chi, chi * chi);
  for (int t1 = 1; t1 <= 3; ++t1) {
    std::vector<Matrix> parts;
    for (int k = 0; k < t1; ++k) parts.push_back(id);
    parts.push_back(h);
    for (int k = t1 + 2; k < 6; ++k) parts.push_back(id);
    ref += v.adjoint() * kron_all(parts) * v / 3.0;
  }
  EXPECT_LT(max_abs(ascend_two_site(h, m.layer) - ref), 1e-12);
}

TEST(Channels, Linearity) {
  const auto m = build_scale_invariant(3, 3, 14);
  const Matrix a = random_matrix(3, 3, 3), b = random_matrix(3, 3, 4);
  const Complex s(0.7, 0.2);
  const Matrix lhs = ascend_one_site(a + s * b, m.layer);
  EXPECT_LT(max_abs(lhs - ascend_one_site(a, m.layer) - s * ascend_one_site(b, m.layer)), 1e-12);
}

TEST(Channels, Adjointness) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = build_scale_invariant(3, 3, 20 + seed);
    const Matrix o1 = random_matrix(3, 3, seed), r1 = random_density(3, seed + 50);
    EXPECT_LT(std::abs((ascend_one_site(o1, m.layer) * r1).trace() - (o1 * descend_density(r1, m.layer)).trace()), 1e-10);
    const Matrix o2 = random_matrix(9, 9, seed + 1), r2 = random_density(9, seed + 60);
    EXPECT_LT(std::abs((ascend_two_site(o2, m.layer) * r2).trace() - (o2 * descend_density(r2, m.layer)).trace()), 1e-10);
  }
}

TEST(Channels, DescendPreservesDensity) {
  const auto m = build_scale_invariant(3, 3, 30);
  for (int n : {3, 9}) {
    const Matrix out = descend_density(random_density(n, 5), m.layer);
    EXPECT_LT(std::abs(out.trace() - 1.0), 1e-12);
    EXPECT_GE(hermitian_eigenvalues(out).minCoeff(), -1e-10);
    EXPECT_LT(max_abs(out - out.adjoint()), 1e-12);
  }
  // A unitary isometry (chi_out = chi^3) makes the descending channel unital.
  const Layer unitary = random_layer(2, 8, 3, 9);
  EXPECT_LT(max_abs(descend_density(Matrix::Identity(8, 8) / 8.0, unitary) - Matrix::Identity(2, 2) / 2.0), 1e-12);
  EXPECT_LT(max_abs(descend_density(Matrix::Identity(64, 64) / 64.0, unitary) - Matrix::Identity(4, 4) / 4.0), 1e-12);
}

TEST(Channels, RejectsNonDensity) {
  const auto m = build_scale_invariant(2, 3, 31);
  EXPECT_THROW(descend_density(Matrix::Identity(2, 2), m.layer), InvalidArgument);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(descend_density(neg, m.layer), InvalidArgument);
  EXPECT_THROW(ascend_one_site(Matrix::Identity(3, 3), m.layer), InvalidArgument);
}

TEST(Cones, BasicMerges) {
  for (long x = -5; x < 10; ++x) EXPECT_EQ(cone_merge_level(x, x + 1, 3), 1) << x;
  for (long x : {0L, 13L, 40L, 100L}) {
    const int lvl = cone_merge_level(x, x + 81, 3);
    EXPECT_GE(lvl, 3);
    EXPECT_LE(lvl, 5);
  }
  const long centre = 1 + 3 + 9 + 27;
  const auto c = causal_cone_sites({centre}, 4, 3);
  for (const auto& s : c) EXPECT_EQ(s.size(), 1u);
}

TEST(Cones, WidthBound) {
  for (long x = -40; x < 41; ++x) {
    const auto c = causal_cone_sites({x}, 8, 3);
    for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LE(c[k].size(), 2u) << x << " level " << k;
  }
}

TEST(Windows, OneLayerMatchesDenseRing) {
  const auto src = build_scale_invariant(2, 3, 41);
  const auto net = build_finite_range(src, 1, CapState::product(2));
  const Tensor psi = ring_state_one_layer(src.layer, 3, net.cap.vector);
  for (const std::vector<long>& sites : {std::vector<long>{1, 2, 3}, {2, 3, 4, 5}, {1, 4, 7}, {3, 4}, {1, 2, 3, 4, 5, 6, 7}}) {
    const SiteDensity d = window_density(net, sites);
    std::vector<std::size_t> keep(sites.begin(), sites.end());
    const Tensor ref = dense_reduced(psi, keep);
    EXPECT_LT((d.rho - ref).max_abs(), 1e-12);
  }
}

TEST(Windows, ScaleInvariantTwoSiteAgreesWithChannel) {
  const auto m = build_scale_invariant(2, 3, 42);
  const Matrix rho = random_density(4, 7);
  // The average over the three pair placements below one coarse pair is the closed channel.
  Matrix acc = Matrix::Zero(4, 4);
  for (long x : {1L, 2L, 3L}) {
    const Layer& l = m.layer;
    SiteDensity top{{0, 1}, Tensor::from_matrix(rho, {2, 2, 2, 2})};
    acc += descend_sites(l, top, {x, x + 1}).matrix() / 3.0;
  }
  EXPECT_LT(max_abs(acc - descend_two_site(rho, m.layer)), 1e-12);
}

TEST(Windows, ExpectationOfIdentityIsOne) {
  const auto net = build_finite_range(2, 3, 2, CapState::product(2), 5);
  const SiteDensity d = window_density(net, {0, 4, 11});
  EXPECT_LT(std::abs(expectation(d, {0, 11}, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}) - 1.0), 1e-12);
  const auto mixed = build_finite_range(2, 3, 2, CapState::maximally_mixed(), 5);
  const SiteDensity dm = window_density(mixed, {-3, 5});
  EXPECT_LT(std::abs(dm.matrix().trace() - 1.0), 1e-12);
}
