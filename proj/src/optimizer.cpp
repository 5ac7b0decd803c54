#include "holomera/optimizer.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace holomera {

LocalHamiltonian ising_critical_hamiltonian(double g) {
  Matrix x(2, 2), z(2, 2), id = Matrix::Identity(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  auto kron = [](const Matrix& a, const Matrix& b) {
    Matrix out(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
    return out;
  };
  LocalHamiltonian h;
  h.g = g;
  h.d = 2;
  h.h = -kron(z, z) - 0.5 * g * (kron(x, id) + kron(id, x));
  return h;
}

double ising_exact_energy(double g) {
  auto f = [g](double k) { return std::sqrt(1.0 + g * g + 2.0 * g * std::cos(k)); };
  return -boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 15, 1e-14) /
         std::numbers::pi;
}

// -- fixed point --------------------------------------------------------------------------------

namespace {

Matrix one_site_average(const Matrix& rho2, int chi) {
  Matrix left = Matrix::Zero(chi, chi), right = Matrix::Zero(chi, chi);
  for (int a = 0; a < chi; ++a)
    for (int b = 0; b < chi; ++b)
      for (int k = 0; k < chi; ++k) {
        left(a, b) += rho2(a * chi + k, b * chi + k);
        right(a, b) += rho2(k * chi + a, k * chi + b);
      }
  return 0.5 * (left + right);
}

Matrix hermitize_normalize(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

}  // namespace

FixedPointDensity fixed_point_density(const ScaleInvariantMera& mera, const FixedPointOptions& opts, const Matrix* warm) {
  validate_layer(mera.layer);
  const int chi = mera.chi;
  const int n = chi * chi;
  Matrix rho = (warm && warm->rows() == n) ? *warm : Matrix(Matrix::Identity(n, n) / double(n));
  FixedPointDensity out;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Matrix next = hermitize_normalize(descend_two_site(rho, mera.layer));
    out.residual = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    out.iterations = it;
    if (out.residual < opts.tol) {
      out.rho2 = rho;
      out.rho1 = one_site_average(rho, chi);
      return out;
    }
  }
  throw NumericalError("fixed_point_density: no convergence after " + std::to_string(opts.max_iterations) +
                       " iterations (residual " + std::to_string(out.residual) + ")");
}

std::vector<Matrix> level_densities(const ScaleInvariantMera& mera, const Matrix& rho_top) {
  const int t = int(mera.transitional.size());
  std::vector<Matrix> rhos(std::size_t(t + 1));
  rhos[std::size_t(t)] = rho_top;
  for (int l = t - 1; l >= 0; --l)
    rhos[std::size_t(l)] = hermitize_normalize(descend_two_site(rhos[std::size_t(l + 1)], mera.transitional[std::size_t(l)]));
  return rhos;
}

double energy_per_site(const ScaleInvariantMera& mera, const LocalHamiltonian& h, const FixedPointDensity& fp) {
  const Matrix rho0 = level_densities(mera, fp.rho2).front();
  if (rho0.rows() != h.h.rows()) throw InvalidArgument("energy_per_site: Hamiltonian dimension does not match the network");
  return (h.h * rho0).trace().real();
}

double energy_per_site(const ScaleInvariantMera& mera, const LocalHamiltonian& h) {
  return energy_per_site(mera, h, fixed_point_density(mera));
}

// -- environments and updates -------------------------------------------------------------------

LayerEnvironment layer_environment(const Layer& layer, const Matrix& op, const Matrix& rho) {
  LayerEnvironment env{Tensor(layer.u.shape()), Tensor(layer.w.shape())};
  for (int p = 0; p < 3; ++p) {
    env.u += two_site_environment(layer, op, rho, p, TwoSiteRole::u_conj);
    env.w += two_site_environment(layer, op, rho, p, TwoSiteRole::w_left_conj);
    env.w += two_site_environment(layer, op, rho, p, TwoSiteRole::w_right_conj);
  }
  env.u = Complex(1.0 / 3.0) * env.u;
  env.w = Complex(1.0 / 3.0) * env.w;
  return env;
}

namespace {

Tensor u_environment(const Layer& layer, const Matrix& op, const Matrix& rho) {
  Tensor env(layer.u.shape());
  for (int p = 0; p < 3; ++p) env += two_site_environment(layer, op, rho, p, TwoSiteRole::u_conj);
  return env;
}

Tensor w_environment(const Layer& layer, const Matrix& op, const Matrix& rho) {
  Tensor env(layer.w.shape());
  for (int p = 0; p < 3; ++p) {
    env += two_site_environment(layer, op, rho, p, TwoSiteRole::w_left_conj);
    env += two_site_environment(layer, op, rho, p, TwoSiteRole::w_right_conj);
  }
  return env;
}

// Minimizes Re Tr(x^H env) over isometries x.
Tensor polar_update(const Tensor& env, std::size_t row_legs) {
  const Matrix m = env.as_matrix(row_legs);
  const Matrix x = -svd_polar(m).isometry;
  return Tensor::from_matrix(x, env.shape());
}

void update_layer(Layer& layer, const Matrix& op, const Matrix& rho) {
  layer.u = polar_update(u_environment(layer, op, rho), 2);
  layer.w = polar_update(w_environment(layer, op, rho), std::size_t(layer.branching()));
}

Matrix scale_invariant_operator(const Layer& layer, const Matrix& h, int levels) {
  Matrix acc = h, cur = h;
  for (int k = 1; k < levels; ++k) {
    cur = ascend_two_site(cur, layer);
    acc += cur;
  }
  return acc;
}

double max_residual(const ScaleInvariantMera& m) {
  double r = layer_residual(m.layer);
  for (const auto& l : m.transitional) r = std::max(r, layer_residual(l));
  return r;
}

// Identity disentanglers with random isometries: a far better starting point than Haar-random u.
Layer initial_layer(int chi_in, int chi_out, std::uint64_t seed) {
  const Layer r = random_layer(chi_in, chi_out, 3, seed);
  return make_layer(Matrix::Identity(chi_in * chi_in, chi_in * chi_in), r.w_matrix(), 3);
}

}  // namespace

OptimizationResult optimize(const LocalHamiltonian& h, int chi, const OptimizeOptions& opts) {
  if (chi < 2) throw InvalidArgument("optimize: chi must be at least 2");
  std::vector<int> dims = opts.transitional_dims;
  if (dims.empty() && opts.auto_transitional && chi != h.d) dims.push_back(chi);
  std::vector<Layer> trans;
  int in = h.d;
  std::uint64_t seed = opts.seed;
  for (int out : dims) {
    if (out > in * in * in) throw InvalidArgument("optimize: transitional layer cannot grow beyond d^3");
    trans.push_back(initial_layer(in, out, seed++));
    in = out;
  }
  if (in != chi) throw InvalidArgument("optimize: transitional dimensions must end at chi");
  ScaleInvariantMera start = make_scale_invariant(initial_layer(chi, chi, seed + 1000), std::move(trans));
  return optimize(h, std::move(start), opts);
}

OptimizationResult optimize(const LocalHamiltonian& h, ScaleInvariantMera mera, const OptimizeOptions& opts) {
  if (std::size_t(h.h.rows()) != mera.site_dim(0) * mera.site_dim(0))
    throw InvalidArgument("optimize: Hamiltonian does not match the physical dimension");
  if ((h.h - h.h.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("optimize: Hamiltonian is not Hermitian");
  if (opts.environment_levels < 1 || opts.inner_iterations < 1) throw InvalidArgument("optimize: invalid iteration counts");

  const double shift = hermitian_eigenvalues(h.h).maxCoeff();
  const Matrix hs = h.h - shift * Matrix::Identity(h.h.rows(), h.h.cols());
  const int t = int(mera.transitional.size());

  OptimizationResult res;
  OptimizationReport& rep = res.report;
  Matrix warm;
  for (int sweep = 0; sweep <= opts.sweeps; ++sweep) {
    FixedPointDensity fp;
    if (warm.size() && opts.refresh_iterations > 0) {
      fp.rho2 = warm;
      for (int k = 0; k < opts.refresh_iterations; ++k) fp.rho2 = hermitize_normalize(descend_two_site(fp.rho2, mera.layer));
      fp.iterations = opts.refresh_iterations;
    } else {
      fp = fixed_point_density(mera, opts.fixed_point, warm.size() ? &warm : nullptr);
    }
    warm = fp.rho2;
    const std::vector<Matrix> rhos = level_densities(mera, fp.rho2);
    const double e = (h.h * rhos[0]).trace().real();
    rep.energies.push_back(e);
    rep.isometry_residuals.push_back(max_residual(mera));
    rep.sweeps = sweep;
    if (!std::isfinite(e)) throw NumericalError("optimize: non-finite energy at sweep " + std::to_string(sweep));
    if (opts.progress) opts.progress(sweep, e);
    if (opts.checkpoint && opts.checkpoint_every > 0 && sweep > 0 && sweep % opts.checkpoint_every == 0)
      opts.checkpoint(mera, rep);

    const std::size_t n = rep.energies.size();
    const auto w = std::size_t(opts.convergence_window);
    if (n > w && std::abs(rep.energies[n - 1] - rep.energies[n - 1 - w]) < opts.convergence_tol * std::abs(e)) {
      rep.converged = true;
      rep.message = "converged";
      break;
    }
    if (n > 30 && rep.energies[n - 1] - rep.energies[n - 11] > 1e-6) {
      rep.diverged = true;
      rep.message = "energy increased by more than 1e-6 over 10 sweeps";
      break;
    }
    if (sweep == opts.sweeps) {
      rep.message = "sweep limit reached";
      break;
    }

    Matrix op = hs;
    for (int l = 0; l < t; ++l) {
      Layer& layer = mera.transitional[std::size_t(l)];
      for (int it = 0; it < opts.inner_iterations; ++it) update_layer(layer, op, rhos[std::size_t(l + 1)]);
      op = ascend_two_site(op, layer);
    }
    for (int it = 0; it < opts.inner_iterations; ++it) {
      const Matrix heff_u = scale_invariant_operator(mera.layer, op, opts.environment_levels);
      mera.layer.u = polar_update(u_environment(mera.layer, heff_u, fp.rho2), 2);
      const Matrix heff_w = scale_invariant_operator(mera.layer, op, opts.environment_levels);
      mera.layer.w = polar_update(w_environment(mera.layer, heff_w, fp.rho2), 3);
    }
  }
  res.fixed_point = fixed_point_density(mera, opts.fixed_point, &warm);
  res.report.energies.back() = energy_per_site(mera, h, res.fixed_point);
  res.mera = std::move(mera);
  return res;
}

}  // namespace holomera
