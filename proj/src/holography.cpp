#include "holomera/holography.hpp"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

namespace holomera {

Geometry Geometry::btz(double z_star) {
  if (!(z_star > 0.0)) throw InvalidArgument("btz: horizon depth must be positive");
  return {GeometryKind::btz, z_star};
}

double warp_factor(const Geometry&, double z) {
  if (!(z > 0.0)) throw InvalidArgument("warp_factor: z must be positive");
  return 1.0 / z;
}

double emblackening(const Geometry& g, double z) {
  if (g.kind == GeometryKind::pure_ads || std::isinf(g.z_star)) return 1.0;
  const double r = z / g.z_star;
  return 1.0 - r * r;
}

double line_element(const Geometry& g, double z, double dx, double dz) {
  const double a = warp_factor(g, z);
  return a * a * (dx * dx + dz * dz / emblackening(g, z));
}

std::pair<double, double> dimension_from_mass(double m2) {
  const double disc = 1.0 + 4.0 * m2;
  if (disc < 0.0) throw InvalidArgument("dimension_from_mass: m^2 below the stability bound -1/4");
  const double root = std::sqrt(disc);
  return {0.5 * (-1.0 + root), 0.5 * (-1.0 - root)};
}

double mass_from_dimension(double delta) { return delta * (delta + 1.0); }

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidArgument("geometric_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[std::size_t(i)] = lo * std::pow(hi / lo, double(i) / double(n - 1));
  z.back() = hi;
  return z;
}

namespace {

// z^2 Phi'' = (theta^2 - theta) Phi with theta = d/dt, t = log z.
double euler_laplacian(double (*phi)(double, double), double s, double z, double h) {
  const double t = std::log(z);
  const double p0 = phi(t, s), pp = phi(t + h, s), pm = phi(t - h, s);
  const double d2 = (pp - 2.0 * p0 + pm) / (h * h);
  const double d1 = (pp - pm) / (2.0 * h);
  return d2 - d1;
}

double power_of_exp(double t, double s) { return std::exp(s * t); }

}  // namespace

double radial_ode_residual(double m2, double delta, const std::vector<double>& grid) {
  if (grid.size() < 5) throw InvalidArgument("radial_ode_residual: grid needs at least 5 points");
  for (double z : grid)
    if (!(z > 0.0)) throw InvalidArgument("radial_ode_residual: grid points must be positive");
  const double s = -delta;
  const double h = 1e-2;
  double worst = 0.0;
  for (double z : grid) {
    const double coarse = euler_laplacian(power_of_exp, s, z, h);
    const double fine = euler_laplacian(power_of_exp, s, z, 0.5 * h);
    const double lap = (4.0 * fine - coarse) / 3.0;
    const double phi = std::pow(z, s);
    worst = std::max(worst, std::abs(-lap + m2 * phi) / std::abs(phi));
  }
  return worst;
}

double geodesic_closed_form(double z, double z_star) {
  if (!(z > 0.0) || !(z_star > 0.0)) throw InvalidArgument("geodesic_closed_form: z and z* must be positive");
  if (std::isinf(z_star)) return std::log(z);
  const double u = z / z_star;
  // log sinh u = u - log 2 + log(1 - e^{-2u}), stable for large u.
  return std::log(z_star) + u - std::log(2.0) + std::log1p(-std::exp(-2.0 * u));
}

double holo_propagator(double z, double z_star, double eta) {
  if (!(eta >= 0.0)) throw InvalidArgument("holo_propagator: eta must be non-negative");
  if (eta == 0.0) return 1.0;
  return std::exp(-eta * geodesic_closed_form(z, z_star));
}

std::string to_string(GeodesicRegime r) { return r == GeodesicRegime::direct ? "direct" : "horizon-wrapping"; }

namespace {

// With z = z_t sin(theta) and k = z_t / z*:
//   separation / 2 = z_t * int_{theta_eps}^{pi/2} sin(theta) / sqrt(1 - k^2 sin^2 theta)
//   length / 2     =       int_{theta_eps}^{pi/2} 1 / (sin(theta) sqrt(1 - k^2 sin^2 theta))
struct Quadrature {
  double tol;
  double separation(double zt, double k, double cutoff) const {
    const double th0 = std::asin(std::min(1.0, cutoff / zt));
    boost::math::quadrature::tanh_sinh<double> q;
    auto f = [k](double th) {
      const double s = std::sin(th);
      return s / std::sqrt((1.0 - k * s) * (1.0 + k * s));
    };
    return 2.0 * zt * q.integrate(f, th0, M_PI / 2, tol);
  }
  double length(double zt, double k, double cutoff) const {
    const double th0 = std::asin(std::min(1.0, cutoff / zt));
    boost::math::quadrature::tanh_sinh<double> q;
    auto f = [k](double th) {
      const double s = std::sin(th);
      return 1.0 / (s * std::sqrt((1.0 - k * s) * (1.0 + k * s)));
    };
    return 2.0 * q.integrate(f, th0, M_PI / 2, tol);
  }
};

struct Solved {
  double zt, length;
};

Solved solve_geodesic(double z, const Geometry& g, double cutoff, double tol) {
  const Quadrature quad{tol};
  if (g.kind == GeometryKind::pure_ads || std::isinf(g.z_star)) {
    // Separation is linear in z_t at k = 0.
    const double unit = quad.separation(1.0, 0.0, cutoff / (0.5 * z));
    const double zt = z / unit;
    return {zt, quad.length(zt, 0.0, cutoff)};
  }
  const double zs = g.z_star;
  // Solve separation(k) = z over the turning ratio k = z_t / z* in (0, 1).
  auto gap = [&](double k) { return quad.separation(k * zs, k, cutoff) - z; };
  double lo = std::min(0.5, 0.25 * z / zs), hi = 1.0 - 1e-15;
  while (gap(lo) > 0.0) lo *= 0.5;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(gap, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  const double k = 0.5 * (r.first + r.second);
  return {k * zs, quad.length(k * zs, k, cutoff)};
}

}  // namespace

GeodesicResult geodesic_numeric(double z, const Geometry& g, double cutoff, double wrap_ratio) {
  if (!(z > 0.0)) throw InvalidArgument("geodesic_numeric: separation must be positive");
  if (!(cutoff > 0.0) || cutoff >= 0.5 * z || cutoff >= 0.5 * g.z_star)
    throw InvalidArgument("geodesic_numeric: cutoff must be small compared with the separation and z*");
  GeodesicResult out;
  out.separation = z;
  out.cutoff = cutoff;
  const bool btz = g.kind == GeometryKind::btz && std::isfinite(g.z_star);
  double solve_at = z;
  if (btz && z > wrap_ratio * g.z_star) {
    out.regime = GeodesicRegime::horizon_wrapping;
    solve_at = wrap_ratio * g.z_star;
  }
  const Solved loose = solve_geodesic(solve_at, g, cutoff, 1e-9);
  const Solved tight = solve_geodesic(solve_at, g, cutoff, 1e-12);
  out.turning_point = tight.zt;
  out.length = tight.length;
  out.refinement_change = std::abs(tight.length - loose.length) / std::max(1.0, std::abs(tight.length));
  // The horizontal run along z ~ z* has length dx / z*.
  if (out.regime == GeodesicRegime::horizon_wrapping) out.length += (z - solve_at) / g.z_star;
  if (!std::isfinite(out.length)) throw NumericalError("geodesic_numeric: quadrature did not converge");
  return out;
}

GeodesicFormFit fit_geodesic_form(const std::vector<double>& z, const std::vector<double>& length, double z_star) {
  if (z.size() != length.size() || z.size() < 3) throw InvalidArgument("fit_geodesic_form: need at least 3 samples");
  std::vector<double> x;
  for (double v : z) x.push_back(geodesic_closed_form(v, z_star));
  const LineFit lf = fit_line(x, length);
  GeodesicFormFit f;
  f.kappa = lf.slope;
  f.offset = lf.intercept;
  f.rms = lf.rms;
  for (std::size_t i = 0; i < z.size(); ++i)
    f.max_residual = std::max(f.max_residual, std::abs(length[i] - (f.offset + f.kappa * x[i])));
  return f;
}

std::vector<double> holographic_cs_residual(const FlowCurve& curve, double delta) {
  const std::vector<double> zdc = euler_derivative(curve);
  FlowCurve phi;
  phi.z = curve.z;
  for (double z : curve.z) phi.value.push_back(std::pow(z, -delta));
  const std::vector<double> zdphi = euler_derivative(phi);
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double c = curve.value[i];
    const double dphi_c = 2.0 * c / phi.value[i];
    out.push_back((zdc[i - 1] - zdphi[i - 1] * dphi_c) / std::abs(c));
  }
  return out;
}

}  // namespace holomera
