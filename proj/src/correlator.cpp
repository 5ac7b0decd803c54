#include "holomera/correlator.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace holomera {

void FlowCurve::validate() const {
  if (z.size() != value.size()) throw InvalidArgument("flow curve: z and value lengths differ");
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] > 0.0) || !std::isfinite(z[i])) throw InvalidArgument("flow curve: scales must be positive and finite");
    if (i > 0 && !(z[i] > z[i - 1])) throw InvalidArgument("flow curve: scales must be strictly increasing");
    if (!std::isfinite(value[i])) throw InvalidArgument("flow curve: non-finite value");
  }
}

// -- direct evaluation --------------------------------------------------------------------------

namespace {

Complex pair_expectation(const SiteDensity& d, const Matrix& a, const Matrix& b, long x, long y) {
  if (x == y) return expectation(d, {x}, {a * b});
  return expectation(d, {x, y}, {a, b});
}

std::vector<long> sorted_pair(long x, long y) {
  if (x == y) return {x};
  return x < y ? std::vector<long>{x, y} : std::vector<long>{y, x};
}

}  // namespace

long centre_site(int b, int levels) {
  long x = 0, p = 1;
  for (int k = 0; k < levels; ++k, p *= b) x += p;
  return x;
}

Complex correlator_direct(const ScaleInvariantMera& net, const Matrix& rho2, const Matrix& a, const Matrix& b, long x, long y) {
  const auto d = std::size_t(net.site_dim(0));
  if (std::size_t(a.rows()) != d || std::size_t(b.rows()) != d) throw InvalidArgument("correlator: operator dimension mismatch");
  return pair_expectation(window_density(net, rho2, sorted_pair(x, y)), a, b, x, y);
}

Complex correlator_at_scale(const ScaleInvariantMera& net, const Matrix& rho2, const Matrix& a, const Matrix& b, int q) {
  if (q < 0) throw InvalidArgument("correlator_at_scale: q must be non-negative");
  long r = 1;
  for (int k = 0; k < q; ++k) r *= net.b;
  const long x = centre_site(net.b, q);
  return correlator_direct(net, rho2, a, b, x, x + r);
}

Complex correlator_direct(const FiniteRangeMera& net, const Matrix& a, const Matrix& b, long x, long y) {
  if (a.rows() != net.chi || b.rows() != net.chi) throw InvalidArgument("correlator: operator dimension mismatch");
  return pair_expectation(window_density(net, sorted_pair(x, y)), a, b, x, y);
}

Complex connected_correlator(const FiniteRangeMera& net, const Matrix& a, const Matrix& b, long x, long y) {
  if (a.rows() != net.chi || b.rows() != net.chi) throw InvalidArgument("correlator: operator dimension mismatch");
  const SiteDensity d = window_density(net, sorted_pair(x, y));
  const Complex ab = pair_expectation(d, a, b, x, y);
  return ab - expectation(d, {x}, {a}) * expectation(d, {y}, {b});
}

Complex correlator_predicted(Complex lambda_a, Complex lambda_b, int w, Complex c0) {
  if (w < 0) throw InvalidArgument("correlator_predicted: w must be non-negative");
  return std::pow(lambda_a * lambda_b, w) * c0;
}

double power_law(double z, double eta, double c1) {
  if (!(z > 0.0)) throw InvalidArgument("power_law: z must be positive");
  return std::pow(z, -eta) * c1;
}

// -- flow residuals -----------------------------------------------------------------------------

namespace {

// Three-point derivative of f at t[i] on a non-uniform grid; exact for quadratics.
double three_point(const std::vector<double>& t, const std::vector<double>& f, std::size_t i) {
  const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
  return (-h2 / (h1 * (h1 + h2))) * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] + (h1 / (h2 * (h1 + h2))) * f[i + 1];
}

bool same_sign_nonzero(const std::vector<double>& v, std::size_t i) {
  const double s = v[i];
  return s != 0.0 && v[i - 1] * s > 0.0 && v[i + 1] * s > 0.0;
}

void require_samples(const FlowCurve& c) {
  c.validate();
  if (c.size() < 3) throw InvalidArgument("flow residual: at least 3 samples are required");
}

// d C / d t at interior samples. Where C keeps its sign the derivative of log|C| is used, which is
// exact for the family matching the chosen variable t.
std::vector<double> derivative_in(const FlowCurve& c, const std::vector<double>& t) {
  std::vector<double> logc(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) logc[i] = c.value[i] != 0.0 ? std::log(std::abs(c.value[i])) : 0.0;
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    if (same_sign_nonzero(c.value, i)) out.push_back(c.value[i] * three_point(t, logc, i));
    else out.push_back(three_point(t, c.value, i));
  }
  return out;
}

}  // namespace

std::vector<double> euler_derivative(const FlowCurve& curve) {
  require_samples(curve);
  std::vector<double> y(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) y[i] = std::log(curve.z[i]);
  return derivative_in(curve, y);
}

std::vector<double> cs_residual(const FlowCurve& curve, double eta) {
  const std::vector<double> zdc = euler_derivative(curve);
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double c = curve.value[i];
    out.push_back((zdc[i - 1] + eta * c) / std::abs(c));
  }
  return out;
}

std::vector<double> truncated_cs_residual(const FlowCurve& curve, double eta, double z_star) {
  require_samples(curve);
  if (!(z_star > 0.0)) throw InvalidArgument("truncated_cs_residual: z* must be positive");
  const std::vector<double> dc = derivative_in(curve, curve.z);
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double z = curve.z[i], c = curve.value[i];
    const double rate = std::isinf(z_star) ? 0.0 : eta * z / z_star;
    out.push_back((z * dc[i - 1] + rate * c) / std::abs(c));
  }
  return out;
}

CovarianceReport rescale_covariance(const FlowCurve& curve, double u) {
  curve.validate();
  CovarianceReport rep;
  const double ratio = std::exp(u);
  for (std::size_t i = 0; i < curve.size(); ++i)
    for (std::size_t j = 0; j < curve.size(); ++j) {
      if (std::abs(curve.z[j] / curve.z[i] - ratio) > 1e-9 * ratio) continue;
      if (u == 0.0 && i != j) continue;
      const double expected = std::exp(-curve.eta * u) * curve.value[i];
      const double dev = std::abs(curve.value[j] - expected) / std::max(std::abs(expected), 1e-300);
      rep.max_relative_deviation = std::max(rep.max_relative_deviation, dev);
      ++rep.pairs;
    }
  if (rep.pairs == 0) throw InvalidArgument("rescale_covariance: no sample pairs at the requested ratio");
  return rep;
}

// -- fits ---------------------------------------------------------------------------------------

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line: need at least two points");
  const auto n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_line: degenerate abscissae");
  LineFit f;
  f.points = int(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  f.r2 = syy > 0 ? 1.0 - ss / syy : (ss == 0.0 ? 1.0 : 0.0);
  return f;
}

CrossoverFit crossover_fit(const FlowCurve& curve, double z_star) {
  curve.validate();
  if (!(z_star > 0.0)) throw InvalidArgument("crossover_fit: z* must be positive");
  if (curve.z.front() > z_star / 3.0 || curve.z.back() < 3.0 * z_star)
    throw InvalidArgument("crossover_fit: samples must span z <= z*/3 and z >= 3 z*");
  CrossoverFit out;
  out.power_window_max = z_star / 3.0;
  out.exp_window_min = 3.0 * z_star;
  std::ostringstream diag;

  std::vector<double> px, py, ex, ey;
  bool power_bad_value = false, exp_bad_value = false;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double z = curve.z[i], v = curve.value[i];
    if (z <= out.power_window_max) {
      if (!(v > 0.0)) power_bad_value = true;
      else {
        px.push_back(std::log(z));
        py.push_back(std::log(v));
      }
    } else if (z >= out.exp_window_min) {
      if (!(v > 0.0)) exp_bad_value = true;
      else {
        ex.push_back(z);
        ey.push_back(std::log(v));
      }
    }
  }
  out.power_points = int(px.size());
  out.exp_points = int(ex.size());

  if (px.size() >= 2) {
    const LineFit f = fit_line(px, py);
    out.exponent = -f.slope;
    out.power_amplitude = std::exp(f.intercept);
    out.power_r2 = f.r2;
    out.power_rms = f.rms;
  }
  out.power_poorly_conditioned = power_bad_value || px.size() < 3 || out.power_r2 < 0.999;
  if (power_bad_value) diag << "power window contains non-positive values; ";
  if (px.size() < 3) diag << "power window has fewer than 3 usable points; ";

  if (ex.size() >= 2) {
    const LineFit f = fit_line(ex, ey);
    out.rate = -f.slope;
    out.exp_amplitude = std::exp(f.intercept);
    out.exp_r2 = f.r2;
    out.exp_rms = f.rms;
  }
  out.exp_poorly_conditioned = exp_bad_value || ex.size() < 3 || out.exp_r2 < 0.999;
  if (exp_bad_value) diag << "exponential window contains non-positive values; ";
  if (ex.size() < 3) diag << "exponential window has fewer than 3 usable points; ";
  if (ex.size() >= 3 && out.exp_r2 < 0.999) diag << "exponential fit R^2 below 0.999; ";
  if (ex.size() >= 3 && px.size() >= 3 && out.power_r2 < 0.999) diag << "power fit R^2 below 0.999; ";

  out.crossover_scale = out.rate != 0.0 ? out.exponent / out.rate : std::numeric_limits<double>::infinity();
  out.diagnostics = diag.str();
  return out;
}

FlowCurve holographic_ratio(const FlowCurve& curve, double c1) {
  if (c1 == 0.0) throw InvalidArgument("holographic_ratio: C1 must be nonzero");
  FlowCurve out = curve;
  for (double& v : out.value) v /= c1;
  return out;
}

std::string to_csv(const FlowCurve& curve, const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "z,value,eta,alpha,beta,network-id";
  for (const auto& [name, col] : extra) os << ',' << name;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    os << curve.z[i] << ',' << curve.value[i] << ',' << curve.eta << ',' << curve.alpha << ',' << curve.beta << ','
       << curve.network_id;
    for (const auto& [name, col] : extra) {
      os << ',';
      if (i < col.size() && std::isfinite(col[i])) os << col[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace holomera
