#pragma once

#include <string>
#include <vector>

#include "holomera/mera.hpp"
#include "holomera/optimizer.hpp"
#include "holomera/superoperator.hpp"

namespace holomera {

/// Correlator (or entropy) samples versus scale z with their metadata.
struct FlowCurve {
  std::vector<double> z;
  std::vector<double> value;
  double eta = 0.0;
  int alpha = -1;
  int beta = -1;
  std::string network_id;

  std::size_t size() const { return z.size(); }
  /// Throws InvalidArgument unless z is positive and strictly increasing and values are finite.
  void validate() const;
};

/// <a(x) b(y)> on a scale-invariant network, contracted exactly through the causal cones and
/// closed with the fixed-point two-site density once the cones meet.
Complex correlator_direct(const ScaleInvariantMera& net, const Matrix& rho2, const Matrix& a, const Matrix& b, long x, long y);

/// Separation b^q with both sites on block centres for q levels: x = (3^q - 1)/2, y = x + 3^q.
Complex correlator_at_scale(const ScaleInvariantMera& net, const Matrix& rho2, const Matrix& a, const Matrix& b, int q);

/// <a(x) b(y)> - <a(x)><b(y)> on a capped network.
Complex connected_correlator(const FiniteRangeMera& net, const Matrix& a, const Matrix& b, long x, long y);
Complex correlator_direct(const FiniteRangeMera& net, const Matrix& a, const Matrix& b, long x, long y);

/// Site whose base-b digits are all 1 for `levels` digits: a block centre at every scale up to the cap.
long centre_site(int b, int levels);

Complex correlator_predicted(Complex lambda_a, Complex lambda_b, int w, Complex c0);
double power_law(double z, double eta, double c1);

/// (z d/dz + eta) C / |C| at interior samples, differencing log|C| against log z.
std::vector<double> cs_residual(const FlowCurve& curve, double eta);
/// (z d/dz + eta z / z*) C / |C|, differencing log|C| against z.
std::vector<double> truncated_cs_residual(const FlowCurve& curve, double eta, double z_star);

/// z dC/dz at interior samples (log-spaced three-point stencil applied to log|C|).
std::vector<double> euler_derivative(const FlowCurve& curve);

struct CovarianceReport {
  int pairs = 0;
  double max_relative_deviation = 0.0;
};
/// Checks C(z e^u) = e^{-eta u} C(z) over all sample pairs at ratio e^u (eta from the curve).
CovarianceReport rescale_covariance(const FlowCurve& curve, double u);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double rms = 0.0;
  int points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CrossoverFit {
  double exponent = 0.0;
  double power_amplitude = 0.0;
  double power_r2 = 0.0;
  double power_rms = 0.0;
  int power_points = 0;
  double power_window_max = 0.0;

  double rate = 0.0;
  double exp_amplitude = 0.0;
  double exp_r2 = 0.0;
  double exp_rms = 0.0;
  int exp_points = 0;
  double exp_window_min = 0.0;

  /// exponent / rate, which equals z* for the sinh family.
  double crossover_scale = 0.0;
  bool exp_poorly_conditioned = false;
  bool power_poorly_conditioned = false;
  std::string diagnostics;
};

/// Power-law fit on z <= z*/3 and exponential fit on z >= 3 z*.
CrossoverFit crossover_fit(const FlowCurve& curve, double z_star);

FlowCurve holographic_ratio(const FlowCurve& curve, double c1);

std::string to_csv(const FlowCurve& curve, const std::vector<std::pair<std::string, std::vector<double>>>& extra = {});

}  // namespace holomera
