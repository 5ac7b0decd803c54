#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "holomera/correlator.hpp"

namespace holomera {

enum class GeometryKind { pure_ads, btz };

/// ds^2 = (dx^2 + dz^2 / f(z)) / z^2 with f = 1 - (z/z*)^2 for BTZ and f = 1 for pure AdS.
struct Geometry {
  GeometryKind kind = GeometryKind::pure_ads;
  double z_star = std::numeric_limits<double>::infinity();

  static Geometry pure_ads() { return {}; }
  static Geometry btz(double z_star);
  /// T = 1/z*; zero for pure AdS.
  double temperature() const { return 1.0 / z_star; }
};

double warp_factor(const Geometry& g, double z);
double emblackening(const Geometry& g, double z);
/// ds^2 for a displacement (dx, dz) at depth z.
double line_element(const Geometry& g, double z, double dx, double dz);

/// Both roots Delta of the indicial equation of (-box + m^2) z^{-Delta} = 0, larger first.
/// Throws InvalidArgument below the stability bound m^2 = -1/4.
std::pair<double, double> dimension_from_mass(double m2);
double mass_from_dimension(double delta);

/// max over grid nodes of |(-box + m^2) z^{-Delta}| / z^{-Delta}, with box = z^2 d^2/dz^2 taken by
/// a second-order central stencil in log z plus one Richardson step.
double radial_ode_residual(double m2, double delta, const std::vector<double>& grid);

std::vector<double> geometric_grid(double lo, double hi, int n);

/// log[z* sinh(z/z*)]; log z for infinite z*.
double geodesic_closed_form(double z, double z_star);

/// [z* sinh(z/z*)]^{-eta}.
double holo_propagator(double z, double z_star, double eta);

enum class GeodesicRegime { direct, horizon_wrapping };
std::string to_string(GeodesicRegime r);

struct GeodesicResult {
  double separation = 0.0;
  double cutoff = 0.0;
  double length = 0.0;
  double turning_point = 0.0;
  GeodesicRegime regime = GeodesicRegime::direct;
  /// Change of the length when the quadrature tolerance is tightened by 1e3.
  double refinement_change = 0.0;
};

/// Length of the boundary-anchored geodesic between points at depth `cutoff` separated by z.
/// Uses the x-translation first integral and turning-point quadrature; for z > wrap_ratio * z*
/// the length is continued by a horizontal run along the horizon.
GeodesicResult geodesic_numeric(double z, const Geometry& g, double cutoff, double wrap_ratio = 18.0);

struct GeodesicFormFit {
  double kappa = 0.0;
  double offset = 0.0;
  double max_residual = 0.0;
  double rms = 0.0;
};

/// Least-squares fit length = kappa * log[z* sinh(z/z*)] + offset.
GeodesicFormFit fit_geodesic_form(const std::vector<double>& z, const std::vector<double>& length, double z_star);

/// Literal evaluation of (z d/dz - z dPhi/dz d/dPhi) C / |C| with Phi = z^{-Delta} and C ~ Phi^2,
/// so d/dPhi C = 2 C / Phi. z dPhi/dz is differenced on the same samples as z dC/dz.
std::vector<double> holographic_cs_residual(const FlowCurve& curve, double delta);

}  // namespace holomera
