#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace pat::sensor {

/// Film coefficient from Poisson's ratio and the ratio d_perp / d of the
/// transverse to thickness piezoelectric constants.
double kappa(double nu, double d_ratio);

/// Plane-wave reflection off the impedance boundary, alpha = rho c / (rho_b c_b).
double reflection_coefficient(double theta, double alpha);

/// Voltage per unit incident pressure at incidence angle theta.
double directivity(double theta, double c, double c_p, double kappa, double alpha);

/// 20 log10 |x|, floored at floor_db.
double to_decibels(double linear, double floor_db = -60.0);

/// Incidence angle of vanishing response; empty when kappa <= c^2 / c_p^2.
std::optional<double> critical_angle(double c, double c_p, double kappa);

/**
 * Exact normal-incidence reflection coefficient of a fluid half-space
 * (impedance z) over a film of thickness epsilon (impedance z_p, speed c_p)
 * on a backing half-space (impedance z_b). Time dependence exp(-i omega t).
 */
std::complex<double> layered_reflection_exact(double omega, double epsilon, double z, double z_p, double z_b,
                                              double c_p);

struct DirectivitySample {
    double theta_deg;
    double linear;
    double decibels;
};

std::vector<DirectivitySample> directivity_sweep(double c, double c_p, double kappa, double alpha,
                                                 std::size_t samples);

}  // namespace pat::sensor
