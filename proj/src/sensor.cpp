#include "pat/sensor.hpp"

#include "pat/errors.hpp"

#include <cmath>
#include <numbers>

namespace pat::sensor {

double kappa(double nu, double d_ratio) {
    const double denom = 1.0 - nu * (1.0 - 2.0 * d_ratio);
    if (std::abs(denom) < 1e-12) throw InputError("kappa: singular denominator for nu = " + std::to_string(nu));
    return (1.0 - 2.0 * nu) * (1.0 - d_ratio) / denom;
}

double reflection_coefficient(double theta, double alpha) {
    const double c = std::cos(theta);
    return (c - alpha) / (c + alpha);
}

double directivity(double theta, double c, double c_p, double kappa, double alpha) {
    const double s = std::sin(theta);
    const double ratio = c_p / c;
    return (1.0 + reflection_coefficient(theta, alpha)) * (1.0 - kappa * ratio * ratio * s * s);
}

double to_decibels(double linear, double floor_db) {
    const double mag = std::abs(linear);
    if (mag == 0.0) return floor_db;
    return std::max(floor_db, 20.0 * std::log10(mag));
}

std::optional<double> critical_angle(double c, double c_p, double kappa) {
    if (!(kappa > 0.0)) return std::nullopt;
    const double s = c / (c_p * std::sqrt(kappa));
    if (s > 1.0) return std::nullopt;
    return std::asin(s);
}

std::complex<double> layered_reflection_exact(double omega, double epsilon, double z, double z_p, double z_b,
                                              double c_p) {
    using namespace std::complex_literals;
    // Film field p = A e^{ik(x - eps)} + B e^{-ik(x - eps)}; only an outgoing
    // wave in the backing fixes B/A, then the input impedance at x = 0 gives R.
    const double k = omega / c_p;
    const std::complex<double> r = (z_b - z_p) / (z_b + z_p);
    const std::complex<double> down = std::exp(-1i * k * epsilon);
    const std::complex<double> up = std::exp(1i * k * epsilon);
    const std::complex<double> z_in = z_p * (down + r * up) / (down - r * up);
    return (z_in - z) / (z_in + z);
}

std::vector<DirectivitySample> directivity_sweep(double c, double c_p, double kappa, double alpha,
                                                 std::size_t samples) {
    std::vector<DirectivitySample> out;
    if (samples < 2) samples = 2;
    out.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double deg = 90.0 * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double lin = directivity(deg * std::numbers::pi / 180.0, c, c_p, kappa, alpha);
        out.push_back({deg, lin, to_decibels(lin)});
    }
    return out;
}

}  // namespace pat::sensor
