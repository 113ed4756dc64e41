#pragma once

#include "pat/series.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace pat {

enum class NoiseColor { white, pink, red };

NoiseColor parse_noise_color(std::string_view name);
std::string_view to_string(NoiseColor color);

struct NoiseSpec {
    NoiseColor color = NoiseColor::white;
    double level = 0.0;  ///< relative L2 perturbation
    std::uint64_t seed = 0;
};

/// SplitMix64 step; used to derive independent per-channel seeds.
std::uint64_t splitmix64(std::uint64_t x);

/**
 * Independent colored noise per boundary channel, synthesized in the
 * frequency domain with MT19937-64 random phases and amplitude |f|^{-beta/2}
 * (beta = 0, 1, 2 for white, pink, red). The DC bin is zero and the whole
 * series is scaled to unit RMS.
 */
MeasurementSeries colored_noise(std::size_t nt, std::size_t nb, double dt, const NoiseSpec& spec);

/// V + level * |V| * n / |n| in the plain discrete L2 norm over all samples.
MeasurementSeries add_noise(const MeasurementSeries& v, const NoiseSpec& spec);

struct WelchOptions {
    std::size_t segment_length = 0;  ///< 0 picks nt / 4.5 (about 8 half-overlapping segments)
    double overlap = 0.5;
    double taper = 0.2;              ///< Tukey cosine-taper fraction; 1 is a Hann window
};

struct PowerSpectrum {
    std::vector<double> frequency;  ///< cycles per unit time, 0 .. 1/(2 dt)
    std::vector<double> power;      ///< one-sided density
    std::size_t segments = 0;       ///< segments averaged per channel

    double bin_width() const { return frequency.size() > 1 ? frequency[1] - frequency[0] : 0.0; }
};

/// Segment-averaged periodogram with per-segment mean removal, averaged over
/// all channels. Sum of power * bin_width approximates the signal variance.
PowerSpectrum psd_estimate(const MeasurementSeries& series, const WelchOptions& options = {});

/// Least-squares slope of log10(power) against log10(frequency) over the
/// decade centered geometrically between the first nonzero bin and Nyquist.
double central_decade_slope(const PowerSpectrum& spectrum);

/// Mean power over bins with frequency in [lo, hi].
double band_mean(const PowerSpectrum& spectrum, double lo, double hi);

}  // namespace pat
