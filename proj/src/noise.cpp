#include "pat/noise.hpp"

#include "pat/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

namespace pat {

namespace {

// fftw planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n),
          real_(fftw_alloc_real(n)),
          spectrum_(fftw_alloc_complex(n / 2 + 1)) {
        std::lock_guard lock(planner_mutex());
        const int size = static_cast<int>(n);
        forward_ = fftw_plan_dft_r2c_1d(size, real_, spectrum_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(size, spectrum_, real_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(real_);
        fftw_free(spectrum_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* real() { return real_; }
    std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spectrum_); }
    void forward() { fftw_execute(forward_); }
    /// Unnormalized: the result is n times the inverse DFT.
    void inverse() { fftw_execute(inverse_); }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    double* real_;
    fftw_complex* spectrum_;
    fftw_plan forward_{};
    fftw_plan inverse_{};
};

double exponent(NoiseColor color) {
    switch (color) {
        case NoiseColor::white: return 0.0;
        case NoiseColor::pink: return 1.0;
        case NoiseColor::red: return 2.0;
    }
    return 0.0;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> tukey_window(std::size_t n, double taper) {
    std::vector<double> w(n, 1.0);
    if (taper <= 0.0 || n < 2) return w;
    taper = std::min(taper, 1.0);
    const double edge = 0.5 * taper * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        const double from_end = static_cast<double>(n) - x;
        const double d = std::min(x, from_end);
        if (d < edge) w[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * d / edge));
    }
    return w;
}

}  // namespace

NoiseColor parse_noise_color(std::string_view name) {
    if (name == "white") return NoiseColor::white;
    if (name == "pink") return NoiseColor::pink;
    if (name == "red" || name == "brown" || name == "brownian") return NoiseColor::red;
    throw InputError("unknown noise color '" + std::string(name) + "'");
}

std::string_view to_string(NoiseColor color) {
    switch (color) {
        case NoiseColor::white: return "white";
        case NoiseColor::pink: return "pink";
        case NoiseColor::red: return "red";
    }
    return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

MeasurementSeries colored_noise(std::size_t nt, std::size_t nb, double dt, const NoiseSpec& spec) {
    if (nt < 8) throw InputError("colored_noise: need at least 8 time levels");
    MeasurementSeries out = MeasurementSeries::zeros(SeriesKind::noise, nt, nb, dt);
    const double beta = exponent(spec.color);
    RealFft fft(nt);
    const std::size_t bins = nt / 2 + 1;

    for (std::size_t ch = 0; ch < nb; ++ch) {
        std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(ch + 1)));
        auto* z = fft.spectrum();
        z[0] = 0.0;
        for (std::size_t k = 1; k < bins; ++k) {
            const double amp = std::pow(static_cast<double>(k), -0.5 * beta);
            const double phase = 2.0 * std::numbers::pi * unit_uniform(rng);
            z[k] = std::polar(amp, phase);
        }
        if (nt % 2 == 0) z[bins - 1] = std::abs(z[bins - 1]) * (z[bins - 1].real() >= 0.0 ? 1.0 : -1.0);
        fft.inverse();
        for (std::size_t n = 0; n < nt; ++n) {
            out.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ch)) = fft.real()[n];
        }
    }
    const double rms = std::sqrt(out.values.squaredNorm() / static_cast<double>(out.values.size()));
    if (rms > 0.0) out.values /= rms;
    return out;
}

MeasurementSeries add_noise(const MeasurementSeries& v, const NoiseSpec& spec) {
    if (spec.level < 0.0) throw InputError("add_noise: level must be non-negative");
    MeasurementSeries out = v;
    if (spec.level == 0.0) return out;
    const double norm_v = v.values.norm();
    if (norm_v == 0.0) throw InputError("add_noise: cannot scale noise relative to zero data");
    const MeasurementSeries n = colored_noise(v.nt(), v.nb(), v.dt, spec);
    out.values += (spec.level * norm_v / n.values.norm()) * n.values;
    return out;
}

PowerSpectrum psd_estimate(const MeasurementSeries& series, const WelchOptions& options) {
    const std::size_t nt = series.nt();
    std::size_t len = options.segment_length;
    if (len == 0) len = static_cast<std::size_t>(static_cast<double>(nt) / 4.5);
    if (len < 4 || len > nt) {
        throw InputError("psd_estimate: segment length " + std::to_string(len) + " does not fit " +
                         std::to_string(nt) + " samples");
    }
    if (!(options.overlap >= 0.0 && options.overlap < 1.0)) throw InputError("psd_estimate: overlap must be in [0,1)");
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(len) * (1.0 - options.overlap))));
    const std::size_t segments = (nt - len) / hop + 1;

    const std::vector<double> window = tukey_window(len, options.taper);
    double window_power = 0.0;
    for (double w : window) window_power += w * w;

    const double fs = 1.0 / series.dt;
    const std::size_t bins = len / 2 + 1;
    PowerSpectrum spectrum;
    spectrum.segments = segments;
    spectrum.frequency.resize(bins);
    spectrum.power.assign(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) spectrum.frequency[k] = fs * static_cast<double>(k) / static_cast<double>(len);

    RealFft fft(len);
    for (std::size_t ch = 0; ch < series.nb(); ++ch) {
        const auto column = series.values.col(static_cast<Eigen::Index>(ch));
        for (std::size_t s = 0; s < segments; ++s) {
            const std::size_t start = s * hop;
            double mean = 0.0;
            for (std::size_t i = 0; i < len; ++i) mean += column[static_cast<Eigen::Index>(start + i)];
            mean /= static_cast<double>(len);
            for (std::size_t i = 0; i < len; ++i) {
                fft.real()[i] = (column[static_cast<Eigen::Index>(start + i)] - mean) * window[i];
            }
            fft.forward();
            for (std::size_t k = 0; k < bins; ++k) {
                const bool edge = (k == 0) || (len % 2 == 0 && k == bins - 1);
                spectrum.power[k] += (edge ? 1.0 : 2.0) * std::norm(fft.spectrum()[k]);
            }
        }
    }
    const double scale = 1.0 / (fs * window_power * static_cast<double>(segments) *
                                static_cast<double>(std::max<std::size_t>(1, series.nb())));
    for (double& p : spectrum.power) p *= scale;
    return spectrum;
}

double central_decade_slope(const PowerSpectrum& spectrum) {
    if (spectrum.frequency.size() < 3) throw InputError("central_decade_slope: spectrum too short");
    const double f1 = spectrum.frequency[1];
    const double fn = spectrum.frequency.back();
    const double center = std::sqrt(f1 * fn);
    const double lo = center / std::sqrt(10.0), hi = center * std::sqrt(10.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t k = 1; k < spectrum.frequency.size(); ++k) {
        const double f = spectrum.frequency[k];
        if (f < lo || f > hi || spectrum.power[k] <= 0.0) continue;
        const double x = std::log10(f), y = std::log10(spectrum.power[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 3) throw InputError("central_decade_slope: fewer than 3 bins in the central decade");
    const double nc = static_cast<double>(count);
    return (nc * sxy - sx * sy) / (nc * sxx - sx * sx);
}

double band_mean(const PowerSpectrum& spectrum, double lo, double hi) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < spectrum.frequency.size(); ++k) {
        if (spectrum.frequency[k] >= lo && spectrum.frequency[k] <= hi) {
            sum += spectrum.power[k];
            ++count;
        }
    }
    if (count == 0) throw InputError("band_mean: no bins in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return sum / static_cast<double>(count);
}

}  // namespace pat
