#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace pat {

/// Real value per mesh node.
struct NodalField {
    Eigen::VectorXd values;

    NodalField() = default;
    explicit NodalField(Eigen::VectorXd v) : values(std::move(v)) {}
    static NodalField zeros(std::size_t n) { return NodalField(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))); }

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

enum class SeriesKind : std::uint8_t { pressure_trace, voltage, adjoint_source, noise };

std::string_view to_string(SeriesKind kind);

using SeriesMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Time x boundary-node samples; row n holds time level t = n*dt.
struct MeasurementSeries {
    SeriesKind kind = SeriesKind::voltage;
    double dt = 0.0;
    SeriesMatrix values;

    std::size_t nt() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t nb() const noexcept { return static_cast<std::size_t>(values.cols()); }
    /// Time of the last level.
    double final_time() const noexcept { return dt * static_cast<double>(nt() > 0 ? nt() - 1 : 0); }

    static MeasurementSeries zeros(SeriesKind kind, std::size_t nt, std::size_t nb, double dt);
};

/// Uniform time levels t_n = n*dt, n = 0..steps, with steps*dt = final time.
struct TimeGrid {
    double dt = 0.0;
    std::size_t steps = 0;

    double final_time() const noexcept { return dt * static_cast<double>(steps); }
    std::size_t levels() const noexcept { return steps + 1; }

    /// Smallest number of steps with dt <= max_dt that lands exactly on T.
    static TimeGrid fit(double final_time, double max_dt);
};

/// Composite trapezoid weights for nt levels spaced dt apart.
Eigen::VectorXd trapezoid_weights(std::size_t nt, double dt);

/// Space-time inner product: trapezoid in time, diagonal boundary_weights in space.
double series_inner(const MeasurementSeries& a, const MeasurementSeries& b,
                    const Eigen::VectorXd& boundary_weights);
double series_norm(const MeasurementSeries& a, const Eigen::VectorXd& boundary_weights);

// File formats. The binary layout is `PATMEAS1`, u64 Nt, u64 Nb, f64 dt,
// then Nt*Nb f64 samples in time-major order, all little-endian.
void write_series(const MeasurementSeries& series, const std::filesystem::path& path);
MeasurementSeries read_series(const std::filesystem::path& path, SeriesKind kind = SeriesKind::voltage);
void write_series_csv(const MeasurementSeries& series, const std::filesystem::path& path,
                      std::string_view header = {});

// `PATFIELD 1`, N, then N values one per line.
void write_field(const NodalField& field, const std::filesystem::path& path);
NodalField read_field(const std::filesystem::path& path);

/// Write to a temporary sibling file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Prefixes every line of text with "# ".
std::string comment_block(std::string_view text);

}  // namespace pat
