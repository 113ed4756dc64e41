#pragma once

#include "pat/assembly.hpp"
#include "pat/series.hpp"

#include <vector>

namespace pat {

/// Optional by-products of a forward solve.
struct WaveDiagnostics {
    /// Discrete energy at the half levels t_{n+1/2}, n = 0..steps-1:
    /// E = 1/2 (v^T M v + p_{n+1}^T (K + B) p_n), v = (p_{n+1} - p_n)/dt.
    /// This is the quantity the central-difference scheme dissipates exactly.
    std::vector<double> energy;
    /// Set when f had nonzero boundary values and they were zeroed.
    bool boundary_masked = false;
};

/// Central-difference march of M p'' + C p' + (K + B) p = 0 from p = f,
/// p' = 0. Returns the boundary trace at every time level.
MeasurementSeries solve_forward(const SemidiscreteSystem& system, const NodalField& f, const TimeGrid& grid,
                                WaveDiagnostics* diagnostics = nullptr);
MeasurementSeries solve_forward(const SemidiscreteSystem& system, const NodalField& f, double final_time,
                                double dt);

/// Piezoelectric voltage from a pressure trace:
/// V = p - p(0) - kappa c_p^2 I2[lap_s p], I2 the twice-applied cumulative trapezoid rule.
MeasurementSeries measure_voltage(const SemidiscreteSystem& system, const MeasurementSeries& trace, double kappa,
                                  double c_p);

/// measure_voltage(solve_forward(f)) with the system's kappa and c_p.
MeasurementSeries forward(const SemidiscreteSystem& system, const NodalField& f, const TimeGrid& grid);
MeasurementSeries forward(const SemidiscreteSystem& system, const NodalField& f, double final_time, double dt);
/// Same map evaluated with a different film coefficient (kappa = 0 is the
/// Dirichlet interpretation of the data).
MeasurementSeries forward(const SemidiscreteSystem& system, const NodalField& f, const TimeGrid& grid, double kappa);

/// Cumulative trapezoid integral from t = 0 along each column.
SeriesMatrix cumulative_trapezoid(const SeriesMatrix& values, double dt);

/**
 * Transfers boundary data recorded on a finer mesh to the boundary of
 * another mesh: linear interpolation along the source boundary polygon in
 * space, and every `time_stride`-th level in time.
 */
MeasurementSeries resample_boundary(const MeasurementSeries& series, const Mesh& from, const Mesh& to,
                                    std::size_t time_stride = 1);

}  // namespace pat
