#include "pat/wavesim.hpp"

#include "pat/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pat {

namespace {

void check_grid(const SemidiscreteSystem& system, const TimeGrid& grid) {
    if (grid.steps == 0 || !(grid.dt > 0.0)) throw InputError("time grid needs dt > 0 and at least one step");
    if (grid.dt > system.stability_limit()) {
        throw StabilityError("time step " + std::to_string(grid.dt) + " exceeds the stability limit " +
                             std::to_string(system.stability_limit()) + " of the mesh");
    }
}

void store_trace(MeasurementSeries& trace, std::size_t level, const Eigen::VectorXd& p,
                 const std::vector<std::size_t>& loop) {
    auto row = trace.values.row(static_cast<Eigen::Index>(level));
    for (std::size_t j = 0; j < loop.size(); ++j) row[static_cast<Eigen::Index>(j)] = p[static_cast<Eigen::Index>(loop[j])];
}

}  // namespace

MeasurementSeries solve_forward(const SemidiscreteSystem& system, const NodalField& f, const TimeGrid& grid,
                                WaveDiagnostics* diagnostics) {
    const std::size_t n = system.num_nodes();
    if (f.size() != n) {
        throw DimensionError("solve_forward: field has " + std::to_string(f.size()) + " values, mesh has " +
                             std::to_string(n) + " nodes");
    }
    check_grid(system, grid);
    const auto& loop = system.mesh->boundary_loop();

    Eigen::VectorXd p_prev = f.values;
    bool masked = false;
    for (auto node : loop) {
        auto& v = p_prev[static_cast<Eigen::Index>(node)];
        if (v != 0.0) {
            masked = true;
            v = 0.0;
        }
    }
    if (diagnostics) {
        diagnostics->boundary_masked = masked;
        diagnostics->energy.clear();
        diagnostics->energy.reserve(grid.steps);
    }

    const double dt = grid.dt;
    const double dt2 = dt * dt;
    const auto& A = system.stiffness;
    const Eigen::VectorXd& m = system.m_lumped;
    const Eigen::VectorXd m_over_dt2 = m / dt2;
    const Eigen::VectorXd c_over_2dt = system.c_lumped / (2.0 * dt);
    const Eigen::VectorXd inv_lhs = (m_over_dt2 + c_over_2dt).cwiseInverse();

    MeasurementSeries trace = MeasurementSeries::zeros(SeriesKind::pressure_trace, grid.levels(), loop.size(), dt);
    store_trace(trace, 0, p_prev, loop);

    Eigen::VectorXd Ap = A * p_prev;
    const double initial_energy = 0.5 * p_prev.dot(Ap);
    // Taylor start consistent with zero initial velocity.
    Eigen::VectorXd p = p_prev - 0.5 * dt2 * Ap.cwiseQuotient(m);
    store_trace(trace, 1, p, loop);

    Eigen::VectorXd p_next(p.size());
    for (std::size_t step = 1; step < grid.steps; ++step) {
        Ap = A * p;
        if (diagnostics) {
            const Eigen::VectorXd dp = p - p_prev;
            diagnostics->energy.push_back(0.5 * (dp.cwiseProduct(m).dot(dp) / dt2 + Ap.dot(p_prev)));
        }
        p_next = (m_over_dt2.cwiseProduct(2.0 * p - p_prev) + c_over_2dt.cwiseProduct(p_prev) - Ap)
                     .cwiseProduct(inv_lhs);

        if (initial_energy > 0.0) {
            const Eigen::VectorXd v = (p_next - p_prev) / (2.0 * dt);
            const double energy = 0.5 * (v.cwiseProduct(m).dot(v) + p.dot(Ap));
            if (!(energy <= 10.0 * initial_energy)) {
                throw StabilityError("solve_forward: energy grew more than 10x at step " + std::to_string(step) +
                                     "; reduce dt");
            }
        }
        p_prev.swap(p);
        p.swap(p_next);
        store_trace(trace, step + 1, p, loop);
    }
    if (diagnostics) {
        Ap = A * p;
        const Eigen::VectorXd dp = p - p_prev;
        diagnostics->energy.push_back(0.5 * (dp.cwiseProduct(m).dot(dp) / dt2 + Ap.dot(p_prev)));
    }
    return trace;
}

MeasurementSeries solve_forward(const SemidiscreteSystem& system, const NodalField& f, double final_time,
                                double dt) {
    // Refuse the requested step itself, not only the fitted one.
    check_grid(system, TimeGrid{dt, 1});
    return solve_forward(system, f, TimeGrid::fit(final_time, dt));
}

SeriesMatrix cumulative_trapezoid(const SeriesMatrix& values, double dt) {
    SeriesMatrix out = SeriesMatrix::Zero(values.rows(), values.cols());
    for (Eigen::Index n = 1; n < values.rows(); ++n) {
        out.row(n) = out.row(n - 1) + 0.5 * dt * (values.row(n - 1) + values.row(n));
    }
    return out;
}

MeasurementSeries measure_voltage(const SemidiscreteSystem& system, const MeasurementSeries& trace, double kappa,
                                  double c_p) {
    if (trace.kind != SeriesKind::pressure_trace) {
        throw InputError("measure_voltage: expected a pressure trace, got " + std::string(to_string(trace.kind)));
    }
    if (trace.nb() != system.num_boundary()) {
        throw DimensionError("measure_voltage: trace has " + std::to_string(trace.nb()) + " channels, boundary has " +
                             std::to_string(system.num_boundary()) + " nodes");
    }
    MeasurementSeries v;
    v.kind = SeriesKind::voltage;
    v.dt = trace.dt;
    v.values = trace.values.rowwise() - trace.values.row(0);
    if (kappa != 0.0 && trace.nt() > 1) {
        // Rows are time levels; Kb is symmetric so row * Kb applies it per level.
        SeriesMatrix lap = -(trace.values * system.Kb);
        lap.array().rowwise() /= system.mb_lumped.transpose().array();
        const SeriesMatrix twice = cumulative_trapezoid(cumulative_trapezoid(lap, trace.dt), trace.dt);
        v.values -= (kappa * c_p * c_p) * twice;
    }
    return v;
}

MeasurementSeries forward(const SemidiscreteSystem& system, const NodalField& f, const TimeGrid& grid) {
    return forward(system, f, grid, system.material.kappa);
}

MeasurementSeries forward(const SemidiscreteSystem& system, const NodalField& f, double final_time, double dt) {
    check_grid(system, TimeGrid{dt, 1});
    return forward(system, f, TimeGrid::fit(final_time, dt));
}

MeasurementSeries forward(const SemidiscreteSystem& system, const NodalField& f, const TimeGrid& grid, double kappa) {
    return measure_voltage(system, solve_forward(system, f, grid), kappa, system.material.c_p);
}

MeasurementSeries resample_boundary(const MeasurementSeries& series, const Mesh& from, const Mesh& to,
                                    std::size_t time_stride) {
    if (series.nb() != from.num_boundary_nodes()) {
        throw DimensionError("resample_boundary: series does not match the source mesh boundary");
    }
    if (time_stride == 0 || series.nt() == 0 || (series.nt() - 1) % time_stride != 0) {
        throw DimensionError("resample_boundary: time stride must divide the number of steps");
    }
    const auto& src_loop = from.boundary_loop();
    const std::size_t nb_src = src_loop.size();

    // For every target node, the source edge it projects onto and the weight
    // of that edge's second endpoint.
    const std::size_t nb_dst = to.num_boundary_nodes();
    std::vector<std::size_t> edge(nb_dst);
    std::vector<double> weight(nb_dst);
    for (std::size_t j = 0; j < nb_dst; ++j) {
        const Point q = to.nodes()[to.boundary_loop()[j]];
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < nb_src; ++e) {
            const Point a = from.nodes()[src_loop[e]];
            const Point b = from.nodes()[src_loop[(e + 1) % nb_src]];
            const double ex = b.x - a.x, ey = b.y - a.y;
            const double len2 = ex * ex + ey * ey;
            double s = len2 > 0.0 ? ((q.x - a.x) * ex + (q.y - a.y) * ey) / len2 : 0.0;
            s = std::clamp(s, 0.0, 1.0);
            const double dx = a.x + s * ex - q.x, dy = a.y + s * ey - q.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                edge[j] = e;
                weight[j] = s;
            }
        }
    }

    const std::size_t nt = (series.nt() - 1) / time_stride + 1;
    MeasurementSeries out = MeasurementSeries::zeros(series.kind, nt, nb_dst, series.dt * static_cast<double>(time_stride));
    for (std::size_t n = 0; n < nt; ++n) {
        const auto src = series.values.row(static_cast<Eigen::Index>(n * time_stride));
        auto dst = out.values.row(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < nb_dst; ++j) {
            const auto a = static_cast<Eigen::Index>(edge[j]);
            const auto b = static_cast<Eigen::Index>((edge[j] + 1) % nb_src);
            dst[static_cast<Eigen::Index>(j)] = (1.0 - weight[j]) * src[a] + weight[j] * src[b];
        }
    }
    return out;
}

}  // namespace pat
