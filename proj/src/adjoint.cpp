#include "pat/adjoint.hpp"

#include "pat/errors.hpp"
#include "pat/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace pat {

SeriesMatrix reverse_cumulative_trapezoid(const SeriesMatrix& values, double dt) {
    const Eigen::Index nt = values.rows();
    SeriesMatrix out = SeriesMatrix::Zero(nt, values.cols());
    if (nt < 2) return out;
    const Eigen::VectorXd w = trapezoid_weights(static_cast<std::size_t>(nt), dt);
    // suffix = sum_{n > m} w_n x_n
    Eigen::RowVectorXd suffix = Eigen::RowVectorXd::Zero(values.cols());
    for (Eigen::Index m = nt - 1; m >= 1; --m) {
        out.row(m) = 0.5 * dt * values.row(m) + suffix * (dt / w[m]);
        suffix += w[m] * values.row(m);
    }
    out.row(0) = suffix;
    return out;
}

MeasurementSeries solve_eta(const SemidiscreteSystem& system, const MeasurementSeries& psi, double kappa, double c_p) {
    if (psi.nb() != system.num_boundary()) {
        throw DimensionError("solve_eta: psi has " + std::to_string(psi.nb()) + " channels, boundary has " +
                             std::to_string(system.num_boundary()) + " nodes");
    }
    MeasurementSeries eta;
    eta.kind = SeriesKind::adjoint_source;
    eta.dt = psi.dt;
    eta.values = psi.values;
    if (kappa != 0.0 && psi.nt() > 1) {
        const SeriesMatrix twice = reverse_cumulative_trapezoid(reverse_cumulative_trapezoid(psi.values, psi.dt), psi.dt);
        SeriesMatrix lap = -(twice * system.Kb);
        lap.array().rowwise() /= system.mb_lumped.transpose().array();
        eta.values -= (kappa * c_p * c_p) * lap;
    }
    return eta;
}

NodalField solve_backward_wave(const SemidiscreteSystem& system, const MeasurementSeries& eta) {
    if (eta.kind != SeriesKind::adjoint_source) {
        throw InputError("solve_backward_wave: expected an adjoint-source series, got " +
                         std::string(to_string(eta.kind)));
    }
    if (eta.nb() != system.num_boundary()) throw DimensionError("solve_backward_wave: boundary size mismatch");
    if (eta.nt() < 2) throw InputError("solve_backward_wave: need at least two time levels");
    const double dt = eta.dt;
    if (!(dt > 0.0) || dt > system.stability_limit()) {
        throw StabilityError("solve_backward_wave: time step " + std::to_string(dt) +
                             " exceeds the stability limit " + std::to_string(system.stability_limit()));
    }

    const std::size_t steps = eta.nt() - 1;
    const auto& loop = system.mesh->boundary_loop();
    const auto& A = system.stiffness;
    const Eigen::VectorXd& m = system.m_lumped;
    const double dt2 = dt * dt;
    const Eigen::VectorXd m_over_dt2 = m / dt2;
    const Eigen::VectorXd c_over_2dt = system.c_lumped / (2.0 * dt);
    const Eigen::VectorXd inv_lhs = (m_over_dt2 + c_over_2dt).cwiseInverse();
    const auto n = static_cast<Eigen::Index>(system.num_nodes());

    // In reversed time tau = T - t the damping is dissipative again; the
    // source at tau_k is -Mb eta(T - tau_k).
    Eigen::VectorXd source = Eigen::VectorXd::Zero(n);
    auto load = [&](std::size_t k) {
        const auto row = eta.values.row(static_cast<Eigen::Index>(steps - k));
        for (std::size_t j = 0; j < loop.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            source[static_cast<Eigen::Index>(loop[j])] = -system.mb_lumped[jj] * row[jj];
        }
    };

    Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
    load(0);
    Eigen::VectorXd cur = 0.5 * dt2 * source.cwiseQuotient(m);
    Eigen::VectorXd next(n);
    for (std::size_t k = 1; k <= steps; ++k) {
        load(k);
        next = (m_over_dt2.cwiseProduct(2.0 * cur - prev) + c_over_2dt.cwiseProduct(prev) - A * cur + source)
                   .cwiseProduct(inv_lhs);
        if (k == steps) break;
        prev.swap(cur);
        cur.swap(next);
    }
    if (!next.allFinite()) throw StabilityError("solve_backward_wave: non-finite values");
    // d/dt = -d/dtau at tau = T.
    return NodalField(-(next - prev) / (2.0 * dt));
}

AdjointResult adjoint_with_source(const SemidiscreteSystem& system, const MeasurementSeries& psi, double kappa) {
    AdjointResult result;
    result.eta = solve_eta(system, psi, kappa, system.material.c_p);
    result.field = solve_backward_wave(system, result.eta);
    for (auto node : system.mesh->boundary_loop()) result.field.values[static_cast<Eigen::Index>(node)] = 0.0;
    return result;
}

NodalField adjoint(const SemidiscreteSystem& system, const MeasurementSeries& psi, double kappa) {
    return adjoint_with_source(system, psi, kappa).field;
}

NodalField adjoint(const SemidiscreteSystem& system, const MeasurementSeries& psi) {
    return adjoint(system, psi, system.material.kappa);
}

NodalField random_admissible_field(const Mesh& mesh, std::uint64_t seed, std::size_t bumps) {
    double radius = 0.0;
    for (auto b : mesh.boundary_loop()) radius = std::max(radius, std::hypot(mesh.nodes()[b].x, mesh.nodes()[b].y));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<GaussianBump> list;
    for (std::size_t i = 0; i < bumps; ++i) {
        const double r = 0.7 * radius * std::sqrt(uni(rng));
        const double th = 2.0 * std::numbers::pi * uni(rng);
        const double sigma = radius * (0.1 + 0.15 * uni(rng));
        const double amplitude = uni(rng) < 0.5 ? -1.0 : 1.0;
        list.push_back({r * std::cos(th), r * std::sin(th), sigma, amplitude * (0.5 + uni(rng))});
    }
    return gaussian_bumps(mesh, list);
}

MeasurementSeries random_smooth_series(std::size_t nt, std::size_t nb, double dt, std::uint64_t seed,
                                       std::size_t terms) {
    MeasurementSeries out = MeasurementSeries::zeros(SeriesKind::voltage, nt, nb, dt);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> normal;
    for (std::size_t term = 0; term < terms; ++term) {
        const double omega = 1.0 + 4.0 * uni(rng);
        const double m = std::floor(5.0 * uni(rng));
        const double phase = 2.0 * std::numbers::pi * uni(rng);
        const double a = normal(rng);
        for (std::size_t n = 0; n < nt; ++n) {
            for (std::size_t b = 0; b < nb; ++b) {
                const double th = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(nb);
                out.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b)) +=
                    a * std::sin(omega * static_cast<double>(n) * dt + m * th + phase);
            }
        }
    }
    return out;
}

double adjoint_test(const SemidiscreteSystem& system, const NodalField& f, const MeasurementSeries& psi) {
    const TimeGrid grid{psi.dt, psi.nt() - 1};
    const MeasurementSeries v = forward(system, f, grid);
    const NodalField back = adjoint(system, psi);
    const double data_side = series_inner(v, psi, system.mb_lumped);
    const double image_side = mass_inner(system, f.values, back.values);
    const double scale = series_norm(v, system.mb_lumped) * series_norm(psi, system.mb_lumped) +
                         mass_norm(system, f.values) * mass_norm(system, back.values);
    if (scale == 0.0) return 0.0;
    return std::abs(data_side - image_side) / scale;
}

}  // namespace pat
