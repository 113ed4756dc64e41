#include "pat/inversion.hpp"

#include "pat/adjoint.hpp"
#include "pat/errors.hpp"
#include "pat/wavesim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace pat {

namespace {

Eigen::VectorXd flatten(const MeasurementSeries& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.values.data(), s.values.size());
}

MeasurementSeries unflatten(const Eigen::VectorXd& x, const TimeGrid& grid, std::size_t nb, SeriesKind kind) {
    MeasurementSeries s = MeasurementSeries::zeros(kind, grid.levels(), nb, grid.dt);
    if (static_cast<std::size_t>(x.size()) != grid.levels() * nb) {
        throw DimensionError("data vector has " + std::to_string(x.size()) + " entries, expected " +
                             std::to_string(grid.levels() * nb));
    }
    s.values = Eigen::Map<const SeriesMatrix>(x.data(), s.values.rows(), s.values.cols());
    return s;
}

}  // namespace

void LandweberConfig::validate() const {
    if (!(gamma > 0.0)) throw InputError("landweber: gamma must be positive");
    if (!(mu >= 0.0 && mu < 1.0)) throw InputError("landweber: mu must lie in [0, 1)");
    if (iterations < 1) throw InputError("landweber: need at least one iteration");
}

LinearProblem photoacoustic_problem(const SemidiscreteSystem& system, const TimeGrid& grid, double kappa) {
    const std::size_t nb = system.num_boundary();
    LinearProblem problem;
    problem.forward = [&system, grid, kappa](const Eigen::VectorXd& u) {
        return flatten(forward(system, NodalField(u), grid, kappa));
    };
    problem.adjoint = [&system, grid, nb, kappa](const Eigen::VectorXd& d) {
        return adjoint(system, unflatten(d, grid, nb, SeriesKind::voltage), kappa).values;
    };
    problem.image_norm = [&system](const Eigen::VectorXd& u) { return mass_norm(system, u); };
    problem.data_norm = [&system, grid, nb](const Eigen::VectorXd& d) {
        return series_norm(unflatten(d, grid, nb, SeriesKind::voltage), system.mb_lumped);
    };
    return problem;
}

LandweberReport landweber(const LinearProblem& problem, const Eigen::VectorXd& data, const LandweberConfig& config) {
    config.validate();
    LandweberReport report;
    const Eigen::VectorXd u0 = problem.adjoint(data);
    const double u0_norm = problem.image_norm(u0);
    if (u0_norm == 0.0) {
        report.reconstruction = Eigen::VectorXd::Zero(u0.size());
        report.note = "F*V vanishes; returning the zero field without iterating";
        return report;
    }
    const double step = config.normalize ? config.gamma / u0_norm : config.gamma;
    const double f_norm = config.f_true ? problem.image_norm(*config.f_true) : 0.0;
    if (config.f_true && f_norm == 0.0) throw InputError("landweber: f_true has zero norm");

    Eigen::VectorXd u = u0;
    Eigen::VectorXd v_prev = u0;
    Eigen::VectorXd fu = problem.forward(u);
    double best = std::numeric_limits<double>::infinity();
    report.residual_history.reserve(config.iterations);
    for (std::size_t k = 1; k <= config.iterations; ++k) {
        const Eigen::VectorXd v = u - step * (problem.adjoint(fu) - u0);
        u = v + config.mu * (v - v_prev);
        v_prev = v;
        fu = problem.forward(u);

        const double residual = problem.data_norm(fu - data);
        report.residual_history.push_back(residual);
        if (config.f_true) report.rel_error_history.push_back(problem.image_norm(u - *config.f_true) / f_norm);
        best = std::min(best, residual);
        if (!std::isfinite(residual) || residual > 100.0 * best) {
            report.diverged = true;
            report.note = "stopped at iteration " + std::to_string(k) + ": residual grew 100x above its minimum";
            break;
        }
    }
    report.reconstruction = std::move(u);
    return report;
}

LandweberReport landweber(const SemidiscreteSystem& system, const MeasurementSeries& v, const LandweberConfig& config,
                          std::optional<double> kappa_override) {
    if (v.nb() != system.num_boundary()) {
        throw DimensionError("landweber: data has " + std::to_string(v.nb()) + " channels, boundary has " +
                             std::to_string(system.num_boundary()) + " nodes");
    }
    if (v.nt() < 2) throw InputError("landweber: data needs at least two time levels");
    const TimeGrid grid{v.dt, v.nt() - 1};
    const double kappa = kappa_override.value_or(system.material.kappa);
    return landweber(photoacoustic_problem(system, grid, kappa), flatten(v), config);
}

double normal_operator_norm(const LinearProblem& problem, Eigen::Index image_size, std::size_t iterations,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd x(image_size);
    for (auto& v : x) v = uni(rng);
    double lambda = 0.0;
    for (std::size_t k = 0; k < iterations; ++k) {
        const double norm = problem.image_norm(x);
        if (norm == 0.0) return 0.0;
        x /= norm;
        x = problem.adjoint(problem.forward(x));
        lambda = problem.image_norm(x);
    }
    return lambda;
}

double relative_error(const SemidiscreteSystem& system, const NodalField& u, const NodalField& f_true) {
    if (u.size() != f_true.size()) throw DimensionError("relative_error: fields differ in size");
    const double denom = mass_norm(system, f_true.values);
    if (denom == 0.0) throw InputError("relative_error: reference field has zero norm");
    return mass_norm(system, u.values - f_true.values) / denom;
}

std::optional<std::size_t> iterations_to_reach(const LandweberReport& report, double threshold) {
    for (std::size_t k = 0; k < report.rel_error_history.size(); ++k) {
        if (report.rel_error_history[k] <= threshold) return k + 1;
    }
    return std::nullopt;
}

void write_report_csv(const LandweberReport& report, const std::filesystem::path& path, std::string_view header) {
    std::string out(header);
    if (!report.note.empty()) out += comment_block(report.note);
    out += "iteration,residual,rel_error\n";
    char buf[96];
    for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
        if (k < report.rel_error_history.size()) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", k + 1, report.residual_history[k],
                          report.rel_error_history[k]);
        } else {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,\n", k + 1, report.residual_history[k]);
        }
        out += buf;
    }
    write_file_atomic(path, out);
}

unsigned configured_threads() {
    if (const char* env = std::getenv("PAT_NUM_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

PowerSpectrum normal_operator_spectrum(const SemidiscreteSystem& system, std::size_t n_probes, std::uint64_t seed,
                                       double final_time, double dt, const WelchOptions& welch, unsigned threads) {
    if (n_probes < 1) throw InputError("normal_operator_spectrum: need at least one probe");
    const TimeGrid grid = TimeGrid::fit(final_time, dt);
    const std::size_t nb = system.num_boundary();
    if (threads == 0) threads = configured_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_probes));

    std::vector<PowerSpectrum> spectra(n_probes);
    std::vector<std::exception_ptr> failures(n_probes);
    auto run = [&](std::size_t probe) {
        try {
            NoiseSpec spec{NoiseColor::white, 1.0, splitmix64(seed + probe)};
            MeasurementSeries psi = colored_noise(grid.levels(), nb, grid.dt, spec);
            psi.kind = SeriesKind::voltage;
            const NodalField image = adjoint(system, psi);
            spectra[probe] = psd_estimate(forward(system, image, grid), welch);
        } catch (...) {
            failures[probe] = std::current_exception();
        }
    };
    if (threads <= 1) {
        for (std::size_t i = 0; i < n_probes; ++i) run(i);
    } else {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < n_probes; i += threads) run(i);
            });
        }
    }

    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    PowerSpectrum total = spectra.front();
    for (std::size_t i = 1; i < n_probes; ++i) {
        for (std::size_t k = 0; k < total.power.size(); ++k) total.power[k] += spectra[i].power[k];
    }
    for (double& p : total.power) p /= static_cast<double>(n_probes);
    return total;
}

}  // namespace pat
