#pragma once

#include "pat/assembly.hpp"
#include "pat/noise.hpp"
#include "pat/series.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pat {

/// A linear map between an image space and a data space, both flattened to
/// vectors, together with the inner products that define its adjoint.
struct LinearProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> forward;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> adjoint;
    std::function<double(const Eigen::VectorXd&)> image_norm;
    std::function<double(const Eigen::VectorXd&)> data_norm;
};

/// F and F* of the photoacoustic model on a fixed time grid. `kappa` selects
/// the measurement model used for the inversion.
LinearProblem photoacoustic_problem(const SemidiscreteSystem& system, const TimeGrid& grid, double kappa);

struct LandweberConfig {
    double gamma = 5e-2;
    double mu = 0.0;
    std::size_t iterations = 50;
    /// Divide the gradient step by |u_0| as in the accelerated scheme;
    /// false gives the textbook update u - gamma (F*F u - F*V).
    bool normalize = true;
    std::optional<Eigen::VectorXd> f_true;

    void validate() const;
};

struct LandweberReport {
    Eigen::VectorXd reconstruction;
    std::vector<double> rel_error_history;  ///< present iff f_true was given
    std::vector<double> residual_history;   ///< |F u_k - V| for k = 1..K
    bool diverged = false;                  ///< stopped early by the divergence guard
    std::string note;
};

/// Accelerated Landweber iteration:
///   u0 = F*V, v0 = u0,
///   v_k = u_{k-1} - gamma (F*F u_{k-1} - u0) / |u0|,
///   u_k = v_k + mu (v_k - v_{k-1}).
LandweberReport landweber(const LinearProblem& problem, const Eigen::VectorXd& data, const LandweberConfig& config);

LandweberReport landweber(const SemidiscreteSystem& system, const MeasurementSeries& v, const LandweberConfig& config,
                          std::optional<double> kappa_override = std::nullopt);

/// Largest eigenvalue of F*F, by power iteration from a seeded random field.
double normal_operator_norm(const LinearProblem& problem, Eigen::Index image_size, std::size_t iterations = 40,
                            std::uint64_t seed = 1);

/// |u - f_true|_M / |f_true|_M with the lumped c^-2 weighted mass.
double relative_error(const SemidiscreteSystem& system, const NodalField& u, const NodalField& f_true);

/// First 1-based iteration whose relative error is at or below threshold.
std::optional<std::size_t> iterations_to_reach(const LandweberReport& report, double threshold);

void write_report_csv(const LandweberReport& report, const std::filesystem::path& path, std::string_view header = {});

/// Average PSD of F F* applied to white-noise probes, over probes, channels
/// and segments. Probes run on up to `threads` workers (0 reads PAT_NUM_THREADS).
PowerSpectrum normal_operator_spectrum(const SemidiscreteSystem& system, std::size_t n_probes, std::uint64_t seed,
                                       double final_time, double dt, const WelchOptions& welch = {},
                                       unsigned threads = 0);

/// Worker count from PAT_NUM_THREADS (default 1).
unsigned configured_threads();

}  // namespace pat
