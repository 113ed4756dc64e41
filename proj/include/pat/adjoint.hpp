#pragma once

#include "pat/assembly.hpp"
#include "pat/series.hpp"
#include "pat/wavesim.hpp"

namespace pat {

struct AdjointResult {
    NodalField field;        ///< d/dt phi at t = 0
    MeasurementSeries eta;   ///< boundary source driving the backward problem
};

/// Time-reversed counterpart of cumulative_trapezoid: the transpose of the
/// forward trapezoid sum with respect to the trapezoid-weighted time inner
/// product, so <I x, y> = <x, R y> holds exactly. Approximates int_t^T.
SeriesMatrix reverse_cumulative_trapezoid(const SeriesMatrix& values, double dt);

/// Boundary source of the backward problem:
/// eta = psi - kappa c_p^2 lap_s R2[psi], R2 the reversed sum applied twice.
MeasurementSeries solve_eta(const SemidiscreteSystem& system, const MeasurementSeries& psi, double kappa, double c_p);

/// Marches M phi'' - C phi' + (K + B) phi = -Mb eta backward from
/// phi(T) = phi'(T) = 0 and returns phi'(0).
NodalField solve_backward_wave(const SemidiscreteSystem& system, const MeasurementSeries& eta);

/// F*: psi -> phi'(0), restricted to fields vanishing on the boundary.
NodalField adjoint(const SemidiscreteSystem& system, const MeasurementSeries& psi);
NodalField adjoint(const SemidiscreteSystem& system, const MeasurementSeries& psi, double kappa);
AdjointResult adjoint_with_source(const SemidiscreteSystem& system, const MeasurementSeries& psi, double kappa);

/// Random smooth admissible field: a sum of a few Gaussian bumps of random
/// sign, centre and width (at least a tenth of the domain radius), tapered
/// to vanish on the boundary. Norms stay bounded under mesh refinement.
NodalField random_admissible_field(const Mesh& mesh, std::uint64_t seed, std::size_t bumps = 6);

/// Random smooth boundary series: a few harmonics in time and arc angle with
/// random amplitudes, frequencies and phases.
MeasurementSeries random_smooth_series(std::size_t nt, std::size_t nb, double dt, std::uint64_t seed,
                                       std::size_t terms = 4);

/// |<F f, psi> - <f, F* psi>| / (|F f| |psi| + |f| |F* psi|) using the
/// lumped c^-2 mass in the domain and lumped boundary mass x trapezoid on
/// the data side. Returns 0 when both products vanish.
double adjoint_test(const SemidiscreteSystem& system, const NodalField& f, const MeasurementSeries& psi);

}  // namespace pat
