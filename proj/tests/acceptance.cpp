// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Pass criterion numbers as arguments to run a subset, e.g. `acceptance 1 9`.

#include "pat/adjoint.hpp"
#include "pat/assembly.hpp"
#include "pat/cli.hpp"
#include "pat/inversion.hpp"
#include "pat/noise.hpp"
#include "pat/phantom.hpp"
#include "pat/sensor.hpp"
#include "pat/wavesim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace pat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

SemidiscreteSystem disk(double h, double kappa = 0.9) {
    auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(1.0, h));
    Material mat = Material::uniform(mesh->num_nodes());
    mat.kappa = kappa;
    return assemble(mesh, mat);
}

// ---------------------------------------------------------------------------

Outcome formula_suite() {
    using namespace sensor;
    std::vector<std::string> bad;
    for (double r : {-0.4, -0.2, 0.0, 0.3, 0.9}) {
        if (kappa(0.5, r) != 0.0) bad.push_back(fmt("kappa(0.5,%g)=%g", r, kappa(0.5, r)));
    }
    const double k15 = kappa(0.4, -0.5);
    if (std::abs(k15 - 1.5) > 1e-12) bad.push_back(fmt("kappa(0.4,-0.5)=%.15g", k15));
    const double r0 = reflection_coefficient(0.0, 0.75);
    if (std::abs(r0 - 1.0 / 7.0) > 1e-12) bad.push_back(fmt("R(0,0.75)=%.15g", r0));

    const double c = 1500.0, cp = 2000.0;
    const double theta = std::asin(0.75 / std::sqrt(0.9));
    const double at_cr = directivity(theta, c, cp, 0.9, 0.75);
    if (std::abs(at_cr) > 1e-10) bad.push_back(fmt("|V/p| at critical angle = %g", at_cr));
    const auto cr = critical_angle(c, cp, 0.9);
    if (!cr || std::abs(*cr - theta) > 1e-12) bad.push_back("critical angle for kappa=0.9 wrong");
    if (critical_angle(c, cp, 0.5)) bad.push_back("critical angle present for kappa=0.5");

    std::string detail = fmt("theta_cr=%.4f deg, |V/p|=%.2e", theta * 180.0 / std::numbers::pi, std::abs(at_cr));
    for (const auto& b : bad) detail += "; " + b;
    return {bad.empty(), detail};
}

Outcome reflection_asymptotics() {
    const double z = 1.5e6, zp = 3.9e6, zb = 2.0e6, cp = 2200.0, omega = 1e6;
    const double r_eff = (zb - z) / (zb + z);
    auto err = [&](double eps) { return std::abs(sensor::layered_reflection_exact(omega, eps, z, zp, zb, cp) - r_eff); };
    double x = 1e-1;
    double prev = err(x * cp / omega);
    double lo = 1e9, hi = -1e9;
    while (x / 2.0 >= 1e-3) {
        x /= 2.0;
        const double e = err(x * cp / omega);
        const double order = std::log2(prev / e);
        lo = std::min(lo, order);
        hi = std::max(hi, order);
        prev = e;
    }
    return {lo >= 0.85 && hi <= 1.15, fmt("observed order in [%.4f, %.4f] for omega*eps/c_p from 1e-1 to %.2e", lo, hi, x)};
}

double adjoint_mismatch(double h, std::uint64_t seed) {
    const auto sys = disk(h);
    const auto grid = TimeGrid::fit(2.0, cfl_time_step(sys, 0.5));
    const NodalField f = random_admissible_field(*sys.mesh, seed);
    const auto psi = random_smooth_series(grid.levels(), sys.num_boundary(), grid.dt, splitmix64(seed));
    return adjoint_test(sys, f, psi);
}

Outcome adjoint_consistency() {
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const double coarse = adjoint_mismatch(0.1, seed);
        const double fine = adjoint_mismatch(0.05, seed);
        const bool ok = coarse <= 5e-3 && fine < coarse;
        pass &= ok;
        detail += fmt("%sseed %d: %.2e -> %.2e%s", seed == 1 ? "" : "; ", static_cast<int>(seed), coarse, fine,
                      ok ? "" : " (!)");
    }
    return {pass, detail};
}

Outcome energy_dissipation() {
    const auto sys = disk(0.05);
    const auto grid = TimeGrid::fit(2.0, cfl_time_step(sys, 0.5));
    double worst = -1e300;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        WaveDiagnostics diag;
        solve_forward(sys, random_admissible_field(*sys.mesh, seed), grid, &diag);
        for (std::size_t n = 1; n < diag.energy.size(); ++n) {
            worst = std::max(worst, (diag.energy[n] - diag.energy[n - 1]) / diag.energy[n - 1]);
        }
    }
    return {worst <= 1e-10, fmt("largest relative per-step change %.3e over %zu steps x 3 fields", worst, grid.steps)};
}

// Shared desk-scale setup for the reconstruction criteria.
struct Desk {
    SemidiscreteSystem sys;
    TimeGrid grid;
    NodalField phantom;
    MeasurementSeries data;
    double lambda = 0.0;
};

constexpr double kGamma = 5e-2;

const Desk& desk() {
    static const Desk d = [] {
        Desk out{disk(1.0 / 32.0), {}, {}, {}, 0.0};
        out.grid = TimeGrid::fit(2.0, cfl_time_step(out.sys, 0.1));
        const auto problem = photoacoustic_problem(out.sys, out.grid, out.sys.material.kappa);
        out.lambda = normal_operator_norm(problem, static_cast<Eigen::Index>(out.sys.num_nodes()));
        // Amplitude such that the normalized step gamma * lambda / |u0| is 1.2.
        out.phantom = synthetic_phantom(*out.sys.mesh, "bumps");
        const double u0 = mass_norm(out.sys, problem.adjoint(problem.forward(out.phantom.values)));
        out.phantom.values *= kGamma * out.lambda / (1.2 * u0);
        out.data = forward(out.sys, out.phantom, out.grid);
        return out;
    }();
    return d;
}

LandweberReport desk_run(const MeasurementSeries& data, double mu, std::size_t iterations,
                         std::optional<double> kappa = std::nullopt) {
    const Desk& d = desk();
    LandweberConfig cfg;
    cfg.gamma = kGamma;
    cfg.mu = mu;
    cfg.iterations = iterations;
    cfg.f_true = d.phantom.values;
    return landweber(d.sys, data, cfg, kappa);
}

Outcome model_mismatch() {
    const auto proper = desk_run(desk().data, 0.0, 50);
    const auto naive = desk_run(desk().data, 0.0, 50, 0.0);
    const double a = proper.rel_error_history.back(), b = naive.rel_error_history.back();
    return {!proper.diverged && a <= b / 3.0, fmt("error with kappa=0.9: %.4f, with kappa=0: %.4f, ratio %.2f (need >= 3)", a, b, b / a)};
}

Outcome momentum() {
    const auto plain = iterations_to_reach(desk_run(desk().data, 0.0, 100), 0.01);
    const auto fast = iterations_to_reach(desk_run(desk().data, 0.6, 100), 0.01);
    if (!plain || !fast) {
        return {false, fmt("1%% not reached within 100 iterations (mu=0: %s, mu=0.6: %s)", plain ? "yes" : "no",
                           fast ? "yes" : "no")};
    }
    const double ratio = static_cast<double>(*fast) / static_cast<double>(*plain);
    return {ratio <= 0.6, fmt("iterations to 1%%: mu=0 %zu, mu=0.6 %zu, ratio %.2f", *plain, *fast, ratio)};
}

Outcome noise_ordering() {
    const NoiseColor colors[] = {NoiseColor::white, NoiseColor::pink, NoiseColor::red};
    constexpr int kSeeds = 5;
    double mean[3], se[3];
    for (int c = 0; c < 3; ++c) {
        double s = 0.0, s2 = 0.0;
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const auto noisy = add_noise(desk().data, NoiseSpec{colors[c], 0.1, static_cast<std::uint64_t>(seed)});
            const double e = desk_run(noisy, 0.0, 50).rel_error_history.back();
            s += e;
            s2 += e * e;
        }
        mean[c] = s / kSeeds;
        const double var = std::max(0.0, (s2 - kSeeds * mean[c] * mean[c]) / (kSeeds - 1));
        se[c] = std::sqrt(var / kSeeds);
    }
    // Gap measured against the standard error of the difference of means.
    auto gap_ok = [&](int a, int b) { return mean[b] - mean[a] >= std::hypot(se[a], se[b]); };
    const bool pass = gap_ok(0, 1) && gap_ok(1, 2);
    return {pass, fmt("mean error (se): white %.4f (%.4f), pink %.4f (%.4f), red %.4f (%.4f)", mean[0], se[0], mean[1],
                      se[1], mean[2], se[2])};
}

Outcome low_pass() {
    const Desk& d = desk();
    WelchOptions welch;
    welch.segment_length = d.grid.levels();
    const auto spec = normal_operator_spectrum(d.sys, 8, 7, d.grid.final_time(), d.grid.dt, welch);
    const double f1 = spec.frequency[1], fn = spec.frequency.back();
    const double low = band_mean(spec, f1, 10.0 * f1), high = band_mean(spec, fn / 10.0, fn);
    return {low >= 10.0 * high, fmt("lowest decade %.3e, highest decade %.3e, ratio %.1f (need >= 10)", low, high, low / high)};
}

Outcome generator_slopes() {
    constexpr std::size_t segment = 256, length = 63 * segment / 2 + segment;
    WelchOptions welch;
    welch.segment_length = segment;
    const double expected[] = {0.0, -1.0, -2.0};
    const NoiseColor colors[] = {NoiseColor::white, NoiseColor::pink, NoiseColor::red};
    bool pass = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const auto psd = psd_estimate(colored_noise(length, 1, 0.01, NoiseSpec{colors[i], 1.0, 11}), welch);
        const double slope = central_decade_slope(psd);
        pass &= psd.segments == 64 && std::abs(slope - expected[i]) <= 0.3;
        detail += fmt("%s%s %.3f", i ? ", " : "", std::string(to_string(colors[i])).c_str(), slope);
    }
    return {pass, "slopes " + detail + " over 64 segments"};
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "pat_acceptance";
    fs::create_directories(dir);
    auto at = [&](const std::string& name) { return (dir / name).string(); };
    auto run = [](std::vector<std::string> args) {
        args.insert(args.begin(), "pat");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    };
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    // Same file names on both runs, since the report header echoes them.
    const std::vector<std::string> common{"--mesh-size", "0.1", "--seed", "3", "--noise-level", "0.05",
                                          "--noise-color", "red"};
    auto with = [&](std::vector<std::string> tail) {
        auto args = common;
        args.insert(args.end(), tail.begin(), tail.end());
        return args;
    };
    const char* outputs[] = {"v.bin", "f.txt", "u.txt", "r.csv"};
    for (const std::string t : {"a", "b"}) {
        if (run(with({"forward", "--synthetic", "vessels", "-o", at("v.bin"), "--field-out", at("f.txt")})) != 0) {
            return {false, "forward failed"};
        }
        if (run(with({"--iterations", "10", "reconstruct", "--data", at("v.bin"), "--f-true", at("f.txt"), "-o",
                      at("u.txt"), "--report", at("r.csv")})) != 0) {
            return {false, "reconstruct failed"};
        }
        for (const char* name : outputs) fs::rename(at(name), at(t + "." + name));
    }
    std::vector<std::string> differ;
    for (const std::string name : outputs) {
        const std::string a = slurp(at("a." + name));
        if (a.empty() || a != slurp(at("b." + name))) differ.push_back(name);
    }
    fs::remove_all(dir);
    std::string detail = "data, field, reconstruction and report";
    if (differ.empty()) return {true, detail + " byte-identical across two runs"};
    for (const auto& d : differ) detail += " " + d;
    return {false, detail + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"formula suite", formula_suite},
        {"layered reflection asymptotics", reflection_asymptotics},
        {"adjoint consistency", adjoint_consistency},
        {"energy dissipation", energy_dissipation},
        {"model mismatch", model_mismatch},
        {"momentum acceleration", momentum},
        {"noise ordering", noise_ordering},
        {"normal operator low-pass", low_pass},
        {"noise generator slopes", generator_slopes},
        {"determinism", determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(), sec);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
