#include "pat/cli.hpp"

#include "pat/adjoint.hpp"
#include "pat/errors.hpp"
#include "pat/inversion.hpp"
#include "pat/noise.hpp"
#include "pat/phantom.hpp"
#include "pat/sensor.hpp"
#include "pat/wavesim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef PAT_VERSION
#define PAT_VERSION "0.0.0"
#endif

namespace pat {

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::get("pat");
        if (!l) l = spdlog::stderr_color_mt("pat");
        l->set_pattern("pat: %^%l%$: %v");
        return l;
    }();
    return log;
}

// Everything a run can be configured with. Options live on the top-level
// app so a flat key=value config file can set any of them.
struct Settings {
    std::string mesh_path;
    double radius = 1.0;
    double h = 1.0 / 32.0;

    double c = 1.0;
    std::string c_field;
    double rho = 1.0;
    double rho_b = 2.0;
    double c_b = 1.0;
    double rho_p = 1.5;
    double c_p = 1.0;
    double kappa = 0.9;

    double final_time = 2.0;
    double dt = 0.0;
    double cfl = 0.5;

    double gamma = 5e-2;
    double mu = 0.0;
    std::size_t iterations = 50;

    std::string noise_color = "white";
    double noise_level = 0.0;
    std::uint64_t seed = 1;
};

struct Context {
    CLI::App* app = nullptr;
    std::string command;
    Settings s;
};

void echo_options(const CLI::App& app, const std::string& prefix, std::string& out) {
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_single_name();
        if (opt->get_lnames().empty() || name == "help" || name == "version" || name == "config") continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        out += prefix + name + "=" + value + "\n";
    }
}

// Effective settings of the shared options and the active subcommand.
std::string reproducibility_header(const Context& ctx) {
    std::string text = "pat " PAT_VERSION " " + ctx.command + "\n";
    echo_options(*ctx.app, "", text);
    for (const CLI::App* sub : ctx.app->get_subcommands()) echo_options(*sub, sub->get_name() + ".", text);
    return comment_block(text);
}

std::shared_ptr<const Mesh> build_mesh(const Settings& s) {
    if (!s.mesh_path.empty()) return std::make_shared<const Mesh>(load_mesh(s.mesh_path));
    return std::make_shared<const Mesh>(generate_disk_mesh(s.radius, s.h));
}

SemidiscreteSystem build_system(const Settings& s, std::shared_ptr<const Mesh> mesh) {
    Material mat = Material::uniform(mesh->num_nodes(), s.c);
    if (!s.c_field.empty()) {
        NodalField c = read_field(s.c_field);
        if (c.size() != mesh->num_nodes()) {
            throw DimensionError("speed field has " + std::to_string(c.size()) + " values, mesh has " +
                                 std::to_string(mesh->num_nodes()) + " nodes");
        }
        mat.c = c.values;
    }
    mat.rho = s.rho;
    mat.rho_b = s.rho_b;
    mat.c_b = s.c_b;
    mat.rho_p = s.rho_p;
    mat.c_p = s.c_p;
    mat.kappa = s.kappa;
    return assemble(std::move(mesh), std::move(mat));
}

TimeGrid time_grid(const Settings& s, const SemidiscreteSystem& system) {
    if (!(s.final_time > 0.0)) throw InputError("final time must be positive");
    return TimeGrid::fit(s.final_time, s.dt > 0.0 ? s.dt : cfl_time_step(system, s.cfl));
}

NodalField initial_pressure(const Mesh& mesh, const std::string& phantom, const std::string& field,
                            const std::string& synthetic) {
    const int given = int(!phantom.empty()) + int(!field.empty()) + int(!synthetic.empty());
    if (given != 1) throw InputError("forward: give exactly one of --phantom, --field, --synthetic");
    if (!phantom.empty()) return phantom_from_raster(mesh, read_pgm(phantom));
    if (!synthetic.empty()) return synthetic_phantom(mesh, synthetic);
    NodalField f = read_field(field);
    if (f.size() != mesh.num_nodes()) throw DimensionError("initial field does not match the mesh");
    return f;
}

MeasurementSeries noisy(const MeasurementSeries& v, const Settings& s) {
    if (s.noise_level == 0.0) return v;
    return add_noise(v, {parse_noise_color(s.noise_color), s.noise_level, s.seed});
}

// Largest stride whose coarse step fits under max_dt and divides the step count.
std::size_t decimation_stride(std::size_t steps, double data_dt, double max_dt) {
    std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(max_dt / data_dt + 1e-9)));
    while (stride > 1 && steps % stride != 0) --stride;
    return stride;
}

void write_psd_csv(const PowerSpectrum& spectrum, const std::filesystem::path& path, const std::string& header) {
    std::string out = header + "frequency,power\n";
    char buf[80];
    for (std::size_t k = 0; k < spectrum.frequency.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", spectrum.frequency[k], spectrum.power[k]);
        out += buf;
    }
    write_file_atomic(path, out);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InputError("cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw InputError("empty number list");
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Photoacoustic tomography with piezoelectric boundary sensors", "pat"};
    app.set_version_flag("--version", PAT_VERSION);
    app.set_config("--config", "", "Flat key=value file with option defaults");
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();

    Context ctx;
    ctx.app = &app;
    Settings& s = ctx.s;

    app.add_option("--mesh", s.mesh_path, "PATMESH file (default: generated disk)")->group("Mesh");
    app.add_option("--radius", s.radius, "Disk radius")->group("Mesh")->check(CLI::PositiveNumber);
    app.add_option("--mesh-size", s.h, "Target edge length of the generated disk")->group("Mesh")->check(CLI::PositiveNumber);

    app.add_option("--c", s.c, "Uniform sound speed")->group("Material")->check(CLI::PositiveNumber);
    app.add_option("--c-field", s.c_field, "PATFIELD file with nodal sound speeds")->group("Material");
    app.add_option("--rho", s.rho, "Fluid density")->group("Material");
    app.add_option("--rho-b", s.rho_b, "Backing density")->group("Material");
    app.add_option("--c-b", s.c_b, "Backing sound speed")->group("Material");
    app.add_option("--rho-p", s.rho_p, "Film density")->group("Material");
    app.add_option("--c-p", s.c_p, "Film sound speed")->group("Material");
    app.add_option("--kappa", s.kappa, "Film coefficient")->group("Material");

    app.add_option("--T", s.final_time, "Final time")->group("Time");
    app.add_option("--dt", s.dt, "Time step (default: CFL rule)")->group("Time");
    app.add_option("--cfl", s.cfl, "dt = cfl * h_min / c_max")->group("Time")->check(CLI::PositiveNumber);

    app.add_option("--gamma", s.gamma, "Relaxation factor")->group("Landweber");
    app.add_option("--mu", s.mu, "Momentum factor")->group("Landweber");
    app.add_option("--iterations", s.iterations, "Iteration count")->group("Landweber");

    app.add_option("--noise-color", s.noise_color, "white, pink or red")
        ->group("Noise")
        ->check(CLI::IsMember({"white", "pink", "red"}));
    app.add_option("--noise-level", s.noise_level, "Relative L2 noise level")->group("Noise");
    app.add_option("--seed", s.seed, "Seed for every random draw");

    // mesh-gen
    std::string mesh_out;
    auto* mesh_gen = app.add_subcommand("mesh-gen", "Generate a disk mesh");
    mesh_gen->add_option("--out,-o", mesh_out, "Output PATMESH file")->required();

    // forward
    std::string phantom, field_in, synthetic, data_out, csv_out, field_out;
    auto* fwd = app.add_subcommand("forward", "Simulate voltage data from an initial pressure");
    fwd->add_option("--phantom", phantom, "PGM raster (8- or 16-bit)");
    fwd->add_option("--field", field_in, "PATFIELD initial pressure");
    fwd->add_option("--synthetic", synthetic, "bumps or vessels");
    fwd->add_option("--out,-o", data_out, "Output PATMEAS1 voltage file")->required();
    fwd->add_option("--csv", csv_out, "Also write the voltage as CSV");
    fwd->add_option("--field-out", field_out, "Write the nodal initial pressure actually used");

    // reconstruct
    std::string data_in, data_mesh, f_true_path, recon_out, report_out;
    std::optional<double> kappa_override;
    auto* rec = app.add_subcommand("reconstruct", "Accelerated Landweber reconstruction");
    rec->add_option("--data", data_in, "PATMEAS1 voltage file")->required();
    rec->add_option("--data-mesh", data_mesh, "Mesh the data was simulated on, for down-sampling");
    rec->add_option("--f-true", f_true_path, "Reference field for error tracking");
    rec->add_option("--kappa-override", kappa_override, "Film coefficient assumed by the inversion");
    rec->add_option("--out,-o", recon_out, "Output PATFIELD reconstruction")->required();
    rec->add_option("--report", report_out, "Iteration history CSV");

    // directivity
    std::string dir_out, kappa_list = "0.3,0.6,0.9";
    double medium_speed = 1500.0, film_speed = 2000.0, alpha = 0.75;
    std::size_t samples = 181;
    auto* dir = app.add_subcommand("directivity", "Plane-wave directivity sweep");
    dir->add_option("--medium-speed", medium_speed, "Sound speed of the medium");
    dir->add_option("--film-speed", film_speed, "Sound speed of the film");
    dir->add_option("--alpha", alpha, "Impedance ratio rho c / (rho_b c_b)");
    dir->add_option("--kappas", kappa_list, "Comma separated film coefficients");
    dir->add_option("--samples", samples, "Angles between 0 and 90 degrees");
    dir->add_option("--out,-o", dir_out, "Output CSV")->required();

    // noise
    std::string noise_in, noise_out, psd_out;
    auto* noi = app.add_subcommand("noise", "Add colored noise to voltage data");
    noi->add_option("--data", noise_in, "Clean PATMEAS1 file")->required();
    noi->add_option("--out,-o", noise_out, "Noisy PATMEAS1 file")->required();
    noi->add_option("--psd", psd_out, "PSD CSV of the added noise");

    // spectrum
    std::string spec_out;
    std::size_t probes = 8;
    auto* spe = app.add_subcommand("spectrum", "Average PSD of F F* applied to white noise");
    spe->add_option("--probes", probes, "Number of white-noise probes");
    spe->add_option("--out,-o", spec_out, "Output CSV")->required();

    // adjoint-test
    std::string adj_out;
    auto* adj = app.add_subcommand("adjoint-test", "Check <F f, psi> = <f, F* psi> on random inputs");
    adj->add_option("--out,-o", adj_out, "Write a one-line report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        ctx.command = sub->get_name();

        if (sub == mesh_gen) {
            const Mesh mesh = generate_disk_mesh(s.radius, s.h);
            save_mesh(mesh, mesh_out);
            std::printf("mesh: %zu nodes, %zu triangles, %zu boundary nodes\n", mesh.num_nodes(),
                        mesh.num_triangles(), mesh.num_boundary_nodes());
            return 0;
        }

        if (sub == dir) {
            const auto kappas = parse_list(kappa_list);
            std::string out = reproducibility_header(ctx) + "theta_deg";
            for (double k : kappas) out += ",linear_k" + std::to_string(k) + ",db_k" + std::to_string(k);
            out += "\n";
            std::vector<std::vector<sensor::DirectivitySample>> sweeps;
            for (double k : kappas) sweeps.push_back(sensor::directivity_sweep(medium_speed, film_speed, k, alpha, samples));
            char buf[64];
            for (std::size_t i = 0; i < sweeps.front().size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g", sweeps.front()[i].theta_deg);
                out += buf;
                for (const auto& sweep : sweeps) {
                    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", sweep[i].linear, sweep[i].decibels);
                    out += buf;
                }
                out += "\n";
            }
            write_file_atomic(dir_out, out);
            for (double k : kappas) {
                if (auto th = sensor::critical_angle(medium_speed, film_speed, k)) {
                    std::printf("kappa %g: critical angle %.4f deg\n", k, *th * 180.0 / std::numbers::pi);
                } else {
                    std::printf("kappa %g: no critical angle\n", k);
                }
            }
            return 0;
        }

        if (sub == noi) {
            const MeasurementSeries clean = read_series(noise_in);
            const MeasurementSeries out = noisy(clean, s);
            write_series(out, noise_out);
            if (!psd_out.empty()) {
                MeasurementSeries diff = out;
                diff.kind = SeriesKind::noise;
                diff.values -= clean.values;
                // Short records get a single full-length segment.
                WelchOptions welch;
                if (diff.nt() < 36) welch.segment_length = diff.nt();
                write_psd_csv(psd_estimate(diff, welch), psd_out, reproducibility_header(ctx));
            }
            return 0;
        }

        auto mesh = build_mesh(s);
        const SemidiscreteSystem system = build_system(s, mesh);

        if (sub == fwd) {
            const TimeGrid grid = time_grid(s, system);
            const NodalField f = initial_pressure(*mesh, phantom, field_in, synthetic);
            WaveDiagnostics diag;
            const MeasurementSeries trace = solve_forward(system, f, grid, &diag);
            if (diag.boundary_masked) logger()->warn("initial pressure was nonzero on the boundary; masked to zero");
            const MeasurementSeries v =
                noisy(measure_voltage(system, trace, system.material.kappa, system.material.c_p), s);
            write_series(v, data_out);
            if (!csv_out.empty()) write_series_csv(v, csv_out, reproducibility_header(ctx));
            if (!field_out.empty()) write_field(f, field_out);
            std::printf("forward: %zu nodes, %zu steps of %.6g, %zu channels\n", mesh->num_nodes(), grid.steps,
                        grid.dt, v.nb());
            return 0;
        }

        if (sub == rec) {
            MeasurementSeries v = read_series(data_in);
            if (v.nb() != system.num_boundary()) {
                if (data_mesh.empty()) {
                    throw DimensionError("data has " + std::to_string(v.nb()) + " channels but the mesh boundary has " +
                                         std::to_string(system.num_boundary()) +
                                         " nodes; pass --data-mesh to down-sample");
                }
                const Mesh from = load_mesh(data_mesh);
                const double max_dt = s.dt > 0.0 ? s.dt : cfl_time_step(system, s.cfl);
                v = resample_boundary(v, from, *mesh, decimation_stride(v.nt() - 1, v.dt, max_dt));
            }
            LandweberConfig config;
            config.gamma = s.gamma;
            config.mu = s.mu;
            config.iterations = s.iterations;
            if (!f_true_path.empty()) {
                NodalField f = read_field(f_true_path);
                if (f.size() != mesh->num_nodes()) throw DimensionError("--f-true does not match the mesh");
                config.f_true = f.values;
            }
            const LandweberReport report = landweber(system, v, config, kappa_override);
            write_field(NodalField(report.reconstruction), recon_out);
            if (!report_out.empty()) write_report_csv(report, report_out, reproducibility_header(ctx));
            if (!report.note.empty()) logger()->warn("{}", report.note);
            if (!report.rel_error_history.empty()) {
                std::printf("reconstruct: relative error %.6g after %zu iterations", report.rel_error_history.back(),
                            report.rel_error_history.size());
                if (auto k = iterations_to_reach(report, 0.01)) std::printf(", below 1%% at iteration %zu", *k);
                std::printf("\n");
            } else if (!report.residual_history.empty()) {
                std::printf("reconstruct: residual %.6g after %zu iterations\n", report.residual_history.back(),
                            report.residual_history.size());
            }
            return report.diverged ? 3 : 0;
        }

        if (sub == spe) {
            const TimeGrid grid = time_grid(s, system);
            WelchOptions welch;
            welch.segment_length = grid.levels();
            const PowerSpectrum spectrum =
                normal_operator_spectrum(system, probes, s.seed, grid.final_time(), grid.dt, welch);
            write_psd_csv(spectrum, spec_out, reproducibility_header(ctx));
            return 0;
        }

        if (sub == adj) {
            const TimeGrid grid = time_grid(s, system);
            const NodalField f = random_admissible_field(*mesh, s.seed);
            const MeasurementSeries psi =
                random_smooth_series(grid.levels(), system.num_boundary(), grid.dt, splitmix64(s.seed));
            const double mismatch = adjoint_test(system, f, psi);
            char line[160];
            std::snprintf(line, sizeof(line), "adjoint-test: nodes=%zu steps=%zu dt=%.6g mismatch=%.6e\n",
                          mesh->num_nodes(), grid.steps, grid.dt, mismatch);
            std::fputs(line, stdout);
            if (!adj_out.empty()) write_file_atomic(adj_out, reproducibility_header(ctx) + line);
            return 0;
        }
    } catch (const Error& e) {
        logger()->error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        logger()->error("unexpected failure: {}", e.what());
        return 2;
    }
    return 1;
}

}  // namespace pat
