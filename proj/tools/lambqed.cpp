// lambqed: command-line front end: evolve, steady, sweeps, verify, heatmap.
//
// Exit codes: 0 success, 1 cell/verification/integration failure, 2 usage, 3 I/O.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lambqed/heatmap.hpp"
#include "lambqed/lambqed.hpp"

namespace fs = std::filesystem;
using namespace lambqed;

namespace {

constexpr int exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_io = 3;

struct Flags {
    std::string g, theta, kappa, gamma, gamma_phi, n_max, t_max, t_points, ode_tol, steady_tol, frame, metrics, out, config,
        method, threads, truncation_tol;
    std::vector<std::string> grids;
    bool render{false};
    std::vector<int> criteria;
    std::string input, channel, png;
    bool log_scale{false};
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    return os;
}

void close_checked(std::ofstream& os, const fs::path& path) {
    os.close();
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

void write_manifest(const RunConfig& cfg, const fs::path& dir, const std::string& command_line) {
    const fs::path path = dir / "manifest.cfg";
    auto os = open_out(path);
    cfg.write_manifest(os, command_line);
    close_checked(os, path);
}

std::string title_for(const RunConfig& cfg) {
    const auto& p = cfg.params;
    std::ostringstream s;
    s << "lambqed " << version_string << ' ' << cfg.mode << ": g=" << format_double(p.g) << " theta=" << format_double(p.theta)
      << " kappa=" << format_double(p.kappa) << " gamma=" << format_double(p.gamma)
      << " gamma_phi=" << format_double(p.gamma_phi) << " n_max=" << p.n_max;
    return s.str();
}

int run_evolve(const RunConfig& cfg, const std::string& command_line) {
    const auto space = build_space(cfg.params.n_max);
    const Axis t = cfg.axis("t");
    EvolveOptions eo = cfg.evolve_options();
    eo.store_states = false;
    const auto names = cfg.resolved_metrics();
    eo.metrics = Metric::parse_list(names);
    eo.metrics.emplace_back(Metric::Kind::top_fock);
    Trajectory tr;
    try {
        tr = evolve(DensityMatrix::ground_state(space), cfg.params, t.values, cfg.frame, eo);
    } catch (const IntegrationFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    const fs::path dir = prepare_out(cfg);
    const fs::path path = dir / "trajectory.csv";
    auto os = open_out(path);
    write_trajectory_csv(os, tr, names, title_for(cfg) + " frame=" + to_string(cfg.frame));
    close_checked(os, path);
    write_manifest(cfg, dir, command_line);

    const auto& d = tr.diagnostics;
    std::printf("wrote %s (%zu points)\n", path.string().c_str(), tr.times.size());
    std::printf("trace error %.2e, hermiticity error %.2e, max top-Fock population %.2e, %ld steps (%ld rejected)\n",
                d.max_trace_error, d.max_hermiticity_error, d.max_top_population, d.ode.accepted, d.ode.rejected);
    if (d.max_top_population > cfg.truncation_tol) {
        std::fprintf(stderr, "warning: top-Fock population %.2e exceeds %.1e; raise --n-max\n", d.max_top_population,
                     cfg.truncation_tol);
    }
    return exit_ok;
}

int run_steady(const RunConfig& cfg, const std::string& command_line) {
    const auto space = build_space(cfg.params.n_max);
    SteadyOptions so;
    so.steady_tol = cfg.steady_tol;
    so.ode.rtol = std::min(so.ode.rtol, cfg.ode_tol);
    SteadyStateResult r;
    try {
        r = steady_state(cfg.params, space, cfg.steady_method, so);
    } catch (const NoUniqueSteadyState& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    const auto names = cfg.resolved_metrics();
    const auto metrics = Metric::parse_list(names);
    const fs::path dir = prepare_out(cfg);
    const fs::path path = dir / "steady.csv";
    auto os = open_out(path);
    os << "# " << title_for(cfg) << " method=" << to_string(r.method) << '\n' << units_comment() << '\n';
    os << "theta,kappa";
    for (const auto& n : names) os << ',' << n;
    os << ",residual,converged,top_fock\n";
    os << format_double(cfg.params.theta) << ',' << format_double(cfg.params.kappa);
    for (const auto& m : metrics) os << ',' << format_double(m.evaluate(r.state));
    os << ',' << format_double(r.residual) << ',' << (r.converged ? 1 : 0) << ','
       << format_double(top_fock_population(r.state.matrix(), space)) << '\n';
    close_checked(os, path);
    write_manifest(cfg, dir, command_line);
    std::printf("wrote %s; residual %.2e (%s)\n", path.string().c_str(), r.residual, r.converged ? "converged" : "NOT converged");
    return r.converged ? exit_ok : exit_failure;
}

int finish_sweep(const RunConfig& cfg, const SweepGrid& grid, const std::string& stem, const std::string& command_line,
                 std::uint8_t failure_bits) {
    const fs::path dir = prepare_out(cfg);
    for (const auto& ch : grid.channels) {
        const fs::path path = dir / (stem + "_" + ch + ".csv");
        auto os = open_out(path);
        write_grid_csv(os, grid, ch, title_for(cfg) + " channel=" + ch);
        close_checked(os, path);
        std::printf("wrote %s\n", path.string().c_str());
        if (cfg.render) {
            const fs::path png = dir / (stem + "_" + ch + ".png");
            const auto rep = emit_heatmap(grid, ch, png.string());
            for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s: %s\n", png.string().c_str(), w.c_str());
            std::printf("wrote %s\n", png.string().c_str());
        }
    }
    write_manifest(cfg, dir, command_line);
    std::size_t failed = 0, truncated = 0;
    for (auto f : grid.flags) {
        if (f & failure_bits) ++failed;
        if (f & cell_truncated) ++truncated;
    }
    for (const auto& msg : grid.failures) std::fprintf(stderr, "cell failure: %s\n", msg.c_str());
    if (truncated > 0) {
        std::fprintf(stderr, "warning: %zu of %zu cells flagged truncated (top-Fock population > %.1e); raise --n-max\n",
                     truncated, grid.cell_count(), cfg.truncation_tol);
    }
    std::printf("%zu cells, %zu failed, %zu truncated\n", grid.cell_count(), failed, truncated);
    return failed == 0 ? exit_ok : exit_failure;
}

int run_time_theta(const RunConfig& cfg, const std::string& command_line) {
    const auto grid = time_theta_map(cfg.params, cfg.axis("theta"), cfg.axis("t"), Metric::parse_list(cfg.resolved_metrics()),
                                     cfg.sweep_options());
    return finish_sweep(cfg, grid, "time_theta", command_line, cell_integration_failed);
}

int run_steady_map(const RunConfig& cfg, const std::string& command_line) {
    const auto grid = steady_map(cfg.params, cfg.axis("theta"), cfg.axis("kappa"), Metric::parse_list(cfg.resolved_metrics()),
                                 cfg.sweep_options());
    return finish_sweep(cfg, grid, "steady_map", command_line,
                        cell_integration_failed | cell_not_converged | cell_no_steady_state);
}

int run_verify(const RunConfig& cfg, std::vector<int> ids) {
    if (ids.empty()) {
        for (int i = 1; i <= AcceptanceSuite::criterion_count; ++i) ids.push_back(i);
    }
    for (int id : ids) {
        if (id < 1 || id > AcceptanceSuite::criterion_count) throw ConfigError("no criterion " + std::to_string(id));
    }
    AcceptanceOptions ao;
    ao.threads = cfg.threads;
    AcceptanceSuite suite(ao);
    int failed = 0;
    std::printf("%-4s %-6s %-8s %s\n", "id", "result", "time", "criterion / detail");
    suite.run_all(ids, [&](const CriterionResult& r) {
        if (!r.pass) ++failed;
        std::printf("%-4d %-6s %7.1fs %s\n%20s%s\n", r.id, r.pass ? "PASS" : "FAIL", r.seconds, r.title.c_str(), "",
                    r.detail.c_str());
        std::fflush(stdout);
    });
    std::printf("%zu checked, %d failed\n", ids.size(), failed);
    return failed == 0 ? exit_ok : exit_failure;
}

int run_heatmap(const Flags& f) {
    std::ifstream is(f.input, std::ios::binary);
    if (!is) throw IoError("cannot open '" + f.input + "'");
    const SweepGrid grid = read_grid_csv(is);
    const std::string channel = f.channel.empty() ? grid.channels.front() : f.channel;
    std::string out = f.png;
    if (out.empty()) out = fs::path(f.input).replace_extension(".png").string();
    HeatmapStyle style;
    style.log_scale = f.log_scale;
    const auto rep = emit_heatmap(grid, channel, out, style);
    for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("wrote %s (%dx%d, scale [%.4g, %.4g], %zu flagged cells)\n", out.c_str(), rep.width, rep.height, rep.vmin,
                rep.vmax, rep.flagged_cells);
    return exit_ok;
}

void apply_flags(RunConfig& cfg, const Flags& f) {
    const std::pair<const char*, const std::string*> keyed[] = {
        {"g", &f.g},           {"theta", &f.theta},         {"kappa", &f.kappa},           {"gamma", &f.gamma},
        {"gamma_phi", &f.gamma_phi}, {"n_max", &f.n_max},   {"t_max", &f.t_max},           {"t_points", &f.t_points},
        {"ode_tol", &f.ode_tol}, {"steady_tol", &f.steady_tol}, {"frame", &f.frame},       {"metrics", &f.metrics},
        {"out", &f.out},       {"method", &f.method},       {"threads", &f.threads},       {"truncation_tol", &f.truncation_tol},
    };
    for (const auto& [key, value] : keyed) {
        if (!value->empty()) cfg.set(key, *value);
    }
    for (const auto& spec : f.grids) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--grid expects <axis>=<start>:<stop>:<count>, got '" + spec + "'");
        cfg.set("grid." + trim(spec.substr(0, eq)), trim(spec.substr(eq + 1)));
    }
    if (f.render) cfg.render = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two qubits in a parametrically driven cavity: master-equation dynamics, steady states and sweeps."};
    app.set_version_flag("--version", std::string("lambqed ") + version_string);
    app.fallthrough();
    app.require_subcommand(1);

    Flags f;
    app.add_option("--g", f.g, "coupling amplitude g [omega]");
    app.add_option("--theta", f.theta, "drive shape theta in [0, 1]");
    app.add_option("--kappa", f.kappa, "cavity decay rate [omega]");
    app.add_option("--gamma", f.gamma, "qubit relaxation rate [omega]");
    app.add_option("--gamma-phi", f.gamma_phi, "pure dephasing rate [omega]");
    app.add_option("--n-max", f.n_max, "Fock truncation");
    app.add_option("--t-max", f.t_max, "final time [1/omega]");
    app.add_option("--t-points", f.t_points, "number of output times including t=0");
    app.add_option("--ode-tol", f.ode_tol, "integrator relative tolerance");
    app.add_option("--steady-tol", f.steady_tol, "steady-state residual tolerance");
    app.add_option("--grid", f.grids, "axis grid <axis>=<start>:<stop>:<count> (axes: theta, t, kappa)");
    app.add_option("--metrics", f.metrics, "comma-separated channels: C,I,n_ph,p_exc,p_exc1,p_exc2,pop_uu,pop_ud,pop_du,pop_dd,purity,S_qq,top_fock,C<i>,C<i>n");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--config", f.config, "config file (flags override its values)");
    app.add_option("--frame", f.frame, "effective|lab");
    app.add_option("--method", f.method, "steady-state method: null-space|long-time");
    app.add_option("--threads", f.threads, "sweep worker threads (0 = all cores)");
    app.add_option("--truncation-tol", f.truncation_tol, "top-Fock population above which cells are flagged");
    app.add_flag("--render", f.render, "also write PNG heatmaps for sweeps");

    app.add_subcommand("evolve", "integrate from |dd,0> and write trajectory.csv");
    app.add_subcommand("steady", "steady state of one parameter set");
    app.add_subcommand("sweep-time-theta", "time x theta map (one evolution per theta)");
    app.add_subcommand("sweep-steady", "kappa x theta steady-state map");
    auto* verify_cmd = app.add_subcommand("verify", "run the oracle suite and print a pass/fail table");
    verify_cmd->add_option("--criteria", f.criteria, "criterion numbers to run (default: all)")->delimiter(',');
    auto* run_cmd = app.add_subcommand("run", "run the mode named in --config (e.g. a manifest)");
    auto* heat_cmd = app.add_subcommand("heatmap", "render a sweep CSV as PNG");
    heat_cmd->add_option("input", f.input, "CSV written by a sweep")->required();
    heat_cmd->add_option("--channel", f.channel, "channel column (default: the file's)");
    heat_cmd->add_option("--png", f.png, "output image (default: input with .png)");
    heat_cmd->add_flag("--log", f.log_scale, "log10 color scale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    std::string command_line = "lambqed";
    for (int i = 1; i < argc; ++i) command_line += std::string(" ") + argv[i];

    try {
        if (heat_cmd->parsed()) return run_heatmap(f);

        RunConfig cfg;
        const CLI::App* sub = app.get_subcommands().front();
        if (sub != run_cmd) cfg.mode = sub->get_name();
        if (!f.config.empty()) {
            std::ifstream is(f.config);
            if (!is) throw IoError("cannot open config '" + f.config + "'");
            KeyValueFile file = KeyValueFile::parse(is);
            if (sub != run_cmd) {
                std::erase_if(file.entries, [](const KeyValueFile::Entry& e) { return e.key == "mode"; });
            } else {
                for (const auto& e : file.entries) {
                    if (e.key == "mode" && (e.section.empty() || e.section == "run")) cfg.set("mode", e.value);
                }
            }
            cfg.apply(file);
        } else if (sub == run_cmd) {
            throw ConfigError("run needs --config");
        }
        apply_flags(cfg, f);
        cfg.params.validate();

        if (cfg.mode == "evolve") return run_evolve(cfg, command_line);
        if (cfg.mode == "steady") return run_steady(cfg, command_line);
        if (cfg.mode == "sweep-time-theta") return run_time_theta(cfg, command_line);
        if (cfg.mode == "sweep-steady") return run_steady_map(cfg, command_line);
        if (cfg.mode == "verify") return run_verify(cfg, f.criteria);
        throw ConfigError("unknown mode '" + cfg.mode + "'");
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
}
