// sweep.hpp: Parameter grids evaluated cell by cell

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lambqed/dynamics.hpp"
#include "lambqed/metrics.hpp"
#include "lambqed/model.hpp"

namespace lambqed {

struct Axis {
    std::string name;
    std::vector<double> values;

    static Axis uniform(std::string name, double start, double stop, int count) {
        return {std::move(name), uniform_grid(start, stop, count)};
    }
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Per-cell diagnostics, combined as a bitmask. 0 means the cell is trusted.
enum CellFlag : std::uint8_t {
    cell_ok = 0,
    cell_integration_failed = 1,  // evolve/steady_state threw; values are NaN
    cell_truncated = 2,           // top-two Fock population above the sweep's truncation_tol
    cell_not_converged = 4,       // steady residual above steady_tol
    cell_no_steady_state = 8,     // κ = γ = 0 cell in a steady map
};

inline std::string describe_flags(std::uint8_t f) {
    if (f == cell_ok) return "ok";
    std::string s;
    auto add = [&s](const char* w) { s += s.empty() ? w : std::string("|") + w; };
    if (f & cell_integration_failed) add("integration_failed");
    if (f & cell_truncated) add("truncated");
    if (f & cell_not_converged) add("not_converged");
    if (f & cell_no_steady_state) add("no_steady_state");
    return s;
}

/// Scalar channels on an x × y grid. Storage is y-major: index = iy * nx + ix.
struct SweepGrid {
    Axis x;
    Axis y;
    std::vector<std::string> channels;
    std::map<std::string, std::vector<double>> values;
    std::vector<std::uint8_t> flags;
    std::vector<std::string> failures;  // one message per failed row or cell, in grid order
    std::vector<TrajectoryDiagnostics> row_diagnostics;  // time maps only, one per y row

    SweepGrid() = default;
    SweepGrid(Axis x_axis, Axis y_axis, std::vector<std::string> channel_names)
        : x(std::move(x_axis)), y(std::move(y_axis)), channels(std::move(channel_names)) {
        for (const auto& c : channels) values[c].assign(cell_count(), std::numeric_limits<double>::quiet_NaN());
        flags.assign(cell_count(), cell_ok);
    }

    [[nodiscard]] std::size_t cell_count() const noexcept { return x.size() * y.size(); }
    [[nodiscard]] std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return iy * x.size() + ix; }

    [[nodiscard]] double at(const std::string& channel, std::size_t ix, std::size_t iy) const {
        return channel_values(channel)[index(ix, iy)];
    }

    [[nodiscard]] const std::vector<double>& channel_values(const std::string& channel) const {
        const auto it = values.find(channel);
        if (it == values.end()) throw std::invalid_argument("SweepGrid: no channel '" + channel + "'");
        return it->second;
    }

    [[nodiscard]] std::size_t flagged_count() const {
        return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](std::uint8_t f) { return f != cell_ok; }));
    }
};

/// Runs task(i) for i in [0, count) on `threads` workers. Results must be written to
/// per-index slots, which keeps the output independent of scheduling.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct SweepOptions {
    unsigned threads{0};  // 0 → hardware concurrency
    double truncation_tol{1e-4};
    Frame frame{Frame::effective};
    OdeOptions ode{};
    SteadyMethod steady_method{SteadyMethod::null_space};
    SteadyOptions steady{};
};

/// Default figure grids.
inline Axis default_theta_axis() { return Axis::uniform("theta", 0.0, 1.0, 101); }
inline Axis default_time_axis() { return Axis::uniform("t", 0.0, 400.0, 401); }
inline Axis default_kappa_axis() { return Axis::uniform("kappa", 0.0, 0.1, 21); }

/// One evolve() per θ row; x = time, y = θ.
inline SweepGrid time_theta_map(const SystemParams& base, const Axis& theta_axis, const Axis& t_axis,
                                const std::vector<Metric>& metrics, const SweepOptions& opts = {}) {
    if (theta_axis.values.empty() || t_axis.values.empty()) throw std::invalid_argument("time_theta_map: empty grid");
    for (double th : theta_axis.values) {
        if (!(th >= 0.0 && th <= 1.0)) throw std::invalid_argument("time_theta_map: theta outside [0, 1]");
    }
    std::vector<std::string> names;
    for (const auto& m : metrics) names.push_back(m.name());
    SweepGrid grid(t_axis, theta_axis, names);
    std::vector<std::string> row_errors(theta_axis.size());
    grid.row_diagnostics.resize(theta_axis.size());
    std::vector<std::vector<double>*> slots;  // resolved up front so workers never touch the map
    for (const auto& n : names) slots.push_back(&grid.values[n]);
    const HilbertSpec space = build_space(base.n_max);
    const std::size_t nx = t_axis.size();

    parallel_for(theta_axis.size(), opts.threads, [&](std::size_t iy) {
        SystemParams p = base;
        p.theta = theta_axis.values[iy];
        EvolveOptions eo;
        eo.ode = opts.ode;
        eo.store_states = false;
        eo.metrics = metrics;
        eo.metrics.emplace_back(Metric::Kind::top_fock);
        try {
            const Trajectory tr = evolve(DensityMatrix::ground_state(space), p, t_axis.values, opts.frame, eo);
            const auto& top = tr.observables.at("top_fock");
            grid.row_diagnostics[iy] = tr.diagnostics;
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t k = grid.index(ix, iy);
                for (std::size_t c = 0; c < metrics.size(); ++c) (*slots[c])[k] = tr.observables.at(names[c])[ix];
                if (top[ix] > opts.truncation_tol) grid.flags[k] |= cell_truncated;
            }
        } catch (const std::exception& e) {
            for (std::size_t ix = 0; ix < nx; ++ix) grid.flags[grid.index(ix, iy)] |= cell_integration_failed;
            row_errors[iy] = "theta=" + std::to_string(p.theta) + ": " + e.what();
        }
    });
    for (auto& msg : row_errors) {
        if (!msg.empty()) grid.failures.push_back(std::move(msg));
    }
    return grid;
}

/// One steady_state() per (κ, θ) cell; x = κ, y = θ.
inline SweepGrid steady_map(const SystemParams& base, const Axis& theta_axis, const Axis& kappa_axis,
                            const std::vector<Metric>& metrics, const SweepOptions& opts = {}) {
    if (theta_axis.values.empty() || kappa_axis.values.empty()) throw std::invalid_argument("steady_map: empty grid");
    std::vector<std::string> names;
    for (const auto& m : metrics) names.push_back(m.name());
    SweepGrid grid(kappa_axis, theta_axis, names);
    std::vector<std::string> cell_errors(grid.cell_count());
    std::vector<std::vector<double>*> slots;
    for (const auto& n : names) slots.push_back(&grid.values[n]);
    const HilbertSpec space = build_space(base.n_max);

    parallel_for(grid.cell_count(), opts.threads, [&](std::size_t k) {
        const std::size_t ix = k % kappa_axis.size();
        const std::size_t iy = k / kappa_axis.size();
        SystemParams p = base;
        p.theta = theta_axis.values[iy];
        p.kappa = kappa_axis.values[ix];
        try {
            const SteadyStateResult r = steady_state(p, space, opts.steady_method, opts.steady);
            for (std::size_t c = 0; c < metrics.size(); ++c) (*slots[c])[k] = metrics[c].evaluate(r.state);
            if (!r.converged) grid.flags[k] |= cell_not_converged;
            if (top_fock_population(r.state.matrix(), space) > opts.truncation_tol) grid.flags[k] |= cell_truncated;
        } catch (const NoUniqueSteadyState& e) {
            grid.flags[k] |= cell_no_steady_state;
            cell_errors[k] = e.what();
        } catch (const std::exception& e) {
            grid.flags[k] |= cell_integration_failed;
            cell_errors[k] = "theta=" + std::to_string(p.theta) + " kappa=" + std::to_string(p.kappa) + ": " + e.what();
        }
    });
    for (auto& msg : cell_errors) {
        if (!msg.empty()) grid.failures.push_back(std::move(msg));
    }
    return grid;
}

enum class ConvergenceStatus { converged, not_converged, undetermined };

inline std::string to_string(ConvergenceStatus s) {
    switch (s) {
        case ConvergenceStatus::converged: return "converged";
        case ConvergenceStatus::not_converged: return "not_converged";
        case ConvergenceStatus::undetermined: return "undetermined";
    }
    return "?";
}

struct TruncationOptions {
    double value_tol{1e-4};
    double population_tol{1e-6};
    double t_end{0.0};  // > 0: evaluate at the end of an evolution to t_end (top population = max along it)
    SteadyMethod steady_method{SteadyMethod::null_space};
    SteadyOptions steady{};
    OdeOptions ode{};
};

struct TruncationReport {
    std::vector<int> n_max;
    std::vector<double> values;
    std::vector<double> top_population;
    ConvergenceStatus status{ConvergenceStatus::undetermined};
    int converged_at{-1};  // first n_max whose step from its predecessor meets both tolerances
};

/// Evaluates `metric` on a ladder of Fock cutoffs. The verdict uses the last pair.
inline TruncationReport truncation_convergence(const SystemParams& params, const Metric& metric,
                                               const std::vector<int>& n_max_list, const TruncationOptions& opts = {}) {
    if (n_max_list.empty()) throw std::invalid_argument("truncation_convergence: empty n_max list");
    for (std::size_t k = 1; k < n_max_list.size(); ++k) {
        if (n_max_list[k] <= n_max_list[k - 1]) throw std::invalid_argument("truncation_convergence: n_max list must increase");
    }
    TruncationReport rep;
    for (const int n : n_max_list) {
        SystemParams p = params;
        p.n_max = n;
        const HilbertSpec space = build_space(n);
        double value = 0.0;
        double top = 0.0;
        if (opts.t_end > 0.0) {
            EvolveOptions eo;
            eo.ode = opts.ode;
            eo.store_states = true;
            const std::vector<double> grid{0.0, opts.t_end};
            const Trajectory tr = evolve(DensityMatrix::ground_state(space), p, grid, Frame::effective, eo);
            value = metric.evaluate(tr.states.back());
            top = tr.diagnostics.max_top_population;
        } else {
            const SteadyStateResult r = steady_state(p, space, opts.steady_method, opts.steady);
            value = metric.evaluate(r.state);
            top = top_fock_population(r.state.matrix(), space);
        }
        rep.n_max.push_back(n);
        rep.values.push_back(value);
        rep.top_population.push_back(top);
    }
    auto pair_ok = [&](std::size_t k) {
        return std::abs(rep.values[k] - rep.values[k - 1]) < opts.value_tol && rep.top_population[k] < opts.population_tol;
    };
    for (std::size_t k = 1; k < rep.values.size(); ++k) {
        if (pair_ok(k)) {
            rep.converged_at = rep.n_max[k];
            break;
        }
    }
    if (rep.values.size() >= 2) {
        rep.status = pair_ok(rep.values.size() - 1) ? ConvergenceStatus::converged : ConvergenceStatus::not_converged;
    }
    return rep;
}

}  // namespace lambqed
