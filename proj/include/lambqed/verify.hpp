// verify.hpp: Oracle suite shared by the `verify` command and the acceptance test

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lambqed/analytic.hpp"
#include "lambqed/dynamics.hpp"
#include "lambqed/metrics.hpp"
#include "lambqed/model.hpp"
#include "lambqed/sweep.hpp"

namespace lambqed {

struct CriterionResult {
    int id{0};
    std::string title;
    bool pass{false};
    std::string detail;
    double seconds{0.0};
};

/// Per-trajectory invariant record collected while the suite runs.
struct InvariantEntry {
    std::string label;
    double trace_error{0.0};
    double hermiticity_error{0.0};
    double min_eigenvalue{0.0};
    bool min_eigenvalue_exact{false};
    bool positivity_ok{true};
    double max_purity{0.0};
};

namespace detail {

inline std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

/// Uniform double in [lo, hi) from a 64-bit engine, independent of the standard library's distributions.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

struct AcceptanceOptions {
    unsigned threads{0};
    double g{0.05};
};

/// Criteria 1–11. Results that later criteria depend on (the steady map and the
/// invariant log) are cached, so running the suite in order does no repeated work.
class AcceptanceSuite {
public:
    static constexpr int criterion_count = 11;

    explicit AcceptanceSuite(AcceptanceOptions opts = {}) : opts_(opts) {}

    CriterionResult run(int id) {
        if (id < 1 || id > criterion_count) throw std::invalid_argument("no criterion " + std::to_string(id));
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            switch (id) {
                case 1: r = c1(); break;
                case 2: r = c2(); break;
                case 3: r = c3(); break;
                case 4: r = c4(); break;
                case 5: r = c5(); break;
                case 6: r = c6(); break;
                case 7: r = c7(); break;
                case 8: r = c8(); break;
                case 9: r = c9(); break;
                case 10: r = c10(); break;
                default: r = c11(); break;
            }
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.id = id;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    std::vector<CriterionResult> run_all(const std::vector<int>& ids,
                                         const std::function<void(const CriterionResult&)>& on_result = {}) {
        std::vector<CriterionResult> out;
        for (int id : ids) {
            out.push_back(run(id));
            if (on_result) on_result(out.back());
        }
        return out;
    }

    [[nodiscard]] const std::vector<InvariantEntry>& invariant_log() const noexcept { return log_; }

private:
    AcceptanceOptions opts_;
    std::vector<InvariantEntry> log_;
    std::optional<SweepGrid> steady_grid_;
    std::optional<std::pair<double, double>> optimal_cell_;  // (θ, κ) from criterion 5b

    SystemParams base(double theta, int n_max) const {
        SystemParams p;
        p.g = opts_.g;
        p.theta = theta;
        p.n_max = n_max;
        return p;
    }

    void record(const std::string& label, const TrajectoryDiagnostics& d) {
        log_.push_back({label, d.max_trace_error, d.max_hermiticity_error, d.min_eigenvalue, d.min_eigenvalue_exact,
                        d.positivity_ok, d.max_purity});
    }

    Trajectory run_closed(double theta, int n_max, const std::vector<double>& grid, const std::vector<std::string>& metrics,
                          const std::string& label, Frame frame = Frame::effective) {
        const SystemParams p = base(theta, n_max);
        EvolveOptions eo;
        eo.store_states = false;
        eo.exact_min_eigenvalue = true;
        eo.metrics = Metric::parse_list(metrics);
        Trajectory tr = evolve(DensityMatrix::ground_state(build_space(n_max)), p, grid, frame, eo);
        record(label, tr.diagnostics);
        return tr;
    }

    // 1: exact θ = 1/2 solution
    CriterionResult c1() {
        CriterionResult r{1, "theta=1/2 closed forms (populations, n_ph, C)", false, {}, 0.0};
        const double g = opts_.g;
        const auto grid = uniform_grid(0.0, 3.0 / g, 51);
        const auto tr = run_closed(0.5, 30, grid, {"pop_uu", "pop_ud", "pop_du", "pop_dd", "n_ph", "C", "top_fock"},
                                   "c1 theta=0.5");
        double err = 0.0, cmax = 0.0, top = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto f = half_theta_closed_forms(g, grid[k]);
            const auto& o = tr.observables;
            err = std::max({err, std::abs(o.at("pop_uu")[k] - f.pop_uu), std::abs(o.at("pop_ud")[k] - f.pop_ud),
                            std::abs(o.at("pop_du")[k] - f.pop_du), std::abs(o.at("pop_dd")[k] - f.pop_dd),
                            std::abs(o.at("n_ph")[k] - f.n_ph)});
            cmax = std::max(cmax, o.at("C")[k]);
            top = std::max(top, o.at("top_fock")[k]);
        }
        r.pass = err <= 1e-4 && cmax <= 1e-6;
        r.detail = detail::fmt("max abs err %.2e (tol 1e-4), max C %.2e (tol 1e-6), n_max 30, top-Fock pop %.1e", err, cmax, top);
        return r;
    }

    double tc_error(double theta, int n_max) {
        const double g = opts_.g;
        const double period = 2.0 * std::numbers::pi / (std::sqrt(6.0) * g * theta);
        const auto grid = uniform_grid(0.0, 3.0 * period, 301);
        const auto tr = run_closed(theta, n_max, grid, {"C"}, detail::fmt("c2 theta=%.2f", theta));
        double err = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            err = std::max(err, std::abs(tr.observables.at("C")[k] - tc_concurrence(theta, g, grid[k])));
        }
        return err;
    }

    // 2: TC-side perturbative formula
    CriterionResult c2() {
        CriterionResult r{2, "TC perturbative oracle, error shrinking as theta -> 1", false, {}, 0.0};
        const double e95 = tc_error(0.95, 12), e98 = tc_error(0.98, 12), e99 = tc_error(0.99, 12);
        r.pass = e95 <= 0.02 && e95 > e98 && e98 > e99;
        r.detail = detail::fmt("max |dC| over 3 periods: theta=0.95 %.2e (tol 0.02), 0.98 %.2e, 0.99 %.2e", e95, e98, e99);
        return r;
    }

    // 3: anti-TC-side perturbative formula
    CriterionResult c3() {
        CriterionResult r{3, "anti-TC perturbative oracle at theta=0.16", false, {}, 0.0};
        const double g = opts_.g, theta = 0.16;
        const double period = 2.0 * std::numbers::pi / (std::sqrt(6.0) * g * (1.0 - theta));
        const auto grid = uniform_grid(0.0, 2.0 * period, 401);
        const auto tr = run_closed(theta, 15, grid, {"C"}, "c3 theta=0.16");
        const auto& c = tr.observables.at("C");
        double err = 0.0;
        int windows = 0;
        bool inside = false, zero_after_positive = false, seen_positive = false;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            err = std::max(err, std::abs(c[k] - atc_concurrence(theta, g, grid[k])));
            const bool pos = c[k] > 1e-3;
            if (pos && !inside) ++windows;
            if (pos) seen_positive = true;
            if (seen_positive && c[k] <= 1e-6) zero_after_positive = true;
            inside = pos;
        }
        const bool confined = windows >= 1 && zero_after_positive;
        r.pass = err <= 0.05 && confined;
        r.detail = detail::fmt("max |dC| over 2 periods %.3f (tol 0.05); numeric C>1e-3 in %d window(s), returns to 0: %s",
                               err, windows, zero_after_positive ? "yes" : "no");
        return r;
    }

    // 4: peak concurrence of the closed-system time-θ map
    CriterionResult c4() {
        CriterionResult r{4, "peak concurrence of the decoherence-free time-theta map", false, {}, 0.0};
        const SystemParams p = base(0.5, 60);
        SweepOptions so;
        so.threads = opts_.threads;
        so.truncation_tol = 1e-4;
        // pure states over t=400: at rtol 1e-8 the eigenvalue drift reaches -2e-6
        so.ode.rtol = 1e-10;
        so.ode.atol = 1e-12;
        const SweepGrid grid = time_theta_map(p, Axis::uniform("theta", 0.0, 1.0, 21), Axis::uniform("t", 0.0, 400.0, 401),
                                              {Metric::parse("C")}, so);
        for (std::size_t iy = 0; iy < grid.y.size(); ++iy) record(detail::fmt("c4 theta=%.2f", grid.y.values[iy]), grid.row_diagnostics[iy]);
        double best = -1.0, best_theta = 0.0, best_t = 0.0;
        for (std::size_t iy = 0; iy < grid.y.size(); ++iy) {
            for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
                if (grid.flags[grid.index(ix, iy)] != cell_ok) continue;
                const double c = grid.at("C", ix, iy);
                if (c > best) {
                    best = c;
                    best_theta = grid.y.values[iy];
                    best_t = grid.x.values[ix];
                }
            }
        }
        const bool theta_ok = best_theta > 0.0 && best_theta < 1.0 && std::abs(best_theta - 0.5) > 1e-12;
        r.pass = best >= 0.55 && best <= 0.70 && theta_ok && grid.failures.empty();
        r.detail = detail::fmt("max C %.4f at theta=%.2f, t=%.0f (band [0.55, 0.70]); grid 21x401, n_max 60, %zu of %zu cells flagged truncated",
                               best, best_theta, best_t, grid.flagged_count(), grid.cell_count());
        return r;
    }

    const SweepGrid& steady_grid() {
        if (!steady_grid_) {
            SystemParams p = base(0.5, 30);
            p.gamma = 0.01;
            SweepOptions so;
            so.threads = opts_.threads;
            so.truncation_tol = 1e-4;
            steady_grid_ = steady_map(p, Axis::uniform("theta", 0.0, 1.0, 21), Axis::uniform("kappa", 0.0, 0.1, 21),
                                      Metric::parse_list({"C", "I", "n_ph"}), so);
        }
        return *steady_grid_;
    }

    // 5: steady-state structure
    CriterionResult c5() {
        CriterionResult r{5, "steady-state map structure at gamma=0.01", false, {}, 0.0};
        const SweepGrid& grid = steady_grid();
        const std::size_t nx = grid.x.size();
        auto row_of = [&](double theta) {
            for (std::size_t iy = 0; iy < grid.y.size(); ++iy)
                if (std::abs(grid.y.values[iy] - theta) < 1e-9) return iy;
            throw std::logic_error("theta row missing");
        };
        // (a)
        const std::size_t r03 = row_of(0.3);
        double cmax03 = 0.0;
        int flagged03 = 0;
        for (std::size_t ix = 0; ix < nx; ++ix) {
            cmax03 = std::max(cmax03, grid.at("C", ix, r03));
            if (grid.flags[grid.index(ix, r03)] != cell_ok) ++flagged03;
        }
        const bool a = cmax03 <= 1e-3;
        // (b)
        // An edge cell flagged only for truncation is re-solved at a larger cutoff rather than dropped.
        int resolved_edges = 0;
        auto edge_value = [&](std::size_t ix, std::size_t iy) -> std::optional<double> {
            const std::uint8_t f = grid.flags[grid.index(ix, iy)];
            if (f == cell_ok) return grid.at("C", ix, iy);
            if (f != cell_truncated) return std::nullopt;
            SystemParams p = base(grid.y.values[iy], 50);
            p.gamma = 0.01;
            p.kappa = grid.x.values[ix];
            const auto s = steady_state(p, build_space(p.n_max), SteadyMethod::null_space);
            if (!s.converged || top_fock_population(s.state.matrix(), s.state.space()) > 1e-4) return std::nullopt;
            ++resolved_edges;
            return concurrence(s.state);
        };
        double best_ratio = 0.0, best_c = -1.0, best_theta = 0.0, best_kappa = 0.0, best_edge = 0.0;
        for (std::size_t iy = 0; iy < grid.y.size(); ++iy) {
            if (grid.y.values[iy] <= 0.5) continue;
            const auto lo = edge_value(0, iy), hi = edge_value(nx - 1, iy);
            if (!lo || !hi) continue;
            const double edge = std::max(*lo, *hi);
            double interior = -1.0;
            std::size_t arg = 0;
            for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
                if (grid.flags[grid.index(ix, iy)] != cell_ok) continue;
                if (grid.at("C", ix, iy) > interior) {
                    interior = grid.at("C", ix, iy);
                    arg = ix;
                }
            }
            if (interior <= 0.0 || interior < 1.2 * edge) continue;
            if (interior > best_c) {
                best_c = interior;
                best_ratio = edge > 0.0 ? interior / edge : std::numeric_limits<double>::infinity();
                best_theta = grid.y.values[iy];
                best_kappa = grid.x.values[arg];
                best_edge = edge;
            }
        }
        const bool b = best_c > 0.0;
        if (b) optimal_cell_ = {best_theta, best_kappa};
        // (c)
        int c_cells = 0;
        double c_theta = 0.0, c_kappa = 0.0, c_i = 0.0;
        for (std::size_t k = 0; k < grid.cell_count(); ++k) {
            if (grid.flags[k] != cell_ok) continue;
            if (grid.channel_values("C")[k] <= 1e-3 && grid.channel_values("I")[k] >= 1e-2) {
                if (c_cells++ == 0) {
                    c_theta = grid.y.values[k / nx];
                    c_kappa = grid.x.values[k % nx];
                    c_i = grid.channel_values("I")[k];
                }
            }
        }
        const bool c = c_cells > 0;
        r.pass = a && b && c;
        r.detail = detail::fmt("(a) theta=0.3 max C %.1e [%s, %d flagged]; (b) %s theta=%.2f kappa=%.3f C=%.4f vs edge %.4f (x%.2f); "
                               "(c) %s %d cells, e.g. theta=%.2f kappa=%.3f I=%.3f; grid 21x21, n_max 30, %zu flagged, "
                               "%d truncated edge cells re-solved at n_max 50",
                               cmax03, a ? "pass" : "FAIL", flagged03, b ? "pass" : "FAIL", best_theta, best_kappa, best_c,
                               best_edge, best_ratio, c ? "pass" : "FAIL", c_cells, c_theta, c_kappa, c_i, grid.flagged_count(),
                               resolved_edges);
        return r;
    }

    // 6: relaxation-assisted photon production
    CriterionResult c6() {
        CriterionResult r{6, "gamma-assisted photon production at theta=0.3", false, {}, 0.0};
        SystemParams p = base(0.3, 40);
        p.kappa = 0.005;
        p.gamma = 0.01;
        const auto with = steady_state(p, build_space(p.n_max), SteadyMethod::null_space);
        const double n_with = observables(with.state).n_ph;
        const double top_with = top_fock_population(with.state.matrix(), with.state.space());

        SystemParams q = base(0.3, 30);
        q.kappa = 0.005;
        const double horizon = 50.0 / q.kappa;
        const auto grid = uniform_grid(0.0, horizon, 1001);
        EvolveOptions eo;
        eo.store_states = false;
        eo.metrics = Metric::parse_list({"n_ph", "top_fock"});
        const auto tr = evolve(DensityMatrix::ground_state(build_space(q.n_max)), q, grid, Frame::effective, eo);
        record("c6 gamma=0", tr.diagnostics);
        double avg = 0.0, top = 0.0;
        int count = 0;
        for (std::size_t k = grid.size() / 2; k < grid.size(); ++k) {
            avg += tr.observables.at("n_ph")[k];
            ++count;
        }
        for (double v : tr.observables.at("top_fock")) top = std::max(top, v);
        avg /= count;
        r.pass = with.converged && n_with > avg;
        r.detail = detail::fmt("steady n_ph(gamma=0.01) %.4f [n_max 40, top %.1e, residual %.1e] vs late-time mean n_ph(gamma=0) %.2e "
                               "over t in [%.0f, %.0f] [n_max 30, top %.1e]",
                               n_with, top_with, with.residual, avg, horizon / 2, horizon, top);
        return r;
    }

    // 7: dephasing suppression at the optimal cell of criterion 5b
    CriterionResult c7() {
        CriterionResult r{7, "dephasing suppression factor at the optimal steady cell", false, {}, 0.0};
        if (!optimal_cell_) (void)c5();
        if (!optimal_cell_) {
            r.detail = "criterion 5b found no interior optimum";
            return r;
        }
        SystemParams p = base(optimal_cell_->first, 30);
        p.kappa = optimal_cell_->second;
        p.gamma = 0.01;
        const double c0 = concurrence(steady_state(p, build_space(p.n_max), SteadyMethod::null_space).state);
        p.gamma_phi = p.gamma;
        const double cphi = concurrence(steady_state(p, build_space(p.n_max), SteadyMethod::null_space).state);
        const double factor = cphi > 1e-12 ? c0 / cphi : std::numeric_limits<double>::infinity();
        r.pass = factor >= 1.4 && factor <= 2.3;
        r.detail = detail::fmt("theta=%.2f kappa=%.3f: C(gamma_phi=0) %.4f, C(gamma_phi=gamma) %.4f, factor %.3g (band [1.4, 2.3])",
                               optimal_cell_->first, optimal_cell_->second, c0, cphi, factor);
        return r;
    }

    // 8: conditional concurrence
    CriterionResult c8() {
        CriterionResult r{8, "conditional concurrence C_0 > 0 while total C = 0", false, {}, 0.0};
        SystemParams p = base(0.5, 40);
        p.kappa = 0.001;
        p.gamma = 0.01;
        const auto grid = uniform_grid(0.0, 80.0, 161);
        EvolveOptions eo;
        eo.store_states = false;
        eo.exact_min_eigenvalue = true;
        eo.metrics = Metric::parse_list({"C", "C0", "top_fock"});
        const auto tr = evolve(DensityMatrix::ground_state(build_space(p.n_max)), p, grid, Frame::effective, eo);
        record("c8 theta=0.5 open", tr.diagnostics);
        const auto& c = tr.observables.at("C");
        const auto& c0 = tr.observables.at("C0");
        const auto& top = tr.observables.at("top_fock");
        double best = 0.0, best_t = 0.0, best_c = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (c[k] <= 1e-4 && top[k] <= 1e-6 && c0[k] > best) {
                best = c0[k];
                best_t = grid[k];
                best_c = c[k];
            }
        }
        r.pass = best > 0.05;
        r.detail = detail::fmt("max C_0 with C<=1e-4: %.4f at t=%.1f (C=%.1e); C_0 is the raw photon-number-0 block", best, best_t, best_c);
        return r;
    }

    // 9: null-space vs long-time steady states
    CriterionResult c9() {
        CriterionResult r{9, "null-space vs long-time steady states, 10 random sets", false, {}, 0.0};
        std::mt19937_64 rng(20241015);
        double worst = 0.0;
        int unconverged = 0;
        for (int k = 0; k < 10; ++k) {
            SystemParams p;
            p.g = detail::uniform(rng, 0.02, 0.08);
            p.theta = detail::uniform(rng, 0.0, 1.0);
            p.kappa = detail::uniform(rng, 0.005, 0.05);
            p.gamma = detail::uniform(rng, 0.005, 0.05);
            p.gamma_phi = detail::uniform(rng, 0.0, 0.01);
            p.n_max = 4 + static_cast<int>(rng() % 7);
            const auto space = build_space(p.n_max);
            const auto a = steady_state(p, space, SteadyMethod::null_space);
            const auto b = steady_state(p, space, SteadyMethod::long_time);
            worst = std::max(worst, (a.state.matrix() - b.state.matrix()).norm());
            if (!a.converged || !b.converged) ++unconverged;
        }
        r.pass = worst <= 1e-6 && unconverged == 0;
        r.detail = detail::fmt("max ||rho_null - rho_long||_F %.2e (tol 1e-6), %d unconverged", worst, unconverged);
        return r;
    }

    // 10: physical invariants and metric unit values
    CriterionResult c10() {
        CriterionResult r{10, "physical invariants on all trajectories + metric unit checks", false, {}, 0.0};
        if (log_.empty()) {
            // run alone: check one dissipative trajectory with exact eigenvalues
            SystemParams p = base(0.65, 20);
            p.kappa = 0.01;
            p.gamma = 0.01;
            p.gamma_phi = 0.005;
            EvolveOptions eo;
            eo.store_states = false;
            eo.exact_min_eigenvalue = true;
            const auto grid = uniform_grid(0.0, 200.0, 41);
            record("dissipative theta=0.65", evolve(DensityMatrix::ground_state(build_space(20)), p, grid, Frame::effective, eo).diagnostics);
        }
        double tr_err = 0.0, herm = 0.0, min_exact = std::numeric_limits<double>::infinity();
        bool positivity = true;
        for (const auto& e : log_) {
            tr_err = std::max(tr_err, e.trace_error);
            herm = std::max(herm, e.hermiticity_error);
            positivity = positivity && e.positivity_ok;
            if (e.min_eigenvalue_exact) min_exact = std::min(min_exact, e.min_eigenvalue);
        }
        const bool inv = !log_.empty() && tr_err <= 1e-7 && herm <= 1e-10 && positivity &&
                         (!std::isfinite(min_exact) || min_exact >= -1e-7);

        const double s = 1.0 / std::sqrt(2.0);
        Eigen::Vector4cd phi{s, 0, 0, s}, psi{0, s, s, 0}, prod{0, 1, 0, 0};
        const Matrix4 bell_phi = phi * phi.adjoint(), bell_psi = psi * psi.adjoint(), product = prod * prod.adjoint();
        const double p = 0.8;
        const Matrix4 werner = p * bell_psi + (1.0 - p) / 4.0 * Matrix4::Identity();
        const double e_bell = std::max(std::abs(concurrence(bell_phi) - 1.0), std::abs(concurrence(bell_psi) - 1.0));
        const double e_werner = std::abs(concurrence(werner) - (3.0 * p - 1.0) / 2.0);
        const double e_prod = std::abs(concurrence(product));
        const double e_info = std::abs(mutual_information_parts(bell_phi).value() - 2.0 * std::log(2.0));
        const bool units = std::max({e_bell, e_werner, e_prod, e_info}) <= 1e-9;
        r.pass = inv && units;
        r.detail = detail::fmt("%zu trajectories: trace err %.1e, herm err %.1e, min eig %s (certified >= -1e-7: %s); "
                               "unit errors Bell %.1e Werner %.1e product %.1e I %.1e",
                               log_.size(), tr_err, herm, std::isfinite(min_exact) ? detail::fmt("%.1e", min_exact).c_str() : "n/a",
                               positivity ? "yes" : "no", e_bell, e_werner, e_prod, e_info);
        return r;
    }

    // 11: lab frame vs effective frame
    CriterionResult c11() {
        CriterionResult r{11, "lab-frame vs effective-frame concurrence up to t=200", false, {}, 0.0};
        const auto grid = uniform_grid(0.0, 200.0, 401);
        double worst = 0.0;
        std::string parts;
        for (double theta : {0.3, 0.8}) {
            const auto eff = run_closed(theta, 20, grid, {"C"}, detail::fmt("c11 theta=%.1f effective", theta));
            const auto lab = run_closed(theta, 20, grid, {"C"}, detail::fmt("c11 theta=%.1f lab", theta), Frame::lab);
            double d = 0.0, t_at = 0.0;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double diff = std::abs(eff.observables.at("C")[k] - lab.observables.at("C")[k]);
                if (diff > d) {
                    d = diff;
                    t_at = grid[k];
                }
            }
            worst = std::max(worst, d);
            parts += detail::fmt("%stheta=%.1f max |dC| %.3f at t=%.1f", parts.empty() ? "" : "; ", theta, d, t_at);
        }
        r.pass = worst <= 0.05;
        r.detail = parts + " (tol 0.05)";
        return r;
    }
};

}  // namespace lambqed
