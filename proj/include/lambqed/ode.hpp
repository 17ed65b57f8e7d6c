// ode.hpp: Adaptive Dormand-Prince 5(4) integrator for Eigen-valued states

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lambqed {

struct OdeOptions {
    double rtol{1e-8};
    double atol{1e-10};
    double h_initial{0.0};  // 0 → pick from the first derivative
    double h_max{std::numeric_limits<double>::infinity()};
    long max_steps{50'000'000};
};

struct OdeStats {
    long accepted{0};
    long rejected{0};
    long rhs_evaluations{0};
    double error_estimate{0.0};  // Σ over accepted steps of the local error (Frobenius norm)
};

class IntegrationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Embedded 5(4) pair with FSAL and standard step-size control.
///
/// `Rhs` is callable as rhs(t, y, dydt). `State` is a dense Eigen type; the
/// scaled error norm treats each complex entry as one component.
template <class State, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, OdeOptions opts = {}) : rhs_(std::move(rhs)), opts_(opts) {}

    /// Advance y from t to t_end, landing exactly on t_end. `post_step(y)` runs after
    /// every accepted step and may project the state (it must be a tiny correction).
    template <class PostStep>
    void advance(double& t, State& y, double t_end, PostStep&& post_step) {
        if (t_end < t) throw std::invalid_argument("DormandPrince::advance: t_end before t");
        if (t_end == t) return;
        if (!have_k1_ || k1_t_ != t) {
            k1_.resizeLike(y);
            eval(t, y, k1_);
            have_k1_ = true;
            k1_t_ = t;
        }
        if (h_ <= 0.0) h_ = initial_step(t, y);

        while (t < t_end) {
            if (stats_.accepted + stats_.rejected >= opts_.max_steps) {
                throw IntegrationFailure("DormandPrince: step budget exhausted at t = " + std::to_string(t));
            }
            double h = std::min({h_, opts_.h_max, t_end - t});
            const bool last = (t + h >= t_end) || (t_end - (t + h) < 1e-12 * std::max(1.0, std::abs(t_end)));
            if (last) h = t_end - t;

            step(t, y, h);
            const double err = error_norm(y);
            if (!std::isfinite(err)) {
                throw IntegrationFailure("DormandPrince: non-finite error estimate at t = " + std::to_string(t));
            }
            if (err <= 1.0) {
                stats_.error_estimate += (h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_)).norm();
                t = last ? t_end : t + h;
                y = y_new_;
                post_step(y);
                k1_.swap(k7_);
                k1_t_ = t;
                ++stats_.accepted;
                const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                // Keep the controller's natural step when the grid truncated this one.
                if (!last || h >= h_) h_ = h * factor;
            } else {
                ++stats_.rejected;
                h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
                if (h_ < 1e-14 * std::max(1.0, std::abs(t))) {
                    throw IntegrationFailure("DormandPrince: step size underflow at t = " + std::to_string(t));
                }
            }
        }
    }

    void advance(double& t, State& y, double t_end) {
        advance(t, y, t_end, [](State&) {});
    }

    /// Drop the cached derivative (call after modifying y between advances).
    void invalidate() { have_k1_ = false; }

    [[nodiscard]] const OdeStats& stats() const noexcept { return stats_; }
    [[nodiscard]] double step_size() const noexcept { return h_; }

private:
    // Butcher tableau
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    // b - b* (difference between the 5th- and 4th-order weights)
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                            e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    void eval(double t, const State& y, State& out) {
        rhs_(t, y, out);
        ++stats_.rhs_evaluations;
    }

    void step(double t, const State& y, double h) {
        k2_.resizeLike(y);
        k3_.resizeLike(y);
        k4_.resizeLike(y);
        k5_.resizeLike(y);
        k6_.resizeLike(y);
        k7_.resizeLike(y);
        tmp_ = y + h * a21 * k1_;
        eval(t + c2 * h, tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        eval(t + c3 * h, tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        eval(t + c4 * h, tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        eval(t + c5 * h, tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        eval(t + h, tmp_, k6_);
        y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        eval(t + h, y_new_, k7_);
        h_last_ = h;
    }

    double error_norm(const State& y) const {
        const double h = h_last_;
        double acc = 0.0;
        const Eigen::Index n = y.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto e = h * (e1 * k1_(i) + e3 * k3_(i) + e4 * k4_(i) + e5 * k5_(i) + e6 * k6_(i) + e7 * k7_(i));
            const double scale = opts_.atol + opts_.rtol * std::max(std::abs(y(i)), std::abs(y_new_(i)));
            const double r = std::abs(e) / scale;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(n));
    }

    double initial_step(double t, const State& y) {
        if (opts_.h_initial > 0.0) return opts_.h_initial;
        // Hairer-Wanner starting-step heuristic
        auto scaled = [&](const State& v) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const double r = std::abs(v(i)) / (opts_.atol + opts_.rtol * std::abs(y(i)));
                acc += r * r;
            }
            return std::sqrt(acc / static_cast<double>(v.size()));
        };
        const double d0 = scaled(y);
        const double d1 = scaled(k1_);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        tmp_ = y + h0 * k1_;
        State k(y.rows(), y.cols());
        eval(t + h0, tmp_, k);
        const double d2 = scaled(State(k - k1_)) / h0;
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
        return std::min({100.0 * h0, h1, opts_.h_max});
    }

    Rhs rhs_;
    OdeOptions opts_;
    OdeStats stats_{};
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;
    double h_last_{0.0};
    double h_{0.0};
    bool have_k1_{false};
    double k1_t_{0.0};
};

}  // namespace lambqed
