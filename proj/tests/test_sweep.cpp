#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lambqed/sweep.hpp"

using namespace lambqed;

namespace {

SystemParams base(int n_max, double gamma = 0.0) {
    SystemParams p;
    p.g = 0.05;
    p.gamma = gamma;
    p.n_max = n_max;
    return p;
}

bool same_bits(const SweepGrid& a, const SweepGrid& b) {
    if (a.flags != b.flags || a.channels != b.channels) return false;
    for (const auto& c : a.channels) {
        const auto& va = a.channel_values(c);
        const auto& vb = b.channel_values(c);
        for (std::size_t k = 0; k < va.size(); ++k) {
            if (std::memcmp(&va[k], &vb[k], sizeof(double)) != 0) return false;
        }
    }
    return true;
}

}  // namespace

TEST(Axis, UniformAndDefaults) {
    const auto a = Axis::uniform("theta", 0.0, 1.0, 11);
    EXPECT_EQ(a.size(), 11u);
    EXPECT_DOUBLE_EQ(a.values[3], 0.3);
    EXPECT_EQ(default_theta_axis().size(), 101u);
    EXPECT_DOUBLE_EQ(default_time_axis().values.back(), 400.0);
    EXPECT_DOUBLE_EQ(default_kappa_axis().values.back(), 0.1);
}

TEST(Flags, Describe) {
    EXPECT_EQ(describe_flags(cell_ok), "ok");
    EXPECT_EQ(describe_flags(cell_truncated | cell_not_converged), "truncated|not_converged");
}

TEST(ParallelFor, CoversEveryIndexOnceAndPropagatesErrors) {
    std::vector<int> hits(97, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("boom"); }),
                 std::runtime_error);
}

TEST(TimeThetaMap, LayoutAndLimitingRows) {
    const auto theta = Axis::uniform("theta", 0.0, 1.0, 3);
    const auto t = Axis::uniform("t", 0.0, 60.0, 7);
    const auto grid = time_theta_map(base(30), theta, t, Metric::parse_list({"C", "n_ph"}));
    EXPECT_EQ(grid.cell_count(), 21u);
    EXPECT_EQ(grid.flags.size(), 21u);
    EXPECT_EQ(grid.channel_values("C").size(), 21u);
    EXPECT_EQ(grid.row_diagnostics.size(), 3u);
    EXPECT_TRUE(grid.failures.empty());
    for (std::size_t ix = 0; ix < t.size(); ++ix) {
        EXPECT_LT(grid.at("C", ix, 1), 1e-8) << "theta=0.5";
        EXPECT_EQ(grid.at("C", ix, 2), 0.0) << "theta=1";
        EXPECT_EQ(grid.at("n_ph", ix, 2), 0.0);
    }
    EXPECT_NEAR(grid.at("n_ph", 6, 1), 0.5 * std::pow(0.05 * 60.0, 2), 1e-5);
    EXPECT_THROW((void)grid.channel_values("I"), std::invalid_argument);
}

TEST(TimeThetaMap, DeterministicAcrossThreadCounts) {
    const auto theta = Axis::uniform("theta", 0.1, 0.9, 5);
    const auto t = Axis::uniform("t", 0.0, 80.0, 9);
    SweepOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto metrics = Metric::parse_list({"C", "I"});
    const auto a = time_theta_map(base(10, 0.01), theta, t, metrics, one);
    const auto b = time_theta_map(base(10, 0.01), theta, t, metrics, four);
    EXPECT_TRUE(same_bits(a, b));
}

TEST(TimeThetaMap, CellMatchesIsolatedRun) {
    const auto theta = Axis::uniform("theta", 0.2, 0.8, 4);
    const auto t = Axis::uniform("t", 0.0, 50.0, 6);
    const auto grid = time_theta_map(base(10), theta, t, Metric::parse_list({"C"}));
    SystemParams p = base(10);
    p.theta = theta.values[2];
    EvolveOptions eo;
    eo.metrics = Metric::parse_list({"C"});
    const auto tr = evolve(DensityMatrix::ground_state(build_space(10)), p, t.values, Frame::effective, eo);
    for (std::size_t ix = 0; ix < t.size(); ++ix) EXPECT_EQ(grid.at("C", ix, 2), tr.observables.at("C")[ix]);
}

TEST(TimeThetaMap, RefinedTimeGridStaysWithinErrorEstimate) {
    const auto theta = Axis::uniform("theta", 0.3, 0.9, 3);
    const auto coarse_t = Axis::uniform("t", 0.0, 100.0, 11);
    const auto fine_t = Axis::uniform("t", 0.0, 100.0, 21);
    const auto metrics = Metric::parse_list({"C", "n_ph"});
    const auto coarse = time_theta_map(base(14, 0.01), theta, coarse_t, metrics);
    const auto fine = time_theta_map(base(14, 0.01), theta, fine_t, metrics);
    for (std::size_t iy = 0; iy < theta.size(); ++iy) {
        const double bound = std::max(coarse.row_diagnostics[iy].ode.error_estimate, fine.row_diagnostics[iy].ode.error_estimate);
        for (std::size_t ix = 0; ix < coarse_t.size(); ++ix) {
            for (const auto& c : coarse.channels) {
                EXPECT_LE(std::abs(coarse.at(c, ix, iy) - fine.at(c, 2 * ix, iy)), bound) << c;
            }
        }
    }
}

TEST(TimeThetaMap, TruncationAndFailuresAreFlaggedNotFatal) {
    const auto theta = Axis::uniform("theta", 0.0, 1.0, 3);
    const auto t = Axis::uniform("t", 0.0, 200.0, 5);
    const auto grid = time_theta_map(base(4), theta, t, Metric::parse_list({"n_ph"}));
    EXPECT_NE(grid.flags[grid.index(4, 1)] & cell_truncated, 0);  // θ = 0.5 pumps photons past n_max = 4
    EXPECT_EQ(grid.flags[grid.index(4, 2)], cell_ok);

    SweepOptions starved;
    starved.ode.max_steps = 3;
    const auto failed = time_theta_map(base(4), theta, t, Metric::parse_list({"n_ph"}), starved);
    EXPECT_EQ(failed.failures.size(), 3u);
    for (std::size_t k = 0; k < failed.cell_count(); ++k) EXPECT_NE(failed.flags[k] & cell_integration_failed, 0);
    EXPECT_TRUE(std::isnan(failed.at("n_ph", 3, 0)));
    EXPECT_EQ(failed.channel_values("n_ph").size(), 15u);

    const auto bad = Axis::uniform("theta", 0.5, 1.5, 3);
    EXPECT_THROW(time_theta_map(base(4), bad, t, Metric::parse_list({"C"})), std::invalid_argument);
}

TEST(SteadyMap, FlagsNoSteadyStateAndKeepsGoing) {
    const auto theta = Axis::uniform("theta", 0.6, 0.9, 2);
    const auto kappa = Axis::uniform("kappa", 0.0, 0.1, 3);
    const auto grid = steady_map(base(8), theta, kappa, Metric::parse_list({"C", "n_ph"}));
    for (std::size_t iy = 0; iy < theta.size(); ++iy) {
        EXPECT_NE(grid.flags[grid.index(0, iy)] & cell_no_steady_state, 0);
        EXPECT_EQ(grid.flags[grid.index(2, iy)] & cell_no_steady_state, 0);
        EXPECT_FALSE(std::isnan(grid.at("n_ph", 2, iy)));
    }
    EXPECT_EQ(grid.failures.size(), 2u);
}

TEST(SteadyMap, DeterministicAndCellIndependent) {
    const auto theta = Axis::uniform("theta", 0.2, 0.8, 3);
    const auto kappa = Axis::uniform("kappa", 0.0, 0.08, 3);
    SweepOptions one, three;
    one.threads = 1;
    three.threads = 3;
    const auto metrics = Metric::parse_list({"C", "I", "n_ph"});
    const auto a = steady_map(base(8, 0.01), theta, kappa, metrics, one);
    const auto b = steady_map(base(8, 0.01), theta, kappa, metrics, three);
    EXPECT_TRUE(same_bits(a, b));
    SystemParams p = base(8, 0.01);
    p.theta = theta.values[1];
    p.kappa = kappa.values[2];
    const auto r = steady_state(p, build_space(8), SteadyMethod::null_space);
    EXPECT_EQ(a.at("I", 2, 1), mutual_information(r.state));
}

TEST(Truncation, WeakDriveConvergesAtSmallCutoff) {
    SystemParams p = base(4, 0.05);
    p.theta = 0.9;
    p.kappa = 0.05;
    const auto rep = truncation_convergence(p, Metric::parse("C"), {3, 5, 7, 9});
    EXPECT_EQ(rep.status, ConvergenceStatus::converged);
    EXPECT_GT(rep.converged_at, 0);
    EXPECT_LT(rep.converged_at, 10);
    EXPECT_EQ(rep.values.size(), 4u);
}

TEST(Truncation, PhotonAmplificationDoesNotConvergeAtSmallCutoff) {
    SystemParams p = base(4, 0.01);
    p.theta = 0.2;
    p.kappa = 0.005;
    const auto rep = truncation_convergence(p, Metric::parse("n_ph"), {4, 6, 8});
    EXPECT_EQ(rep.status, ConvergenceStatus::not_converged);
    EXPECT_GT(rep.top_population.back(), 1e-6);
}

TEST(Truncation, SingleEntryAndOrderingRules) {
    SystemParams p = base(4, 0.05);
    p.theta = 0.9;
    p.kappa = 0.05;
    EXPECT_EQ(truncation_convergence(p, Metric::parse("C"), {5}).status, ConvergenceStatus::undetermined);
    EXPECT_THROW(truncation_convergence(p, Metric::parse("C"), {5, 5}), std::invalid_argument);
    EXPECT_THROW(truncation_convergence(p, Metric::parse("C"), {}), std::invalid_argument);
    EXPECT_EQ(to_string(ConvergenceStatus::not_converged), "not_converged");
}

TEST(Truncation, EvolutionLadder) {
    SystemParams p = base(4);
    p.theta = 0.5;
    TruncationOptions opts;
    opts.t_end = 40.0;  // n_ph = 2
    const auto rep = truncation_convergence(p, Metric::parse("n_ph"), {10, 20, 30}, opts);
    EXPECT_EQ(rep.status, ConvergenceStatus::converged);
    EXPECT_NEAR(rep.values.back(), 2.0, 1e-4);
}
