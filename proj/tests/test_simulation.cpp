#include "mtq/constants.hpp"
#include "mtq/errors.hpp"
#include "mtq/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace mtq;

namespace {

const char* kBase =
    "[orbit]\n"
    "semi_major_axis_km = 6691.6\n"
    "eccentricity = 0.046440\n"
    "inclination_deg = 96.7\n"
    "raan_deg = 100.9\n"
    "arg_perigee_deg = 119.7\n"
    "mean_anomaly_deg = 240.49\n";

const char* kDetumbleWeights = "q = 0 0 0 0 100 100 250\nqt = 0 0 0 0 100 100 250\n";

ScenarioConfig config(const std::string& extra, const std::string& plant = "dt_s = 0.1\n") {
    std::istringstream in(std::string(kBase) + extra + "[plant]\ntruth_field = dipole\n" + plant);
    return ScenarioConfig::parse(in);
}

SimulationResult run(const ScenarioConfig& c) { return run_scenario(c, make_environment(c, std::nullopt)); }

}  // namespace

TEST(Simulation, EquilibriumStaysPut) {
    const ScenarioConfig c = config(
        "[scenario]\nmode = attitude\n[nmpc]\nq = 0 0 0 0 0 0 0\nqt = 0 0 0 0 0 0 0\n"
        "[termination]\nmax_time_s = 60\n");
    const SimulationResult r = run(c);
    EXPECT_EQ(r.status, RunStatus::completed);
    ASSERT_EQ(r.trace.rows.size(), 61u);
    for (const auto& row : r.trace.rows) {
        EXPECT_LT(std::abs(row.x[3] - 1.0), 1e-15);
        EXPECT_LT(row.x.tail<3>().norm(), 1e-15);
        EXPECT_TRUE(row.u_d.isZero(0.0));
        EXPECT_LT(row.residual_norm, 1e-8);
        EXPECT_TRUE(row.b_truth.isApprox(row.b_onboard));
    }
}

TEST(Simulation, TimestampsAreExactMultiplesOfControlPeriod) {
    const ScenarioConfig c = config("[scenario]\nmode = attitude\n[nmpc]\ncontrol_period_s = 0.3\n"
                                    "[termination]\nmax_time_s = 30\n");
    const SimulationResult r = run(c);
    for (std::size_t k = 0; k < r.trace.rows.size(); ++k) {
        EXPECT_EQ(r.trace.rows[k].t, static_cast<double>(k) * 0.3);
    }
    EXPECT_NEAR(r.trace.rows.back().t, 30.0, 1e-9);
}

TEST(Simulation, Deterministic) {
    const ScenarioConfig c = config(std::string("[nmpc]\n") + kDetumbleWeights + "[initial]\nrate_deg_s = 2 -1 1\n[termination]\nmax_time_s = 120\n");
    const SimulationResult a = run(c);
    const SimulationResult b = run(c);
    ASSERT_EQ(a.trace.rows.size(), b.trace.rows.size());
    std::ostringstream sa, sb;
    emit_trace(a.trace, sa);
    emit_trace(b.trace, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Simulation, ContinuousModeAppliesClampedCommand) {
    const ScenarioConfig c = config(std::string("[nmpc]\n") + kDetumbleWeights + "[pwm]\nenabled = false\n[initial]\nrate_deg_s = 3 3 3\n"
                                    "[termination]\nmax_time_s = 200\n");
    const SimulationResult r = run(c);
    bool any_nonzero = false;
    for (const auto& row : r.trace.rows) {
        const Vec3 clamped = row.u_c.head<3>().cwiseMax(-0.1).cwiseMin(0.1);
        EXPECT_TRUE(row.u_d == clamped);
        any_nonzero = any_nonzero || !row.u_d.isZero(0.0);
    }
    EXPECT_TRUE(any_nonzero);
}

TEST(Simulation, PwmModeAppliesLevels) {
    const ScenarioConfig c = config(std::string("[nmpc]\n") + kDetumbleWeights + "[initial]\nrate_deg_s = 3 3 3\n[termination]\nmax_time_s = 200\n");
    const SimulationResult r = run(c);
    for (const auto& row : r.trace.rows) {
        for (int i = 0; i < 3; ++i) {
            const double k = row.u_d[i] / (0.1 / 3.0);
            EXPECT_NEAR(k, std::round(k), 1e-12);
        }
    }
}

TEST(Simulation, DetumbleReducesKineticEnergy) {
    const ScenarioConfig c = config(std::string("[nmpc]\n") + kDetumbleWeights + "[initial]\nrate_deg_s = 3 3 3\n[pwm]\nenabled = false\n"
                                    "[termination]\nmax_time_s = 900\n");
    const SimulationResult r = run(c);
    const ScenarioMetrics m = report_metrics(r.trace, c);
    EXPECT_LT(m.kinetic_energy_end, 0.5 * m.kinetic_energy_start);
    EXPECT_GT(m.residual_fraction_ok, 0.99);
}

TEST(Simulation, DetumbleStopsAtThreshold) {
    const ScenarioConfig c = config("[initial]\nrate_deg_s = 0.05 0 0\n");
    const SimulationResult r = run(c);
    ASSERT_EQ(r.trace.rows.size(), 1u);
    const ScenarioMetrics m = report_metrics(r.trace, c);
    ASSERT_TRUE(m.detumble_time.has_value());
    EXPECT_EQ(*m.detumble_time, 0.0);
}

TEST(Simulation, DivergingPlantAborts) {
    const ScenarioConfig c = config(
        "[spacecraft]\ninertia_kg_m2 = 1e-6 1e-6 1e-6\n[nmpc]\nu_max = 1000\n" + std::string(kDetumbleWeights) +
        "[initial]\nrate_deg_s = 1 1 1\n[termination]\nmax_time_s = 100\n");
    const SimulationResult r = run(c);
    EXPECT_EQ(r.status, RunStatus::aborted);
    EXPECT_FALSE(r.abort_reason.empty());
    EXPECT_FALSE(r.trace.rows.empty());
    EXPECT_LT(r.trace.rows.back().t, 100.0);
}

TEST(Simulation, IgrfTruthNeedsFile) {
    std::istringstream in(std::string(kBase) + "[plant]\ntruth_field = igrf\n");
    const ScenarioConfig c = ScenarioConfig::parse(in);
    EXPECT_THROW(make_environment(c, std::nullopt), ConfigError);
    bool ex = true;
    EXPECT_NO_THROW(make_environment(c, std::filesystem::path(MTQ_IGRF_FILE), &ex));
    EXPECT_FALSE(ex);
}

TEST(Trace, EmptyTraceIsHeaderOnly) {
    std::ostringstream out;
    emit_trace(SimulationTrace{}, out);
    const std::string s = out.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1);
    EXPECT_EQ(std::count(s.begin(), s.end(), ','), 24);
    EXPECT_EQ(s.rfind("t,q1,", 0), 0u);
    std::istringstream in(s);
    EXPECT_TRUE(read_trace(in).rows.empty());
}

TEST(Trace, RoundTrip) {
    const ScenarioConfig c = config("[initial]\nrate_deg_s = 1 2 3\n[termination]\nmax_time_s = 20\n");
    const SimulationResult r = run(c);
    std::stringstream io;
    emit_trace(r.trace, io);
    const SimulationTrace back = read_trace(io);
    ASSERT_EQ(back.rows.size(), r.trace.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
        EXPECT_NEAR(back.rows[i].t, r.trace.rows[i].t, 1e-9);
        EXPECT_TRUE(back.rows[i].x.isApprox(r.trace.rows[i].x, 1e-8));
        EXPECT_TRUE(back.rows[i].b_truth.isApprox(r.trace.rows[i].b_truth, 1e-8));
        EXPECT_EQ(back.rows[i].solver_flag, r.trace.rows[i].solver_flag);
    }
}

TEST(Trace, MalformedInput) {
    std::istringstream empty("");
    EXPECT_THROW(read_trace(empty), IngestionError);
    std::istringstream short_row("header\n1,2,3\n");
    try {
        read_trace(short_row);
        FAIL();
    } catch (const IngestionError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(emit_trace(SimulationTrace{}, std::filesystem::path("/nonexistent/dir/trace.csv")), IoError);
}

TEST(Metrics, EmptyTrace) {
    EXPECT_THROW(report_metrics(SimulationTrace{}, ScenarioConfig{}), InsufficientDataError);
}

TEST(Metrics, ResidualBookkeepingAndSpikes) {
    SimulationTrace tr;
    for (int k = 0; k < 600; ++k) {
        TraceRow r;
        r.t = k;
        r.x[3] = 1.0;
        r.residual_norm = 1e-4;
        if (k == 100 || k == 130 || k == 400) r.residual_norm = 5e-2;
        if (k == 500) {
            r.residual_norm = std::nan("");
            r.solver_flag = kSolverReset;
        }
        if (k == 501) r.solver_flag = kGmresIterationLimit;
        tr.rows.push_back(r);
    }
    ScenarioConfig c;
    c.snapshot_times = {250.4};
    const ScenarioMetrics m = report_metrics(tr, c);
    EXPECT_EQ(m.samples, 600u);
    EXPECT_DOUBLE_EQ(m.residual_max, 5e-2);
    EXPECT_NEAR(m.residual_fraction_ok, 596.0 / 600.0, 1e-15);
    EXPECT_EQ(m.solver_resets, 1);
    EXPECT_EQ(m.gmres_limit_hits, 1);
    ASSERT_EQ(m.snapshots.size(), 1u);
    EXPECT_EQ(m.snapshots[0].t, 250.0);
    EXPECT_EQ(m.spike_times, (std::vector<double>{100.0, 400.0}));
    ASSERT_TRUE(m.detumble_time.has_value());

    const std::string js = metrics_json(m, RunStatus::completed);
    EXPECT_NE(js.find("\"status\": \"completed\""), std::string::npos);
    EXPECT_NE(js.find("\"solver_resets\": 1"), std::string::npos);
}

TEST(Controllability, AuditIncludesEndPoint) {
    const ScenarioConfig c = config("");
    const OrbitEnvironment env(c.orbit, c.epoch_year);
    const auto avg = controllability_audit(env, FieldModel::dipole, c.orbit.period(), 10.0);
    EXPECT_GT(avg.min_eigenvalue, 0.05);
    EXPECT_NEAR(avg.matrix.trace(), 2.0, 1e-9);
    EXPECT_THROW(controllability_audit(env, FieldModel::dipole, 100.0, 10.0), InsufficientDataError);
}
