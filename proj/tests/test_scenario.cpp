#include "mtq/constants.hpp"
#include "mtq/errors.hpp"
#include "mtq/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mtq;

namespace {

const char* kOrbit = "[orbit]\nsemi_major_axis_km = 7000\n";

ScenarioConfig parse(const std::string& text, const std::filesystem::path& base = {}) {
    std::istringstream in(kOrbit + text);
    return ScenarioConfig::parse(in, base);
}

}  // namespace

TEST(ScenarioConfig, DefaultsFromEmptyFile) {
    const ScenarioConfig c = parse("");
    EXPECT_EQ(c.mode, ScenarioMode::detumble);
    EXPECT_EQ(c.horizon_steps, 10);
    EXPECT_DOUBLE_EQ(c.control_period, 1.0);
    EXPECT_DOUBLE_EQ(c.solver.zeta, 1.0);
    EXPECT_EQ(c.solver.k_max, 30);
    EXPECT_TRUE(c.pwm_enabled);
    EXPECT_EQ(c.truth_field, FieldModel::igrf);
    EXPECT_FALSE(c.igrf_file.has_value());
    EXPECT_FALSE(c.duration.has_value());
}

TEST(ScenarioConfig, ShippedDetumbleFile) {
    const ScenarioConfig c = ScenarioConfig::load(std::filesystem::path(MTQ_SCENARIO_DIR) / "detumble.cfg");
    EXPECT_EQ(c.name, "detumble");
    EXPECT_NEAR(c.orbit.inclination, 96.7, 1e-12);
    EXPECT_NEAR(c.x0.w.w.x(), 3.0 * kDegToRad, 1e-15);
    EXPECT_NEAR(c.rate_threshold, 0.1 * kDegToRad, 1e-15);
    EXPECT_DOUBLE_EQ(c.weights.r[0], 1e-8);
    EXPECT_DOUBLE_EQ(c.weights.q[6], 250.0);
    EXPECT_DOUBLE_EQ(c.kappa, 0.3);
    ASSERT_TRUE(c.igrf_file.has_value());
    EXPECT_TRUE(std::filesystem::exists(*c.igrf_file)) << *c.igrf_file;
    ASSERT_EQ(c.snapshot_times.size(), 2u);
}

TEST(ScenarioConfig, AllShippedFilesLoad) {
    for (const char* f : {"detumble.cfg", "attitude_pwm.cfg", "attitude_continuous.cfg", "field_compare.cfg"}) {
        EXPECT_NO_THROW(ScenarioConfig::load(std::filesystem::path(MTQ_SCENARIO_DIR) / f)) << f;
    }
    const auto pwm = ScenarioConfig::load(std::filesystem::path(MTQ_SCENARIO_DIR) / "attitude_pwm.cfg");
    const auto cont = ScenarioConfig::load(std::filesystem::path(MTQ_SCENARIO_DIR) / "attitude_continuous.cfg");
    EXPECT_TRUE(pwm.pwm_enabled);
    EXPECT_FALSE(cont.pwm_enabled);
    EXPECT_EQ(pwm.mode, ScenarioMode::attitude);
    EXPECT_TRUE(pwm.weights.q.isApprox(cont.weights.q));
}

TEST(ScenarioConfig, DerivedSolverDefaults) {
    const ScenarioConfig c = parse("[nmpc]\nhorizon_s = 5\nsteps = 2\n[plant]\ndt_s = 0.5\n");
    EXPECT_DOUBLE_EQ(c.control_period, 2.5);
    EXPECT_DOUBLE_EQ(c.solver.zeta, 0.4);
    EXPECT_EQ(c.solver.k_max, 18);
    const ScenarioConfig d = parse("[nmpc]\ncontrol_period_s = 0.25\nzeta = 2\n[plant]\ndt_s = 0.05\n");
    EXPECT_DOUBLE_EQ(d.solver.zeta, 2.0);
}

TEST(ScenarioConfig, InputWeightsAcceptSixOrNine) {
    EXPECT_DOUBLE_EQ(parse("[nmpc]\nr = 1 2 3 4 5 6\n").weights.r[0], 1.0);
    EXPECT_DOUBLE_EQ(parse("[nmpc]\nr = 0 0 0 1 2 3 4 5 6\n").weights.r[5], 6.0);
    EXPECT_THROW(parse("[nmpc]\nr = 1 2 3\n"), ConfigError);
}

TEST(ScenarioConfig, RelativeIgrfPathResolvesAgainstConfigDirectory) {
    const ScenarioConfig c = parse("[plant]\nigrf_file = data/igrf.txt\n", "/opt/run");
    EXPECT_EQ(*c.igrf_file, std::filesystem::path("/opt/run/data/igrf.txt"));
    const ScenarioConfig a = parse("[plant]\nigrf_file = /abs/igrf.txt\n", "/opt/run");
    EXPECT_EQ(*a.igrf_file, std::filesystem::path("/abs/igrf.txt"));
}

TEST(ScenarioConfig, Errors) {
    EXPECT_THROW(parse("[bogus]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse("[nmpc]\nhorizon = 3\n"), ConfigError);
    EXPECT_THROW(parse("loose = 1\n"), ConfigError);
    EXPECT_THROW(parse("[nmpc]\nsteps = 1\n"), ConfigError);
    EXPECT_THROW(parse("[nmpc]\nsteps = 2.5\n"), ConfigError);
    EXPECT_THROW(parse("[nmpc]\nu_max = abc\n"), ConfigError);
    EXPECT_THROW(parse("[nmpc]\np = 0.1 0 0.1\n"), ConfigError);
    EXPECT_THROW(parse("[pwm]\nkappa = 1.0\n"), ConfigError);
    EXPECT_THROW(parse("[pwm]\nenabled = maybe\n"), ConfigError);
    EXPECT_THROW(parse("[plant]\ndt_s = 0.3\n"), ConfigError);
    EXPECT_THROW(parse("[plant]\ntruth_field = tabulated\n"), ConfigError);
    EXPECT_THROW(parse("[scenario]\nmode = pointing\n"), ConfigError);
    std::istringstream no_orbit("");
    EXPECT_THROW(ScenarioConfig::parse(no_orbit), ConfigError);
    std::istringstream hyperbolic("[orbit]\nsemi_major_axis_km = 7000\neccentricity = 1.2\n");
    EXPECT_THROW(ScenarioConfig::parse(hyperbolic), ConfigError);
    EXPECT_THROW(parse("[spacecraft]\ninertia_kg_m2 = 1 1 5\n"), ConfigError);
    EXPECT_THROW(parse("[initial]\nquaternion = 0 0 0 0\n"), ConfigError);
    EXPECT_THROW(parse("[initial]\nrate_deg_s = 1 2\n"), ConfigError);
    EXPECT_THROW(parse("[field]\nsample_step_s = 0\n"), ConfigError);
    EXPECT_THROW(parse("[nmpc\n"), ConfigError);
    EXPECT_THROW(ScenarioConfig::load("/nonexistent/file.cfg"), ConfigError);
}

TEST(ScenarioConfig, QuaternionIsNormalized) {
    const ScenarioConfig c = parse("[initial]\nquaternion = 0 0 0 -2\n");
    EXPECT_DOUBLE_EQ(c.x0.q.q4(), 1.0);
}
