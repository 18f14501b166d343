#pragma once

#include "mtq/attitude.hpp"
#include "mtq/cgmres.hpp"
#include "mtq/environment.hpp"
#include "mtq/nmpc.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mtq {

enum class ScenarioMode { detumble, attitude };

/// Everything one closed-loop campaign needs. Loaded from a sectioned
/// key-value file, e.g.
///
///     [orbit]
///     semi_major_axis_km = 6691.6
///
/// Angles in the file are degrees and rates deg/s; they are converted here.
struct ScenarioConfig {
    std::string name = "scenario";
    ScenarioMode mode = ScenarioMode::detumble;
    double epoch_year = 2020.0;

    KeplerianElements orbit;
    InertiaTensor inertia{0.020, 0.030, 0.040};
    SatelliteState x0;
    SatelliteState reference;

    NmpcWeights weights;
    double horizon_s = 10.0;
    int horizon_steps = 10;
    double control_period = 1.0;  // s
    CgmresParams solver;

    bool pwm_enabled = true;
    double kappa = 0.3;

    double rate_threshold = 0.10 * kDegToRad;  // rad/s, per axis
    double max_time = 7200.0;                  // s

    double plant_dt = 0.1;
    FieldModel truth_field = FieldModel::igrf;
    std::optional<std::filesystem::path> igrf_file;
    int igrf_degree = 10;

    std::vector<double> snapshot_times;  // s

    // field-compare / controllability-report
    double sample_step = 10.0;               // s
    std::optional<double> duration;          // s; one orbital period if unset

    HorizonConfig horizon() const { return {horizon_s, horizon_steps}; }

    /// Throws ConfigError on any invalid combination.
    void validate() const;

    static ScenarioConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
    static ScenarioConfig load(const std::filesystem::path& path);
};

}  // namespace mtq
