#pragma once

#include "mtq/actuation.hpp"
#include "mtq/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mtq {

enum SolverFlag : int {
    kSolverOk = 0,
    kGmresIterationLimit = 1,  // GMRES stopped at k_max above its tolerance
    kSolverReset = 2,          // update failed; horizon solution re-seeded
};

/// One control sample. Fields are in emitted column order.
struct TraceRow {
    double t = 0.0;
    StateVector x = StateVector::Zero();
    Vec6 u_c = Vec6::Zero();  // controller output (m, v)
    Vec3 u_d = Vec3::Zero();  // dipole actually applied
    double residual_norm = 0.0;
    Vec3 b_truth = Vec3::Zero();    // body frame, T
    Vec3 b_onboard = Vec3::Zero();  // body frame, T
    int solver_flag = kSolverOk;
};

struct SimulationTrace {
    std::vector<TraceRow> rows;
};

enum class RunStatus { completed, aborted };

struct SimulationResult {
    SimulationTrace trace;
    RunStatus status = RunStatus::completed;
    std::string abort_reason;
};

/// Builds the orbit environment; loads IGRF coefficients when the plant
/// uses them. Throws ConfigError if IGRF is needed and `igrf_file` is empty.
/// `extrapolated` is set when the epoch lies outside the table's window.
OrbitEnvironment make_environment(const ScenarioConfig& cfg,
                                  const std::optional<std::filesystem::path>& igrf_file,
                                  bool* extrapolated = nullptr);

/// Closed loop: truth field -> controller -> quantizer -> RK4 plant, sampled
/// every control period until the termination condition or max_time.
/// A diverging plant ends the run early with status aborted and the partial
/// trace.
SimulationResult run_scenario(const ScenarioConfig& cfg, const OrbitEnvironment& env);

/// Averaged psi3 over [0, duration] sampled every `step` seconds (the end
/// point is always included).
AveragedControlMatrix controllability_audit(const OrbitEnvironment& env, FieldModel model,
                                            double duration, double step);

void emit_trace(const SimulationTrace& trace, std::ostream& out);
void emit_trace(const SimulationTrace& trace, const std::filesystem::path& path);
SimulationTrace read_trace(std::istream& in);

struct QuaternionSnapshot {
    double requested = 0.0;  // s
    double t = 0.0;          // sample actually used, s
    Quaternion q;
};

struct ScenarioMetrics {
    std::size_t samples = 0;
    double final_time = 0.0;
    std::optional<double> detumble_time;  // first sample with every |w_i| below threshold
    Quaternion final_q;
    std::vector<QuaternionSnapshot> snapshots;
    double residual_max = 0.0;
    double residual_mean = 0.0;
    double residual_fraction_ok = 0.0;  // share of samples with |F| <= kResidualBound
    std::vector<double> spike_times;    // s
    double kinetic_energy_start = 0.0;
    double kinetic_energy_end = 0.0;
    int gmres_limit_hits = 0;
    int solver_resets = 0;

    static constexpr double kResidualBound = 1e-2;
};

/// Local maxima of |F| above ten times its median, one per minute at most.
std::vector<double> residual_spikes(const SimulationTrace& trace);

/// Throws InsufficientDataError on an empty trace.
ScenarioMetrics report_metrics(const SimulationTrace& trace, const ScenarioConfig& cfg);

void print_metrics(const ScenarioMetrics& m, std::ostream& out);
std::string metrics_json(const ScenarioMetrics& m, RunStatus status);

}  // namespace mtq
