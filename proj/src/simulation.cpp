#include "mtq/simulation.hpp"

#include "mtq/actuation.hpp"
#include "mtq/errors.hpp"
#include "mtq/pwm.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mtq {
namespace {

Mat3 rotation_of(const StateVector& x) { return attitude_matrix(Quaternion(x.head<4>().normalized())); }

bool rates_below(const StateVector& x, double threshold) {
    return x.tail<3>().cwiseAbs().maxCoeff() < threshold;
}

// Onboard dipole forecast in body axes at t + i*dtau. Orbital-frame nodes are
// cached per t since the finite-difference probes reuse the same instants.
class DipoleForecast {
public:
    DipoleForecast(const OrbitEnvironment& env, HorizonConfig horizon) : env_(env), horizon_(horizon) {}

    void operator()(double t, const StateVector& x, std::vector<Vec3>& out) {
        const int n = horizon_.steps();
        if (!cached_ || *cached_ != t) {
            nodes_.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) nodes_[static_cast<std::size_t>(i)] = env_.dipole(t + i * horizon_.dtau()).b;
            cached_ = t;
        }
        const Mat3 a = rotation_of(x);
        out.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) out[i] = a * nodes_[i];
    }

private:
    const OrbitEnvironment& env_;
    HorizonConfig horizon_;
    std::optional<double> cached_;
    std::vector<Vec3> nodes_;
};

Vec3 clamp_moment(const Vec3& m, double u_max) { return m.cwiseMax(-u_max).cwiseMin(u_max); }

const char* kColumns[] = {"t",          "q1",         "q2",         "q3",         "q4",
                          "wx",         "wy",         "wz",         "mx_c",       "my_c",
                          "mz_c",       "vx_c",       "vy_c",       "vz_c",       "mx_d",
                          "my_d",       "mz_d",       "residual",   "bx_truth",   "by_truth",
                          "bz_truth",   "bx_onboard", "by_onboard", "bz_onboard", "solver_flag"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

OrbitEnvironment make_environment(const ScenarioConfig& cfg,
                                  const std::optional<std::filesystem::path>& igrf_file,
                                  bool* extrapolated) {
    OrbitEnvironment env(cfg.orbit, cfg.epoch_year);
    if (extrapolated) *extrapolated = false;
    if (cfg.truth_field == FieldModel::igrf) {
        if (!igrf_file) throw ConfigError("IGRF truth field selected but no coefficient file given");
        const IgrfTable table = IgrfTable::load(*igrf_file);
        const bool ex = env.set_igrf(table, cfg.igrf_degree);
        if (extrapolated) *extrapolated = ex;
    }
    return env;
}

SimulationResult run_scenario(const ScenarioConfig& cfg, const OrbitEnvironment& env) {
    cfg.validate();
    const HorizonConfig horizon = cfg.horizon();
    const PredictionModel model(cfg.inertia, cfg.weights, cfg.reference.vector());
    ContinuationGmres ctrl(model, horizon, cfg.solver, DipoleForecast(env, horizon));

    std::optional<PwmQuantizer> pwm;
    if (cfg.pwm_enabled) pwm.emplace(PwmConfig{cfg.weights.u_max, cfg.kappa});

    const double dt = cfg.control_period;
    const int substeps = static_cast<int>(std::lround(dt / cfg.plant_dt));
    const double h = dt / substeps;

    SimulationResult result;
    SatelliteState state = cfg.x0;
    ctrl.initialize(0.0, state.vector());

    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        const StateVector x = state.vector();
        const Mat3 a = attitude_matrix(state.q);

        TraceRow row;
        row.t = t;
        row.x = x;
        row.b_truth = a * env.field(cfg.truth_field, t).b;
        row.b_onboard = a * env.dipole(t).b;

        const ControlCommand cmd = ctrl.control();
        row.u_c << cmd.m, cmd.v;
        row.u_d = pwm ? pwm->quantize(cmd.m) : clamp_moment(cmd.m, cfg.weights.u_max);

        const StateVector x_dot = rates(x, row.u_d.cross(row.b_onboard), cfg.inertia);
        try {
            const CgmresUpdate upd = ctrl.update(t, x, x_dot, dt);
            row.residual_norm = upd.residual_norm;
            if (upd.linear.status == GmresStatus::iteration_limit) row.solver_flag = kGmresIterationLimit;
            if (!ctrl.solution().data().allFinite()) throw PropagationError("non-finite horizon solution");
        } catch (const Error&) {
            row.residual_norm = std::numeric_limits<double>::quiet_NaN();
            row.solver_flag = kSolverReset;
            ctrl.set_solution(HorizonSolution::warm_start(horizon.steps(), cfg.weights.u_max));
        }
        result.trace.rows.push_back(row);

        const bool done = cfg.mode == ScenarioMode::detumble ? rates_below(x, cfg.rate_threshold) : false;
        if (done || t >= cfg.max_time - 1e-9 * dt) break;

        const DipoleMoment m{row.u_d};
        const DerivativeFn f = [&](double ts, const SatelliteState& s) {
            MagneticFieldSample b = field_to_body(env.field(cfg.truth_field, ts), s.q);
            return state_derivative(s, m, b, cfg.inertia);
        };
        try {
            for (int i = 0; i < substeps; ++i) state = rk4_step(state, t + i * h, h, f);
        } catch (const Error& e) {
            result.status = RunStatus::aborted;
            result.abort_reason = e.what();
            break;
        }
        if (!state.w.is_sane()) {
            result.status = RunStatus::aborted;
            std::ostringstream msg;
            msg << "angular rate guard tripped at t = " << t + dt << " s";
            result.abort_reason = msg.str();
            break;
        }
    }
    return result;
}

AveragedControlMatrix controllability_audit(const OrbitEnvironment& env, FieldModel model,
                                            double duration, double step) {
    if (!(step > 0.0)) throw InvalidStateError("controllability audit needs a positive step");
    std::vector<MagneticFieldSample> series;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * step;
        if (t >= duration - 1e-9 * step) break;
        series.push_back(env.field(model, t));
    }
    series.push_back(env.field(model, duration));
    return average_psi3(series, duration);
}

void emit_trace(const SimulationTrace& trace, std::ostream& out) {
    for (std::size_t i = 0; i < kColumnCount; ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const TraceRow& r : trace.rows) {
        out << format_value(r.t);
        for (int i = 0; i < 7; ++i) out << ',' << format_value(r.x[i]);
        for (int i = 0; i < 6; ++i) out << ',' << format_value(r.u_c[i]);
        for (int i = 0; i < 3; ++i) out << ',' << format_value(r.u_d[i]);
        out << ',' << format_value(r.residual_norm);
        for (int i = 0; i < 3; ++i) out << ',' << format_value(r.b_truth[i]);
        for (int i = 0; i < 3; ++i) out << ',' << format_value(r.b_onboard[i]);
        out << ',' << r.solver_flag << '\n';
    }
}

void emit_trace(const SimulationTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    emit_trace(trace, out);
    out.flush();
    if (!out) throw IoError("failed writing trace to " + path.string());
}

SimulationTrace read_trace(std::istream& in) {
    SimulationTrace trace;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw IngestionError("trace is empty", 0);
    ++lineno;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IngestionError("bad trace value '" + cell + "'", lineno);
            }
        }
        if (v.size() != kColumnCount) throw IngestionError("trace row has the wrong column count", lineno);
        TraceRow r;
        r.t = v[0];
        r.x = StateVector::Map(&v[1]);
        r.u_c = Vec6::Map(&v[8]);
        r.u_d = Vec3::Map(&v[14]);
        r.residual_norm = v[17];
        r.b_truth = Vec3::Map(&v[18]);
        r.b_onboard = Vec3::Map(&v[21]);
        r.solver_flag = static_cast<int>(v[24]);
        trace.rows.push_back(r);
    }
    return trace;
}

std::vector<double> residual_spikes(const SimulationTrace& trace) {
    const auto& rows = trace.rows;
    std::vector<double> finite;
    for (const auto& r : rows) {
        if (std::isfinite(r.residual_norm)) finite.push_back(r.residual_norm);
    }
    std::vector<double> spikes;
    if (finite.size() < 3) return spikes;
    std::nth_element(finite.begin(), finite.begin() + finite.size() / 2, finite.end());
    const double level = 10.0 * finite[finite.size() / 2];

    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const double f = rows[i].residual_norm;
        if (!(f > level) || f < rows[i - 1].residual_norm || f < rows[i + 1].residual_norm) continue;
        if (!spikes.empty() && rows[i].t - spikes.back() < 60.0) continue;
        spikes.push_back(rows[i].t);
    }
    return spikes;
}

ScenarioMetrics report_metrics(const SimulationTrace& trace, const ScenarioConfig& cfg) {
    const auto& rows = trace.rows;
    if (rows.empty()) throw InsufficientDataError("cannot report metrics of an empty trace");

    ScenarioMetrics m;
    m.samples = rows.size();
    m.final_time = rows.back().t;
    m.final_q = Quaternion(rows.back().x.head<4>());
    m.kinetic_energy_start = kinetic_energy(SatelliteState::from_vector(rows.front().x), cfg.inertia);
    m.kinetic_energy_end = kinetic_energy(SatelliteState::from_vector(rows.back().x), cfg.inertia);

    std::size_t finite = 0;
    std::size_t ok = 0;
    double sum = 0.0;
    for (const auto& r : rows) {
        if (!m.detumble_time && rates_below(r.x, cfg.rate_threshold)) m.detumble_time = r.t;
        if (r.solver_flag == kGmresIterationLimit) ++m.gmres_limit_hits;
        if (r.solver_flag == kSolverReset) ++m.solver_resets;
        if (!std::isfinite(r.residual_norm)) continue;
        ++finite;
        sum += r.residual_norm;
        m.residual_max = std::max(m.residual_max, r.residual_norm);
        if (r.residual_norm <= ScenarioMetrics::kResidualBound) ++ok;
    }
    m.residual_mean = finite ? sum / static_cast<double>(finite) : 0.0;
    m.residual_fraction_ok = static_cast<double>(ok) / static_cast<double>(rows.size());

    for (double ts : cfg.snapshot_times) {
        auto it = std::min_element(rows.begin(), rows.end(), [ts](const TraceRow& a, const TraceRow& b) {
            return std::abs(a.t - ts) < std::abs(b.t - ts);
        });
        m.snapshots.push_back({ts, it->t, Quaternion(it->x.head<4>())});
    }
    m.spike_times = residual_spikes(trace);
    return m;
}

void print_metrics(const ScenarioMetrics& m, std::ostream& out) {
    auto q_str = [](const Quaternion& q) {
        std::ostringstream s;
        s << "(" << format_value(q.q1()) << ", " << format_value(q.q2()) << ", " << format_value(q.q3())
          << ", " << format_value(q.q4()) << ")";
        return s.str();
    };
    out << "samples            " << m.samples << "\n";
    out << "final time         " << m.final_time << " s\n";
    if (m.detumble_time) {
        out << "detumble time      " << *m.detumble_time << " s (" << *m.detumble_time / 60.0 << " min)\n";
    } else {
        out << "detumble time      not reached\n";
    }
    out << "final quaternion   " << q_str(m.final_q) << "\n";
    for (const auto& s : m.snapshots) {
        out << "q at " << s.requested << " s       " << q_str(s.q) << " (sample t = " << s.t << " s)\n";
    }
    out << "|F| max / mean     " << format_value(m.residual_max) << " / " << format_value(m.residual_mean) << "\n";
    out << "|F| <= 1e-2        " << format_value(100.0 * m.residual_fraction_ok) << " % of samples\n";
    out << "|F| spikes at      ";
    if (m.spike_times.empty()) out << "none";
    for (std::size_t i = 0; i < m.spike_times.size(); ++i) out << (i ? ", " : "") << m.spike_times[i];
    out << (m.spike_times.empty() ? "\n" : " s\n");
    out << "kinetic energy     " << format_value(m.kinetic_energy_start) << " -> "
        << format_value(m.kinetic_energy_end) << " J\n";
    out << "GMRES at k_max     " << m.gmres_limit_hits << " samples, resets " << m.solver_resets << "\n";
}

std::string metrics_json(const ScenarioMetrics& m, RunStatus status) {
    auto q_json = [](const Quaternion& q) { return nlohmann::json::array({q.q1(), q.q2(), q.q3(), q.q4()}); };
    nlohmann::json j;
    j["status"] = status == RunStatus::completed ? "completed" : "aborted";
    j["samples"] = m.samples;
    j["final_time_s"] = m.final_time;
    j["detumble_time_s"] = m.detumble_time ? nlohmann::json(*m.detumble_time) : nlohmann::json(nullptr);
    j["final_quaternion"] = q_json(m.final_q);
    j["snapshots"] = nlohmann::json::array();
    for (const auto& s : m.snapshots) {
        j["snapshots"].push_back({{"requested_s", s.requested}, {"t_s", s.t}, {"q", q_json(s.q)}});
    }
    j["residual"] = {{"max", m.residual_max},
                     {"mean", m.residual_mean},
                     {"fraction_within_1e-2", m.residual_fraction_ok},
                     {"spike_times_s", m.spike_times}};
    j["kinetic_energy"] = {{"start", m.kinetic_energy_start}, {"end", m.kinetic_energy_end}};
    j["gmres_limit_hits"] = m.gmres_limit_hits;
    j["solver_resets"] = m.solver_resets;
    return j.dump(2);
}

}  // namespace mtq
