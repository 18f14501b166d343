#include "mtq/errors.hpp"
#include "mtq/simulation.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAborted = 2;

std::filesystem::path igrf_path(const mtq::ScenarioConfig& cfg, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (cfg.igrf_file) return *cfg.igrf_file;
    return MTQ_DEFAULT_IGRF_FILE;
}

mtq::OrbitEnvironment environment(const mtq::ScenarioConfig& cfg, const std::string& igrf_flag) {
    bool extrapolated = false;
    auto env = mtq::make_environment(cfg, igrf_path(cfg, igrf_flag), &extrapolated);
    if (extrapolated) {
        std::cerr << "warning: epoch " << cfg.epoch_year
                  << " lies outside the IGRF table's validity window; coefficients extrapolated\n";
    }
    return env;
}

double one_orbit(const mtq::ScenarioConfig& cfg) { return cfg.duration.value_or(cfg.orbit.period()); }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

int simulate(const std::string& config, const std::string& out, const std::string& igrf, bool no_pwm,
             const std::string& metrics_path) {
    mtq::ScenarioConfig cfg = mtq::ScenarioConfig::load(config);
    if (no_pwm) cfg.pwm_enabled = false;
    const auto env = environment(cfg, igrf);

    const mtq::SimulationResult result = mtq::run_scenario(cfg, env);
    if (!out.empty()) mtq::emit_trace(result.trace, std::filesystem::path(out));

    if (!result.trace.rows.empty()) {
        const mtq::ScenarioMetrics m = mtq::report_metrics(result.trace, cfg);
        std::cout << "scenario           " << cfg.name << (cfg.pwm_enabled ? " (PWM)" : " (continuous)") << "\n";
        mtq::print_metrics(m, std::cout);
        if (!metrics_path.empty()) {
            std::ofstream js(metrics_path);
            if (!js) throw mtq::IoError("cannot open " + metrics_path + " for writing");
            js << mtq::metrics_json(m, result.status) << "\n";
        }
    }
    if (result.status == mtq::RunStatus::aborted) {
        std::cerr << "run aborted: " << result.abort_reason << "\n";
        return kExitAborted;
    }
    return kExitOk;
}

int controllability(const std::string& config) {
    mtq::ScenarioConfig cfg = mtq::ScenarioConfig::load(config);
    const mtq::OrbitEnvironment env(cfg.orbit, cfg.epoch_year);
    const auto avg = mtq::controllability_audit(env, mtq::FieldModel::dipole, one_orbit(cfg), cfg.sample_step);

    std::cout << "quantity,c0,c1,c2\n";
    for (int i = 0; i < 3; ++i) {
        std::cout << "psi3_avg_row" << i << ',' << num(avg.matrix(i, 0)) << ',' << num(avg.matrix(i, 1)) << ','
                  << num(avg.matrix(i, 2)) << '\n';
    }
    std::cout << "eigenvalues," << num(avg.eigenvalues[0]) << ',' << num(avg.eigenvalues[1]) << ','
              << num(avg.eigenvalues[2]) << '\n';
    std::cout << "min_eigenvalue," << num(avg.min_eigenvalue) << ",,\n";
    return kExitOk;
}

int field_compare(const std::string& config, const std::string& out, const std::string& igrf) {
    mtq::ScenarioConfig cfg = mtq::ScenarioConfig::load(config);
    cfg.truth_field = mtq::FieldModel::igrf;
    const auto env = environment(cfg, igrf);
    const auto rows = mtq::compare_field_models(env, one_orbit(cfg), cfg.sample_step);

    std::ofstream csv(out);
    if (!csv) throw mtq::IoError("cannot open " + out + " for writing");
    csv << "t,dipole_x,dipole_y,dipole_z,igrf_x,igrf_y,igrf_z\n";
    for (const auto& r : rows) {
        csv << num(r.t);
        for (int i = 0; i < 3; ++i) csv << ',' << num(r.dipole[i]);
        for (int i = 0; i < 3; ++i) csv << ',' << num(r.igrf[i]);
        csv << '\n';
    }
    if (!csv) throw mtq::IoError("failed writing " + out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magnetorquer attitude control simulator"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string igrf;
    std::string metrics;
    bool no_pwm = false;

    auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
    sim->add_option("--config", config, "Scenario file")->required();
    sim->add_option("--out", out, "Trace CSV");
    sim->add_option("--igrf-file", igrf, "IGRF coefficient table");
    sim->add_flag("--no-pwm", no_pwm, "Apply the continuous input");
    sim->add_option("--metrics-json", metrics, "Metrics summary as JSON");

    auto* ctrb = app.add_subcommand("controllability-report", "Orbit-averaged psi3 of the dipole field");
    ctrb->add_option("--config", config, "Scenario file")->required();

    auto* cmp = app.add_subcommand("field-compare", "Dipole and IGRF field along one orbit");
    cmp->add_option("--config", config, "Scenario file")->required();
    cmp->add_option("--out", out, "Output CSV")->required();
    cmp->add_option("--igrf-file", igrf, "IGRF coefficient table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }

    try {
        if (*sim) return simulate(config, out, igrf, no_pwm, metrics);
        if (*ctrb) return controllability(config);
        if (*cmp) return field_compare(config, out, igrf);
    } catch (const mtq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
