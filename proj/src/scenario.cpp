#include "mtq/scenario.hpp"

#include "mtq/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mtq {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"scenario", {"name", "mode", "epoch_year"}},
        {"orbit",
         {"semi_major_axis_km", "eccentricity", "inclination_deg", "raan_deg", "arg_perigee_deg",
          "mean_anomaly_deg"}},
        {"spacecraft", {"inertia_kg_m2"}},
        {"initial", {"quaternion", "rate_deg_s"}},
        {"reference", {"quaternion", "rate_deg_s"}},
        {"nmpc",
         {"u_max", "horizon_s", "steps", "q", "qt", "r", "p", "control_period_s", "zeta",
          "fd_step", "k_max", "gmres_tol", "init_newton_iters", "init_tol"}},
        {"pwm", {"enabled", "kappa"}},
        {"termination", {"rate_threshold_deg_s", "max_time_s"}},
        {"plant", {"dt_s", "truth_field", "igrf_file", "igrf_degree"}},
        {"output", {"snapshot_times_s"}},
        {"field", {"sample_step_s", "duration_s"}},
    };
    return keys;
}

std::vector<double> numbers(const std::string& text, const std::string& key) {
    std::istringstream ss(text);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
        }
    }
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> text(const std::string& section, const std::string& key) const {
        auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }

    std::optional<std::vector<double>> vec(const std::string& section, const std::string& key,
                                           std::size_t n) const {
        auto t = text(section, key);
        if (!t) return std::nullopt;
        auto v = numbers(*t, section + "." + key);
        if (v.size() != n) {
            throw ConfigError(section + "." + key + ": expected " + std::to_string(n) + " values, got " +
                              std::to_string(v.size()));
        }
        return v;
    }

    std::optional<double> num(const std::string& section, const std::string& key) const {
        auto v = vec(section, key, 1);
        if (!v) return std::nullopt;
        return v->front();
    }

    void get(const std::string& s, const std::string& k, double& out) const {
        if (auto v = num(s, k)) out = *v;
    }

    void get(const std::string& s, const std::string& k, int& out) const {
        if (auto v = num(s, k)) {
            if (*v != std::floor(*v)) throw ConfigError(s + "." + k + " must be an integer");
            out = static_cast<int>(*v);
        }
    }

    void get(const std::string& s, const std::string& k, bool& out) const {
        if (auto t = text(s, k)) {
            if (*t == "true" || *t == "1" || *t == "yes") {
                out = true;
            } else if (*t == "false" || *t == "0" || *t == "no") {
                out = false;
            } else {
                throw ConfigError(s + "." + k + ": expected a boolean, got '" + *t + "'");
            }
        }
    }

private:
    const pt::ptree& tree_;
};

Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

}  // namespace

ScenarioConfig ScenarioConfig::parse(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    for (const auto& [section, body] : tree) {
        auto it = known_keys().find(section);
        if (it == known_keys().end()) {
            if (body.empty()) throw ConfigError("config key '" + section + "' outside any section");
            throw ConfigError("unknown config section [" + section + "]");
        }
        for (const auto& kv : body) {
            if (!it->second.count(kv.first)) {
                throw ConfigError("unknown key '" + kv.first + "' in [" + section + "]");
            }
        }
    }

    const Reader r(tree);
    ScenarioConfig c;

    if (auto v = r.text("scenario", "name")) c.name = *v;
    if (auto v = r.text("scenario", "mode")) {
        if (*v == "detumble") {
            c.mode = ScenarioMode::detumble;
        } else if (*v == "attitude") {
            c.mode = ScenarioMode::attitude;
        } else {
            throw ConfigError("scenario.mode must be 'detumble' or 'attitude'");
        }
    }
    r.get("scenario", "epoch_year", c.epoch_year);

    r.get("orbit", "semi_major_axis_km", c.orbit.semi_major_axis);
    r.get("orbit", "eccentricity", c.orbit.eccentricity);
    r.get("orbit", "inclination_deg", c.orbit.inclination);
    r.get("orbit", "raan_deg", c.orbit.raan);
    r.get("orbit", "arg_perigee_deg", c.orbit.arg_perigee);
    r.get("orbit", "mean_anomaly_deg", c.orbit.mean_anomaly);

    try {
        if (auto v = r.vec("spacecraft", "inertia_kg_m2", 3)) c.inertia = InertiaTensor((*v)[0], (*v)[1], (*v)[2]);

        for (auto [section, state] : {std::pair{"initial", &c.x0}, std::pair{"reference", &c.reference}}) {
            if (auto v = r.vec(section, "quaternion", 4)) {
                state->q = Quaternion::canonical(Vec4((*v)[0], (*v)[1], (*v)[2], (*v)[3]));
            }
            if (auto v = r.vec(section, "rate_deg_s", 3)) state->w.w = to_vec3(*v) * kDegToRad;
        }
    } catch (const InvalidStateError& e) {
        throw ConfigError(e.what());
    }

    r.get("nmpc", "u_max", c.weights.u_max);
    r.get("nmpc", "horizon_s", c.horizon_s);
    r.get("nmpc", "steps", c.horizon_steps);
    if (auto v = r.vec("nmpc", "q", 7)) c.weights.q = StateVector::Map(v->data());
    if (auto v = r.vec("nmpc", "qt", 7)) c.weights.qt = StateVector::Map(v->data());
    if (auto t = r.text("nmpc", "r")) {
        auto v = numbers(*t, "nmpc.r");
        // a 9-entry diagonal carries three leading zeros ahead of the (m, v) weights
        if (v.size() == 9) v.erase(v.begin(), v.begin() + 3);
        if (v.size() != 6) throw ConfigError("nmpc.r: expected 6 (or 9) values");
        c.weights.r = Vec6::Map(v.data());
    }
    if (auto v = r.vec("nmpc", "p", 3)) c.weights.p = to_vec3(*v);

    c.control_period = c.horizon_s / c.horizon_steps;
    r.get("nmpc", "control_period_s", c.control_period);
    c.solver.zeta = 1.0 / c.control_period;
    c.solver.k_max = std::min(9 * c.horizon_steps, 30);
    r.get("nmpc", "zeta", c.solver.zeta);
    r.get("nmpc", "fd_step", c.solver.fd_step);
    r.get("nmpc", "k_max", c.solver.k_max);
    r.get("nmpc", "gmres_tol", c.solver.gmres_tol);
    r.get("nmpc", "init_newton_iters", c.solver.init_newton_iters);
    r.get("nmpc", "init_tol", c.solver.init_tol);

    r.get("pwm", "enabled", c.pwm_enabled);
    r.get("pwm", "kappa", c.kappa);

    if (auto v = r.num("termination", "rate_threshold_deg_s")) c.rate_threshold = *v * kDegToRad;
    r.get("termination", "max_time_s", c.max_time);

    r.get("plant", "dt_s", c.plant_dt);
    if (auto v = r.text("plant", "truth_field")) {
        if (*v == "igrf") {
            c.truth_field = FieldModel::igrf;
        } else if (*v == "dipole") {
            c.truth_field = FieldModel::dipole;
        } else {
            throw ConfigError("plant.truth_field must be 'igrf' or 'dipole'");
        }
    }
    if (auto v = r.text("plant", "igrf_file")) {
        std::filesystem::path p(*v);
        c.igrf_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    r.get("plant", "igrf_degree", c.igrf_degree);

    if (auto t = r.text("output", "snapshot_times_s")) c.snapshot_times = numbers(*t, "output.snapshot_times_s");

    r.get("field", "sample_step_s", c.sample_step);
    if (auto v = r.num("field", "duration_s")) c.duration = *v;

    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.parent_path());
}

void ScenarioConfig::validate() const {
    try {
        (void)orbit.validated();
        weights.validate();
        (void)horizon();
    } catch (const InvalidStateError& e) {
        throw ConfigError(e.what());
    }
    if (horizon_steps < 2) throw ConfigError("nmpc.steps must be at least 2");
    if (!(control_period > 0.0)) throw ConfigError("nmpc.control_period_s must be positive");
    if (!(solver.zeta > 0.0) || !(solver.fd_step > 0.0) || solver.k_max < 1) {
        throw ConfigError("nmpc solver parameters must be positive");
    }
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ConfigError("pwm.kappa must lie in [0, 1)");
    if (!(rate_threshold > 0.0)) throw ConfigError("termination.rate_threshold_deg_s must be positive");
    if (!(max_time > 0.0)) throw ConfigError("termination.max_time_s must be positive");
    if (!(plant_dt > 0.0)) throw ConfigError("plant.dt_s must be positive");
    const double ratio = control_period / plant_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
        throw ConfigError("nmpc.control_period_s must be a whole multiple of plant.dt_s");
    }
    if (igrf_degree < 1) throw ConfigError("plant.igrf_degree must be at least 1");
    if (!(sample_step > 0.0)) throw ConfigError("field.sample_step_s must be positive");
}

}  // namespace mtq
