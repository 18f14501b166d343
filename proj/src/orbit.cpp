#include "mtq/orbit.hpp"

#include "mtq/errors.hpp"

#include <cmath>

namespace mtq {
namespace {

double wrap_deg(double a) {
    double w = std::fmod(a, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w -= 360.0;
    return w;
}

}  // namespace

KeplerianElements KeplerianElements::validated() const {
    if (!(eccentricity >= 0.0 && eccentricity < 1.0)) {
        throw InvalidStateError("eccentricity must lie in [0, 1)");
    }
    if (!(semi_major_axis > kEarthRadius)) {
        throw InvalidStateError("semi-major axis must exceed the Earth radius");
    }
    KeplerianElements out = *this;
    out.inclination = wrap_deg(inclination);
    out.raan = wrap_deg(raan);
    out.arg_perigee = wrap_deg(arg_perigee);
    out.mean_anomaly = wrap_deg(mean_anomaly);
    return out;
}

double KeplerianElements::mean_motion() const {
    return std::sqrt(kEarthMu / (semi_major_axis * semi_major_axis * semi_major_axis));
}

double KeplerianElements::period() const { return 2.0 * kPi / mean_motion(); }

double solve_kepler(double m, double e) {
    double ecc_anomaly = m;
    for (int i = 0; i < 50; ++i) {
        const double f = ecc_anomaly - e * std::sin(ecc_anomaly) - m;
        const double step = f / (1.0 - e * std::cos(ecc_anomaly));
        ecc_anomaly -= step;
        if (std::abs(step) < 1e-12) return ecc_anomaly;
    }
    throw PropagationError("Kepler iteration did not converge in 50 Newton steps");
}

OrbitPosition propagate_orbit(const KeplerianElements& el, double t) {
    const double e = el.eccentricity;
    const double m = std::fmod(el.mean_anomaly * kDegToRad + el.mean_motion() * t, 2.0 * kPi);
    const double ecc_anomaly = solve_kepler(m, e);
    const double theta = 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * ecc_anomaly),
                                          std::sqrt(1.0 - e) * std::cos(0.5 * ecc_anomaly));
    OrbitPosition p;
    p.r = el.semi_major_axis * (1.0 - e * std::cos(ecc_anomaly));
    p.theta = wrap_deg(theta * kRadToDeg);
    p.eta = wrap_deg(p.theta + el.arg_perigee);
    return p;
}

Mat3 orbital_frame_axes(const KeplerianElements& el) {
    const double raan = el.raan * kDegToRad;
    const double inc = el.inclination * kDegToRad;
    const Vec3 node(std::cos(raan), std::sin(raan), 0.0);
    const Vec3 normal(std::sin(raan) * std::sin(inc), -std::cos(raan) * std::sin(inc),
                      std::cos(inc));
    Mat3 axes;
    axes.col(0) = node;
    axes.col(1) = normal.cross(node);
    axes.col(2) = normal;
    return axes;
}

Vec3 inertial_position(const KeplerianElements& el, double t) {
    const OrbitPosition p = propagate_orbit(el, t);
    const double eta = p.eta * kDegToRad;
    return orbital_frame_axes(el) * Vec3(std::cos(eta), std::sin(eta), 0.0) * p.r;
}

MagneticFieldSample dipole_field(const KeplerianElements& el, double t) {
    const OrbitPosition p = propagate_orbit(el, t);
    const double r_m = p.r * 1e3;
    const double dm = -kDipoleMoment / (r_m * r_m * r_m);
    const double si = std::sin(el.inclination * kDegToRad);
    const double ci = std::cos(el.inclination * kDegToRad);
    const double two_eta = 2.0 * p.eta * kDegToRad;

    MagneticFieldSample s;
    s.b = dm * Vec3(1.5 * si * std::sin(two_eta), -1.5 * si * (std::cos(two_eta) - 1.0 / 3.0), -ci);
    s.frame = Frame::orbital;
    s.t = t;
    return s;
}

MagneticFieldSample field_to_body(const MagneticFieldSample& b, const Quaternion& q) {
    require_frame(b, Frame::orbital, "field_to_body");
    MagneticFieldSample out = b;
    out.b = attitude_matrix(q) * b.b;
    out.frame = Frame::body;
    return out;
}

}  // namespace mtq
