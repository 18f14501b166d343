#pragma once

#include "mtq/attitude.hpp"
#include "mtq/constants.hpp"
#include "mtq/magnetic.hpp"

namespace mtq {

constexpr double kEarthMu = 398600.4418;       // km^3/s^2
constexpr double kEarthRadius = 6378.137;      // km, equatorial
constexpr double kEarthRotationRate = 7.2921158553e-5;  // rad/s

/// Onboard dipole strength: 8.1e25 G*cm^3 = 8.1e15 T*m^3.
constexpr double kDipoleMoment = 8.1e15;

struct KeplerianElements {
    double semi_major_axis = 0.0;  // km
    double eccentricity = 0.0;
    double inclination = 0.0;      // deg
    double raan = 0.0;             // deg
    double arg_perigee = 0.0;      // deg
    double mean_anomaly = 0.0;     // deg, at t = 0

    /// Normalizes the angles to [0, 360) and checks 0 <= e < 1, a > Earth radius.
    /// Throws InvalidStateError.
    KeplerianElements validated() const;

    double period() const;       // s
    double mean_motion() const;  // rad/s
};

struct OrbitPosition {
    double r = 0.0;      // km
    double theta = 0.0;  // true anomaly, deg in [0, 360)
    double eta = 0.0;    // argument of latitude theta + arg_perigee, deg in [0, 360)
};

/// Two-body propagation from the epoch mean anomaly. Kepler's equation is
/// solved by Newton iteration starting at E = M (tolerance 1e-12 rad, 50 steps).
OrbitPosition propagate_orbit(const KeplerianElements& el, double t);

/// Eccentric anomaly for mean anomaly `m` (rad). Throws PropagationError on
/// non-convergence.
double solve_kepler(double m, double e);

/// Columns are the orbital frame axes expressed in the inertial frame:
/// x toward the ascending node, z along the orbit normal, y = z cross x.
Mat3 orbital_frame_axes(const KeplerianElements& el);

/// Inertial position, km.
Vec3 inertial_position(const KeplerianElements& el, double t);

/// Onboard non-tilted dipole model in the orbital frame.
MagneticFieldSample dipole_field(const KeplerianElements& el, double t);

/// Rotates an orbital-frame sample into the body frame of attitude q.
MagneticFieldSample field_to_body(const MagneticFieldSample& b, const Quaternion& q);

}  // namespace mtq
