#include "mtq/attitude.hpp"

#include "mtq/errors.hpp"

#include <cmath>
#include <string>

namespace mtq {

void require_frame(const MagneticFieldSample& s, Frame expected, std::string_view context) {
    if (s.frame != expected) {
        throw FrameError(std::string(context) + ": expected " + std::string(to_string(expected)) +
                         "-frame field, got " + std::string(to_string(s.frame)));
    }
}

Quaternion Quaternion::canonical(const Vec4& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !v.allFinite()) {
        throw InvalidStateError("quaternion must be finite and non-zero");
    }
    Vec4 u = v / n;
    if (u[3] < 0.0) u = -u;
    return Quaternion(u);
}

double Quaternion::angle() const {
    return 2.0 * std::atan2(v_.head<3>().norm(), v_[3]);
}

InertiaTensor::InertiaTensor(double jx, double jy, double jz) : j_(jx, jy, jz) {
    if (!(jx > 0.0 && jy > 0.0 && jz > 0.0)) {
        throw InvalidStateError("principal moments of inertia must be strictly positive");
    }
    if (jx + jy < jz || jy + jz < jx || jz + jx < jy) {
        throw InvalidStateError("principal moments of inertia violate the triangle inequality");
    }
}

StateVector SatelliteState::vector() const {
    StateVector x;
    x << q.vec(), w.w;
    return x;
}

SatelliteState SatelliteState::from_vector(const StateVector& x) {
    return {Quaternion(Vec4(x.head<4>())), AngularVelocity{x.tail<3>()}};
}

KinematicsMatrix kinematics_matrix_unchecked(const Vec4& q) {
    KinematicsMatrix e;
    // clang-format off
    e <<  q[3], -q[2],  q[1],
          q[2],  q[3], -q[0],
         -q[1],  q[0],  q[3],
         -q[0], -q[1], -q[2];
    // clang-format on
    return 0.5 * e;
}

KinematicsMatrix kinematics_matrix(const Quaternion& q) {
    if (!q.vec().allFinite() || std::abs(q.norm() - 1.0) > 1e-6) {
        throw InvalidStateError("kinematics_matrix: quaternion is not unit norm");
    }
    return kinematics_matrix_unchecked(q.vec());
}

Mat3 attitude_matrix(const Quaternion& q) {
    const Vec3 qv = q.vec().head<3>();
    const double q4 = q.q4();
    Mat3 cross;
    // clang-format off
    cross <<    0.0, -qv[2],  qv[1],
              qv[2],    0.0, -qv[0],
             -qv[1],  qv[0],    0.0;
    // clang-format on
    return (q4 * q4 - qv.squaredNorm()) * Mat3::Identity() + 2.0 * qv * qv.transpose() -
           2.0 * q4 * cross;
}

StateVector rates(const StateVector& x, const Vec3& torque, const InertiaTensor& j) {
    const Vec4 q = x.head<4>();
    const Vec3 w = x.tail<3>();
    const Vec3& jd = j.diagonal();

    StateVector dx;
    dx.head<4>() = kinematics_matrix_unchecked(q) * w;
    dx[4] = ((jd[1] - jd[2]) * w[1] * w[2] + torque[0]) / jd[0];
    dx[5] = ((jd[2] - jd[0]) * w[2] * w[0] + torque[1]) / jd[1];
    dx[6] = ((jd[0] - jd[1]) * w[0] * w[1] + torque[2]) / jd[2];
    return dx;
}

StateVector state_derivative(const SatelliteState& x, const DipoleMoment& m,
                             const MagneticFieldSample& b_body, const InertiaTensor& j) {
    require_frame(b_body, Frame::body, "state_derivative");
    return rates(x.vector(), m.m.cross(b_body.b), j);
}

SatelliteState rk4_step(const SatelliteState& x, double t, double dt, const DerivativeFn& f) {
    if (!(dt > 0.0)) throw PropagationError("rk4_step: dt must be positive");

    const StateVector x0 = x.vector();
    auto eval = [&](double tau, const StateVector& xs) {
        StateVector d = f(tau, SatelliteState::from_vector(xs));
        if (!d.allFinite()) throw PropagationError("rk4_step: non-finite state derivative");
        return d;
    };

    const StateVector k1 = eval(t, x0);
    const StateVector k2 = eval(t + 0.5 * dt, x0 + 0.5 * dt * k1);
    const StateVector k3 = eval(t + 0.5 * dt, x0 + 0.5 * dt * k2);
    const StateVector k4 = eval(t + dt, x0 + dt * k3);

    StateVector x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x1.head<4>().normalize();
    return SatelliteState::from_vector(x1);
}

double kinetic_energy(const SatelliteState& x, const InertiaTensor& j) {
    return 0.5 * x.w.w.dot(j.diagonal().cwiseProduct(x.w.w));
}

Vec3 reference_angular_momentum(const SatelliteState& x, const InertiaTensor& j) {
    return attitude_matrix(x.q).transpose() * j.diagonal().cwiseProduct(x.w.w);
}

}  // namespace mtq
