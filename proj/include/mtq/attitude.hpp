#pragma once

#include "mtq/magnetic.hpp"

#include <Eigen/Core>

#include <functional>

namespace mtq {

using Vec4 = Eigen::Vector4d;
using StateVector = Eigen::Matrix<double, 7, 1>;
using KinematicsMatrix = Eigen::Matrix<double, 4, 3>;

/// Attitude of the body frame relative to the orbital frame.
/// Scalar-last: (q1, q2, q3) is the vector part, q4 the scalar part.
class Quaternion {
public:
    Quaternion() : v_(0.0, 0.0, 0.0, 1.0) {}
    Quaternion(double q1, double q2, double q3, double q4) : v_(q1, q2, q3, q4) {}
    explicit Quaternion(const Vec4& v) : v_(v) {}

    static Quaternion identity() { return {}; }

    /// Normalized, with the sign chosen so that q4 >= 0. Used when a
    /// scenario is initialized; propagation never flips the sign.
    static Quaternion canonical(const Vec4& v);

    double q1() const { return v_[0]; }
    double q2() const { return v_[1]; }
    double q3() const { return v_[2]; }
    double q4() const { return v_[3]; }

    const Vec4& vec() const { return v_; }
    double norm() const { return v_.norm(); }
    Quaternion normalized() const { return Quaternion(v_.normalized()); }

    /// Rotation angle in [0, 2*pi], rad.
    double angle() const;

private:
    Vec4 v_;
};

/// Angular velocity of the body w.r.t. inertial space, body axes, rad/s.
struct AngularVelocity {
    Vec3 w = Vec3::Zero();

    static constexpr double kGuard = 10.0;  // rad/s

    bool is_sane() const { return w.allFinite() && w.norm() < kGuard; }
};

/// Principal moments of inertia, kg*m^2.
class InertiaTensor {
public:
    InertiaTensor(double jx, double jy, double jz);

    double jx() const { return j_[0]; }
    double jy() const { return j_[1]; }
    double jz() const { return j_[2]; }
    const Vec3& diagonal() const { return j_; }
    Mat3 matrix() const { return j_.asDiagonal(); }

private:
    Vec3 j_;
};

struct SatelliteState {
    Quaternion q;
    AngularVelocity w;

    /// x = [q1, q2, q3, q4, wx, wy, wz]
    StateVector vector() const;
    static SatelliteState from_vector(const StateVector& x);
};

/// E(q) with q_dot = E(q) * w. Throws InvalidStateError unless |q| = 1 +- 1e-6.
KinematicsMatrix kinematics_matrix(const Quaternion& q);

/// E(q) without the unit-norm check; the prediction model runs on
/// explicit-Euler rollouts whose quaternions drift off the unit sphere.
KinematicsMatrix kinematics_matrix_unchecked(const Vec4& q);

/// Direction-cosine matrix mapping orbital-frame vectors into the body frame.
Mat3 attitude_matrix(const Quaternion& q);

/// Time derivative of x for a given body-frame torque (N*m). No checks.
StateVector rates(const StateVector& x, const Vec3& torque, const InertiaTensor& j);

/// Full 7-state derivative under magnetic torque m x B.
StateVector state_derivative(const SatelliteState& x, const DipoleMoment& m,
                             const MagneticFieldSample& b_body, const InertiaTensor& j);

/// Derivative provider for the plant integrator: (t, x) -> x_dot.
using DerivativeFn = std::function<StateVector(double, const SatelliteState&)>;

/// One classical RK4 step from time t; the quaternion is renormalized afterwards.
SatelliteState rk4_step(const SatelliteState& x, double t, double dt, const DerivativeFn& f);

double kinetic_energy(const SatelliteState& x, const InertiaTensor& j);

/// Angular momentum J*w expressed in the orbital (reference) frame.
Vec3 reference_angular_momentum(const SatelliteState& x, const InertiaTensor& j);

}  // namespace mtq
