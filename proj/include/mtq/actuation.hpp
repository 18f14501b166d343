#pragma once

#include "mtq/magnetic.hpp"

#include <span>

namespace mtq {

/// Skew matrix with S(B) * m = m x B.
Mat3 skew(const Vec3& v);

/// T = m x B. `b` must be body-frame.
Vec3 torque_from_moment(const DipoleMoment& m, const MagneticFieldSample& b);

/// Minimum-norm moment for a desired torque: m = S(B)^T u / |B|^2.
/// Throws DegenerateFieldError when |B| <= 1e-7 T.
DipoleMoment moment_from_command(const Vec3& u, const MagneticFieldSample& b);

/// psi3(b) = S(b) S(b)^T for a unit vector b. Throws InvalidStateError
/// unless |b| = 1 +- 1e-9.
Mat3 psi3(const Vec3& b);

struct AveragedControlMatrix {
    Mat3 matrix = Mat3::Zero();
    Vec3 eigenvalues = Vec3::Zero();  // ascending
    double min_eigenvalue = 0.0;
};

/// Time average of psi3 along a field history (trapezoidal in the sample
/// timestamps). Needs at least 100 samples spanning at least `min_span` s,
/// else InsufficientDataError.
AveragedControlMatrix average_psi3(std::span<const MagneticFieldSample> series, double min_span);

constexpr double kDegenerateField = 1e-7;  // T

}  // namespace mtq
