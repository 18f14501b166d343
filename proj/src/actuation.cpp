#include "mtq/actuation.hpp"

#include "mtq/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mtq {

Mat3 skew(const Vec3& v) {
    Mat3 s;
    // clang-format off
    s <<   0.0,  v.z(), -v.y(),
        -v.z(),    0.0,  v.x(),
         v.y(), -v.x(),    0.0;
    // clang-format on
    return s;
}

Vec3 torque_from_moment(const DipoleMoment& m, const MagneticFieldSample& b) {
    require_frame(b, Frame::body, "torque_from_moment");
    return m.m.cross(b.b);
}

DipoleMoment moment_from_command(const Vec3& u, const MagneticFieldSample& b) {
    require_frame(b, Frame::body, "moment_from_command");
    const double n2 = b.b.squaredNorm();
    if (!(std::sqrt(n2) > kDegenerateField)) {
        throw DegenerateFieldError("moment_from_command: field magnitude below 1e-7 T");
    }
    return {skew(b.b).transpose() * u / n2};
}

Mat3 psi3(const Vec3& b) {
    if (!b.allFinite() || std::abs(b.norm() - 1.0) > 1e-9) {
        throw InvalidStateError("psi3: argument must be a unit vector");
    }
    const Mat3 s = skew(b);
    return s * s.transpose();
}

AveragedControlMatrix average_psi3(std::span<const MagneticFieldSample> series, double min_span) {
    if (series.size() < 100) {
        throw InsufficientDataError("average_psi3: need at least 100 field samples");
    }
    const double span = series.back().t - series.front().t;
    if (!(span >= min_span) || !(span > 0.0)) {
        throw InsufficientDataError("average_psi3: samples span less than the required window");
    }

    Mat3 integral = Mat3::Zero();
    Mat3 prev = psi3(series.front().b.normalized());
    for (std::size_t k = 1; k < series.size(); ++k) {
        const Mat3 cur = psi3(series[k].b.normalized());
        const double dt = series[k].t - series[k - 1].t;
        if (!(dt > 0.0)) throw InsufficientDataError("average_psi3: timestamps must increase");
        integral += 0.5 * dt * (prev + cur);
        prev = cur;
    }

    AveragedControlMatrix out;
    out.matrix = integral / span;
    Eigen::SelfAdjointEigenSolver<Mat3> eig(out.matrix);
    out.eigenvalues = eig.eigenvalues();
    out.min_eigenvalue = out.eigenvalues[0];
    return out;
}

}  // namespace mtq
