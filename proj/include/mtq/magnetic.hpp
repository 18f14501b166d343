#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string_view>

namespace mtq {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Frame { orbital, body };

constexpr std::string_view to_string(Frame f) {
    return f == Frame::orbital ? "orbital" : "body";
}

/// Magnetic field vector in tesla, tagged with the frame it is expressed in.
struct MagneticFieldSample {
    Vec3 b = Vec3::Zero();
    Frame frame = Frame::orbital;
    double t = 0.0;  // s since scenario epoch

    double norm() const { return b.norm(); }

    /// LEO sanity band for the field magnitude.
    bool in_leo_band() const {
        const double n = b.norm();
        return b.allFinite() && n >= 1e-6 && n <= 1e-4;
    }
};

/// Body-frame magnetic dipole moment of the torquer coils, A*m^2.
struct DipoleMoment {
    Vec3 m = Vec3::Zero();
};

/// Throws FrameError unless `s` is tagged `expected`.
void require_frame(const MagneticFieldSample& s, Frame expected, std::string_view context);

}  // namespace mtq
