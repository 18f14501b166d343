#include "mtq/environment.hpp"

#include "mtq/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace mtq {
namespace {

// days since 1970-01-01 for a proleptic Gregorian date
long days_from_civil(long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

constexpr double kJulianDateUnixEpoch = 2440587.5;

}  // namespace

double decimal_year_to_julian_date(double year) {
    const long y = static_cast<long>(std::floor(year));
    const double start = static_cast<double>(days_from_civil(y, 1, 1));
    const double length = static_cast<double>(days_from_civil(y + 1, 1, 1)) - start;
    return kJulianDateUnixEpoch + start + (year - static_cast<double>(y)) * length;
}

double greenwich_sidereal_angle(double julian_date) {
    const double d = julian_date - 2451545.0;
    const double c = d / 36525.0;
    double deg = 280.46061837 + 360.98564736629 * d + 0.000387933 * c * c - c * c * c / 38710000.0;
    deg = std::fmod(deg, 360.0);
    if (deg < 0.0) deg += 360.0;
    return deg * kDegToRad;
}

OrbitEnvironment::OrbitEnvironment(const KeplerianElements& el, double epoch_year)
    : el_(el.validated()),
      epoch_year_(epoch_year),
      gmst0_(greenwich_sidereal_angle(decimal_year_to_julian_date(epoch_year))),
      orbital_axes_(orbital_frame_axes(el_)) {}

bool OrbitEnvironment::set_igrf(const IgrfTable& table, int degree) {
    auto ev = table.at(epoch_year_, degree);
    igrf_ = std::move(ev.coefficients);
    return ev.extrapolated;
}

void OrbitEnvironment::set_igrf(IgrfCoefficientSet coefficients) { igrf_ = std::move(coefficients); }

MagneticFieldSample OrbitEnvironment::dipole(double t) const { return dipole_field(el_, t); }

Vec3 OrbitEnvironment::earth_fixed_position(double t) const {
    const double gmst = gmst0_ + kEarthRotationRate * t;
    const Eigen::AngleAxisd to_earth_fixed(-gmst, Vec3::UnitZ());
    return to_earth_fixed * inertial_position(el_, t);
}

MagneticFieldSample OrbitEnvironment::igrf(double t) const {
    if (!igrf_) throw ConfigError("IGRF field requested but no coefficient table is loaded");
    const double gmst = gmst0_ + kEarthRotationRate * t;
    const Eigen::AngleAxisd to_inertial(gmst, Vec3::UnitZ());

    const Vec3 r_ef = earth_fixed_position(t);
    const Vec3 b_ef = igrf_earth_fixed(*igrf_, GeocentricPosition::from_cartesian(r_ef));

    MagneticFieldSample s;
    s.b = orbital_axes_.transpose() * (to_inertial * b_ef);
    s.frame = Frame::orbital;
    s.t = t;
    return s;
}

MagneticFieldSample OrbitEnvironment::field(FieldModel model, double t) const {
    return model == FieldModel::igrf ? igrf(t) : dipole(t);
}

std::vector<FieldComparisonRow> compare_field_models(const OrbitEnvironment& env,
                                                     double duration, double step) {
    if (!(step > 0.0)) throw InvalidStateError("compare_field_models: step must be positive");
    std::vector<FieldComparisonRow> rows;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * step;
        if (t >= duration) break;
        rows.push_back({t, env.dipole(t).b, env.igrf(t).b});
    }
    return rows;
}

}  // namespace mtq
