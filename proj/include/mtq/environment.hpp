#pragma once

#include "mtq/igrf.hpp"
#include "mtq/orbit.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace mtq {

enum class FieldModel { igrf, dipole };

double decimal_year_to_julian_date(double year);

/// Greenwich mean sidereal angle (IAU 1982), rad in [0, 2*pi).
double greenwich_sidereal_angle(double julian_date);

/// Orbit plus geomagnetic environment for one scenario. IGRF coefficients are
/// frozen at the scenario epoch; secular drift over a run is far below a nT.
class OrbitEnvironment {
public:
    OrbitEnvironment(const KeplerianElements& el, double epoch_year);

    /// Attaches the IGRF table. Returns true if the epoch lies outside the
    /// table's validity window and the coefficients were extrapolated.
    bool set_igrf(const IgrfTable& table, int degree = 10);
    void set_igrf(IgrfCoefficientSet coefficients);
    bool has_igrf() const { return igrf_.has_value(); }

    const KeplerianElements& elements() const { return el_; }
    double epoch_year() const { return epoch_year_; }

    MagneticFieldSample dipole(double t) const;
    /// IGRF field at the satellite, rotated into the orbital frame.
    MagneticFieldSample igrf(double t) const;
    MagneticFieldSample field(FieldModel model, double t) const;

    /// Satellite position in Earth-fixed axes, km.
    Vec3 earth_fixed_position(double t) const;

private:
    KeplerianElements el_;
    double epoch_year_;
    double gmst0_;
    Mat3 orbital_axes_;
    std::optional<IgrfCoefficientSet> igrf_;
};

struct FieldComparisonRow {
    double t = 0.0;
    Vec3 dipole = Vec3::Zero();
    Vec3 igrf = Vec3::Zero();
};

/// Paired orbital-frame samples of both field models at t = 0, step, ...
/// strictly below `duration`.
std::vector<FieldComparisonRow> compare_field_models(const OrbitEnvironment& env,
                                                     double duration, double step);

}  // namespace mtq
