#pragma once

#include "mtq/magnetic.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mtq {

constexpr double kIgrfReferenceRadius = 6371.2;  // km

struct GeocentricPosition {
    double radius = 0.0;     // km
    double colatitude = 0.0; // rad, 0 at the north pole
    double longitude = 0.0;  // rad, east positive

    static GeocentricPosition from_cartesian(const Vec3& r_km);
    Vec3 to_cartesian() const;
};

/// Schmidt semi-normalized Gauss coefficients (nT) of a single epoch.
class IgrfCoefficientSet {
public:
    IgrfCoefficientSet(double epoch, int max_degree);

    double epoch() const { return epoch_; }
    int max_degree() const { return max_degree_; }

    double g(int n, int m) const { return g_[index(n, m)]; }
    double h(int n, int m) const { return h_[index(n, m)]; }
    void set(int n, int m, double g, double h);

    IgrfCoefficientSet truncated(int degree) const;

private:
    static std::size_t index(int n, int m) { return static_cast<std::size_t>(n * (n + 1) / 2 + m); }

    double epoch_;
    int max_degree_;
    std::vector<double> g_;
    std::vector<double> h_;
};

/// Field components (B_r, B_theta, B_phi) in nT; B_theta points south.
Vec3 igrf_spherical(const IgrfCoefficientSet& c, const GeocentricPosition& p);

/// Field in Earth-fixed Cartesian axes, tesla.
Vec3 igrf_earth_fixed(const IgrfCoefficientSet& c, const GeocentricPosition& p);

/// Multi-epoch coefficient table in the published IGRF text layout:
/// a `g/h n m <epoch>... <sv>` header followed by one row per coefficient.
class IgrfTable {
public:
    static IgrfTable parse(std::istream& in);
    static IgrfTable load(const std::filesystem::path& path);

    struct Evaluation {
        IgrfCoefficientSet coefficients;
        bool extrapolated = false;
    };

    /// Coefficients at a decimal year: linear between tabulated epochs,
    /// secular variation past the last one. Years outside
    /// [first epoch, last epoch + 5] are flagged as extrapolated.
    Evaluation at(double year, int max_degree = 10) const;

    const std::vector<double>& epochs() const { return epochs_; }
    int max_degree() const { return max_degree_; }

private:
    struct Row {
        std::vector<double> g, h;  // per epoch
        double g_sv = 0.0, h_sv = 0.0;
    };

    std::vector<double> epochs_;
    int max_degree_ = 0;
    std::vector<Row> rows_;  // triangular (n, m) index
};

}  // namespace mtq
