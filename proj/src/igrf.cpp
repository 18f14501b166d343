#include "mtq/igrf.hpp"

#include "mtq/constants.hpp"
#include "mtq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace mtq {

GeocentricPosition GeocentricPosition::from_cartesian(const Vec3& r_km) {
    GeocentricPosition p;
    p.radius = r_km.norm();
    p.colatitude = std::acos(std::clamp(r_km.z() / p.radius, -1.0, 1.0));
    p.longitude = std::atan2(r_km.y(), r_km.x());
    return p;
}

Vec3 GeocentricPosition::to_cartesian() const {
    const double s = std::sin(colatitude);
    return radius * Vec3(s * std::cos(longitude), s * std::sin(longitude), std::cos(colatitude));
}

IgrfCoefficientSet::IgrfCoefficientSet(double epoch, int max_degree)
    : epoch_(epoch), max_degree_(max_degree) {
    if (max_degree < 1) throw InvalidStateError("IGRF degree must be at least 1");
    const auto size = index(max_degree, max_degree) + 1;
    g_.assign(size, 0.0);
    h_.assign(size, 0.0);
}

void IgrfCoefficientSet::set(int n, int m, double g, double h) {
    if (n < 1 || n > max_degree_ || m < 0 || m > n) {
        throw InvalidStateError("IGRF coefficient index out of range");
    }
    g_[index(n, m)] = g;
    h_[index(n, m)] = m == 0 ? 0.0 : h;
}

IgrfCoefficientSet IgrfCoefficientSet::truncated(int degree) const {
    IgrfCoefficientSet out(epoch_, std::min(degree, max_degree_));
    for (int n = 1; n <= out.max_degree(); ++n) {
        for (int m = 0; m <= n; ++m) out.set(n, m, g(n, m), h(n, m));
    }
    return out;
}

namespace {

// Ferrers functions without the Condon-Shortley phase, scaled to the
// Schmidt semi-normalization, together with their colatitude derivatives.
struct Legendre {
    std::vector<std::vector<double>> p, dp;
};

Legendre schmidt_legendre(int nmax, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    // unnormalized, one extra order so dp can use P_n^{m+1}
    std::vector<std::vector<double>> raw(nmax + 1, std::vector<double>(nmax + 2, 0.0));
    raw[0][0] = 1.0;
    for (int m = 1; m <= nmax; ++m) raw[m][m] = (2.0 * m - 1.0) * s * raw[m - 1][m - 1];
    for (int m = 0; m < nmax; ++m) raw[m + 1][m] = (2.0 * m + 1.0) * c * raw[m][m];
    for (int m = 0; m <= nmax; ++m) {
        for (int n = m + 2; n <= nmax; ++n) {
            raw[n][m] = ((2.0 * n - 1.0) * c * raw[n - 1][m] - (n + m - 1.0) * raw[n - 2][m]) /
                        (n - m);
        }
    }

    Legendre out;
    out.p.assign(nmax + 1, std::vector<double>(nmax + 1, 0.0));
    out.dp = out.p;
    for (int n = 0; n <= nmax; ++n) {
        for (int m = 0; m <= n; ++m) {
            // sqrt((2 - delta_m0) (n - m)! / (n + m)!)
            double ratio = 1.0;
            for (int k = n - m + 1; k <= n + m; ++k) ratio /= k;
            const double norm = std::sqrt((m == 0 ? 1.0 : 2.0) * ratio);

            const double d = m == 0 ? -raw[n][1]
                                    : 0.5 * ((n + m) * (n - m + 1.0) * raw[n][m - 1] - raw[n][m + 1]);
            out.p[n][m] = norm * raw[n][m];
            out.dp[n][m] = norm * d;
        }
    }
    return out;
}

}  // namespace

Vec3 igrf_spherical(const IgrfCoefficientSet& c, const GeocentricPosition& p) {
    const int nmax = c.max_degree();
    // keep 1/sin(theta) finite on the polar axis
    const double theta = std::clamp(p.colatitude, 1e-12, kPi - 1e-12);
    const Legendre leg = schmidt_legendre(nmax, theta);
    const double ratio = kIgrfReferenceRadius / p.radius;
    const double sin_theta = std::sin(theta);

    double br = 0.0, bt = 0.0, bp = 0.0;
    double rpow = ratio * ratio;  // (a/r)^(n+2) starts at n = 0
    for (int n = 1; n <= nmax; ++n) {
        rpow *= ratio;
        for (int m = 0; m <= n; ++m) {
            const double cm = std::cos(m * p.longitude);
            const double sm = std::sin(m * p.longitude);
            const double gh = c.g(n, m) * cm + c.h(n, m) * sm;
            br += (n + 1.0) * rpow * gh * leg.p[n][m];
            bt -= rpow * gh * leg.dp[n][m];
            bp += rpow * m * (c.g(n, m) * sm - c.h(n, m) * cm) * leg.p[n][m] / sin_theta;
        }
    }
    return {br, bt, bp};
}

Vec3 igrf_earth_fixed(const IgrfCoefficientSet& c, const GeocentricPosition& p) {
    const Vec3 sph = igrf_spherical(c, p);
    const double st = std::sin(p.colatitude), ct = std::cos(p.colatitude);
    const double sl = std::sin(p.longitude), cl = std::cos(p.longitude);
    const Vec3 r_hat(st * cl, st * sl, ct);
    const Vec3 theta_hat(ct * cl, ct * sl, -st);
    const Vec3 phi_hat(-sl, cl, 0.0);
    return 1e-9 * (sph[0] * r_hat + sph[1] * theta_hat + sph[2] * phi_hat);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double to_number(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IngestionError("malformed IGRF value '" + tok + "'", line);
    }
}

int to_int(const std::string& tok, int line) {
    const double v = to_number(tok, line);
    if (v != std::floor(v)) throw IngestionError("non-integer IGRF index '" + tok + "'", line);
    return static_cast<int>(v);
}

}  // namespace

IgrfTable IgrfTable::parse(std::istream& in) {
    IgrfTable table;
    bool has_sv = false;

    struct Pending {
        std::vector<double> values;
        int line = 0;
    };
    std::map<std::pair<int, int>, Pending> g_rows, h_rows;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tok = split(line);
        if (tok.empty() || tok[0][0] == '#' || tok[0] == "c/s") continue;

        if (tok[0] == "g/h") {
            if (tok.size() < 4 || tok[1] != "n" || tok[2] != "m") {
                throw IngestionError("malformed IGRF header", lineno);
            }
            table.epochs_.clear();
            for (std::size_t i = 3; i < tok.size(); ++i) {
                if (tok[i].find('-', 1) != std::string::npos) {
                    if (i + 1 != tok.size()) {
                        throw IngestionError("secular-variation column must be last", lineno);
                    }
                    has_sv = true;
                } else {
                    table.epochs_.push_back(to_number(tok[i], lineno));
                }
            }
            if (table.epochs_.empty()) throw IngestionError("IGRF header lists no epochs", lineno);
            if (!std::is_sorted(table.epochs_.begin(), table.epochs_.end())) {
                throw IngestionError("IGRF epochs must be increasing", lineno);
            }
            continue;
        }

        if (tok[0] != "g" && tok[0] != "h") {
            throw IngestionError("unrecognized IGRF row '" + tok[0] + "'", lineno);
        }
        if (table.epochs_.empty()) throw IngestionError("IGRF data row before header", lineno);
        const std::size_t expected = 3 + table.epochs_.size() + (has_sv ? 1 : 0);
        if (tok.size() != expected) {
            throw IngestionError("expected " + std::to_string(expected) + " columns, got " +
                                     std::to_string(tok.size()),
                                 lineno);
        }
        const int n = to_int(tok[1], lineno);
        const int m = to_int(tok[2], lineno);
        if (n < 1 || m < 0 || m > n) throw IngestionError("invalid degree/order", lineno);
        if (tok[0] == "h" && m == 0) throw IngestionError("h coefficient with m = 0", lineno);

        Pending p;
        p.line = lineno;
        for (std::size_t i = 3; i < tok.size(); ++i) p.values.push_back(to_number(tok[i], lineno));
        auto& dest = tok[0] == "g" ? g_rows : h_rows;
        if (!dest.emplace(std::make_pair(n, m), std::move(p)).second) {
            throw IngestionError("duplicate coefficient row", lineno);
        }
        table.max_degree_ = std::max(table.max_degree_, n);
    }

    if (table.max_degree_ == 0) throw IngestionError("no IGRF coefficients found", lineno);

    const std::size_t ne = table.epochs_.size();
    table.rows_.resize(static_cast<std::size_t>((table.max_degree_ + 1) * (table.max_degree_ + 2) / 2));
    for (int n = 1; n <= table.max_degree_; ++n) {
        for (int m = 0; m <= n; ++m) {
            auto g = g_rows.find({n, m});
            if (g == g_rows.end()) {
                throw IngestionError("missing g(" + std::to_string(n) + "," + std::to_string(m) + ")", 0);
            }
            Row& row = table.rows_[static_cast<std::size_t>(n * (n + 1) / 2 + m)];
            row.g.assign(g->second.values.begin(), g->second.values.begin() + static_cast<long>(ne));
            row.g_sv = has_sv ? g->second.values.back() : 0.0;
            row.h.assign(ne, 0.0);
            if (m > 0) {
                auto h = h_rows.find({n, m});
                if (h == h_rows.end()) {
                    throw IngestionError(
                        "missing h(" + std::to_string(n) + "," + std::to_string(m) + ")", 0);
                }
                row.h.assign(h->second.values.begin(), h->second.values.begin() + static_cast<long>(ne));
                row.h_sv = has_sv ? h->second.values.back() : 0.0;
            }
        }
    }
    return table;
}

IgrfTable IgrfTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open IGRF file " + path.string(), 0);
    try {
        return parse(in);
    } catch (const IngestionError& e) {
        throw IngestionError(path.string() + ": " + e.what(), 0);
    }
}

IgrfTable::Evaluation IgrfTable::at(double year, int max_degree) const {
    const int degree = std::min(max_degree, max_degree_);
    const double first = epochs_.front();
    const double last = epochs_.back();

    Evaluation ev{IgrfCoefficientSet(year, degree), year < first || year > last + 5.0};

    // bracketing interval, or the extrapolation rule at either end
    std::size_t lo = 0;
    double frac = 0.0;
    bool use_sv = false;
    if (year >= last) {
        lo = epochs_.size() - 1;
        use_sv = true;
    } else if (year <= first || epochs_.size() == 1) {
        lo = 0;
        frac = epochs_.size() > 1 ? (year - first) / (epochs_[1] - first) : 0.0;
    } else {
        lo = static_cast<std::size_t>(
            std::upper_bound(epochs_.begin(), epochs_.end(), year) - epochs_.begin() - 1);
        frac = (year - epochs_[lo]) / (epochs_[lo + 1] - epochs_[lo]);
    }

    for (int n = 1; n <= degree; ++n) {
        for (int m = 0; m <= n; ++m) {
            const Row& row = rows_[static_cast<std::size_t>(n * (n + 1) / 2 + m)];
            double g, h;
            if (use_sv) {
                g = row.g[lo] + row.g_sv * (year - last);
                h = row.h[lo] + row.h_sv * (year - last);
            } else if (epochs_.size() == 1) {
                g = row.g[0];
                h = row.h[0];
            } else {
                g = row.g[lo] + frac * (row.g[lo + 1] - row.g[lo]);
                h = row.h[lo] + frac * (row.h[lo + 1] - row.h[lo]);
            }
            ev.coefficients.set(n, m, g, h);
        }
    }
    return ev;
}

}  // namespace mtq
