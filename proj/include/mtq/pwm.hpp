#pragma once

#include "mtq/magnetic.hpp"

#include <array>
#include <optional>

namespace mtq {

/// Seven-level hysteretic quantizer. Output levels are k * u_max / 3 for
/// k in -3..3; which thresholds apply depends on the level chosen at the
/// previous sample.
///
/// Each threshold has the form k * u_span + c * u_span / 2 with
/// c in {1, 1 + kappa, 1 - kappa}. The branch tables are stored as data and
/// evaluated top-down (first matching row wins).
namespace pwm {

enum class Offset { nominal, plus_kappa, minus_kappa };

struct Bound {
    int level;  // k
    Offset offset;
};

struct Row {
    int output;                // level emitted when the row matches
    std::optional<Bound> lo;   // u_c >= lo
    std::optional<Bound> hi;   // u_c < hi
};

using Table = std::array<Row, 7>;  // rows ordered from +3 down to -3

/// Branch table used when the previous level was `prev` (-3..3).
const Table& table_for(int prev);

double bound_value(const Bound& b, double u_span, double kappa);

}  // namespace pwm

struct PwmConfig {
    double u_max = 0.1;
    double kappa = 0.3;

    double u_span() const { return u_max / 3.0; }
};

/// Level index in -3..3 for command u_c given the previous level.
int quantize_level(double u_c, int prev_level, const PwmConfig& cfg);

/// Per-axis quantizer state; levels start at 0.
class PwmQuantizer {
public:
    explicit PwmQuantizer(PwmConfig cfg);

    const PwmConfig& config() const { return cfg_; }
    const std::array<int, 3>& levels() const { return prev_; }

    /// Quantizes one sample on each axis and records the chosen levels.
    Vec3 quantize(const Vec3& u_c);
    double quantize_axis(int axis, double u_c);

private:
    PwmConfig cfg_;
    std::array<int, 3> prev_{0, 0, 0};
};

}  // namespace mtq
