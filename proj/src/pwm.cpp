#include "mtq/pwm.hpp"

#include "mtq/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace mtq {
namespace pwm {
namespace {

constexpr Offset N = Offset::nominal;
constexpr Offset P = Offset::plus_kappa;
constexpr Offset M = Offset::minus_kappa;

constexpr Row top(Bound lo) { return {3, lo, std::nullopt}; }
constexpr Row mid(int out, Bound lo, Bound hi) { return {out, lo, hi}; }
constexpr Row bottom(Bound hi) { return {-3, std::nullopt, hi}; }

// clang-format off
const std::array<Table, 7> kTables = {{
    // prev = -3. The -3/-2 threshold matches the prev = -2 table; with a
    // 1 - kappa offset the output alternates -2, -3, -2, ... under a constant
    // command between the two thresholds.
    {{top({2, N}),
      mid(2, {1, N}, {2, N}),
      mid(1, {0, N}, {1, N}),
      mid(0, {-1, N}, {0, N}),
      mid(-1, {-2, P}, {-1, N}),
      mid(-2, {-3, P}, {-2, P}),
      bottom({-3, P})}},
    // prev = -2
    {{top({2, N}),
      mid(2, {1, N}, {2, N}),
      mid(1, {0, N}, {1, N}),
      mid(0, {-1, N}, {0, N}),
      mid(-1, {-2, P}, {-1, N}),
      mid(-2, {-3, P}, {-2, P}),
      bottom({-3, P})}},
    // prev = -1
    {{top({2, N}),
      mid(2, {1, N}, {2, N}),
      mid(1, {0, N}, {1, N}),
      mid(0, {-1, P}, {0, N}),
      mid(-1, {-2, P}, {-1, P}),
      mid(-2, {-3, N}, {-2, P}),
      bottom({-3, N})}},
    // prev = 0
    {{top({2, N}),
      mid(2, {1, N}, {2, N}),
      mid(1, {0, P}, {1, N}),
      mid(0, {-1, P}, {0, P}),
      mid(-1, {-2, N}, {-1, P}),
      mid(-2, {-3, N}, {-2, P}),
      bottom({-3, N})}},
    // prev = +1
    {{top({2, N}),
      mid(2, {1, P}, {2, N}),
      mid(1, {0, P}, {1, P}),
      mid(0, {-1, N}, {0, P}),
      mid(-1, {-2, N}, {-1, N}),
      mid(-2, {-3, N}, {-2, N}),
      bottom({-3, N})}},
    // prev = +2
    {{top({2, P}),
      mid(2, {1, P}, {2, P}),
      mid(1, {0, N}, {1, P}),
      mid(0, {-1, N}, {0, N}),
      mid(-1, {-2, N}, {-1, N}),
      mid(-2, {-3, N}, {-2, N}),
      bottom({-3, N})}},
    // prev = +3
    {{top({2, M}),
      mid(2, {1, P}, {2, M}),
      mid(1, {0, N}, {1, P}),
      mid(0, {-1, N}, {0, N}),
      mid(-1, {-2, N}, {-1, N}),
      mid(-2, {-3, N}, {-2, N}),
      bottom({-3, N})}},
}};
// clang-format on

}  // namespace

const Table& table_for(int prev) {
    if (prev < -3 || prev > 3) throw std::out_of_range("PWM level must lie in -3..3");
    return kTables[static_cast<std::size_t>(prev + 3)];
}

double bound_value(const Bound& b, double u_span, double kappa) {
    double c = 1.0;
    if (b.offset == Offset::plus_kappa) c = 1.0 + kappa;
    if (b.offset == Offset::minus_kappa) c = 1.0 - kappa;
    return b.level * u_span + c * u_span / 2.0;
}

}  // namespace pwm

int quantize_level(double u_c, int prev_level, const PwmConfig& cfg) {
    const double span = cfg.u_span();
    for (const pwm::Row& row : pwm::table_for(prev_level)) {
        const bool above = !row.lo || u_c >= pwm::bound_value(*row.lo, span, cfg.kappa);
        const bool below = !row.hi || u_c < pwm::bound_value(*row.hi, span, cfg.kappa);
        if (above && below) return row.output;
    }
    // rows tile the real line whenever kappa < 1; a NaN command lands here
    return prev_level;
}

PwmQuantizer::PwmQuantizer(PwmConfig cfg) : cfg_(cfg) {
    if (!(cfg_.u_max > 0.0)) throw InvalidStateError("PWM u_max must be positive");
    if (!(cfg_.kappa >= 0.0 && cfg_.kappa < 1.0)) throw InvalidStateError("PWM kappa must lie in [0, 1)");
}

double PwmQuantizer::quantize_axis(int axis, double u_c) {
    int& prev = prev_.at(static_cast<std::size_t>(axis));
    prev = quantize_level(u_c, prev, cfg_);
    return prev * cfg_.u_span();
}

Vec3 PwmQuantizer::quantize(const Vec3& u_c) {
    return {quantize_axis(0, u_c.x()), quantize_axis(1, u_c.y()), quantize_axis(2, u_c.z())};
}

}  // namespace mtq
