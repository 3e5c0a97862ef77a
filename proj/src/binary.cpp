#include "corrspec/binary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrspec/error.hpp"

namespace corrspec::binary {

namespace {

constexpr double kAmpMargin = 1e-9;
constexpr int kMaxBits = 30;

void check_amplitude(double a, const char* name) {
    if (!(a > kAmpMargin) || !(a < 1.0 - kAmpMargin)) {
        fail(Err::DegenerateMarginal, std::string(name) + " amplitude must lie strictly inside (0, 1)");
    }
}

} // namespace

XiValues xi_values(double a, double b) {
    check_amplitude(a, "first");
    check_amplitude(b, "second");
    const double a2 = a * a, b2 = b * b;
    XiValues v;
    v.denom = a * b * std::sqrt((1.0 - a2) * (1.0 - b2));
    v.xi1 = std::min(a2, b2) * std::min(1.0 - a2, 1.0 - b2) / v.denom;
    v.xi2 = std::min(1.0 - a2, b2) * std::min(a2, 1.0 - b2) / v.denom;
    v.xi3 = std::min(a2, 1.0 - a2) * std::min(b2, 1.0 - b2) / v.denom;
    return v;
}

bool contains(const Interval& iv, double s, double slack) {
    return s >= iv.lo - slack && s <= iv.hi + slack;
}

BoundSet bounds(double a, double b, double lambda2) {
    if (lambda2 < -tol::kSpectral || lambda2 > 1.0 + tol::kSpectral) {
        fail(Err::InvalidTilde, "lambda2 must lie in [0, 1]");
    }
    const double l2 = std::clamp(lambda2, 0.0, 1.0);
    const XiValues xi = xi_values(a, b);
    BoundSet s;
    s.outer1 = {-std::min(xi.xi2, l2), std::min(xi.xi1, l2)};
    s.outer2 = {-std::min(xi.xi2, l2 * (1.0 + xi.xi2) / 2.0),
                std::min(xi.xi1, l2 * (1.0 + xi.xi1) / 2.0)};
    s.inner = {-l2 * xi.xi3, l2 * xi.xi3};
    return s;
}

std::vector<CurveRow> curve_data(int grid, bool full_grid, double lambda2) {
    if (grid < 1 || grid > 10000) fail(Err::SizeOverflow, "grid size must be in [1, 10000]");
    std::vector<CurveRow> rows;
    const double step = 1.0 / (grid + 1);
    if (full_grid) {
        rows.reserve(static_cast<std::size_t>(grid) * grid);
        for (int i = 1; i <= grid; ++i) {
            for (int j = 1; j <= grid; ++j) {
                const double a = i * step, b = j * step;
                rows.push_back({a, b, bounds(a, b, lambda2)});
            }
        }
    } else {
        rows.reserve(static_cast<std::size_t>(grid));
        for (int i = 1; i <= grid; ++i) {
            const double a = i * step;
            rows.push_back({a, a, bounds(a, a, lambda2)});
        }
    }
    return rows;
}

namespace {

// |A| from an amplitude: 2^n a^2, required integral
long long cell_count(double a, int n, const char* name) {
    const double scaled = std::ldexp(a * a, n);
    const double nearest = std::round(scaled);
    if (std::abs(scaled - nearest) > 1e-9) {
        fail(Err::NonIntegralCount,
             std::string(name) + " one-mass times 2^n is not an integer: " + std::to_string(scaled));
    }
    return static_cast<long long>(nearest);
}

} // namespace

ExtremePoint extreme_point_max(double a, double b, int n) {
    check_amplitude(a, "first");
    check_amplitude(b, "second");
    if (n < 1 || n > kMaxBits) fail(Err::SizeOverflow, "bit count must be in [1, 30]");
    const long long cells = 1LL << n;
    const long long k1 = cell_count(a, n, "first");
    const long long k2 = cell_count(b, n, "second");
    if (k1 < 1 || k1 > cells - 1 || k2 < 1 || k2 > cells - 1) {
        fail(Err::DegenerateMarginal, "indicator sets must be nonempty proper subsets");
    }

    const double a2 = a * a, b2 = b * b;
    const double denom = a * b * std::sqrt((1.0 - a2) * (1.0 - b2));
    const double per_cell = 1.0 / (static_cast<double>(cells) * denom);
    const double shift = a2 * b2 / denom;

    const long long t_lo = std::max(0LL, k1 + k2 - cells);
    const long long t_hi = std::min(k1, k2);
    ExtremePoint best{t_lo, t_lo * per_cell - shift};
    for (long long t = t_lo + 1; t <= t_hi; ++t) {
        const double val = t * per_cell - shift;
        if (val > best.value) best = {t, val};
    }
    return best;
}

JointDist extreme_joint(double a, double b, int n, long long overlap) {
    check_amplitude(a, "first");
    check_amplitude(b, "second");
    if (n < 1 || n > kMaxBits) fail(Err::SizeOverflow, "bit count must be in [1, 30]");
    const long long cells = 1LL << n;
    const long long k1 = cell_count(a, n, "first");
    const long long k2 = cell_count(b, n, "second");
    if (overlap < std::max(0LL, k1 + k2 - cells) || overlap > std::min(k1, k2)) {
        fail(Err::ZeroEvent, "overlap outside the feasible range");
    }
    const double unit = 1.0 / static_cast<double>(cells);
    JointDist j;
    j.rows = prob::indexed_alphabet(2);
    j.cols = prob::indexed_alphabet(2);
    j.mass.resize(2, 2);
    j.mass(1, 1) = overlap * unit;
    j.mass(1, 0) = (k1 - overlap) * unit;
    j.mass(0, 1) = (k2 - overlap) * unit;
    j.mass(0, 0) = (cells - k1 - k2 + overlap) * unit;
    prob::validate_joint(j);
    return j;
}

} // namespace corrspec::binary
