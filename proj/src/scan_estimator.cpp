#include "scanpick/scan_estimator.hpp"

#include "scanpick/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace scanpick {

namespace {

enum class Extremum { Min, Max };

void check_side(const IntegralImage& ii, int side) {
    if (side < 1 || side > std::min(ii.width(), ii.height())) {
        throw InputDomainError("window side " + std::to_string(side) + " does not fit a " +
                               std::to_string(ii.width()) + "x" + std::to_string(ii.height()) +
                               " image");
    }
}

double raw_sum(const IntegralImage& ii, int r, int c, int side) {
    return ii.entry(r + side, c + side) - ii.entry(r, c + side) - ii.entry(r + side, c) +
           ii.entry(r, c);
}

WindowStats scan(const IntegralImage& ii, int side, Extremum kind) {
    check_side(ii, side);
    const int rows = ii.height() - side + 1;
    const int cols = ii.width() - side + 1;
    const double sign = kind == Extremum::Min ? 1.0 : -1.0;

    // Pass 1: extreme value. Pass 2: first window within the rounding budget of it.
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            best = std::min(best, sign * raw_sum(ii, r, c, side));
        }
    }
    const double tol = 16.0 * std::numeric_limits<double>::epsilon() * ii.absolute_mass();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (sign * raw_sum(ii, r, c, side) <= best + tol) {
                return window_stats(ii, r, c, side);
            }
        }
    }
    // Unreachable: the extreme window itself satisfies the test.
    return window_stats(ii, 0, 0, side);
}

}  // namespace

WindowStats scan_min_window(const IntegralImage& ii, int side) {
    return scan(ii, side, Extremum::Min);
}

WindowStats scan_max_window(const IntegralImage& ii, int side) {
    return scan(ii, side, Extremum::Max);
}

WindowStats scan_min_window(const Micrograph& img, int side) {
    return scan_min_window(build_integral(img), side);
}

WindowStats scan_max_window(const Micrograph& img, int side) {
    return scan_max_window(build_integral(img), side);
}

double estimate_lower(const Micrograph& img, int phi0) {
    return scan_min_window(img, phi0).mean;
}

double estimate_upper(const Micrograph& img, int phi1) {
    return scan_max_window(img, phi1).mean;
}

IntensityEstimates estimate_intensities(const Micrograph& img, int phi0, int phi1) {
    const IntegralImage ii = build_integral(img);
    IntensityEstimates est;
    est.phi0 = phi0;
    est.phi1 = phi1;
    est.low = scan_min_window(ii, phi0);
    est.high = scan_max_window(ii, phi1);
    est.a_hat = est.low.mean;
    est.b_hat = est.high.mean;
    return est;
}

double naive_mean(const Micrograph& img) {
    const auto px = img.pixels();
    return std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
}

}  // namespace scanpick
