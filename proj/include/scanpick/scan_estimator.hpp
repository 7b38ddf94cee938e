/**
 * @file scan_estimator.hpp
 * @brief Spatial scan estimators of background and particle intensity
 *
 * Every side x side window (stride 1) is scored by its sum. The window with the
 * smallest sum estimates the background level, the one with the largest sum
 * estimates the particle level. Both scans run in O(width * height) on a
 * summed-area table.
 *
 * Ties: two sums are treated as equal when they differ by less than the
 * rounding budget of the summed-area table (a few ulps of the image's total
 * absolute mass). Among tied windows the smallest (row, col) wins.
 */
#pragma once

#include "scanpick/image.hpp"

namespace scanpick {

struct IntensityEstimates {
    double a_hat = 0.0;  ///< background (lower) intensity
    double b_hat = 0.0;  ///< particle (higher) intensity
    int phi0 = 0;        ///< window side used for a_hat
    int phi1 = 0;        ///< window side used for b_hat
    WindowStats low;     ///< argmin window
    WindowStats high;    ///< argmax window
};

WindowStats scan_min_window(const IntegralImage& ii, int side);
WindowStats scan_max_window(const IntegralImage& ii, int side);
WindowStats scan_min_window(const Micrograph& img, int side);
WindowStats scan_max_window(const Micrograph& img, int side);

double estimate_lower(const Micrograph& img, int phi0);
double estimate_upper(const Micrograph& img, int phi1);

/// Both scans over one summed-area table.
IntensityEstimates estimate_intensities(const Micrograph& img, int phi0, int phi1);

/// Whole-image average. Biased towards b whenever particles cover a non-negligible share of the image.
double naive_mean(const Micrograph& img);

}  // namespace scanpick
