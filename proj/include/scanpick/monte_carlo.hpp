/**
 * @file monte_carlo.hpp
 * @brief Seeded Monte Carlo harnesses and the window-misselection bound
 *
 * Trial k of every harness draws its data from derive_seed(seed, k), so
 * results do not depend on the number of worker threads.
 */
#pragma once

#include "scanpick/detect.hpp"
#include "scanpick/synth.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scanpick {

struct McOptions {
    int trials = 100;
    std::uint64_t seed = 1;
    int jobs = 1;
};

// ---------------------------------------------------------------------------
// Misselection bound
// ---------------------------------------------------------------------------

struct BoundResult {
    double raw = 0.0;      ///< the sum itself, may exceed 1
    double clipped = 0.0;  ///< min(raw, 1)
};

/// Upper bound on the probability that the minimum-sum scan prefers some
/// window K over an all-noise window K0:
///
///   sum_K exp(-C1 s1^2 / (C2 excess + C3 s1)),
///   C1 = 3 (b-a)^2, C2 = 12 sigma^2, C3 = 4 M (b-a),
///
/// where s1 counts the particle pixels of K and excess = |K \ K0|. A term with
/// s1 = 0 contributes exp(0) = 1. Throws InputDomainError on negative counts,
/// unequal list lengths or non-positive contrast, sigma or M.
BoundResult misselection_bound(std::span<const long> s1, std::span<const long> excess,
                               double contrast, double sigma, double bound_m);

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct ErrorSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double q90 = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantiles (type 7).
ErrorSummary summarize(std::vector<double> values);

/// Shortest round-trip rendering used in every CSV table.
std::string format_number(double v);

// ---------------------------------------------------------------------------
// Estimator consistency
// ---------------------------------------------------------------------------

struct ConsistencyResult {
    std::vector<int> phi0_grid;
    std::vector<ErrorSummary> lower_error;  ///< |a_hat - a|, one entry per phi0
    ErrorSummary upper_error;               ///< |b_hat - b| at the family's phi1
    ErrorSummary naive_error;               ///< |naive_mean - a|
    ErrorSummary coverage;                  ///< particle share of pixels
    int phi1 = 0;
    int trials = 0;
};

ConsistencyResult mc_consistency(const ConsistencyFamily& family, const NoiseModel& noise,
                                 const std::vector<int>& phi0_grid, const McOptions& options);

/// Columns: estimator,window,trials,mean,median,q25,q75,q90,max
std::string consistency_csv(const ConsistencyResult& result);

// ---------------------------------------------------------------------------
// Detection power and false alarms
// ---------------------------------------------------------------------------

struct DetectionResult {
    int trials = 0;
    int particles = 0;
    double all_detected_rate = 0.0;        ///< trials where every particle was hit
    double mean_detected_fraction = 0.0;   ///< average share of particles hit
    double false_cluster_trial_rate = 0.0; ///< trials with at least one unmatched kept cluster
    double mean_false_clusters = 0.0;
    int degenerate_trials = 0;             ///< trials aborted because a_hat >= b_hat
};

/// Full pipeline on scenes from the family. params.downsample_passes and
/// params.normalize are honoured as given.
DetectionResult mc_detection(const DetectionFamily& family, const NoiseModel& noise,
                             const DetectParams& params, const McOptions& options);

struct FalseAlarmRow {
    int n = 0;
    int trials = 0;
    double theta = 0.0;
    double black_fraction = 0.0;      ///< model P(a + noise >= theta)
    double observed_black_fraction = 0.0;
    double false_alarm_rate = 0.0;    ///< trials with any kept cluster
    double median_largest_cluster = 0.0;
    std::size_t max_largest_cluster = 0;
};

/// Pure-noise n x n images at background a, thresholded at a fixed theta.
std::vector<FalseAlarmRow> mc_false_alarm(const std::vector<int>& sizes, double a,
                                          const NoiseModel& noise, double theta,
                                          std::size_t min_cluster_pixels,
                                          const McOptions& options);

/// Threshold at which background pixels are black with the given probability.
double threshold_for_black_fraction(double a, const NoiseModel& noise, double fraction);

std::string detection_csv(const DetectionResult& result);
std::string false_alarm_csv(const std::vector<FalseAlarmRow>& rows);

// ---------------------------------------------------------------------------
// Site percolation phase check
// ---------------------------------------------------------------------------

struct PhaseRow {
    int n = 0;
    double p = 0.0;
    int trials = 0;
    std::vector<double> largest_fraction;  ///< per trial: largest cluster / n^2
    ErrorSummary summary;
};

PhaseRow mc_percolation_phase(int n, double p, const McOptions& options);

/// Columns: p,n,trials,mean,median,q25,q75,q90,max,share_ge_0.10,share_lt_0.05
std::string phase_csv(const std::vector<PhaseRow>& rows);

}  // namespace scanpick
