/**
 * @file acceptance.cpp
 * @brief Acceptance gate: one test per criterion, each printing a single
 *        "[criterion N] PASS|FAIL: ..." line with the measured numbers.
 */

#include "scanpick/detect.hpp"
#include "scanpick/monte_carlo.hpp"
#include "scanpick/scan_estimator.hpp"
#include "scanpick/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

namespace scanpick {
namespace {

int worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void verdict(int criterion, bool pass, const std::string& detail) {
    std::printf("[criterion %d] %s: %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    EXPECT_TRUE(pass) << "criterion " << criterion << ": " << detail;
}

std::string fmt(const char* pattern, auto... values) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, values...);
    return buf;
}

// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion1_OracleEquivalence) {
    const Stopwatch clock;
    Rng sizes(2024);
    long windows = 0;
    long sum_mismatch = 0;
    long location_mismatch = 0;
    for (int k = 0; k < 200; ++k) {
        const int w = sizes.uniform_int(8, 32);
        const int h = sizes.uniform_int(8, 32);
        Micrograph img = testing::random_image(w, h, derive_seed(7, k));
        if (k % 2 == 1) {
            // Coarse levels create exact plateaus that exercise the tie-break.
            std::vector<double> px(img.pixels().begin(), img.pixels().end());
            for (double& v : px) v = std::floor(v * 3.0) / 2.0;
            img = Micrograph(w, h, std::move(px));
        }
        const IntegralImage ii = build_integral(img);
        for (int side = 1; side <= std::min(w, h); ++side) {
            for (int r = 0; r + side <= h; ++r) {
                for (int c = 0; c + side <= w; ++c) {
                    ++windows;
                    if (std::abs(window_sum(ii, r, c, side) - testing::direct_sum(img, r, c, side)) > 1e-9) {
                        ++sum_mismatch;
                    }
                }
            }
            for (const bool minimum : {true, false}) {
                const auto brute = testing::brute_extreme(img, side, minimum);
                const auto got = minimum ? scan_min_window(ii, side) : scan_max_window(ii, side);
                if (got.row != brute.row || got.col != brute.col) ++location_mismatch;
            }
        }
    }
    const double t = clock.seconds();
    verdict(1, sum_mismatch == 0 && location_mismatch == 0 && t < 10.0,
            fmt("%ld windows, %ld sum mismatches, %ld argmin/argmax mismatches, %.2f s (limit 10 s)",
                windows, sum_mismatch, location_mismatch, t));
}

// ---------------------------------------------------------------------------

ConsistencyResult consistency_run() {
    return mc_consistency(ConsistencyFamily{}, NoiseModel::uniform(0.2), {16, 32, 64},
                          {100, 11, worker_count()});
}

TEST(Acceptance, Criterion2_EstimatorConsistency) {
    const Stopwatch clock;
    const auto r = consistency_run();
    const double t = clock.seconds();
    const double a_err = r.lower_error[2].median;
    const double b_err = r.upper_error.median;
    verdict(2, a_err < 0.02 && b_err < 0.05 && t < 60.0,
            fmt("median |a_hat-a| = %.5f at phi0=64 (< 0.02), median |b_hat-b| = %.5f at phi1=%d "
                "(< 0.05), coverage median %.3f, %.1f s (limit 60 s)",
                a_err, b_err, r.phi1, r.coverage.median, t));
}

TEST(Acceptance, Criterion3_RateTrend) {
    const Stopwatch clock;
    const auto r = consistency_run();
    const double t = clock.seconds();
    const double e16 = r.lower_error[0].median;
    const double e32 = r.lower_error[1].median;
    const double e64 = r.lower_error[2].median;
    const double ratio = e32 / e64;
    verdict(3, e64 < e32 && e32 < e16 && ratio >= 1.5 && ratio <= 3.0 && t < 120.0,
            fmt("median errors phi0=16: %.5f, 32: %.5f, 64: %.5f; 32->64 ratio %.3f (in [1.5, 3]), "
                "%.1f s (limit 120 s)",
                e16, e32, e64, ratio, t));
}

TEST(Acceptance, Criterion4_NaiveMeanInconsistency) {
    const auto r = consistency_run();
    const double naive = r.naive_error.median;
    const double scan = r.lower_error[2].median;
    verdict(4, naive > 0.1 && scan < 0.02 && naive >= 5.0 * scan,
            fmt("naive median error %.5f (> 0.1), scan median error %.5f (< 0.02), separation %.1fx (>= 5x)",
                naive, scan, naive / scan));
}

// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion5_PercolationPhase) {
    const Stopwatch clock;
    const auto hi = mc_percolation_phase(256, 0.6, {200, 5, worker_count()});
    const auto lo = mc_percolation_phase(256, 0.4, {200, 6, worker_count()});
    const double t = clock.seconds();
    const auto share = [](const std::vector<double>& v, auto pred) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), pred)) / static_cast<double>(v.size());
    };
    const double hi_share = share(hi.largest_fraction, [](double f) { return f >= 0.10; });
    const double lo_share = share(lo.largest_fraction, [](double f) { return f < 0.05; });
    verdict(5, hi_share >= 0.99 && lo_share >= 0.99 && t < 60.0,
            fmt("p=0.6: %.1f%% of trials with largest cluster >= 10%% (median %.3f); p=0.4: %.1f%% "
                "with < 5%% (max %.5f); %.1f s (limit 60 s)",
                100 * hi_share, hi.summary.median, 100 * lo_share, lo.summary.max, t));
}

// ---------------------------------------------------------------------------

DetectParams synthetic_params() {
    DetectParams p;
    p.phi0 = 64;
    p.phi1 = 12;
    p.min_cluster_pixels = 30;
    p.downsample_passes = 0;
    p.normalize = false;
    return p;
}

TEST(Acceptance, Criterion6_DetectionPower) {
    const Stopwatch clock;
    const auto r = mc_detection(DetectionFamily{}, NoiseModel::uniform(0.25), synthetic_params(),
                                {100, 13, worker_count()});
    const double t = clock.seconds();
    verdict(6, r.all_detected_rate >= 0.95 && t < 120.0,
            fmt("all-particles-detected fraction %.3f over %d trials (>= 0.95), mean detected share "
                "%.3f, degenerate %d, %.1f s (limit 120 s)",
                r.all_detected_rate, r.trials, r.mean_detected_fraction, r.degenerate_trials, t));
}

TEST(Acceptance, Criterion7_FalseAlarmDecay) {
    const Stopwatch clock;
    const DetectionFamily family;
    const auto noise = NoiseModel::uniform(0.25);
    const double theta = threshold_for_black_fraction(family.a, noise, 0.25);
    const auto rows = mc_false_alarm({128, 256, 512}, family.a, noise, theta, 30,
                                     {200, 17, worker_count()});
    const double t = clock.seconds();
    bool pass = t < 180.0;
    std::string detail = fmt("theta %.4f (black fraction 0.25):", theta);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pass = pass && rows[i].false_alarm_rate <= 0.01;
        if (i > 0) pass = pass && rows[i].false_alarm_rate <= rows[i - 1].false_alarm_rate;
        detail += fmt(" N=%d rate %.3f (median largest %.0f px, observed black %.4f);", rows[i].n,
                      rows[i].false_alarm_rate, rows[i].median_largest_cluster,
                      rows[i].observed_black_fraction);
    }
    detail += fmt(" need <= 0.01 and non-increasing, %.1f s (limit 180 s)", t);
    verdict(7, pass, detail);
}

// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion8_BoundEvaluator) {
    const auto single = [](long s1, long excess, double sigma) {
        const std::vector<long> s{s1};
        const std::vector<long> e{excess};
        return misselection_bound(s, e, 1.0, sigma, 1.0).raw;
    };
    const double expected = std::exp(-18.75);
    const double got = single(100, 100, 1.0);
    const double rel = std::abs(got - expected) / expected;

    const std::vector<double> sigmas{0.25, 0.5, 1.0, 2.0, 4.0};
    const std::vector<long> excesses{0, 50, 100, 500, 2000};
    int violations = 0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        for (std::size_t j = 0; j < excesses.size(); ++j) {
            const double v = single(100, excesses[j], sigmas[i]);
            if (i + 1 < sigmas.size() && single(100, excesses[j], sigmas[i + 1]) < v) ++violations;
            if (j + 1 < excesses.size() && single(100, excesses[j + 1], sigmas[i]) < v) ++violations;
        }
    }
    verdict(8, rel <= 1e-12 && violations == 0,
            fmt("bound %.6g vs exp(-18.75) = %.6g, relative error %.2e (<= 1e-12); %d monotonicity "
                "violations on the 5x5 sigma/excess grid",
                got, expected, rel, violations));
}

// ---------------------------------------------------------------------------

TEST(Acceptance, Criterion9_PipelineInvariants) {
    const DetectionFamily family;
    const auto noise = NoiseModel::uniform(0.25);
    const auto params = synthetic_params();
    int shift_failures = 0;
    int midpoint_failures = 0;
    int determinism_failures = 0;
    const int scenes = 10;
    for (int k = 0; k < scenes; ++k) {
        Rng layout(derive_seed(19, 2 * k));
        const auto scene = generate_scene(sample_detection_scene(family, layout), noise,
                                          derive_seed(19, 2 * k + 1));
        const auto base = run_detection(scene.image, params);
        const auto moved = run_detection(shifted(scene.image, 0.17), params);
        if (!(base.thresholded == moved.thresholded && base.clusters_kept == moved.clusters_kept &&
              base.decision == moved.decision)) {
            ++shift_failures;
        }
        for (const auto* r : {&base, &moved}) {
            if (r->theta != 0.5 * (r->estimates.a_hat + r->estimates.b_hat)) ++midpoint_failures;
        }
        if (report_to_json(base) != report_to_json(run_detection(scene.image, params))) {
            ++determinism_failures;
        }
    }
    verdict(9, shift_failures == 0 && midpoint_failures == 0 && determinism_failures == 0,
            fmt("%d scenes: %d shift-equivariance failures (+0.17), %d midpoint mismatches, %d "
                "non-identical repeated reports",
                scenes, shift_failures, midpoint_failures, determinism_failures));
}

}  // namespace
}  // namespace scanpick
