/**
 * @file detect.hpp
 * @brief End-to-end particle detection: estimate, threshold at the midpoint, cluster, filter
 *
 * Pipeline order is fixed: downsample passes, optional max-normalization,
 * intensity estimation, thresholding at (a_hat + b_hat) / 2, black-cluster
 * extraction on the triangular lattice, size filtering. A kept cluster is
 * reported as a particle.
 */
#pragma once

#include "scanpick/image.hpp"
#include "scanpick/percolation.hpp"
#include "scanpick/scan_estimator.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace scanpick {

/// Defaults reproduce the cryo-EM setting: two 2x downsamplings, max-normalization,
/// background window 65, particle window 9, clusters under 30 pixels discarded.
struct DetectParams {
    int phi0 = 65;
    int phi1 = 9;
    std::size_t min_cluster_pixels = 30;
    int downsample_passes = 2;
    bool normalize = true;

    /// Throws InputDomainError when an invariant is broken.
    void validate() const;
};

enum class Decision { ParticlesFound, NoParticles };

const char* to_string(Decision d);

struct DetectionReport {
    IntensityEstimates estimates;
    double theta = 0.0;
    BinaryImage thresholded{1, 1};
    std::vector<Cluster> clusters_kept;
    std::size_t clusters_total = 0;
    Decision decision = Decision::NoParticles;
    DetectParams params;
    int input_width = 0;
    int input_height = 0;
    int width = 0;   ///< after preprocessing; cluster coordinates live here
    int height = 0;
};

/// Midpoint of the two estimates. Throws DegenerateEstimatesError unless a_hat < b_hat.
double compute_threshold(double a_hat, double b_hat);

/// Downsampling and normalization as configured in params.
Micrograph preprocess(const Micrograph& img, const DetectParams& params);

struct ThresholdedClusters {
    BinaryImage thresholded;
    std::vector<Cluster> kept;
    std::size_t total = 0;
};

/// Binarize at theta, extract clusters, keep those of at least min_pixels.
ThresholdedClusters threshold_and_cluster(const Micrograph& img, double theta,
                                          std::size_t min_pixels);

DetectionReport run_detection(const Micrograph& img, const DetectParams& params = {});

/// Ground-truth particle: its pixels in the analysed image's coordinates.
struct ParticleMask {
    std::vector<Pixel> pixels;
};

struct MatchSummary {
    std::vector<bool> detected;  ///< one flag per truth mask
    std::size_t detected_count = 0;
    std::size_t false_clusters = 0;  ///< kept clusters touching no mask

    bool all_detected() const { return detected_count == detected.size(); }
};

/// A particle counts as detected when some kept cluster shares a pixel with its mask.
/// Merged clusters may therefore detect several particles at once.
MatchSummary match_detections(const std::vector<Cluster>& kept, int width, int height,
                              const std::vector<ParticleMask>& truth);
MatchSummary match_detections(const DetectionReport& report,
                              const std::vector<ParticleMask>& truth);

/// Rounds to 6 significant digits, the precision used in every emitted report.
double round_sig6(double v);

/// JSON with fixed key order and 6-significant-digit floats.
std::string report_to_json(const DetectionReport& report);

}  // namespace scanpick
