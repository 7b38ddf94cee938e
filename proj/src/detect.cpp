#include "scanpick/detect.hpp"

#include "scanpick/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace scanpick {

void DetectParams::validate() const {
    if (phi0 < 1 || phi1 < 1) throw InputDomainError("window sides must be at least 1");
    if (min_cluster_pixels < 1) throw InputDomainError("min_cluster_pixels must be at least 1");
    if (downsample_passes < 0) throw InputDomainError("downsample_passes must be non-negative");
}

const char* to_string(Decision d) {
    return d == Decision::ParticlesFound ? "ParticlesFound" : "NoParticles";
}

double compute_threshold(double a_hat, double b_hat) {
    if (!(a_hat < b_hat)) {
        throw DegenerateEstimatesError("background estimate " + std::to_string(a_hat) +
                                       " is not below particle estimate " +
                                       std::to_string(b_hat) + "; no midpoint threshold");
    }
    return 0.5 * (a_hat + b_hat);
}

Micrograph preprocess(const Micrograph& img, const DetectParams& params) {
    params.validate();
    Micrograph out = img;
    for (int i = 0; i < params.downsample_passes; ++i) {
        if (out.width() < 2 || out.height() < 2) {
            throw InputDomainError("image too small for " +
                                   std::to_string(params.downsample_passes) +
                                   " downsampling passes");
        }
        out = downsample2x(out);
    }
    if (params.normalize) out = normalize_max1(out);
    return out;
}

ThresholdedClusters threshold_and_cluster(const Micrograph& img, double theta,
                                          std::size_t min_pixels) {
    ThresholdedClusters out{binarize(img, theta), {}, 0};
    auto all = black_clusters(out.thresholded);
    out.total = all.size();
    out.kept = filter_clusters(all, min_pixels);
    return out;
}

DetectionReport run_detection(const Micrograph& img, const DetectParams& params) {
    const Micrograph work = preprocess(img, params);
    const int needed = std::max(params.phi0, params.phi1);
    if (std::min(work.width(), work.height()) < needed) {
        throw InputDomainError("image is " + std::to_string(work.width()) + "x" +
                               std::to_string(work.height()) +
                               " after preprocessing, too small for window side " +
                               std::to_string(needed));
    }

    DetectionReport report;
    report.params = params;
    report.input_width = img.width();
    report.input_height = img.height();
    report.width = work.width();
    report.height = work.height();
    report.estimates = estimate_intensities(work, params.phi0, params.phi1);
    report.theta = compute_threshold(report.estimates.a_hat, report.estimates.b_hat);

    auto tc = threshold_and_cluster(work, report.theta, params.min_cluster_pixels);
    report.thresholded = std::move(tc.thresholded);
    report.clusters_kept = std::move(tc.kept);
    report.clusters_total = tc.total;
    report.decision =
        report.clusters_kept.empty() ? Decision::NoParticles : Decision::ParticlesFound;
    return report;
}

MatchSummary match_detections(const std::vector<Cluster>& kept, int width, int height,
                              const std::vector<ParticleMask>& truth) {
    // Owner map: index of the particle covering each pixel, -1 for background.
    std::vector<int> owner(static_cast<std::size_t>(width) * height, -1);
    for (std::size_t k = 0; k < truth.size(); ++k) {
        for (const auto& px : truth[k].pixels) {
            if (px.row < 0 || px.col < 0 || px.row >= height || px.col >= width) {
                throw InputDomainError("truth mask pixel (" + std::to_string(px.row) + ", " +
                                       std::to_string(px.col) + ") lies outside the " +
                                       std::to_string(width) + "x" + std::to_string(height) +
                                       " image");
            }
            owner[static_cast<std::size_t>(px.row) * width + px.col] = static_cast<int>(k);
        }
    }

    MatchSummary summary;
    summary.detected.assign(truth.size(), false);
    for (const auto& cl : kept) {
        bool touches = false;
        for (const auto& px : cl.pixels) {
            if (px.row < 0 || px.col < 0 || px.row >= height || px.col >= width) {
                throw InputDomainError("cluster pixel outside the image");
            }
            const int k = owner[static_cast<std::size_t>(px.row) * width + px.col];
            if (k >= 0) {
                touches = true;
                summary.detected[static_cast<std::size_t>(k)] = true;
            }
        }
        if (!touches) ++summary.false_clusters;
    }
    for (const bool d : summary.detected) summary.detected_count += d ? 1 : 0;
    return summary;
}

MatchSummary match_detections(const DetectionReport& report,
                              const std::vector<ParticleMask>& truth) {
    return match_detections(report.clusters_kept, report.width, report.height, truth);
}

double round_sig6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

std::string report_to_json(const DetectionReport& report) {
    using nlohmann::ordered_json;
    const auto window = [](const WindowStats& w) {
        ordered_json j;
        j["row"] = w.row;
        j["col"] = w.col;
        j["side"] = w.side;
        j["mean"] = round_sig6(w.mean);
        return j;
    };

    ordered_json j;
    j["dims"] = {{"width", report.width}, {"height", report.height}};
    j["input_dims"] = {{"width", report.input_width}, {"height", report.input_height}};
    j["params"] = {
        {"phi0", report.params.phi0},
        {"phi1", report.params.phi1},
        {"min_cluster_pixels", report.params.min_cluster_pixels},
        {"downsample_passes", report.params.downsample_passes},
        {"normalize", report.params.normalize},
    };
    j["a_hat"] = round_sig6(report.estimates.a_hat);
    j["b_hat"] = round_sig6(report.estimates.b_hat);
    j["theta"] = round_sig6(report.theta);
    j["low_window"] = window(report.estimates.low);
    j["high_window"] = window(report.estimates.high);
    j["clusters_total"] = report.clusters_total;
    ordered_json clusters = ordered_json::array();
    for (const auto& cl : report.clusters_kept) {
        ordered_json c;
        c["id"] = cl.id;
        c["pixel_count"] = cl.pixel_count;
        c["bbox"] = {cl.bbox.min_row, cl.bbox.min_col, cl.bbox.max_row, cl.bbox.max_col};
        clusters.push_back(std::move(c));
    }
    j["clusters"] = std::move(clusters);
    j["decision"] = to_string(report.decision);
    return j.dump(2) + "\n";
}

}  // namespace scanpick
