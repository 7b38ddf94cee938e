/**
 * @file synth.hpp
 * @brief Synthetic two-level scenes with bounded symmetric noise
 *
 * A scene is an n x n image whose true value is b on particle pixels and a
 * elsewhere, observed through i.i.d. mean-zero noise bounded by M. Every
 * scene carries an explicitly placed, verified all-noise square of side phi0,
 * and every particle must contain a full phi1 x phi1 square.
 */
#pragma once

#include "scanpick/detect.hpp"
#include "scanpick/image.hpp"
#include "scanpick/percolation.hpp"
#include "scanpick/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scanpick {

enum class NoiseKind { Uniform, TruncatedGaussian };

/// Symmetric, mean-zero, bounded noise law.
class NoiseModel {
public:
    /// Uniform on [-half_width, half_width]. half_width = 0 gives noiseless scenes.
    static NoiseModel uniform(double half_width);
    /// N(0, sigma_raw^2) conditioned on |x| <= bound, sampled by rejection.
    static NoiseModel truncated_gaussian(double sigma_raw, double bound);

    NoiseKind kind() const noexcept { return kind_; }
    /// Almost-sure bound M on |noise|.
    double bound() const noexcept { return bound_; }
    double sigma_raw() const noexcept { return sigma_raw_; }
    /// Exact variance of the (possibly truncated) law.
    double variance() const noexcept { return variance_; }
    double sigma() const;

    double sample(Rng& rng) const;

    /// P(noise >= t).
    double exceedance(double t) const;
    /// The t with exceedance(t) = fraction, for fraction in (0, 1).
    double upper_quantile(double fraction) const;

private:
    NoiseModel(NoiseKind kind, double bound, double sigma_raw, double variance)
        : kind_(kind), bound_(bound), sigma_raw_(sigma_raw), variance_(variance) {}

    NoiseKind kind_;
    double bound_;
    double sigma_raw_;
    double variance_;
};

/// Binary shape in its own bounding box.
struct ShapeMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits;

    bool at(int r, int c) const { return bits[static_cast<std::size_t>(r) * width + c] != 0; }
    std::size_t pixel_count() const;
};

enum class ShapeKind { Square, Disc, LShape, GappedAnnulus };

/// size is the square side, disc radius, L arm length or annulus outer radius.
/// thickness applies to LShape and GappedAnnulus, gap (rows cut out of the
/// right side of the ring) to GappedAnnulus only.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::Square;
    int size = 1;
    int thickness = 0;
    int gap = 0;
};

/// Deterministic mask. LShape and GappedAnnulus are nonconvex. Throws InputDomainError
/// for parameters that cannot form the shape (non-positive size, thickness above size...).
ShapeMask shape_library(const ShapeSpec& spec);

/// Side of the largest all-ones square inside the mask.
int largest_inscribed_square(const ShapeMask& mask);

struct PlacedShape {
    ShapeSpec shape;
    int row = 0;  ///< top-left of the shape's bounding box in the scene
    int col = 0;
};

struct NoiseSquare {
    int row = 0;
    int col = 0;
    int side = 0;
};

struct SceneSpec {
    int n = 256;
    double a = 0.0;
    double b = 1.0;
    std::vector<PlacedShape> particles;
    int phi0 = 64;  ///< side of the guaranteed all-noise square
    int phi1 = 1;   ///< every particle must contain a phi1 x phi1 square
    /// Explicit placement of the all-noise square; searched row-major when absent.
    std::optional<Pixel> noise_square_origin;
};

struct Scene {
    Micrograph image;
    std::vector<ParticleMask> truth;
    NoiseSquare noise_square;
    double coverage = 0.0;  ///< share of pixels on particles
};

/// Rasterized particle masks and the verified all-noise square.
/// Throws SceneError on overlap, out-of-image particles, a particle without a
/// phi1-square, b <= a, or when no all-noise square of side phi0 exists.
std::pair<std::vector<ParticleMask>, NoiseSquare> validate_scene(const SceneSpec& spec);

Scene generate_scene(const SceneSpec& spec, const NoiseModel& noise, std::uint64_t seed);

/// Label picture of a scene's truth: 0 background, k for particle k (1-based).
std::string encode_truth_pgm(int n, const std::vector<ParticleMask>& truth);

struct SceneDocument {
    SceneSpec spec;
    NoiseModel noise = NoiseModel::uniform(0.0);
};

/// Fields: n, a, b, phi0, phi1, shapes[{kind, size, thickness, gap, row, col}],
/// noise{kind: "uniform", half_width | kind: "truncated_gaussian", sigma, bound},
/// optional noise_square{row, col}.
SceneDocument parse_scene_json(std::string_view text);
std::string scene_to_json(const SceneDocument& doc);

/// Particles confined to a left-hand band of the image, leaving one wide
/// contiguous noise region. The all-noise square is placed inside that region.
struct ConsistencyFamily {
    int n = 256;
    double a = 0.3;
    double b = 0.7;
    double coverage = 0.30;
    int noise_square = 64;
    int phi1 = 16;
    /// Particles lie entirely within columns [0, band_fraction * n); 1.0
    /// scatters them over the whole image.
    double band_fraction = 0.6;
};

SceneSpec sample_consistency_scene(const ConsistencyFamily& family, Rng& rng);

/// A fixed number of nonconvex particles (alternating L-shapes and gapped
/// annuli) scattered over the image, each containing a phi1 x phi1 square.
struct DetectionFamily {
    int n = 256;
    double a = 0.4;
    double b = 0.6;
    int particles = 5;
    int noise_square = 64;
    int phi1 = 12;
};

SceneSpec sample_detection_scene(const DetectionFamily& family, Rng& rng);

}  // namespace scanpick
