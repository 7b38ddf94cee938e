#include "scanpick/synth.hpp"

#include "scanpick/error.hpp"
#include "scanpick/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scanpick {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

NoiseModel NoiseModel::uniform(double half_width) {
    if (!(half_width >= 0.0) || !std::isfinite(half_width)) {
        throw InputDomainError("uniform noise half-width must be finite and non-negative");
    }
    return NoiseModel(NoiseKind::Uniform, half_width, 0.0, half_width * half_width / 3.0);
}

NoiseModel NoiseModel::truncated_gaussian(double sigma_raw, double bound) {
    if (!(sigma_raw > 0.0) || !(bound > 0.0) || !std::isfinite(sigma_raw) ||
        !std::isfinite(bound)) {
        throw InputDomainError("truncated Gaussian needs positive finite sigma and bound");
    }
    const double beta = bound / sigma_raw;
    const double mass = 2.0 * std_normal_cdf(beta) - 1.0;
    const double variance =
        sigma_raw * sigma_raw * (1.0 - 2.0 * beta * std_normal_pdf(beta) / mass);
    return NoiseModel(NoiseKind::TruncatedGaussian, bound, sigma_raw, variance);
}

double NoiseModel::sigma() const { return std::sqrt(variance_); }

double NoiseModel::sample(Rng& rng) const {
    if (kind_ == NoiseKind::Uniform) {
        return bound_ == 0.0 ? 0.0 : rng.uniform(-bound_, bound_);
    }
    while (true) {
        const double x = sigma_raw_ * rng.normal();
        if (std::abs(x) <= bound_) return x;
    }
}

double NoiseModel::exceedance(double t) const {
    if (t > bound_) return 0.0;
    if (t <= -bound_) return 1.0;
    if (kind_ == NoiseKind::Uniform) {
        return bound_ == 0.0 ? 1.0 : (bound_ - t) / (2.0 * bound_);
    }
    const double top = std_normal_cdf(bound_ / sigma_raw_);
    const double bottom = std_normal_cdf(-bound_ / sigma_raw_);
    return (top - std_normal_cdf(t / sigma_raw_)) / (top - bottom);
}

double NoiseModel::upper_quantile(double fraction) const {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InputDomainError("quantile fraction must lie in (0, 1)");
    }
    if (kind_ == NoiseKind::Uniform) return bound_ * (1.0 - 2.0 * fraction);
    double lo = -bound_;
    double hi = bound_;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * bound_; ++i) {
        const double mid = 0.5 * (lo + hi);
        (exceedance(mid) > fraction ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

std::size_t ShapeMask::pixel_count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

ShapeMask shape_library(const ShapeSpec& spec) {
    ShapeMask m;
    const auto require = [](bool ok, const char* what) {
        if (!ok) throw InputDomainError(what);
    };
    switch (spec.kind) {
        case ShapeKind::Square: {
            require(spec.size >= 1, "square side must be at least 1");
            m.height = m.width = spec.size;
            m.bits.assign(static_cast<std::size_t>(spec.size) * spec.size, 1);
            break;
        }
        case ShapeKind::Disc: {
            require(spec.size >= 0, "disc radius must be non-negative");
            const int r = spec.size;
            m.height = m.width = 2 * r + 1;
            m.bits.assign(static_cast<std::size_t>(m.height) * m.width, 0);
            for (int i = 0; i < m.height; ++i) {
                for (int j = 0; j < m.width; ++j) {
                    const int di = i - r;
                    const int dj = j - r;
                    m.bits[static_cast<std::size_t>(i) * m.width + j] = di * di + dj * dj <= r * r;
                }
            }
            break;
        }
        case ShapeKind::LShape: {
            require(spec.size >= 1 && spec.thickness >= 1, "L-shape arm and thickness must be positive");
            require(spec.thickness < spec.size, "L-shape thickness must be below the arm length");
            // Vertical arm on the left, horizontal arm along the bottom.
            const int arm = spec.size;
            const int t = spec.thickness;
            m.height = m.width = arm;
            m.bits.assign(static_cast<std::size_t>(arm) * arm, 0);
            for (int i = 0; i < arm; ++i) {
                for (int j = 0; j < arm; ++j) {
                    m.bits[static_cast<std::size_t>(i) * arm + j] = j < t || i >= arm - t;
                }
            }
            break;
        }
        case ShapeKind::GappedAnnulus: {
            require(spec.size >= 2 && spec.thickness >= 1, "annulus radius and thickness must be positive");
            require(spec.thickness < spec.size, "annulus thickness must be below its outer radius");
            require(spec.gap >= 1 && spec.gap < spec.size, "annulus gap must lie in [1, radius)");
            const int outer = spec.size;
            const int inner = outer - spec.thickness;
            m.height = m.width = 2 * outer + 1;
            m.bits.assign(static_cast<std::size_t>(m.height) * m.width, 0);
            // Gap: `gap` rows centred on the middle row, right of the centre column.
            const int gap_lo = outer - spec.gap / 2;
            const int gap_hi = gap_lo + spec.gap;
            for (int i = 0; i < m.height; ++i) {
                for (int j = 0; j < m.width; ++j) {
                    const int di = i - outer;
                    const int dj = j - outer;
                    const int d2 = di * di + dj * dj;
                    const bool ring = d2 <= outer * outer && d2 > inner * inner;
                    const bool cut = j > outer && i >= gap_lo && i < gap_hi;
                    m.bits[static_cast<std::size_t>(i) * m.width + j] = ring && !cut;
                }
            }
            break;
        }
    }
    return m;
}

int largest_inscribed_square(const ShapeMask& mask) {
    // dp[j] = side of the largest square whose bottom-right corner is (i, j).
    std::vector<int> prev(static_cast<std::size_t>(mask.width) + 1, 0);
    std::vector<int> cur(prev.size(), 0);
    int best = 0;
    for (int i = 0; i < mask.height; ++i) {
        for (int j = 0; j < mask.width; ++j) {
            cur[j + 1] = mask.at(i, j) ? 1 + std::min({prev[j], prev[j + 1], cur[j]}) : 0;
            best = std::max(best, cur[j + 1]);
        }
        std::swap(prev, cur);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

std::pair<std::vector<ParticleMask>, NoiseSquare> validate_scene(const SceneSpec& spec) {
    if (spec.n < 1) throw SceneError("scene side must be positive");
    if (!(spec.b > spec.a)) throw SceneError("particle intensity b must exceed background a");
    if (spec.phi0 < 1 || spec.phi0 > spec.n) throw SceneError("phi0 must lie in [1, n]");
    if (spec.phi1 < 1) throw SceneError("phi1 must be at least 1");

    const int n = spec.n;
    std::vector<int> owner(static_cast<std::size_t>(n) * n, -1);
    std::vector<ParticleMask> masks;
    masks.reserve(spec.particles.size());

    for (std::size_t k = 0; k < spec.particles.size(); ++k) {
        const auto& placed = spec.particles[k];
        const ShapeMask shape = shape_library(placed.shape);
        if (largest_inscribed_square(shape) < spec.phi1) {
            throw SceneError("particle " + std::to_string(k) + " contains no " +
                             std::to_string(spec.phi1) + "x" + std::to_string(spec.phi1) +
                             " square");
        }
        if (placed.row < 0 || placed.col < 0 || placed.row + shape.height > n ||
            placed.col + shape.width > n) {
            throw SceneError("particle " + std::to_string(k) + " extends outside the image");
        }
        ParticleMask mask;
        for (int i = 0; i < shape.height; ++i) {
            for (int j = 0; j < shape.width; ++j) {
                if (!shape.at(i, j)) continue;
                const int r = placed.row + i;
                const int c = placed.col + j;
                int& o = owner[static_cast<std::size_t>(r) * n + c];
                if (o >= 0) {
                    throw SceneError("particles " + std::to_string(o) + " and " +
                                     std::to_string(k) + " overlap at (" + std::to_string(r) +
                                     ", " + std::to_string(c) + ")");
                }
                o = static_cast<int>(k);
                mask.pixels.push_back({r, c});
            }
        }
        masks.push_back(std::move(mask));
    }

    std::vector<double> occupied(owner.size());
    std::transform(owner.begin(), owner.end(), occupied.begin(),
                   [](int o) { return o >= 0 ? 1.0 : 0.0; });
    const IntegralImage occ = build_integral(Micrograph(n, n, std::move(occupied)));

    NoiseSquare square{0, 0, spec.phi0};
    if (spec.noise_square_origin) {
        square.row = spec.noise_square_origin->row;
        square.col = spec.noise_square_origin->col;
        if (square.row < 0 || square.col < 0 || square.row + spec.phi0 > n ||
            square.col + spec.phi0 > n) {
            throw SceneError("noise square extends outside the image");
        }
        if (window_sum(occ, square.row, square.col, spec.phi0) != 0.0) {
            throw SceneError("noise square intersects a particle");
        }
        return {std::move(masks), square};
    }
    for (int r = 0; r + spec.phi0 <= n; ++r) {
        for (int c = 0; c + spec.phi0 <= n; ++c) {
            if (window_sum(occ, r, c, spec.phi0) == 0.0) {
                square.row = r;
                square.col = c;
                return {std::move(masks), square};
            }
        }
    }
    throw SceneError("no all-noise square of side " + std::to_string(spec.phi0) + " exists");
}

Scene generate_scene(const SceneSpec& spec, const NoiseModel& noise, std::uint64_t seed) {
    auto [masks, square] = validate_scene(spec);
    const int n = spec.n;
    std::vector<std::uint8_t> on(static_cast<std::size_t>(n) * n, 0);
    std::size_t covered = 0;
    for (const auto& m : masks) {
        for (const auto& px : m.pixels) on[static_cast<std::size_t>(px.row) * n + px.col] = 1;
        covered += m.pixels.size();
    }
    Rng rng(seed);
    std::vector<double> pixels(on.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = (on[i] ? spec.b : spec.a) + noise.sample(rng);
    }
    return Scene{Micrograph(n, n, std::move(pixels)), std::move(masks), square,
                 static_cast<double>(covered) / static_cast<double>(on.size())};
}

std::string encode_truth_pgm(int n, const std::vector<ParticleMask>& truth) {
    const int maxval = std::max<int>(1, static_cast<int>(std::min<std::size_t>(truth.size(), 65535)));
    std::vector<std::uint16_t> levels(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const auto label = static_cast<std::uint16_t>(std::min<std::size_t>(k + 1, 65535));
        for (const auto& px : truth[k].pixels) {
            levels[static_cast<std::size_t>(px.row) * n + px.col] = label;
        }
    }
    return encode_pgm_levels(n, n, levels, maxval, PgmEncoding::Binary);
}

// ---------------------------------------------------------------------------
// Scene documents
// ---------------------------------------------------------------------------

namespace {

const char* shape_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::Square: return "square";
        case ShapeKind::Disc: return "disc";
        case ShapeKind::LShape: return "l_shape";
        case ShapeKind::GappedAnnulus: return "annulus";
    }
    return "square";
}

ShapeKind shape_from_name(const std::string& s) {
    if (s == "square") return ShapeKind::Square;
    if (s == "disc") return ShapeKind::Disc;
    if (s == "l_shape") return ShapeKind::LShape;
    if (s == "annulus") return ShapeKind::GappedAnnulus;
    throw SceneError("unknown shape kind '" + s + "'");
}

}  // namespace

SceneDocument parse_scene_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto line = static_cast<std::size_t>(
            std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n') + 1);
        throw ParseError(std::string("malformed scene JSON: ") + e.what(), line, e.byte);
    }
    try {
        SceneDocument doc;
        auto& s = doc.spec;
        s.n = j.at("n").get<int>();
        s.a = j.at("a").get<double>();
        s.b = j.at("b").get<double>();
        s.phi0 = j.at("phi0").get<int>();
        s.phi1 = j.at("phi1").get<int>();
        for (const auto& sh : j.value("shapes", nlohmann::json::array())) {
            PlacedShape p;
            p.shape.kind = shape_from_name(sh.at("kind").get<std::string>());
            p.shape.size = sh.at("size").get<int>();
            p.shape.thickness = sh.value("thickness", 0);
            p.shape.gap = sh.value("gap", 0);
            p.row = sh.at("row").get<int>();
            p.col = sh.at("col").get<int>();
            s.particles.push_back(p);
        }
        if (j.contains("noise_square")) {
            s.noise_square_origin =
                Pixel{j["noise_square"].at("row").get<int>(), j["noise_square"].at("col").get<int>()};
        }
        const auto& nz = j.at("noise");
        const std::string kind = nz.at("kind").get<std::string>();
        if (kind == "uniform") {
            doc.noise = NoiseModel::uniform(nz.at("half_width").get<double>());
        } else if (kind == "truncated_gaussian") {
            doc.noise =
                NoiseModel::truncated_gaussian(nz.at("sigma").get<double>(), nz.at("bound").get<double>());
        } else {
            throw SceneError("unknown noise kind '" + kind + "'");
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw SceneError(std::string("invalid scene document: ") + e.what());
    }
}

std::string scene_to_json(const SceneDocument& doc) {
    nlohmann::ordered_json j;
    const auto& s = doc.spec;
    j["n"] = s.n;
    j["a"] = s.a;
    j["b"] = s.b;
    j["phi0"] = s.phi0;
    j["phi1"] = s.phi1;
    if (s.noise_square_origin) {
        j["noise_square"] = {{"row", s.noise_square_origin->row}, {"col", s.noise_square_origin->col}};
    }
    nlohmann::ordered_json shapes = nlohmann::ordered_json::array();
    for (const auto& p : s.particles) {
        nlohmann::ordered_json sh;
        sh["kind"] = shape_name(p.shape.kind);
        sh["size"] = p.shape.size;
        if (p.shape.thickness) sh["thickness"] = p.shape.thickness;
        if (p.shape.gap) sh["gap"] = p.shape.gap;
        sh["row"] = p.row;
        sh["col"] = p.col;
        shapes.push_back(std::move(sh));
    }
    j["shapes"] = std::move(shapes);
    if (doc.noise.kind() == NoiseKind::Uniform) {
        j["noise"] = {{"kind", "uniform"}, {"half_width", doc.noise.bound()}};
    } else {
        j["noise"] = {{"kind", "truncated_gaussian"},
                      {"sigma", doc.noise.sigma_raw()},
                      {"bound", doc.noise.bound()}};
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Scene families
// ---------------------------------------------------------------------------

namespace {

// Blocked-pixel map used for random sequential placement with a safety margin.
class Occupancy {
public:
    Occupancy(int n, int margin) : n_(n), margin_(margin), blocked_(static_cast<std::size_t>(n) * n, 0) {}

    bool fits(const ShapeMask& m, int row, int col) const {
        if (row < 0 || col < 0 || row + m.height > n_ || col + m.width > n_) return false;
        for (int i = 0; i < m.height; ++i) {
            for (int j = 0; j < m.width; ++j) {
                if (m.at(i, j) && blocked_[static_cast<std::size_t>(row + i) * n_ + col + j]) {
                    return false;
                }
            }
        }
        return true;
    }

    void block_rect(int row, int col, int h, int w) {
        for (int r = std::max(0, row - margin_); r < std::min(n_, row + h + margin_); ++r) {
            for (int c = std::max(0, col - margin_); c < std::min(n_, col + w + margin_); ++c) {
                blocked_[static_cast<std::size_t>(r) * n_ + c] = 1;
            }
        }
    }

    void block_shape(const ShapeMask& m, int row, int col) {
        for (int i = 0; i < m.height; ++i) {
            for (int j = 0; j < m.width; ++j) {
                if (m.at(i, j)) block_rect(row + i, col + j, 1, 1);
            }
        }
    }

private:
    int n_;
    int margin_;
    std::vector<std::uint8_t> blocked_;
};

ShapeSpec random_shape(Rng& rng, int phi1) {
    // Draw until the shape holds a phi1-square; the ranges make that the common case.
    while (true) {
        ShapeSpec s;
        switch (rng.uniform_int(0, 3)) {
            case 0:
                s = {ShapeKind::Square, rng.uniform_int(phi1 + 4, phi1 * 5 / 2), 0, 0};
                break;
            case 1:
                s = {ShapeKind::Disc, rng.uniform_int(phi1 * 3 / 4 + 2, phi1 * 3 / 2), 0, 0};
                break;
            case 2: {
                const int t = rng.uniform_int(phi1, phi1 + 4);
                s = {ShapeKind::LShape, rng.uniform_int(2 * t, 3 * t), t, 0};
                break;
            }
            default: {
                const int t = rng.uniform_int(phi1 + 2, phi1 + 6);
                s = {ShapeKind::GappedAnnulus, t + rng.uniform_int(4, 10), t, rng.uniform_int(3, 6)};
                break;
            }
        }
        if (largest_inscribed_square(shape_library(s)) >= phi1) return s;
    }
}

}  // namespace

SceneSpec sample_consistency_scene(const ConsistencyFamily& family, Rng& rng) {
    const int n = family.n;
    SceneSpec spec;
    spec.n = n;
    spec.a = family.a;
    spec.b = family.b;
    spec.phi0 = family.noise_square;
    spec.phi1 = family.phi1;

    const int band_end = std::clamp(static_cast<int>(std::lround(family.band_fraction * n)), 1, n);
    const int side = family.noise_square;
    const int square_col_lo = band_end >= n ? 0 : std::min(band_end + 8, n - side);
    const Pixel origin{rng.uniform_int(0, n - side), rng.uniform_int(square_col_lo, n - side)};
    spec.noise_square_origin = origin;

    Occupancy occ(n, 2);
    occ.block_rect(origin.row, origin.col, side, side);
    const double target = family.coverage * n * n;
    double covered = 0.0;
    // Random sequential placement: each drawn shape gets a few positions; give up
    // after a long run of shapes that found no room.
    int misses = 0;
    while (covered < target && misses < 200) {
        const ShapeSpec shape = random_shape(rng, family.phi1);
        const ShapeMask mask = shape_library(shape);
        const int max_col = band_end - mask.width;
        bool placed = false;
        for (int attempt = 0; attempt < 32 && !placed && max_col >= 0 && mask.height <= n; ++attempt) {
            const int row = rng.uniform_int(0, n - mask.height);
            const int col = rng.uniform_int(0, max_col);
            if (!occ.fits(mask, row, col)) continue;
            occ.block_shape(mask, row, col);
            spec.particles.push_back({shape, row, col});
            covered += static_cast<double>(mask.pixel_count());
            placed = true;
        }
        misses = placed ? 0 : misses + 1;
    }
    return spec;
}

SceneSpec sample_detection_scene(const DetectionFamily& family, Rng& rng) {
    const int n = family.n;
    SceneSpec spec;
    spec.n = n;
    spec.a = family.a;
    spec.b = family.b;
    spec.phi0 = family.noise_square;
    spec.phi1 = family.phi1;

    const int side = family.noise_square;
    const Pixel origin{rng.uniform_int(0, n - side), rng.uniform_int(0, n - side)};
    spec.noise_square_origin = origin;

    Occupancy occ(n, 4);
    occ.block_rect(origin.row, origin.col, side, side);
    const int t = family.phi1 + 2;
    for (int k = 0; k < family.particles; ++k) {
        const ShapeSpec shape = k % 2 == 0
            ? ShapeSpec{ShapeKind::LShape, 3 * t, t, 0}
            : ShapeSpec{ShapeKind::GappedAnnulus, t + 8, t, 5};
        const ShapeMask mask = shape_library(shape);
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            const int row = rng.uniform_int(0, n - mask.height);
            const int col = rng.uniform_int(0, n - mask.width);
            if (!occ.fits(mask, row, col)) continue;
            occ.block_shape(mask, row, col);
            spec.particles.push_back({shape, row, col});
            placed = true;
        }
        if (!placed) throw SceneError("could not place all particles; image too crowded");
    }
    return spec;
}

}  // namespace scanpick
