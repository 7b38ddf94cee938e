#include "scanpick/percolation.hpp"

#include "scanpick/error.hpp"
#include "scanpick/image_io.hpp"
#include "scanpick/random.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace scanpick {

namespace {

// (dr, dc) offsets of the sheared triangular embedding, in tri_neighbors order.
constexpr std::array<std::array<int, 2>, 6> kTriOffsets{{
    {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0},
}};

}  // namespace

BinaryImage::BinaryImage(int width, int height, bool fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1) throw InputDomainError("binary image dimensions must be positive");
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (width < 1 || height < 1) throw InputDomainError("binary image dimensions must be positive");
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
        throw InputDomainError("bit count does not match binary image dimensions");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryImage::black_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryImage binarize(const Micrograph& img, double theta) {
    std::vector<std::uint8_t> bits;
    bits.reserve(img.size());
    for (const double v : img.pixels()) bits.push_back(v >= theta ? 1 : 0);
    return BinaryImage(img.width(), img.height(), std::move(bits));
}

std::vector<Pixel> tri_neighbors(int row, int col, int width, int height) {
    if (row < 0 || col < 0 || row >= height || col >= width) {
        throw InputDomainError("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                               ") is outside a " + std::to_string(width) + "x" +
                               std::to_string(height) + " grid");
    }
    std::vector<Pixel> out;
    out.reserve(6);
    for (const auto& [dr, dc] : kTriOffsets) {
        const int r = row + dr;
        const int c = col + dc;
        if (r >= 0 && r < height && c >= 0 && c < width) out.push_back({r, c});
    }
    return out;
}

std::vector<Cluster> black_clusters(const BinaryImage& bin) {
    const int w = bin.width();
    const int h = bin.height();
    const auto& bits = bin.bits();
    std::vector<std::uint8_t> visited(bits.size(), 0);
    std::vector<std::size_t> stack;
    std::vector<Cluster> clusters;

    for (std::size_t seed = 0; seed < bits.size(); ++seed) {
        if (!bits[seed] || visited[seed]) continue;

        Cluster cl;
        cl.id = static_cast<int>(clusters.size());
        const int seed_row = static_cast<int>(seed / w);
        const int seed_col = static_cast<int>(seed % w);
        cl.bbox = {seed_row, seed_col, seed_row, seed_col};

        visited[seed] = 1;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            const int r = static_cast<int>(idx / w);
            const int c = static_cast<int>(idx % w);
            cl.pixels.push_back({r, c});
            cl.bbox.min_row = std::min(cl.bbox.min_row, r);
            cl.bbox.min_col = std::min(cl.bbox.min_col, c);
            cl.bbox.max_row = std::max(cl.bbox.max_row, r);
            cl.bbox.max_col = std::max(cl.bbox.max_col, c);

            for (const auto& [dr, dc] : kTriOffsets) {
                const int nr = r + dr;
                const int nc = c + dc;
                if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                const std::size_t n = static_cast<std::size_t>(nr) * w + nc;
                if (bits[n] && !visited[n]) {
                    visited[n] = 1;
                    stack.push_back(n);
                }
            }
        }
        std::sort(cl.pixels.begin(), cl.pixels.end());
        cl.pixel_count = cl.pixels.size();
        clusters.push_back(std::move(cl));
    }
    return clusters;
}

std::vector<Cluster> filter_clusters(const std::vector<Cluster>& clusters, std::size_t min_pixels) {
    if (min_pixels < 1) throw InputDomainError("min_pixels must be at least 1");
    std::vector<Cluster> kept;
    std::copy_if(clusters.begin(), clusters.end(), std::back_inserter(kept),
                 [min_pixels](const Cluster& c) { return c.pixel_count >= min_pixels; });
    return kept;
}

BinaryImage bernoulli_field(int width, int height, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputDomainError("site probability must lie in [0, 1]");
    Rng rng(seed);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(std::max(width, 0)) *
                                   static_cast<std::size_t>(std::max(height, 0)));
    for (auto& b : bits) b = rng.bernoulli(p) ? 1 : 0;
    return BinaryImage(width, height, std::move(bits));
}

std::size_t largest_cluster_size(const BinaryImage& bin) {
    std::size_t best = 0;
    for (const auto& c : black_clusters(bin)) best = std::max(best, c.pixel_count);
    return best;
}

BinaryImage render_clusters(const std::vector<Cluster>& clusters, int width, int height) {
    BinaryImage out(width, height, false);
    for (const auto& cl : clusters) {
        for (const auto& px : cl.pixels) out.set(px.row, px.col, true);
    }
    return out;
}

std::string encode_binary_pgm(const BinaryImage& bin) {
    std::vector<std::uint16_t> levels(bin.bits().begin(), bin.bits().end());
    return encode_pgm_levels(bin.width(), bin.height(), levels, 1, PgmEncoding::Binary);
}

}  // namespace scanpick
