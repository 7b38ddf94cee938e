/**
 * @file percolation.hpp
 * @brief Thresholding and black-cluster extraction on the triangular lattice
 *
 * The triangular lattice is embedded in the pixel grid by shearing: pixel
 * (r, c) is adjacent to (r-1, c), (r+1, c), (r, c-1), (r, c+1), (r-1, c+1)
 * and (r+1, c-1). The other diagonal, (r-1, c-1) / (r+1, c+1), is not an
 * edge. Site percolation on this graph has critical probability 1/2.
 */
#pragma once

#include "scanpick/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scanpick {

struct Pixel {
    int row = 0;
    int col = 0;

    auto operator<=>(const Pixel&) const = default;
};

/// Row-major black/white picture. true = black.
class BinaryImage {
public:
    BinaryImage(int width, int height, bool fill = false);
    BinaryImage(int width, int height, std::vector<std::uint8_t> bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
    void set(int row, int col, bool black) { bits_[index(row, col)] = black ? 1 : 0; }
    std::size_t black_count() const;

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    bool operator==(const BinaryImage&) const = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> bits_;
};

struct BoundingBox {
    int min_row = 0;
    int min_col = 0;
    int max_row = 0;
    int max_col = 0;

    bool operator==(const BoundingBox&) const = default;
};

struct Cluster {
    int id = 0;
    std::size_t pixel_count = 0;
    std::vector<Pixel> pixels;  ///< sorted row-major
    BoundingBox bbox;

    bool operator==(const Cluster&) const = default;
};

/// Black iff value >= theta.
BinaryImage binarize(const Micrograph& img, double theta);

/// In-bounds part of the 6-neighbourhood, in the fixed order
/// (r-1,c), (r-1,c+1), (r,c-1), (r,c+1), (r+1,c-1), (r+1,c).
std::vector<Pixel> tri_neighbors(int row, int col, int width, int height);

/// All maximal black components, ids in order of their first pixel in a row-major scan.
std::vector<Cluster> black_clusters(const BinaryImage& bin);

/// Clusters with at least min_pixels pixels, order and ids preserved.
std::vector<Cluster> filter_clusters(const std::vector<Cluster>& clusters, std::size_t min_pixels);

/// I.i.d. site field, each site black with probability p.
BinaryImage bernoulli_field(int width, int height, double p, std::uint64_t seed);

/// Pixel count of the largest black cluster (0 for an all-white picture).
std::size_t largest_cluster_size(const BinaryImage& bin);

/// Picture holding exactly the pixels of the given clusters.
BinaryImage render_clusters(const std::vector<Cluster>& clusters, int width, int height);

/// PGM with maxval 1; 1 = black.
std::string encode_binary_pgm(const BinaryImage& bin);

}  // namespace scanpick
