/**
 * @file image.hpp
 * @brief Pixel grids, summed-area tables and square-window statistics
 *
 * Coordinates are (row, col) with row in [0, height) and col in [0, width).
 * Pixels are stored row-major.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scanpick {

/// A rectangular grid of finite real intensities.
class Micrograph {
public:
    /// Throws InputDomainError on zero dimensions, size mismatch or a non-finite pixel.
    Micrograph(int width, int height, std::vector<double> pixels);

    /// Constant image.
    static Micrograph filled(int width, int height, double value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    double at(int row, int col) const {
        return pixels_[static_cast<std::size_t>(row) * width_ + col];
    }
    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<const double> row(int r) const {
        return std::span<const double>(pixels_).subspan(static_cast<std::size_t>(r) * width_, width_);
    }

    bool operator==(const Micrograph&) const = default;

private:
    int width_;
    int height_;
    std::vector<double> pixels_;
};

/// Cumulative sums with a zero guard row and column:
/// entry (r, c) holds the sum of all pixels in rows [0, r) and columns [0, c).
class IntegralImage {
public:
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    double entry(int r, int c) const {
        return table_[static_cast<std::size_t>(r) * (width_ + 1) + c];
    }

    /// Sum of |pixel| over the whole source image; sets the scale of rounding error in window sums.
    double absolute_mass() const noexcept { return absolute_mass_; }

private:
    friend IntegralImage build_integral(const Micrograph& img);
    IntegralImage(int width, int height) : width_(width), height_(height) {}

    int width_;
    int height_;
    double absolute_mass_ = 0.0;
    std::vector<double> table_;
};

/// A square window and its statistics. (row, col) is the top-left corner.
struct WindowStats {
    int row = 0;
    int col = 0;
    int side = 0;
    double sum = 0.0;
    double mean = 0.0;

    bool operator==(const WindowStats&) const = default;
};

IntegralImage build_integral(const Micrograph& img);

/// O(1) sum of the side x side window at (row, col). Throws InputDomainError when it leaves the image.
double window_sum(const IntegralImage& ii, int row, int col, int side);

/// window_sum packaged with its mean.
WindowStats window_stats(const IntegralImage& ii, int row, int col, int side);

/// Averages 2x2 blocks. A trailing odd row or column is dropped.
Micrograph downsample2x(const Micrograph& img);

/// Divides every pixel by the maximum. Requires a positive maximum.
Micrograph normalize_max1(const Micrograph& img);

/// Adds a constant to every pixel.
Micrograph shifted(const Micrograph& img, double offset);

/// Multiplies every pixel by a constant.
Micrograph scaled(const Micrograph& img, double factor);

}  // namespace scanpick
