#include "scanpick/image.hpp"

#include "scanpick/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scanpick {

Micrograph::Micrograph(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) {
        throw InputDomainError("image dimensions must be positive, got " + std::to_string(width) +
                               "x" + std::to_string(height));
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InputDomainError("pixel count " + std::to_string(pixels_.size()) +
                               " does not match " + std::to_string(width) + "x" +
                               std::to_string(height));
    }
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
        if (!std::isfinite(pixels_[i])) {
            throw InputDomainError("non-finite pixel at index " + std::to_string(i));
        }
    }
}

Micrograph Micrograph::filled(int width, int height, double value) {
    return Micrograph(width, height,
                      std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                              static_cast<std::size_t>(std::max(height, 0)),
                                          value));
}

IntegralImage build_integral(const Micrograph& img) {
    const int w = img.width();
    const int h = img.height();
    IntegralImage ii(w, h);
    const std::size_t stride = static_cast<std::size_t>(w) + 1;
    ii.table_.assign(stride * (static_cast<std::size_t>(h) + 1), 0.0);

    double mass = 0.0;
    for (int r = 0; r < h; ++r) {
        const auto src = img.row(r);
        const double* above = &ii.table_[static_cast<std::size_t>(r) * stride];
        double* out = &ii.table_[static_cast<std::size_t>(r + 1) * stride];
        double running = 0.0;
        for (int c = 0; c < w; ++c) {
            running += src[c];
            mass += std::abs(src[c]);
            out[c + 1] = above[c + 1] + running;
        }
    }
    ii.absolute_mass_ = mass;
    return ii;
}

double window_sum(const IntegralImage& ii, int row, int col, int side) {
    if (side < 1 || row < 0 || col < 0 || row + side > ii.height() || col + side > ii.width()) {
        throw InputDomainError("window (" + std::to_string(row) + ", " + std::to_string(col) +
                               ", side " + std::to_string(side) + ") is not inside a " +
                               std::to_string(ii.width()) + "x" + std::to_string(ii.height()) +
                               " image");
    }
    return ii.entry(row + side, col + side) - ii.entry(row, col + side) -
           ii.entry(row + side, col) + ii.entry(row, col);
}

WindowStats window_stats(const IntegralImage& ii, int row, int col, int side) {
    const double sum = window_sum(ii, row, col, side);
    return WindowStats{row, col, side, sum, sum / (static_cast<double>(side) * side)};
}

Micrograph downsample2x(const Micrograph& img) {
    if (img.width() < 2 || img.height() < 2) {
        throw InputDomainError("downsampling needs at least 2x2 pixels, got " +
                               std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    const int w = img.width() / 2;
    const int h = img.height() / 2;
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < h; ++r) {
        const auto top = img.row(2 * r);
        const auto bottom = img.row(2 * r + 1);
        for (int c = 0; c < w; ++c) {
            out[static_cast<std::size_t>(r) * w + c] =
                0.25 * ((top[2 * c] + top[2 * c + 1]) + (bottom[2 * c] + bottom[2 * c + 1]));
        }
    }
    return Micrograph(w, h, std::move(out));
}

Micrograph normalize_max1(const Micrograph& img) {
    const auto px = img.pixels();
    const double peak = *std::max_element(px.begin(), px.end());
    if (!(peak > 0.0)) {
        throw InputDomainError("cannot normalize an image whose maximum is not positive");
    }
    std::vector<double> out(px.begin(), px.end());
    for (double& v : out) v /= peak;
    return Micrograph(img.width(), img.height(), std::move(out));
}

Micrograph shifted(const Micrograph& img, double offset) {
    std::vector<double> out(img.pixels().begin(), img.pixels().end());
    for (double& v : out) v += offset;
    return Micrograph(img.width(), img.height(), std::move(out));
}

Micrograph scaled(const Micrograph& img, double factor) {
    std::vector<double> out(img.pixels().begin(), img.pixels().end());
    for (double& v : out) v *= factor;
    return Micrograph(img.width(), img.height(), std::move(out));
}

}  // namespace scanpick
