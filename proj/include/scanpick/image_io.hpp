/**
 * @file image_io.hpp
 * @brief PGM (P2/P5) and CSV readers and writers
 *
 * PGM samples are read as raw integer levels, no rescaling by maxval. P5 with
 * maxval > 255 uses two big-endian bytes per sample. CSV holds one image row
 * per line, comma separated; written values use the shortest decimal form
 * that round-trips, so CSV is lossless.
 */
#pragma once

#include "scanpick/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace scanpick {

enum class ImageFormat { Pgm, Csv };

enum class PgmEncoding { Ascii, Binary };

struct PgmWriteOptions {
    PgmEncoding encoding = PgmEncoding::Binary;
    int maxval = 255;
    /// Each pixel is written as clamp(round(value * scale), 0, maxval).
    double scale = 1.0;
};

/// ".pgm" -> Pgm, ".csv" -> Csv, anything else -> nullopt.
std::optional<ImageFormat> format_from_path(const std::filesystem::path& path);

Micrograph parse_pgm(std::string_view bytes);
Micrograph parse_csv(std::string_view text);

std::string encode_pgm(const Micrograph& img, const PgmWriteOptions& options = {});
std::string encode_csv(const Micrograph& img);

/// Low-level PGM writer over integer levels, each already within [0, maxval].
std::string encode_pgm_levels(int width, int height, std::span<const std::uint16_t> levels,
                              int maxval, PgmEncoding encoding);

Micrograph read_image(const std::filesystem::path& path, ImageFormat format);
/// Format inferred from the extension; throws InputDomainError when it is unknown.
Micrograph read_image(const std::filesystem::path& path);

void write_image(const Micrograph& img, const std::filesystem::path& path, ImageFormat format,
                 const PgmWriteOptions& options = {});

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace scanpick
