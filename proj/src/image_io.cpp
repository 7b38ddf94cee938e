#include "scanpick/image_io.hpp"

#include "scanpick/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace scanpick {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Cursor over a PGM byte stream that tracks line numbers for diagnostics.
class PgmCursor {
public:
    explicit PgmCursor(std::string_view bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t line() const { return line_; }
    bool at_end() const { return pos_ >= bytes_.size(); }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, pos_); }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (is_space(c)) {
                advance();
            } else {
                return;
            }
        }
    }

    std::string_view token() {
        skip_space_and_comments();
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#') ++pos_;
        return bytes_.substr(start, pos_ - start);
    }

    long integer(const char* what) {
        skip_space_and_comments();
        if (at_end()) fail(std::string("unexpected end of data while reading ") + what);
        const std::size_t start = pos_;
        const std::string_view tok = token();
        long value = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw ParseError(std::string("non-numeric ") + what + " '" + std::string(tok) + "'",
                             line_, start);
        }
        return value;
    }

    void advance() {
        if (bytes_[pos_] == '\n') ++line_;
        ++pos_;
    }

    std::string_view rest() const { return bytes_.substr(std::min(pos_, bytes_.size())); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::string shortest(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

std::optional<ImageFormat> format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".pgm") return ImageFormat::Pgm;
    if (ext == ".csv") return ImageFormat::Csv;
    return std::nullopt;
}

Micrograph parse_pgm(std::string_view bytes) {
    PgmCursor cur(bytes);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        cur.fail("not a PGM file: magic must be P2 or P5");
    }
    const bool binary = bytes[1] == '5';
    cur.advance();
    cur.advance();
    if (!cur.at_end() && !is_space(bytes[cur.offset()]) && bytes[cur.offset()] != '#') {
        cur.fail("malformed PGM magic");
    }

    const long width = cur.integer("width");
    const long height = cur.integer("height");
    const long maxval = cur.integer("maxval");
    if (width < 1 || height < 1) cur.fail("PGM dimensions must be positive");
    if (maxval < 1 || maxval > 65535) cur.fail("PGM maxval must lie in [1, 65535]");
    if (width > (1L << 20) || height > (1L << 20)) cur.fail("PGM dimensions are implausibly large");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> pixels;
    pixels.reserve(count);

    if (binary) {
        if (cur.at_end() || !is_space(bytes[cur.offset()])) {
            cur.fail("expected a single whitespace byte before the P5 payload");
        }
        cur.advance();
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        const std::string_view payload = cur.rest();
        if (payload.size() < count * bytes_per) {
            throw ParseError("truncated P5 payload: expected " + std::to_string(count * bytes_per) +
                                 " bytes, found " + std::to_string(payload.size()),
                             cur.line(), cur.offset() + payload.size());
        }
        for (std::size_t i = 0; i < count; ++i) {
            unsigned value = 0;
            if (bytes_per == 2) {
                value = (static_cast<unsigned char>(payload[2 * i]) << 8) |
                        static_cast<unsigned char>(payload[2 * i + 1]);
            } else {
                value = static_cast<unsigned char>(payload[i]);
            }
            if (value > static_cast<unsigned>(maxval)) {
                throw ParseError("sample " + std::to_string(value) + " exceeds maxval", cur.line(),
                                 cur.offset() + i * bytes_per);
            }
            pixels.push_back(static_cast<double>(value));
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t start = cur.offset();
            const long value = cur.integer("sample");
            if (value < 0 || value > maxval) {
                throw ParseError("sample " + std::to_string(value) + " outside [0, maxval]",
                                 cur.line(), start);
            }
            pixels.push_back(static_cast<double>(value));
        }
        cur.skip_space_and_comments();
        if (!cur.at_end()) cur.fail("more samples than width x height");
    }
    return Micrograph(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

Micrograph parse_csv(std::string_view text) {
    std::vector<double> pixels;
    long width = -1;
    int height = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, eol - pos);
        const std::size_t line_start = pos;
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (std::all_of(line.begin(), line.end(), is_space)) continue;

        long cols = 0;
        std::size_t field_start = 0;
        while (true) {
            std::size_t comma = line.find(',', field_start);
            if (comma == std::string_view::npos) comma = line.size();
            std::string_view field = line.substr(field_start, comma - field_start);
            std::size_t lead = 0;
            while (lead < field.size() && is_space(field[lead])) ++lead;
            field.remove_prefix(lead);
            while (!field.empty() && is_space(field.back())) field.remove_suffix(1);
            if (!field.empty() && field.front() == '+') field.remove_prefix(1);

            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
                !std::isfinite(value)) {
                throw ParseError("non-numeric CSV field '" + std::string(field) + "'", line_no,
                                 line_start + field_start + lead);
            }
            pixels.push_back(value);
            ++cols;
            if (comma == line.size()) break;
            field_start = comma + 1;
        }
        if (width < 0) {
            width = cols;
        } else if (cols != width) {
            throw ParseError("row has " + std::to_string(cols) + " columns, expected " +
                                 std::to_string(width),
                             line_no, line_start);
        }
        ++height;
    }
    if (height == 0) throw ParseError("empty CSV image", line_no, text.size());
    return Micrograph(static_cast<int>(width), height, std::move(pixels));
}

std::string encode_pgm_levels(int width, int height, std::span<const std::uint16_t> levels,
                              int maxval, PgmEncoding encoding) {
    if (maxval < 1 || maxval > 65535) throw InputDomainError("PGM maxval must lie in [1, 65535]");
    if (levels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InputDomainError("level count does not match image dimensions");
    }
    std::string out = (encoding == PgmEncoding::Binary ? "P5\n" : "P2\n") +
                      std::to_string(width) + " " + std::to_string(height) + "\n" +
                      std::to_string(maxval) + "\n";
    if (encoding == PgmEncoding::Binary) {
        for (const std::uint16_t v : levels) {
            if (maxval > 255) out.push_back(static_cast<char>(v >> 8));
            out.push_back(static_cast<char>(v & 0xff));
        }
    } else {
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) {
                if (c > 0) out.push_back(' ');
                out += std::to_string(levels[static_cast<std::size_t>(r) * width + c]);
            }
            out.push_back('\n');
        }
    }
    return out;
}

std::string encode_pgm(const Micrograph& img, const PgmWriteOptions& options) {
    if (options.maxval < 1 || options.maxval > 65535) {
        throw InputDomainError("PGM maxval must lie in [1, 65535]");
    }
    std::vector<std::uint16_t> levels;
    levels.reserve(img.size());
    for (const double v : img.pixels()) {
        const double q = std::clamp(std::round(v * options.scale), 0.0,
                                    static_cast<double>(options.maxval));
        levels.push_back(static_cast<std::uint16_t>(q));
    }
    return encode_pgm_levels(img.width(), img.height(), levels, options.maxval, options.encoding);
}

std::string encode_csv(const Micrograph& img) {
    std::string out;
    out.reserve(img.size() * 8);
    for (int r = 0; r < img.height(); ++r) {
        const auto row = img.row(r);
        for (int c = 0; c < img.width(); ++c) {
            if (c > 0) out.push_back(',');
            out += shortest(row[c]);
        }
        out.push_back('\n');
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputDomainError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputDomainError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw InputDomainError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw InputDomainError("cannot move output into place at " + path.string());
    }
}

Micrograph read_image(const std::filesystem::path& path, ImageFormat format) {
    const std::string bytes = read_file(path);
    return format == ImageFormat::Pgm ? parse_pgm(bytes) : parse_csv(bytes);
}

Micrograph read_image(const std::filesystem::path& path) {
    const auto format = format_from_path(path);
    if (!format) throw InputDomainError("unknown image extension for " + path.string());
    return read_image(path, *format);
}

void write_image(const Micrograph& img, const std::filesystem::path& path, ImageFormat format,
                 const PgmWriteOptions& options) {
    write_file_atomic(path, format == ImageFormat::Pgm ? encode_pgm(img, options) : encode_csv(img));
}

}  // namespace scanpick
