#include <png.h>

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "morpho/error.hpp"
#include "morpho/ingest.hpp"

namespace morpho::ingest {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

// Cursor over a PGM header/ASCII body; skips whitespace and '#' comments.
class PnmCursor {
public:
    explicit PnmCursor(std::span<const std::uint8_t> b) : bytes_(b) {}

    long next_int() {
        skip_space();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw FormatError("PGM: expected an integer at byte " + std::to_string(pos_));
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1'000'000'000) throw FormatError("PGM: integer overflow");
        }
        return v;
    }

    // Exactly one whitespace byte separates the header from binary data.
    void skip_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw FormatError("PGM: missing separator before raster");
        ++pos_;
    }

    std::size_t pos() const { return pos_; }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

std::uint8_t rescale(long v, long maxval) {
    if (v < 0 || v > maxval) throw FormatError("PGM: sample out of range");
    if (maxval == 255) return static_cast<std::uint8_t>(v);
    return static_cast<std::uint8_t>(std::lround(255.0 * static_cast<double>(v) / maxval));
}

}  // namespace

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::lround(std::min(255.0, y)));
}

RasterImage decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw FormatError("not a PGM (P2/P5) stream");
    const bool ascii = bytes[1] == '2';
    PnmCursor cur(bytes);
    const long w = cur.next_int();
    const long h = cur.next_int();
    const long maxval = cur.next_int();
    if (w <= 0 || h <= 0) throw FormatError("PGM: non-positive dimensions");
    if (maxval <= 0 || maxval > 65535) throw FormatError("PGM: invalid maxval");
    if (w * h > 400'000'000L) throw FormatError("PGM: image too large");

    RasterImage img{static_cast<int>(w), static_cast<int>(h), {}};
    const std::size_t count = static_cast<std::size_t>(w * h);
    img.pixels.resize(count);
    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) img.pixels[i] = rescale(cur.next_int(), maxval);
        return img;
    }
    cur.skip_single_space();
    const std::size_t bps = maxval < 256 ? 1 : 2;
    const std::size_t start = cur.pos();
    if (bytes.size() < start + count * bps) throw FormatError("PGM: truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
        long v = bytes[start + i * bps];
        if (bps == 2) v = (v << 8) | bytes[start + i * bps + 1];
        img.pixels[i] = rescale(v, maxval);
    }
    return img;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw FormatError(std::string("PNG: ") + image.message);

    // Decode to 8-bit sRGB and collapse with our own luminance weights so
    // that RGB input is converted the same way regardless of libpng settings.
    const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    const std::size_t channels = gray ? 1 : 3;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("PNG: " + msg);
    }

    RasterImage img{static_cast<int>(image.width), static_cast<int>(image.height), {}};
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (channels == 1) {
            img.pixels[i] = buf[i];
        } else {
            img.pixels[i] = luminance(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
        }
    }
    return img;
}

RasterImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5'))
        return decode_pgm(bytes);
    throw FormatError("unsupported image format: " + path.string());
}

void write_pgm(const RasterImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

RasterImage inverted(const RasterImage& img) {
    RasterImage out = img;
    for (auto& p : out.pixels) p = static_cast<std::uint8_t>(255 - p);
    return out;
}

}  // namespace morpho::ingest
