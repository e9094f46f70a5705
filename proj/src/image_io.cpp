#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "cxr/error.hpp"
#include "cxr/imaging.hpp"

namespace cxr {

namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin());
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        token.push_back(static_cast<char>(bytes[pos++]));
    }
    return token;
}

int parse_header_int(const std::string& token, const char* what) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit) || token.size() > 9) {
        throw Error(std::string("malformed PGM header: bad ") + what);
    }
    return std::stoi(token);
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 2;
    const int width = parse_header_int(pgm_token(bytes, pos), "width");
    const int height = parse_header_int(pgm_token(bytes, pos), "height");
    const int maxval = parse_header_int(pgm_token(bytes, pos), "maxval");
    if (width == 0 || height == 0) throw Error("zero-dimension image");
    if (maxval < 1 || maxval > 65535) throw Error("malformed PGM header: maxval out of range");
    ++pos; // single whitespace byte after maxval

    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() < pos + count * bytes_per_sample) throw Error("truncated PGM data");

    std::vector<double> pixels(count);
    for (std::size_t i = 0; i < count; ++i) {
        unsigned value = bytes[pos + i * bytes_per_sample];
        if (bytes_per_sample == 2) value = (value << 8) | bytes[pos + i * 2 + 1];
        pixels[i] = std::min(1.0, static_cast<double>(value) / maxval);
    }
    return GrayImage(width, height, std::move(pixels));
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        std::string message = image.message;
        png_image_free(&image);
        throw Error("unsupported format: " + message);
    }
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw Error("zero-dimension image");
    }

    const auto width = static_cast<int>(image.width);
    const auto height = static_cast<int>(image.height);
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> pixels(count);

    // libpng treats 16-bit sources as linear; keep them at full precision.
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        image.format = PNG_FORMAT_LINEAR_Y;
        std::vector<png_uint_16> buffer(count);
        if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
            throw Error(std::string("PNG decode failed: ") + image.message);
        }
        for (std::size_t i = 0; i < count; ++i) pixels[i] = buffer[i] / 65535.0;
    } else {
        image.format = PNG_FORMAT_GRAY;
        std::vector<png_byte> buffer(count);
        if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
            throw Error(std::string("PNG decode failed: ") + image.message);
        }
        for (std::size_t i = 0; i < count; ++i) pixels[i] = buffer[i] / 255.0;
    }
    return GrayImage(width, height, std::move(pixels));
}

} // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error("file not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    throw Error("unsupported format: expected PNG or binary PGM (P5)");
}

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_image(bytes);
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval) {
    if (maxval != 255 && maxval != 65535) throw Error("PGM maxval must be 255 or 65535");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
    std::vector<char> data;
    data.reserve(img.size() * (maxval > 255 ? 2 : 1));
    for (double v : img.pixels()) {
        const auto q = static_cast<unsigned>(std::lround(v * maxval));
        if (maxval > 255) data.push_back(static_cast<char>((q >> 8) & 0xff));
        data.push_back(static_cast<char>(q & 0xff));
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("failed writing file: " + path.string());
}

void save_png(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<png_byte> buffer(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        buffer[i] = static_cast<png_byte>(std::lround(px[i] * 255.0));
    }
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
        std::string message = image.message;
        png_image_free(&image);
        throw Error("PNG encode failed: " + message);
    }
}

} // namespace cxr
