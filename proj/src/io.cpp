#include "resguide/io.hpp"

#include <png.h>

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace resguide {
namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffU));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f64(std::vector<unsigned char>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffU));
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
    return std::bit_cast<double>(bits);
}

// Reads one unsigned decimal header field, skipping whitespace and comments.
std::size_t pgm_field(const std::vector<unsigned char>& bytes, std::size_t& pos) {
    for (;;) {
        if (pos >= bytes.size()) throw IoError("malformed PGM header");
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    if (!std::isdigit(bytes[pos])) throw IoError("malformed PGM header");
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
        value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
        if (value > (1U << 24)) throw IoError("malformed PGM header");
        ++pos;
    }
    return value;
}

Image decode_png(const std::vector<unsigned char>& bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        throw IoError(std::string("malformed PNG: ") + png.message);
    }
    if ((png.format & PNG_FORMAT_FLAG_COLOR) != 0) {
        png_image_free(&png);
        throw IoError("PNG is not grayscale");
    }
    png.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw IoError("malformed PNG: " + msg);
    }
    return Image(png.width, png.height, std::move(pixels));
}

}  // namespace

std::vector<unsigned char> encode_pgm(const Image& img) {
    const std::string header = "P5\n" + std::to_string(img.width()) + ' ' + std::to_string(img.height()) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

Image decode_pgm(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw IoError("not a binary PGM (P5)");
    std::size_t pos = 2;
    const std::size_t width = pgm_field(bytes, pos);
    const std::size_t height = pgm_field(bytes, pos);
    const std::size_t maxval = pgm_field(bytes, pos);
    if (width == 0 || height == 0) throw IoError("malformed PGM header");
    if (maxval != 255) throw IoError("unsupported PGM maxval (expected 255)");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw IoError("malformed PGM header");
    ++pos;
    if (bytes.size() - pos < width * height) throw IoError("truncated PGM data");
    std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + width * height));
    return Image(width, height, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const Image& img) { write_file(path, encode_pgm(img)); }

Image load_cover(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    Image img = (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0) ? decode_png(bytes) : decode_pgm(bytes);
    if (img.width() < kMinCoverSide || img.height() < kMinCoverSide) {
        throw IoError("image smaller than 16x16: " + path.string());
    }
    return img;
}

std::vector<unsigned char> encode_rgpm(const ProbabilityMap& prob) {
    std::vector<unsigned char> out{'R', 'G', 'P', 'M'};
    out.reserve(12 + 8 * prob.map().size());
    put_u32(out, static_cast<std::uint32_t>(prob.width()));
    put_u32(out, static_cast<std::uint32_t>(prob.height()));
    for (double v : prob.map().values()) put_f64(out, v);
    return out;
}

ProbabilityMap decode_rgpm(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RGPM", 4) != 0) throw IoError("bad sidecar: missing RGPM header");
    const std::uint64_t width = get_u32(bytes.data() + 4);
    const std::uint64_t height = get_u32(bytes.data() + 8);
    if (width == 0 || height == 0 || bytes.size() != 12 + 8 * width * height) {
        throw IoError("bad sidecar: size does not match header");
    }
    RealMap values(width, height);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_f64(bytes.data() + 12 + 8 * i);
    try {
        return ProbabilityMap(std::move(values));
    } catch (const std::invalid_argument&) {
        throw IoError("bad sidecar: probability out of range");
    }
}

void write_rgpm(const std::filesystem::path& path, const ProbabilityMap& prob) { write_file(path, encode_rgpm(prob)); }

ProbabilityMap read_rgpm(const std::filesystem::path& path) { return decode_rgpm(read_file(path)); }

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::vector<unsigned char>(text.begin(), text.end()));
}

}  // namespace resguide
