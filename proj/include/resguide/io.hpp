#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "resguide/embedding.hpp"
#include "resguide/image.hpp"

namespace resguide {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary P5 with maxval 255.
std::vector<unsigned char> encode_pgm(const Image& img);
Image decode_pgm(const std::vector<unsigned char>& bytes);

void write_pgm(const std::filesystem::path& path, const Image& img);

/// Loads an 8-bit grayscale PGM (P5) or PNG, chosen by signature. Rejects
/// colour PNGs and images smaller than 16x16.
Image load_cover(const std::filesystem::path& path);

/// "RGPM", u32 width, u32 height, row-major little-endian float64.
std::vector<unsigned char> encode_rgpm(const ProbabilityMap& prob);
ProbabilityMap decode_rgpm(const std::vector<unsigned char>& bytes);

void write_rgpm(const std::filesystem::path& path, const ProbabilityMap& prob);
ProbabilityMap read_rgpm(const std::filesystem::path& path);

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);
void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

}  // namespace resguide
