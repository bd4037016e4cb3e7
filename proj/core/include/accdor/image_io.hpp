#pragma once

#include "accdor/imaging.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace accdor {

// Binary PGM (P5, maxval 255) in memory.
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::string_view bytes);

// Format chosen by extension: .pgm or .png (8-bit grayscale).
GrayImage read_gray(const std::filesystem::path& path);
void write_gray(const std::filesystem::path& path, const GrayImage& image);

// Masks on disk: 0 = background, 255 = object. Any nonzero pixel reads as object.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

GrayImage mask_to_image(const BinaryMask& mask);

} // namespace accdor
