#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "edgeflow/image.hpp"

namespace edgeflow {

// Binary netpbm codecs. Only maxval 255 is supported. Decoders accept
// '#' comments and arbitrary whitespace in the header and reject
// truncated or trailing pixel data.

std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

/// Edge maps travel as P5 with cells 0 or 255; any other value is rejected.
std::vector<std::uint8_t> encode_edge_pgm(const EdgeMap& edges);
EdgeMap decode_edge_pgm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
RgbImage decode_ppm(std::span<const std::uint8_t> bytes);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

EdgeMap read_edge_pgm(const std::filesystem::path& path);
void write_edge_pgm(const std::filesystem::path& path, const EdgeMap& edges);

RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

}  // namespace edgeflow
