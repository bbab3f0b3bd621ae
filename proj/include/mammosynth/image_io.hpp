#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mammosynth/image.hpp"

namespace mammosynth {

/// Raster readers accept 8/16-bit single-channel PNG and binary PGM (P5),
/// plus grayscale PFM ("Pf") float images whose values lie in [0, 1].
/// The format is detected from the file's magic bytes, not its extension.
enum class BitDepthPolicy { automatic };

enum class SampleDepth { bits8 = 8, bits16 = 16 };

enum class RasterFormat { png, pgm, pfm };

GrayImage load_image(const std::filesystem::path& path,
                     BitDepthPolicy policy = BitDepthPolicy::automatic);
GrayImage decode_image(std::span<const std::uint8_t> bytes);

/// Chooses the container from the extension (.png, .pgm, .pfm). Samples are
/// quantized with round-half-up; .pfm stores the floats unquantized.
void save_image(const GrayImage& img, const std::filesystem::path& path,
                SampleDepth depth = SampleDepth::bits16);
std::vector<std::uint8_t> encode_image(const GrayImage& img, RasterFormat format,
                                       SampleDepth depth = SampleDepth::bits16);
RasterFormat format_for_path(const std::filesystem::path& path);

/// Round-half-up quantization of a unit-interval value to 2^depth - 1 levels.
std::uint16_t quantize(float value, SampleDepth depth);

SaliencyMap load_saliency(const std::filesystem::path& path);
SaliencyMap decode_saliency(std::span<const std::uint8_t> bytes);
void save_saliency(const SaliencyMap& map, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pfm(int height, int width, std::span<const float> values);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mammosynth
