#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sbb {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // RGB, row-major

    std::uint64_t raw_bytes() const { return pixels.size(); }
};

RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// JPEG round trip (libjpeg). quality in 1..100.
std::vector<std::uint8_t> jpeg_encode(const RgbImage& image, int quality);
RgbImage jpeg_decode(const std::vector<std::uint8_t>& bytes);

double psnr(const RgbImage& a, const RgbImage& b);

/// Deterministic synthetic road scene (sky gradient, road surface, lane
/// markings, vehicle boxes, sensor noise) for compressor benchmarking.
RgbImage synthetic_road_scene(std::uint64_t seed, int width = 320, int height = 240);

/// Writes `count` synthetic scenes as scene_###.ppm under dir.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          int count, std::uint64_t seed,
                                                          int width = 320, int height = 240);

} // namespace sbb
