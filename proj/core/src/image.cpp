#include "sbb/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sbb/errors.hpp"
#include "sbb/rng.hpp"

namespace sbb {

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P6") throw DataError("not a binary PPM (P6): " + path.string());
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    in.get();  // single whitespace after header
    if (width <= 0 || height <= 0 || maxval != 255) {
        throw DataError("unsupported PPM header: " + path.string());
    }
    RgbImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw DataError("truncated PPM: " + path.string());
    }
    return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write image: " + path.string());
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
}

double psnr(const RgbImage& a, const RgbImage& b) {
    if (a.width != b.width || a.height != b.height) {
        throw DataError("psnr: image dimensions differ");
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

RgbImage synthetic_road_scene(std::uint64_t seed, int width, int height) {
    Rng rng(seed);
    RgbImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height * 3, 0);

    const int horizon = height * 2 / 5;
    const auto at = [&](int x, int y) -> std::uint8_t* {
        return &img.pixels[(static_cast<std::size_t>(y) * width + x) * 3];
    };

    // Sky gradient and road surface.
    const double sky_tint = rng.uniform(0.8, 1.1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::uint8_t* p = at(x, y);
            if (y < horizon) {
                const double f = static_cast<double>(y) / horizon;
                p[0] = static_cast<std::uint8_t>(std::clamp(120.0 + 60.0 * f, 0.0, 255.0) * sky_tint / 1.1);
                p[1] = static_cast<std::uint8_t>(std::clamp(160.0 + 50.0 * f, 0.0, 255.0) * sky_tint / 1.1);
                p[2] = static_cast<std::uint8_t>(std::clamp(220.0 - 20.0 * f, 0.0, 255.0));
            } else {
                const double f = static_cast<double>(y - horizon) / (height - horizon);
                const auto g = static_cast<std::uint8_t>(70.0 + 40.0 * f);
                p[0] = p[1] = p[2] = g;
            }
        }
    }

    // Perspective lane markings.
    const int vanish_x = width / 2 + static_cast<int>(rng.uniform(-20.0, 20.0));
    for (int lane = -1; lane <= 1; ++lane) {
        const double base_x = width / 2.0 + lane * width / 3.5;
        for (int y = horizon; y < height; ++y) {
            const double f = static_cast<double>(y - horizon) / (height - horizon);
            const int x = static_cast<int>(vanish_x + (base_x - vanish_x) * f);
            const bool dashed = lane != 0 || (y / 8) % 2 == 0;
            if (!dashed) continue;
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = x + dx;
                if (xx < 0 || xx >= width) continue;
                std::uint8_t* p = at(xx, y);
                p[0] = p[1] = 230;
                p[2] = 200;
            }
        }
    }

    // A few vehicle boxes with shading.
    const int n_cars = static_cast<int>(rng.uniform_int(2, 5));
    for (int c = 0; c < n_cars; ++c) {
        const double depth = rng.uniform(0.15, 0.9);
        const int w = static_cast<int>(width * 0.28 * depth);
        const int h = static_cast<int>(w * 0.7);
        const int cx = static_cast<int>(rng.uniform(0.15, 0.85) * width);
        const int cy = horizon + static_cast<int>((height - horizon) * depth * 0.8);
        const std::uint8_t cr = static_cast<std::uint8_t>(rng.uniform_int(40, 220));
        const std::uint8_t cg = static_cast<std::uint8_t>(rng.uniform_int(40, 220));
        const std::uint8_t cb = static_cast<std::uint8_t>(rng.uniform_int(40, 220));
        for (int y = std::max(0, cy - h); y < std::min(height, cy); ++y) {
            for (int x = std::max(0, cx - w / 2); x < std::min(width, cx + w / 2); ++x) {
                std::uint8_t* p = at(x, y);
                const double shade = 0.75 + 0.25 * (y - (cy - h)) / std::max(1, h);
                p[0] = static_cast<std::uint8_t>(cr * shade);
                p[1] = static_cast<std::uint8_t>(cg * shade);
                p[2] = static_cast<std::uint8_t>(cb * shade);
            }
        }
    }

    // Mild sensor noise.
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double noisy = img.pixels[i] + rng.normal(0.0, 2.5);
        img.pixels[i] = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
    }
    return img;
}

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          int count, std::uint64_t seed,
                                                          int width, int height) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    paths.reserve(count);
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03d.ppm", i);
        const auto path = dir / name;
        write_ppm(path, synthetic_road_scene(seed + static_cast<std::uint64_t>(i) * 7919, width,
                                             height));
        paths.push_back(path);
    }
    return paths;
}

} // namespace sbb
