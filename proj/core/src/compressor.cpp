#include "sbb/compressor.hpp"

#include <algorithm>
#include <cmath>

#include "sbb/errors.hpp"
#include "sbb/image.hpp"

namespace sbb {

namespace {

void check_quality(double d) {
    if (!(d >= 0.0 && d <= 1.0)) {
        throw std::invalid_argument("compress: quality must lie in [0, 1]");
    }
}

} // namespace

CompressedPayload SyntheticCompressor::compress(const FrameRecord& frame, double d) const {
    check_quality(d);
    CompressedPayload out;
    out.quality_used = d;
    out.original_size = frame.raw_size;
    const auto size = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(frame.raw_size) * curve_.ratio(d)));
    out.bytes.resize(size);
    // Deterministic filler derived from the frame index.
    const auto base = static_cast<std::uint8_t>(frame.frame_index * 131 + 7);
    for (std::size_t i = 0; i < out.bytes.size(); ++i) {
        out.bytes[i] = static_cast<std::uint8_t>(base + i * 29);
    }
    out.achieved_ratio = frame.raw_size == 0
                             ? 0.0
                             : static_cast<double>(size) / static_cast<double>(frame.raw_size);
    return out;
}

CompressedPayload JpegCompressor::compress(const FrameRecord& frame, double d) const {
    check_quality(d);
    if (frame.payload.kind != PayloadKind::Image) {
        throw DataError("jpeg compressor: frame " + std::to_string(frame.frame_index) +
                        " has no image payload");
    }
    const RgbImage img = read_ppm(frame.payload.path);
    // d = 0 still stores a thumbnail-quality floor; deletion is not ours.
    const int encoder_quality = static_cast<int>(std::lround(1.0 + 99.0 * d));
    CompressedPayload out;
    out.bytes = jpeg_encode(img, encoder_quality);
    out.quality_used = d;
    out.original_size = img.raw_bytes();
    out.achieved_ratio =
        static_cast<double>(out.bytes.size()) / static_cast<double>(out.original_size);
    return out;
}

std::vector<QualityRatioSample> sample_curve(const Compressor& compressor,
                                             std::span<const FrameRecord> corpus,
                                             std::span<const double> qualities) {
    if (corpus.empty()) throw DataError("sample_curve: empty corpus");
    static const std::vector<double> default_grid = {0.05, 0.1, 0.2, 0.3, 0.4,
                                                     0.5,  0.6, 0.7, 0.8, 0.9, 1.0};
    const std::span<const double> grid =
        qualities.empty() ? std::span<const double>(default_grid) : qualities;
    std::vector<QualityRatioSample> samples;
    samples.reserve(grid.size());
    for (double q : grid) {
        double sum = 0.0;
        for (const FrameRecord& f : corpus) {
            sum += compressor.compress(f, q).achieved_ratio;
        }
        samples.push_back({q, sum / static_cast<double>(corpus.size())});
    }
    return samples;
}

std::vector<FrameRecord> image_corpus_frames(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("image corpus: no .ppm files under " + dir.string());
    std::vector<FrameRecord> frames;
    frames.reserve(files.size());
    std::int64_t index = 0;
    for (const auto& path : files) {
        const RgbImage img = read_ppm(path);
        FrameRecord f;
        f.frame_index = index++;
        f.payload.kind = PayloadKind::Image;
        f.payload.path = path.string();
        f.payload.size = img.raw_bytes();
        f.raw_size = img.raw_bytes();
        frames.push_back(std::move(f));
    }
    return frames;
}

} // namespace sbb
