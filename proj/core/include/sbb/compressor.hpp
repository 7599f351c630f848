#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sbb/lbo.hpp"
#include "sbb/types.hpp"

namespace sbb {

struct CompressedPayload {
    std::vector<std::uint8_t> bytes;
    double quality_used = 0.0;
    std::uint64_t original_size = 0;
    double achieved_ratio = 0.0;  // compressed/original
};

/// Maps a quality decision d in [0,1] to stored payload bytes. d = 0 is a
/// thumbnail-quality floor, never deletion (discarding data is the storage
/// layer's job).
class Compressor {
public:
    virtual ~Compressor() = default;
    virtual CompressedPayload compress(const FrameRecord& frame, double d) const = 0;
    virtual std::string name() const = 0;
};

/// Emits a descriptor of exactly round(raw_size * phi(d)) deterministic filler
/// bytes, making storage accounting analytically checkable.
class SyntheticCompressor final : public Compressor {
public:
    explicit SyntheticCompressor(QualityRatioCurve curve) : curve_(curve) {}
    CompressedPayload compress(const FrameRecord& frame, double d) const override;
    std::string name() const override { return "synthetic"; }
    const QualityRatioCurve& curve() const { return curve_; }

private:
    QualityRatioCurve curve_;
};

/// JPEG-encodes image payloads at encoder quality round(1 + 99 d).
class JpegCompressor final : public Compressor {
public:
    CompressedPayload compress(const FrameRecord& frame, double d) const override;
    std::string name() const override { return "jpeg"; }
};

/// Mean size ratio per quality level across a corpus, input for
/// fit_quality_ratio. Default grid: {0.05, 0.1, 0.2, ..., 1.0}.
std::vector<QualityRatioSample> sample_curve(const Compressor& compressor,
                                             std::span<const FrameRecord> corpus,
                                             std::span<const double> qualities = {});

/// Frame records wrapping every image file of a flat corpus directory.
std::vector<FrameRecord> image_corpus_frames(const std::filesystem::path& dir);

} // namespace sbb
