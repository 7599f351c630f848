#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbb/compressor.hpp"
#include "sbb/lbo.hpp"
#include "sbb/metrics.hpp"
#include "sbb/model_file.hpp"
#include "sbb/storage.hpp"
#include "sbb/tracker.hpp"
#include "sbb/trafficgen.hpp"
#include "sbb/value.hpp"

namespace sbb {

enum class CompressorKind { Synthetic, Jpeg };

/// Everything one recorder run needs. Loaded from a JSON document plus flag
/// overrides; the resolved copy is written next to the outputs.
struct PipelineConfig {
    GeometryConfig geometry;
    TrackerConfig tracker;
    LboWeights weights;
    QualityRatioCurve curve;
    StorageConfig storage;
    ValueConfig value;

    std::string model_file;          // priors + range model + bounds document
    CompressorKind compressor = CompressorKind::Synthetic;
    bool coupled_lbo = false;        // default decoupled (real-time intent)

    std::string trajectory_file;     // one of trajectory_file / sim must be set
    std::optional<SimConfig> sim;

    void validate() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void save_pipeline_config(const std::filesystem::path& path, const PipelineConfig& config);

/// In-memory result of running the recorder over one stream (no storage
/// budget applied): every frame with its filtered value, decision and
/// compressed size, grouped by emitted buffer.
struct RecordedStream {
    struct BufferRecord {
        std::uint64_t k = 0;
        Termination termination = Termination::MajorFull;
        double priority = 0.0;          // V*_B
        std::vector<RecordedFrame> frames;
        std::vector<double> raw_values; // v_t per frame, pre-filter
    };
    std::vector<BufferRecord> buffers;
    std::vector<EventLabel> labels;           // ground truth per input frame
    std::vector<std::int64_t> eoi_indices;    // ground truth EOI frame indices
    std::size_t input_frames = 0;
    std::size_t dropped_frames = 0;           // end-of-stream precursor carve

    std::vector<RecordedFrame> all_frames() const;
};

/// detect -> value -> similarity -> DMM -> filter -> LBO -> compress, per the
/// recorder flow, without long-term storage. The building block for reports,
/// sweeps and policy comparisons.
RecordedStream run_recorder(std::span<const FrameRecord> frames, const ValueModel& model,
                            const PipelineConfig& config);

struct RecordOutcome {
    RecordingReport report;
    std::filesystem::path storage_dir;
    std::size_t buffers_emitted = 0;
    std::vector<std::uint64_t> evicted;
};

/// Full run: recorder + prioritized storage under the configured budget,
/// durable under out_dir (payloads/, manifest.log, resolved_config.json,
/// report.json). Deterministic for a fixed config and seed.
RecordOutcome run_record(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct SweepRow {
    double eta = 0.0;
    double zeta = 0.0;
    double avpf = 0.0;
    double ampf = 0.0;
    double vpm = 0.0;
};

/// One full recording per grid point, storage unlimited, parallel across
/// points. Rows ordered by (eta, zeta) grid order.
std::vector<SweepRow> run_sweep(const PipelineConfig& config, std::span<const double> etas,
                                std::span<const double> zetas);

struct CompareOutcome {
    std::uint64_t budget = 0;
    CaptureTable table;
};

/// Feeds the identical recorded stream to prioritized and FIFO storage at each
/// budget and tabulates per-event recorded frame counts.
std::vector<CompareOutcome> run_compare(const PipelineConfig& config,
                                        std::span<const std::uint64_t> budgets);

/// Loads the configured trajectory (file or generator).
Trajectory load_input_trajectory(const PipelineConfig& config);

} // namespace sbb
