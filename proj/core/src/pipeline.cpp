#include "sbb/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

#include <nlohmann/json.hpp>

#include "sbb/errors.hpp"
#include "sbb/events.hpp"

namespace sbb {

using nlohmann::json;

Trajectory load_input_trajectory(const PipelineConfig& config) {
    if (!config.trajectory_file.empty()) {
        return read_trajectory(config.trajectory_file);
    }
    if (!config.sim) throw ConfigError("pipeline: no trajectory source configured");
    GeometryConfig geo = config.geometry;
    geo.n_lanes = config.sim->n_lanes;
    geo.frame_rate = config.sim->frame_rate;
    return generate(*config.sim, geo);
}

std::vector<RecordedFrame> RecordedStream::all_frames() const {
    std::vector<RecordedFrame> out;
    for (const auto& b : buffers) out.insert(out.end(), b.frames.begin(), b.frames.end());
    std::sort(out.begin(), out.end(),
              [](const RecordedFrame& a, const RecordedFrame& b) {
                  return a.frame_index < b.frame_index;
              });
    return out;
}

namespace {

std::unique_ptr<Compressor> make_compressor(const PipelineConfig& config) {
    if (config.compressor == CompressorKind::Jpeg) return std::make_unique<JpegCompressor>();
    return std::make_unique<SyntheticCompressor>(config.curve);
}

struct ProcessedBuffer {
    RecordedStream::BufferRecord record;
    StoredBuffer stored;
};

/// Filter -> LBO -> compress for one emitted buffer.
ProcessedBuffer process_buffer(const EmittedBuffer& emitted, std::uint64_t k,
                               const ValueModel& model, const PipelineConfig& config,
                               const Compressor& compressor) {
    const std::size_t n = emitted.frames.size();
    std::vector<double> values(n), costs_mb(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = emitted.frames[i].value;
        costs_mb[i] = static_cast<double>(emitted.frames[i].frame.cost_bytes()) / 1.0e6;
    }
    const std::vector<double> v_hat =
        gaussian_filter(values, model.normal_value(), config.value.sigma_f);

    std::vector<double> decisions;
    if (config.coupled_lbo) {
        decisions = solve_coupled(v_hat, costs_mb, config.curve, config.weights).decisions;
    } else {
        decisions = solve_decoupled(v_hat, config.curve, config.weights);
    }

    ProcessedBuffer out;
    out.record.k = k;
    out.record.termination = emitted.termination;
    out.stored.id = k;
    out.stored.priority = buffer_value(k, v_hat, decisions, config.storage.aging);
    out.record.priority = out.stored.priority;
    out.stored.first_frame = emitted.frames.front().frame.frame_index;
    out.stored.last_frame = emitted.frames.back().frame.frame_index;

    for (std::size_t i = 0; i < n; ++i) {
        const ValuedFrame& vf = emitted.frames[i];
        CompressedPayload payload = compressor.compress(vf.frame, decisions[i]);

        StoredFrame sf;
        sf.frame_index = vf.frame.frame_index;
        sf.label = vf.label.kind;
        sf.v = vf.value;
        sf.v_hat = v_hat[i];
        sf.d = decisions[i];
        sf.payload = std::move(payload.bytes);
        sf.payload_bytes = sf.payload.size();

        RecordedFrame rf;
        rf.frame_index = sf.frame_index;
        rf.label = sf.label;
        rf.v_hat = sf.v_hat;
        rf.d = sf.d;
        rf.stored_bytes = sf.stored_bytes();
        out.record.frames.push_back(rf);
        out.record.raw_values.push_back(vf.value);

        if (vf.label.kind != EventKind::Normal &&
            std::find(out.stored.event_tags.begin(), out.stored.event_tags.end(),
                      vf.label.kind) == out.stored.event_tags.end()) {
            out.stored.event_tags.push_back(vf.label.kind);
        }
        out.stored.frames.push_back(std::move(sf));
    }
    return out;
}

double frame_value(const EventLabel& label, const ValueModel& model) {
    if (label.kind == EventKind::Cutin) {
        if (!model.range_model) {
            throw ConfigError("pipeline: cutin observed but the model has no range model");
        }
        return cutin_value(label.cutin_range.value(), *model.range_model, model.priors);
    }
    return event_value(label, model.priors);
}

} // namespace

RecordedStream run_recorder(std::span<const FrameRecord> frames, const ValueModel& model,
                            const PipelineConfig& config) {
    model.validate();
    TrackerConfig tcfg = config.tracker;
    tcfg.v_normal = model.normal_value();
    Tracker tracker(tcfg);
    const auto compressor = make_compressor(config);

    RecordedStream stream;
    stream.input_frames = frames.size();
    std::uint64_t next_k = 1;

    const auto handle_emitted = [&](const EmittedBuffer& emitted) {
        ProcessedBuffer pb =
            process_buffer(emitted, next_k++, model, config, *compressor);
        stream.buffers.push_back(std::move(pb.record));
    };

    std::int64_t stage_index = -1;
    const char* stage = "detect";
    try {
        const FrameRecord* prev = nullptr;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            stage_index = frames[i].frame_index;
            stage = "detect";
            const EventLabel label = detect(frames[i], prev, config.geometry);
            stream.labels.push_back(label);
            if (label.is_eoi()) stream.eoi_indices.push_back(frames[i].frame_index);
            prev = &frames[i];

            stage = "value";
            ValuedFrame vf;
            vf.frame = frames[i];
            vf.label = label;
            vf.value = frame_value(label, model);

            stage = "features";
            vf.features = build_feature_vector(frames[i], model.bounds);

            stage = "track";
            for (int attempt = 0; attempt < 2; ++attempt) {
                const BufferStats* src = tracker.similarity_source();
                vf.xi = src != nullptr ? similarity(vf.features, *src) : 1.0;
                Tracker::StepResult res = tracker.step(vf);
                if (res.emitted) handle_emitted(*res.emitted);
                if (res.frame_consumed) break;
                // A size termination re-presents the frame to the fresh cycle.
            }
        }
        stage = "finalize";
        stage_index = frames.empty() ? -1 : frames.back().frame_index;
        Tracker::FinishResult fin = tracker.finish();
        if (fin.emitted) handle_emitted(*fin.emitted);
        stream.dropped_frames = fin.dropped.size();
    } catch (const std::exception& e) {
        throw DataError("pipeline stage '" + std::string(stage) + "' failed at frame " +
                        std::to_string(stage_index) + ": " + e.what());
    }
    return stream;
}

RecordOutcome run_record(const PipelineConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    const ValueModel model = load_value_model(config.model_file);
    const Trajectory traj = load_input_trajectory(config);

    std::filesystem::create_directories(out_dir);
    save_pipeline_config(out_dir / "resolved_config.json", config);

    const RecordedStream stream = run_recorder(traj.frames, model, config);

    BufferStore store(out_dir, config.storage, EvictionPolicy::Prioritized);
    RecordOutcome outcome;
    outcome.storage_dir = out_dir;
    outcome.buffers_emitted = stream.buffers.size();

    // Rebuild stored buffers from the recorded stream (the recorder is pure;
    // storage owns durability). Compression is deterministic, so compressing
    // again here is exact.
    const auto compressor = make_compressor(config);
    std::map<std::int64_t, const FrameRecord*> by_index;
    for (const FrameRecord& f : traj.frames) by_index[f.frame_index] = &f;
    for (const auto& b : stream.buffers) {
        StoredBuffer sb;
        sb.id = b.k;
        sb.priority = b.priority;
        sb.first_frame = b.frames.front().frame_index;
        sb.last_frame = b.frames.back().frame_index;
        for (std::size_t i = 0; i < b.frames.size(); ++i) {
            const RecordedFrame& rf = b.frames[i];
            StoredFrame sf;
            sf.frame_index = rf.frame_index;
            sf.label = rf.label;
            sf.v = b.raw_values[i];
            sf.v_hat = rf.v_hat;
            sf.d = rf.d;
            sf.payload = compressor->compress(*by_index.at(rf.frame_index), rf.d).bytes;
            sf.payload_bytes = sf.payload.size();
            if (rf.label != EventKind::Normal &&
                std::find(sb.event_tags.begin(), sb.event_tags.end(), rf.label) ==
                    sb.event_tags.end()) {
                sb.event_tags.push_back(rf.label);
            }
            sb.frames.push_back(std::move(sf));
        }
        const auto push = store.push(std::move(sb));
        outcome.evicted.insert(outcome.evicted.end(), push.evicted.begin(), push.evicted.end());
    }

    // Report over what survived.
    std::vector<RecordedFrame> recorded;
    for (const StoredFrame* sf : store.live_frames()) {
        recorded.push_back({sf->frame_index, sf->label, sf->v_hat, sf->d, sf->stored_bytes()});
    }
    if (!recorded.empty()) {
        outcome.report = compute_report(recorded, stream.eoi_indices);
    }

    json report_json{{"frames", outcome.report.frames},
                     {"avpf", outcome.report.avpf},
                     {"ampf", outcome.report.ampf},
                     {"vpm", outcome.report.vpm},
                     {"vpm_defined", outcome.report.vpm_defined},
                     {"buffers_emitted", outcome.buffers_emitted},
                     {"buffers_evicted", outcome.evicted.size()}};
    json per_event = json::object();
    for (EventKind k : kAllEventKinds) {
        const auto& s = outcome.report.stats(k);
        per_event[to_string(k)] = {{"count", s.count}, {"mean_d", s.mean_d}, {"std_d", s.std_d}};
    }
    report_json["per_event"] = std::move(per_event);
    json context = json::array();
    for (const auto& c : outcome.report.context) {
        context.push_back({{"range", c.range},
                           {"quantity_pct", c.quantity_pct},
                           {"storage_pct", c.storage_pct}});
    }
    report_json["context"] = std::move(context);
    std::ofstream rep(out_dir / "report.json");
    rep << report_json.dump(2) << '\n';

    return outcome;
}

std::vector<SweepRow> run_sweep(const PipelineConfig& config, std::span<const double> etas,
                                std::span<const double> zetas) {
    if (etas.empty() || zetas.empty()) throw ConfigError("sweep: empty grid");
    const ValueModel model = load_value_model(config.model_file);
    const Trajectory traj = load_input_trajectory(config);

    struct Point {
        double eta, zeta;
    };
    std::vector<Point> grid;
    for (double e : etas) {
        for (double z : zetas) grid.push_back({e, z});
    }

    std::vector<SweepRow> rows(grid.size());
    const auto worker = [&](std::size_t i) {
        PipelineConfig local = config;
        local.weights = {grid[i].eta, grid[i].zeta};
        const RecordedStream stream = run_recorder(traj.frames, model, local);
        const auto frames = stream.all_frames();
        SweepRow row{grid[i].eta, grid[i].zeta, 0.0, 0.0, 0.0};
        if (!frames.empty()) {
            const RecordingReport report = compute_report(frames, stream.eoi_indices);
            row.avpf = report.avpf;
            row.ampf = report.ampf;
            row.vpm = report.vpm_defined ? report.vpm : 0.0;
        }
        rows[i] = row;
    };

    const std::size_t workers =
        std::min<std::size_t>(grid.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) {
                worker(i);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return rows;
}

std::vector<CompareOutcome> run_compare(const PipelineConfig& config,
                                        std::span<const std::uint64_t> budgets) {
    const ValueModel model = load_value_model(config.model_file);
    const Trajectory traj = load_input_trajectory(config);
    const RecordedStream stream = run_recorder(traj.frames, model, config);

    std::vector<EventKind> ground_truth;
    ground_truth.reserve(stream.labels.size());
    for (const EventLabel& l : stream.labels) ground_truth.push_back(l.kind);

    std::vector<CompareOutcome> outcomes;
    for (std::uint64_t budget : budgets) {
        // Identical buffer stream into both policies.
        std::map<std::string, std::vector<RecordedFrame>> recordings;
        for (EvictionPolicy policy : {EvictionPolicy::Prioritized, EvictionPolicy::Fifo}) {
            MinHeap heap;
            std::vector<HeapEntry> fifo;
            std::map<std::uint64_t, const RecordedStream::BufferRecord*> live;
            for (const auto& b : stream.buffers) {
                std::uint64_t bytes = 0;
                for (const auto& f : b.frames) bytes += f.stored_bytes;
                const HeapEntry entry{b.priority, b.k, bytes};
                live[b.k] = &b;
                const EvictionOutcome out =
                    policy == EvictionPolicy::Prioritized
                        ? heap_push_with_budget(heap, entry, budget)
                        : fifo_push_with_budget(fifo, entry, budget);
                for (std::uint64_t id : out.evicted) live.erase(id);
            }
            std::vector<RecordedFrame> frames;
            for (const auto& [id, b] : live) {
                frames.insert(frames.end(), b->frames.begin(), b->frames.end());
            }
            recordings[policy == EvictionPolicy::Prioritized ? "prioritized" : "fifo"] =
                std::move(frames);
        }
        CompareOutcome outcome;
        outcome.budget = budget;
        outcome.table = capture_table(recordings, ground_truth);
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

} // namespace sbb
