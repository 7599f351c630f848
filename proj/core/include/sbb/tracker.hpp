#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sbb/similarity.hpp"
#include "sbb/types.hpp"

namespace sbb {

enum class DmmState { Active, Buffering, Waiting, Terminate };
enum class DmmInput { E1 = 1, E2, E3, E4, E5, E6 };
enum class DmmAction { A1 = 1, A2, A3, A4, A5, A6, A7 };

const char* to_string(DmmState s);
const char* to_string(DmmInput e);
const char* to_string(DmmAction a);

struct TrackerConfig {
    int t_maj = 600;       // max major buffer length, frames
    int t_wait = 30;       // max waiting time, frames
    int min_pre = 20;      // L, minimum precursor buffer length
    double xi0 = 0.5;      // similarity threshold
    double v_normal = 0.009227;  // v(normal): the EOI value threshold

    void validate() const;
};

/// A frame annotated with everything the DMM consumed when it was tracked.
/// value_filtered is filled in after the owning buffer is emitted.
struct ValuedFrame {
    FrameRecord frame;
    FeatureVector features{};
    EventLabel label;
    double value = 0.0;           // raw v_t
    double xi = 1.0;              // similarity at tracking time
    double value_filtered = 0.0;  // v_hat after Gaussian filtering
};

enum class BufferRole { Pre, Major, Wait };

/// Ordered frame run with its DMM role.
struct LocalBuffer {
    BufferRole role = BufferRole::Major;
    std::vector<ValuedFrame> frames;
};

/// How an emitted buffer's tracking cycle ended.
enum class Termination { MajorFull, WaitTimeout, EndOfStream };

struct EmittedBuffer {
    std::vector<ValuedFrame> frames;
    Termination termination = Termination::MajorFull;
};

/// Input symbol per the DMM alphabet: size terminations first (E5 before E6),
/// otherwise the (xi <= xi0, v <= v_normal) truth table.
DmmInput classify_input(double xi, double v, std::size_t wait_size, std::size_t maj_size,
                        const TrackerConfig& cfg);

/// Transition and output function, exactly the published tables. Throws
/// std::logic_error for pairs unreachable under classify_input
/// ((Buffering, E6), (Waiting, E5), and size inputs in Active).
struct Transition {
    DmmState next;
    DmmAction action;
};
Transition dmm_transition(DmmState state, DmmInput input);

/// Terminating buffer split. Carves |B_pre| = max(L, |maj| + |wait| - T_maj)
/// frames for the next cycle: from the tail of the major buffer on A6, from
/// the tail of the wait buffer on A7 (whose remaining head is first appended
/// to the major buffer). The emitted run may be empty when everything is
/// carried forward.
struct FinalizeResult {
    std::vector<ValuedFrame> emitted;
    std::vector<ValuedFrame> next_pre;
};
FinalizeResult finalize_buffers(DmmAction action, std::vector<ValuedFrame> major,
                                std::vector<ValuedFrame> wait, const TrackerConfig& cfg);

/// One line of the transition trace, for audit and test replay.
struct TraceRow {
    std::int64_t frame_index;
    double xi;
    double v;
    DmmInput input;
    DmmState state_before;
    DmmState state_after;
    DmmAction action;
};

/// The stream segmentation machine. One instance tracks one frame stream.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    /// Statistics source for the next frame's similarity: the major buffer if
    /// nonempty, else the wait buffer, else the precursor buffer; nullptr when
    /// everything is empty (similarity defaults to 1).
    const BufferStats* similarity_source() const;

    struct StepResult {
        bool frame_consumed = true;
        std::optional<EmittedBuffer> emitted;
    };

    /// Processes one frame. When the input symbol terminates the cycle the
    /// frame is NOT consumed: the finished buffer is returned and the caller
    /// must recompute similarity against the fresh cycle and present the
    /// frame again (at most once; a fresh cycle cannot terminate).
    StepResult step(const ValuedFrame& frame);

    /// Force-terminates at end of stream. Emits the remaining major buffer
    /// under the usual carve; carved/remaining frames are returned in
    /// `dropped` (they belong to no emitted buffer).
    struct FinishResult {
        std::optional<EmittedBuffer> emitted;
        std::vector<ValuedFrame> dropped;
    };
    FinishResult finish();

    DmmState state() const { return state_; }
    std::size_t major_size() const { return major_.size(); }
    std::size_t wait_size() const { return wait_.size(); }
    std::size_t pre_size() const { return pre_.size(); }

    void set_trace(std::function<void(const TraceRow&)> sink) { trace_ = std::move(sink); }

private:
    void splice_pre_into(std::vector<ValuedFrame>& target, BufferStats& stats);
    void append_major(const ValuedFrame& f);
    void append_wait(const ValuedFrame& f);
    EmittedBuffer terminate_cycle(DmmAction action);
    void set_pre(std::vector<ValuedFrame> frames);
    void trace(const ValuedFrame& f, DmmInput in, DmmState before, DmmAction action);

    TrackerConfig cfg_;
    DmmState state_ = DmmState::Active;
    std::vector<ValuedFrame> pre_, major_, wait_;
    BufferStats pre_stats_, major_stats_, wait_stats_;
    std::function<void(const TraceRow&)> trace_;
};

} // namespace sbb
