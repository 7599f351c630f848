#include "sbb/tracker.hpp"

#include <stdexcept>

#include "sbb/errors.hpp"

namespace sbb {

const char* to_string(DmmState s) {
    switch (s) {
        case DmmState::Active: return "active";
        case DmmState::Buffering: return "buffering";
        case DmmState::Waiting: return "waiting";
        case DmmState::Terminate: return "terminate";
    }
    return "?";
}

const char* to_string(DmmInput e) {
    static const char* names[] = {"e1", "e2", "e3", "e4", "e5", "e6"};
    return names[static_cast<int>(e) - 1];
}

const char* to_string(DmmAction a) {
    static const char* names[] = {"a1", "a2", "a3", "a4", "a5", "a6", "a7"};
    return names[static_cast<int>(a) - 1];
}

void TrackerConfig::validate() const {
    if (!(t_maj > min_pre)) throw ConfigError("tracker: T_maj must be > L");
    if (min_pre < 0) throw ConfigError("tracker: L must be >= 0");
    if (t_wait < 1) throw ConfigError("tracker: T_wait must be >= 1");
    if (!(xi0 > 0.0 && xi0 < 1.0)) throw ConfigError("tracker: xi0 must lie in (0, 1)");
    if (!(v_normal >= 0.0)) throw ConfigError("tracker: v_normal must be >= 0");
}

DmmInput classify_input(double xi, double v, std::size_t wait_size, std::size_t maj_size,
                        const TrackerConfig& cfg) {
    // Size terminations take precedence; they cannot actually co-trigger
    // because the wait buffer is empty while buffering and the major buffer is
    // frozen while waiting.
    if (maj_size >= static_cast<std::size_t>(cfg.t_maj)) return DmmInput::E5;
    if (wait_size >= static_cast<std::size_t>(cfg.t_wait)) return DmmInput::E6;
    const bool similar = xi > cfg.xi0;
    const bool valuable = v > cfg.v_normal;
    if (!similar && !valuable) return DmmInput::E1;
    if (!similar && valuable) return DmmInput::E2;
    if (similar && !valuable) return DmmInput::E3;
    return DmmInput::E4;
}

Transition dmm_transition(DmmState state, DmmInput input) {
    switch (state) {
        case DmmState::Active:
            switch (input) {
                case DmmInput::E2:
                case DmmInput::E4: return {DmmState::Buffering, DmmAction::A1};
                case DmmInput::E1:
                case DmmInput::E3: return {DmmState::Waiting, DmmAction::A2};
                default: break;
            }
            break;
        case DmmState::Buffering:
            switch (input) {
                case DmmInput::E2:
                case DmmInput::E3:
                case DmmInput::E4: return {DmmState::Buffering, DmmAction::A3};
                case DmmInput::E1: return {DmmState::Waiting, DmmAction::A5};
                case DmmInput::E5: return {DmmState::Terminate, DmmAction::A6};
                default: break;
            }
            break;
        case DmmState::Waiting:
            switch (input) {
                case DmmInput::E1:
                case DmmInput::E3: return {DmmState::Waiting, DmmAction::A5};
                case DmmInput::E2:
                case DmmInput::E4: return {DmmState::Buffering, DmmAction::A4};
                case DmmInput::E6: return {DmmState::Terminate, DmmAction::A7};
                default: break;
            }
            break;
        case DmmState::Terminate:
            break;
    }
    throw std::logic_error(std::string("dmm: no transition from ") + to_string(state) +
                           " on " + to_string(input));
}

namespace {

std::size_t pre_carve_size(std::size_t maj, std::size_t wait, const TrackerConfig& cfg) {
    const std::size_t total = maj + wait;
    const std::size_t overflow =
        total > static_cast<std::size_t>(cfg.t_maj) ? total - static_cast<std::size_t>(cfg.t_maj) : 0;
    return std::max<std::size_t>(static_cast<std::size_t>(cfg.min_pre), overflow);
}

} // namespace

FinalizeResult finalize_buffers(DmmAction action, std::vector<ValuedFrame> major,
                                std::vector<ValuedFrame> wait, const TrackerConfig& cfg) {
    if (action != DmmAction::A6 && action != DmmAction::A7) {
        throw std::logic_error("finalize_buffers: only a6/a7 terminate");
    }
    FinalizeResult result;
    const std::size_t pre_size = pre_carve_size(major.size(), wait.size(), cfg);
    if (action == DmmAction::A6) {
        // Tail of the major buffer becomes the next precursor.
        const std::size_t carve = std::min(pre_size, major.size());
        result.next_pre.assign(major.end() - static_cast<std::ptrdiff_t>(carve), major.end());
        major.resize(major.size() - carve);
        result.emitted = std::move(major);
    } else {
        // Latest part of the wait buffer carries forward; its head fills the
        // major buffer up to capacity.
        const std::size_t carve = std::min(pre_size, wait.size());
        const std::size_t head = wait.size() - carve;
        result.next_pre.assign(wait.end() - static_cast<std::ptrdiff_t>(carve), wait.end());
        major.insert(major.end(), wait.begin(), wait.begin() + static_cast<std::ptrdiff_t>(head));
        result.emitted = std::move(major);
    }
    return result;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const BufferStats* Tracker::similarity_source() const {
    if (major_stats_.count > 0) return &major_stats_;
    if (wait_stats_.count > 0) return &wait_stats_;
    if (pre_stats_.count > 0) return &pre_stats_;
    return nullptr;
}

void Tracker::splice_pre_into(std::vector<ValuedFrame>& target, BufferStats& stats) {
    for (ValuedFrame& f : pre_) {
        stats.add(f.features);
        target.push_back(std::move(f));
    }
    pre_.clear();
    pre_stats_.reset();
}

void Tracker::append_major(const ValuedFrame& f) {
    major_stats_.add(f.features);
    major_.push_back(f);
}

void Tracker::append_wait(const ValuedFrame& f) {
    wait_stats_.add(f.features);
    wait_.push_back(f);
}

void Tracker::set_pre(std::vector<ValuedFrame> frames) {
    pre_ = std::move(frames);
    pre_stats_.reset();
    for (const ValuedFrame& f : pre_) pre_stats_.add(f.features);
}

EmittedBuffer Tracker::terminate_cycle(DmmAction action) {
    FinalizeResult fin = finalize_buffers(action, std::move(major_), std::move(wait_), cfg_);
    major_.clear();
    wait_.clear();
    major_stats_.reset();
    wait_stats_.reset();
    set_pre(std::move(fin.next_pre));
    state_ = DmmState::Active;
    EmittedBuffer out;
    out.frames = std::move(fin.emitted);
    out.termination = action == DmmAction::A6 ? Termination::MajorFull : Termination::WaitTimeout;
    return out;
}

void Tracker::trace(const ValuedFrame& f, DmmInput in, DmmState before, DmmAction action) {
    if (trace_) {
        trace_(TraceRow{f.frame.frame_index, f.xi, f.value, in, before, state_, action});
    }
}

Tracker::StepResult Tracker::step(const ValuedFrame& frame) {
    StepResult result;
    const DmmState before = state_;
    const DmmInput input = classify_input(frame.xi, frame.value, wait_.size(), major_.size(), cfg_);
    const Transition tr = dmm_transition(state_, input);
    state_ = tr.next;

    switch (tr.action) {
        case DmmAction::A1:
            splice_pre_into(major_, major_stats_);
            append_major(frame);
            break;
        case DmmAction::A2:
            splice_pre_into(wait_, wait_stats_);
            append_wait(frame);
            break;
        case DmmAction::A3:
            append_major(frame);
            break;
        case DmmAction::A4:
            for (ValuedFrame& w : wait_) {
                major_stats_.add(w.features);
                major_.push_back(std::move(w));
            }
            wait_.clear();
            wait_stats_.reset();
            append_major(frame);
            break;
        case DmmAction::A5:
            append_wait(frame);
            break;
        case DmmAction::A6:
        case DmmAction::A7:
            // Size termination: the triggering frame is not consumed; it
            // belongs to the next cycle and must be presented again with a
            // fresh similarity.
            trace(frame, input, before, tr.action);
            result.frame_consumed = false;
            if (EmittedBuffer out = terminate_cycle(tr.action); !out.frames.empty()) {
                result.emitted = std::move(out);
            }
            return result;
    }
    trace(frame, input, before, tr.action);

    // A resume splice can overflow the major buffer past capacity; terminate
    // eagerly so capacity holds at every step boundary. Equivalent to the
    // lazy e5 on the next frame (same carve, same emitted run).
    if (tr.action == DmmAction::A4 &&
        major_.size() >= static_cast<std::size_t>(cfg_.t_maj)) {
        TraceRow row{frame.frame.frame_index, frame.xi, frame.value, DmmInput::E5,
                     state_, DmmState::Terminate, DmmAction::A6};
        if (trace_) trace_(row);
        if (EmittedBuffer out = terminate_cycle(DmmAction::A6); !out.frames.empty()) {
            result.emitted = std::move(out);
        }
    }
    return result;
}

Tracker::FinishResult Tracker::finish() {
    FinishResult result;
    if (state_ == DmmState::Waiting && !wait_.empty()) {
        // End-of-stream from the waiting state: the wait head joins the major
        // buffer as in a7, the carve is dropped.
        const std::size_t pre_size = pre_carve_size(major_.size(), wait_.size(), cfg_);
        const std::size_t carve = std::min(pre_size, wait_.size());
        const std::size_t head = wait_.size() - carve;
        for (std::size_t i = 0; i < head; ++i) major_.push_back(std::move(wait_[i]));
        for (std::size_t i = head; i < wait_.size(); ++i)
            result.dropped.push_back(std::move(wait_[i]));
        wait_.clear();
    } else if (!major_.empty()) {
        // a6 semantics: carve the would-be precursor and drop it.
        const std::size_t pre_size = pre_carve_size(major_.size(), wait_.size(), cfg_);
        const std::size_t carve = std::min(pre_size, major_.size());
        for (std::size_t i = major_.size() - carve; i < major_.size(); ++i)
            result.dropped.push_back(std::move(major_[i]));
        major_.resize(major_.size() - carve);
    }
    for (ValuedFrame& f : pre_) result.dropped.push_back(std::move(f));
    pre_.clear();
    if (!major_.empty()) {
        EmittedBuffer out;
        out.frames = std::move(major_);
        out.termination = Termination::EndOfStream;
        result.emitted = std::move(out);
    }
    major_.clear();
    wait_.clear();
    major_stats_.reset();
    wait_stats_.reset();
    pre_stats_.reset();
    state_ = DmmState::Terminate;
    return result;
}

} // namespace sbb
