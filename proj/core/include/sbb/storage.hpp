#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbb/types.hpp"

namespace sbb {

struct StorageConfig {
    std::uint64_t budget = 500ull * 1024 * 1024;  // M, bytes
    double aging = 1e-4;                          // lambda, (0, 0.01]

    void validate() const;
};

/// (1 + lambda)^k * max_i(v_hat_i * d_i).
double buffer_value(std::uint64_t k, std::span<const double> v_hat,
                    std::span<const double> decisions, double aging);

struct StoredFrame {
    std::int64_t frame_index = 0;
    EventKind label = EventKind::Normal;
    double v = 0.0;
    double v_hat = 0.0;
    double d = 0.0;
    std::uint64_t payload_bytes = 0;        // 0 when reference
    bool is_reference = false;              // payload lives in another buffer
    std::uint64_t reference_buffer = 0;     // owning buffer id when reference
    std::vector<std::uint8_t> payload;      // empty when reference

    /// Accounted bytes: payload plus fixed metadata overhead.
    std::uint64_t stored_bytes() const { return payload_bytes + kFrameMetadataBytes; }
};

struct StoredBuffer {
    std::uint64_t id = 0;        // monotone, never reused
    double priority = 0.0;       // V*_B
    std::vector<StoredFrame> frames;
    std::vector<EventKind> event_tags;  // distinct kinds present
    std::int64_t first_frame = 0;
    std::int64_t last_frame = 0;

    std::uint64_t total_bytes() const;
};

// ---------------------------------------------------------------------------
// Pure eviction logic (no I/O), exhaustively testable.
// ---------------------------------------------------------------------------

struct HeapEntry {
    double priority = 0.0;
    std::uint64_t id = 0;
    std::uint64_t size = 0;
};

/// Binary min-heap keyed by (priority, id): equal priorities pop the smaller
/// (older) id first.
class MinHeap {
public:
    void push(const HeapEntry& entry);
    HeapEntry pop_min();
    const HeapEntry& peek_min() const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    std::uint64_t total_size() const { return total_size_; }
    /// Structural check: parent key <= child keys everywhere.
    bool heap_property_holds() const;
    std::vector<HeapEntry> snapshot() const { return entries_; }

private:
    static bool less(const HeapEntry& a, const HeapEntry& b);
    void sift_up(std::size_t i);
    void sift_down(std::size_t i);
    std::vector<HeapEntry> entries_;
    std::uint64_t total_size_ = 0;
};

struct EvictionOutcome {
    std::vector<std::uint64_t> evicted;
    bool oversize = false;  // a single buffer exceeds the budget and was kept
};

/// Priority-queue logic: push, then pop-min while over budget. A terminal
/// single over-budget buffer is kept and flagged oversize.
EvictionOutcome heap_push_with_budget(MinHeap& heap, const HeapEntry& entry,
                                      std::uint64_t budget);

/// FIFO baseline: evict oldest (insertion order) while over budget.
EvictionOutcome fifo_push_with_budget(std::vector<HeapEntry>& queue, const HeapEntry& entry,
                                      std::uint64_t budget);

// ---------------------------------------------------------------------------
// Durable store: payload files plus an append-only manifest.
// ---------------------------------------------------------------------------

enum class EvictionPolicy { Prioritized, Fifo };

struct LoadIssue {
    std::uint64_t buffer_id = 0;
    std::string what;
};

/// Long-term finite storage. One payload file per buffer under
/// dir/payloads/, one STORE/EVICT/UPDATE record per event in dir/manifest.log.
/// Duplicate frame indices (precursor carries) are deduplicated: the payload
/// is kept once at the higher quality, the other copy holds a reference.
class BufferStore {
public:
    BufferStore(std::filesystem::path dir, StorageConfig cfg,
                EvictionPolicy policy = EvictionPolicy::Prioritized);

    struct PushResult {
        std::vector<std::uint64_t> evicted;
        bool oversize = false;
    };

    /// Assigns the next id if buffer.id is 0 and the store is nonempty-aware;
    /// persists payloads, appends the manifest record, applies the budget.
    PushResult push(StoredBuffer buffer);

    std::uint64_t total_bytes() const;
    std::size_t buffer_count() const;
    std::vector<std::uint64_t> live_ids() const;
    const StoredBuffer* find(std::uint64_t id) const;

    /// Ids in the order the policy would discard them.
    std::vector<std::uint64_t> eviction_order() const;

    const std::filesystem::path& directory() const { return dir_; }
    const std::vector<LoadIssue>& load_issues() const { return issues_; }

    /// All live frames, stream order, for report computation.
    std::vector<const StoredFrame*> live_frames() const;

    static BufferStore load(const std::filesystem::path& dir, StorageConfig cfg,
                            EvictionPolicy policy = EvictionPolicy::Prioritized);

    /// Rewrites the manifest dropping tombstoned entries.
    static void compact_manifest(const std::filesystem::path& dir);

private:
    void persist_buffer(const StoredBuffer& buffer);
    void rewrite_buffer(const StoredBuffer& buffer);
    void delete_buffer_payloads(std::uint64_t id);
    void append_manifest(const std::string& line);
    void apply_budget(PushResult& result);
    std::filesystem::path payload_path(std::uint64_t id) const;

    std::filesystem::path dir_;
    StorageConfig cfg_;
    EvictionPolicy policy_;
    std::map<std::uint64_t, StoredBuffer> buffers_;          // live, by id
    std::vector<std::uint64_t> insertion_order_;             // for FIFO
    std::map<std::int64_t, std::uint64_t> frame_owner_;      // frame -> owning buffer
    std::uint64_t next_id_ = 1;
    std::vector<LoadIssue> issues_;
};

} // namespace sbb
