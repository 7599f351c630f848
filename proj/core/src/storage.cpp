#include "sbb/storage.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <zlib.h>

#include "sbb/errors.hpp"

namespace sbb {

void StorageConfig::validate() const {
    if (budget == 0) throw ConfigError("storage: budget must be > 0");
    if (!(aging > 0.0 && aging <= 0.01)) throw ConfigError("storage: aging must lie in (0, 0.01]");
}

double buffer_value(std::uint64_t k, std::span<const double> v_hat,
                    std::span<const double> decisions, double aging) {
    if (v_hat.empty() || v_hat.size() != decisions.size()) {
        throw DataError("buffer_value: empty buffer or length mismatch");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < v_hat.size(); ++i) {
        best = std::max(best, v_hat[i] * decisions[i]);
    }
    return std::pow(1.0 + aging, static_cast<double>(k)) * best;
}

std::uint64_t StoredBuffer::total_bytes() const {
    std::uint64_t sum = 0;
    for (const StoredFrame& f : frames) sum += f.stored_bytes();
    return sum;
}

// ---------------------------------------------------------------------------
// MinHeap
// ---------------------------------------------------------------------------

bool MinHeap::less(const HeapEntry& a, const HeapEntry& b) {
    // Equal priorities: the smaller (older) id pops first.
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.id < b.id;
}

void MinHeap::push(const HeapEntry& entry) {
    entries_.push_back(entry);
    total_size_ += entry.size;
    sift_up(entries_.size() - 1);
}

HeapEntry MinHeap::pop_min() {
    if (entries_.empty()) throw DataError("heap: pop from empty heap");
    HeapEntry top = entries_.front();
    total_size_ -= top.size;
    entries_.front() = entries_.back();
    entries_.pop_back();
    if (!entries_.empty()) sift_down(0);
    return top;
}

const HeapEntry& MinHeap::peek_min() const {
    if (entries_.empty()) throw DataError("heap: peek on empty heap");
    return entries_.front();
}

void MinHeap::sift_up(std::size_t i) {
    while (i > 0) {
        const std::size_t parent = (i - 1) / 2;
        if (!less(entries_[i], entries_[parent])) break;
        std::swap(entries_[i], entries_[parent]);
        i = parent;
    }
}

void MinHeap::sift_down(std::size_t i) {
    const std::size_t n = entries_.size();
    while (true) {
        std::size_t smallest = i;
        const std::size_t l = 2 * i + 1, r = 2 * i + 2;
        if (l < n && less(entries_[l], entries_[smallest])) smallest = l;
        if (r < n && less(entries_[r], entries_[smallest])) smallest = r;
        if (smallest == i) break;
        std::swap(entries_[i], entries_[smallest]);
        i = smallest;
    }
}

bool MinHeap::heap_property_holds() const {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (less(entries_[i], entries_[(i - 1) / 2])) return false;
    }
    return true;
}

EvictionOutcome heap_push_with_budget(MinHeap& heap, const HeapEntry& entry,
                                      std::uint64_t budget) {
    EvictionOutcome out;
    heap.push(entry);
    while (heap.total_size() > budget) {
        if (heap.size() == 1) {
            // A lone buffer larger than the whole budget stays, flagged.
            out.oversize = true;
            break;
        }
        out.evicted.push_back(heap.pop_min().id);
    }
    return out;
}

EvictionOutcome fifo_push_with_budget(std::vector<HeapEntry>& queue, const HeapEntry& entry,
                                      std::uint64_t budget) {
    EvictionOutcome out;
    queue.push_back(entry);
    auto total = [&queue] {
        std::uint64_t sum = 0;
        for (const HeapEntry& e : queue) sum += e.size;
        return sum;
    };
    while (total() > budget) {
        if (queue.size() == 1) {
            out.oversize = true;
            break;
        }
        out.evicted.push_back(queue.front().id);
        queue.erase(queue.begin());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Durable store
// ---------------------------------------------------------------------------

namespace {

constexpr char kManifestName[] = "manifest.log";
constexpr char kPayloadDir[] = "payloads";
constexpr std::uint32_t kPayloadVersion = 1;
constexpr char kPayloadMagic[4] = {'S', 'B', 'B', 'B'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return in.gcount() == sizeof(T);
}

std::string event_tags_csv(const StoredBuffer& b) {
    std::string csv;
    for (EventKind k : b.event_tags) {
        if (!csv.empty()) csv += ',';
        csv += to_string(k);
    }
    return csv.empty() ? "none" : csv;
}

std::uint32_t file_crc32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for checksum: " + path.string());
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                    static_cast<uInt>(in.gcount()));
        if (in.eof()) break;
    }
    return static_cast<std::uint32_t>(crc);
}

struct ManifestRecord {
    enum class Kind { Store, Evict, Update } kind;
    std::uint64_t id = 0;
    double vstar = 0.0;
    std::uint64_t bytes = 0;
    std::string file;
    std::uint32_t crc = 0;
};

// One record per line, space-separated key=value fields.
bool parse_manifest_line(const std::string& line, ManifestRecord& rec) {
    std::istringstream ss(line);
    std::string verb;
    if (!(ss >> verb)) return false;
    if (verb == "STORE") {
        rec.kind = ManifestRecord::Kind::Store;
    } else if (verb == "EVICT") {
        rec.kind = ManifestRecord::Kind::Evict;
    } else if (verb == "UPDATE") {
        rec.kind = ManifestRecord::Kind::Update;
    } else {
        return false;
    }
    std::string field;
    bool have_id = false, have_crc = rec.kind == ManifestRecord::Kind::Evict;
    while (ss >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) return false;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        try {
            if (key == "id") {
                rec.id = std::stoull(value);
                have_id = true;
            } else if (key == "vstar") {
                rec.vstar = std::stod(value);
            } else if (key == "bytes") {
                rec.bytes = std::stoull(value);
            } else if (key == "file") {
                rec.file = value;
            } else if (key == "crc32") {
                rec.crc = static_cast<std::uint32_t>(std::stoul(value, nullptr, 16));
                have_crc = true;
            }
        } catch (const std::exception&) {
            return false;
        }
    }
    return have_id && have_crc;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

BufferStore::BufferStore(std::filesystem::path dir, StorageConfig cfg, EvictionPolicy policy)
    : dir_(std::move(dir)), cfg_(cfg), policy_(policy) {
    cfg_.validate();
    std::filesystem::create_directories(dir_ / kPayloadDir);
    const auto manifest = dir_ / kManifestName;
    if (!std::filesystem::exists(manifest)) {
        std::ofstream out(manifest);
        out << "SBBMANIFEST 1\n";
    }
}

std::filesystem::path BufferStore::payload_path(std::uint64_t id) const {
    char name[32];
    std::snprintf(name, sizeof(name), "b%06" PRIu64 ".sbb", id);
    return dir_ / kPayloadDir / name;
}

void BufferStore::append_manifest(const std::string& line) {
    std::ofstream out(dir_ / kManifestName, std::ios::app);
    if (!out) throw DataError("cannot append manifest under " + dir_.string());
    out << line << '\n';
    out.flush();
}

void BufferStore::persist_buffer(const StoredBuffer& buffer) {
    const auto path = payload_path(buffer.id);
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write payload file: " + path.string());
        out.write(kPayloadMagic, 4);
        write_pod(out, kPayloadVersion);
        write_pod(out, buffer.id);
        write_pod(out, buffer.priority);
        write_pod(out, static_cast<std::uint32_t>(buffer.frames.size()));
        for (const StoredFrame& f : buffer.frames) {
            write_pod(out, f.frame_index);
            write_pod(out, static_cast<std::uint8_t>(f.label));
            write_pod(out, static_cast<std::uint8_t>(f.is_reference ? 1 : 0));
            write_pod(out, f.v);
            write_pod(out, f.v_hat);
            write_pod(out, f.d);
            write_pod(out, f.reference_buffer);
            write_pod(out, static_cast<std::uint64_t>(f.payload.size()));
            out.write(reinterpret_cast<const char*>(f.payload.data()),
                      static_cast<std::streamsize>(f.payload.size()));
        }
    }
    char line[512];
    std::snprintf(line, sizeof(line),
                  "STORE id=%" PRIu64 " vstar=%s bytes=%" PRIu64
                  " frames=%zu first=%" PRId64 " last=%" PRId64 " events=%s file=%s/b%06" PRIu64
                  ".sbb crc32=%08x",
                  buffer.id, format_double(buffer.priority).c_str(), buffer.total_bytes(),
                  buffer.frames.size(), buffer.first_frame, buffer.last_frame,
                  event_tags_csv(buffer).c_str(), kPayloadDir, buffer.id, file_crc32(path));
    append_manifest(line);
}

void BufferStore::rewrite_buffer(const StoredBuffer& buffer) {
    const auto path = payload_path(buffer.id);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot rewrite payload file: " + path.string());
        out.write(kPayloadMagic, 4);
        write_pod(out, kPayloadVersion);
        write_pod(out, buffer.id);
        write_pod(out, buffer.priority);
        write_pod(out, static_cast<std::uint32_t>(buffer.frames.size()));
        for (const StoredFrame& f : buffer.frames) {
            write_pod(out, f.frame_index);
            write_pod(out, static_cast<std::uint8_t>(f.label));
            write_pod(out, static_cast<std::uint8_t>(f.is_reference ? 1 : 0));
            write_pod(out, f.v);
            write_pod(out, f.v_hat);
            write_pod(out, f.d);
            write_pod(out, f.reference_buffer);
            write_pod(out, static_cast<std::uint64_t>(f.payload.size()));
            out.write(reinterpret_cast<const char*>(f.payload.data()),
                      static_cast<std::streamsize>(f.payload.size()));
        }
    }
    char line[160];
    std::snprintf(line, sizeof(line), "UPDATE id=%" PRIu64 " bytes=%" PRIu64 " crc32=%08x",
                  buffer.id, buffer.total_bytes(), file_crc32(path));
    append_manifest(line);
}

void BufferStore::delete_buffer_payloads(std::uint64_t id) {
    std::error_code ec;
    std::filesystem::remove(payload_path(id), ec);
}

std::uint64_t BufferStore::total_bytes() const {
    std::uint64_t sum = 0;
    for (const auto& [id, b] : buffers_) sum += b.total_bytes();
    return sum;
}

std::size_t BufferStore::buffer_count() const { return buffers_.size(); }

std::vector<std::uint64_t> BufferStore::live_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(buffers_.size());
    for (const auto& [id, b] : buffers_) ids.push_back(id);
    return ids;
}

const StoredBuffer* BufferStore::find(std::uint64_t id) const {
    const auto it = buffers_.find(id);
    return it == buffers_.end() ? nullptr : &it->second;
}

std::vector<std::uint64_t> BufferStore::eviction_order() const {
    std::vector<std::uint64_t> order;
    if (policy_ == EvictionPolicy::Fifo) {
        order = insertion_order_;
    } else {
        order = live_ids();
        std::sort(order.begin(), order.end(), [this](std::uint64_t a, std::uint64_t b) {
            const double pa = buffers_.at(a).priority, pb = buffers_.at(b).priority;
            if (pa != pb) return pa < pb;
            return a < b;
        });
    }
    return order;
}

std::vector<const StoredFrame*> BufferStore::live_frames() const {
    std::vector<const StoredFrame*> frames;
    for (const auto& [id, b] : buffers_) {
        for (const StoredFrame& f : b.frames) frames.push_back(&f);
    }
    std::sort(frames.begin(), frames.end(), [](const StoredFrame* a, const StoredFrame* b) {
        return a->frame_index < b->frame_index;
    });
    return frames;
}

BufferStore::PushResult BufferStore::push(StoredBuffer buffer) {
    if (buffer.frames.empty()) throw DataError("storage: refusing to push an empty buffer");
    if (buffer.id == 0) buffer.id = next_id_;
    if (buffer.id < next_id_) {
        throw DataError("storage: buffer ids are monotone, id " + std::to_string(buffer.id) +
                        " already used");
    }
    next_id_ = buffer.id + 1;

    // Deduplicate frame payloads carried across buffers: one payload per frame
    // index, owned by the higher-quality copy, the other side holds a
    // reference.
    std::vector<std::uint64_t> rewritten;
    for (StoredFrame& f : buffer.frames) {
        if (f.is_reference) continue;
        const auto it = frame_owner_.find(f.frame_index);
        if (it == frame_owner_.end()) {
            frame_owner_[f.frame_index] = buffer.id;
            continue;
        }
        auto owner_it = buffers_.find(it->second);
        if (owner_it == buffers_.end()) {
            frame_owner_[f.frame_index] = buffer.id;
            continue;
        }
        StoredFrame* owned = nullptr;
        for (StoredFrame& of : owner_it->second.frames) {
            if (of.frame_index == f.frame_index && !of.is_reference) owned = &of;
        }
        if (owned == nullptr) {
            frame_owner_[f.frame_index] = buffer.id;
            continue;
        }
        if (owned->d >= f.d) {
            // Existing copy wins; the new one references it.
            f.is_reference = true;
            f.reference_buffer = owner_it->first;
            f.payload.clear();
            f.payload_bytes = 0;
        } else {
            // New copy wins; demote the old one in place.
            owned->is_reference = true;
            owned->reference_buffer = buffer.id;
            owned->payload.clear();
            owned->payload_bytes = 0;
            frame_owner_[f.frame_index] = buffer.id;
            rewritten.push_back(owner_it->first);
        }
    }

    insertion_order_.push_back(buffer.id);
    const std::uint64_t id = buffer.id;
    buffers_.emplace(id, std::move(buffer));
    persist_buffer(buffers_.at(id));
    for (std::uint64_t rid : rewritten) rewrite_buffer(buffers_.at(rid));

    PushResult result;
    apply_budget(result);
    return result;
}

void BufferStore::apply_budget(PushResult& result) {
    while (total_bytes() > cfg_.budget) {
        if (buffers_.size() <= 1) {
            result.oversize = true;
            break;
        }
        const std::uint64_t victim = eviction_order().front();
        StoredBuffer& b = buffers_.at(victim);
        // Payloads referenced from live buffers migrate before deletion.
        for (StoredFrame& f : b.frames) {
            if (f.is_reference) continue;
            for (auto& [oid, other] : buffers_) {
                if (oid == victim) continue;
                for (StoredFrame& of : other.frames) {
                    if (of.is_reference && of.frame_index == f.frame_index &&
                        of.reference_buffer == victim) {
                        of.payload = f.payload;
                        of.payload_bytes = f.payload_bytes;
                        of.is_reference = false;
                        of.d = f.d;  // the migrated copy keeps its quality
                        frame_owner_[f.frame_index] = oid;
                        rewrite_buffer(other);
                        goto migrated;
                    }
                }
            }
            frame_owner_.erase(f.frame_index);
        migrated:;
        }
        delete_buffer_payloads(victim);
        append_manifest("EVICT id=" + std::to_string(victim));
        buffers_.erase(victim);
        insertion_order_.erase(
            std::remove(insertion_order_.begin(), insertion_order_.end(), victim),
            insertion_order_.end());
        result.evicted.push_back(victim);
    }
}

BufferStore BufferStore::load(const std::filesystem::path& dir, StorageConfig cfg,
                              EvictionPolicy policy) {
    BufferStore store(dir, cfg, policy);
    const auto manifest_path = dir / kManifestName;
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path.string());

    // Collect raw lines first so the torn tail (crash mid-append) is
    // identifiable: only the final line may be malformed.
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    bool final_newline = true;
    {
        std::ifstream raw(manifest_path, std::ios::binary);
        raw.seekg(0, std::ios::end);
        if (raw.tellg() > 0) {
            raw.seekg(-1, std::ios::end);
            char last;
            raw.get(last);
            final_newline = last == '\n';
        }
    }
    if (lines.empty() || lines.front().rfind("SBBMANIFEST", 0) != 0) {
        throw DataError("manifest missing header: " + manifest_path.string());
    }

    struct PendingStore {
        std::string file;
        std::uint32_t crc;
    };
    std::map<std::uint64_t, PendingStore> live;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ManifestRecord rec;
        const bool tail = i + 1 == lines.size();
        if (!parse_manifest_line(lines[i], rec) || (tail && !final_newline)) {
            if (tail) {
                store.issues_.push_back({0, "torn tail entry skipped: '" + lines[i] + "'"});
                continue;
            }
            throw DataError("manifest line " + std::to_string(i + 1) + " malformed");
        }
        switch (rec.kind) {
            case ManifestRecord::Kind::Store:
                live[rec.id] = {rec.file, rec.crc};
                store.next_id_ = std::max(store.next_id_, rec.id + 1);
                store.insertion_order_.push_back(rec.id);
                break;
            case ManifestRecord::Kind::Evict:
                live.erase(rec.id);
                store.insertion_order_.erase(std::remove(store.insertion_order_.begin(),
                                                         store.insertion_order_.end(), rec.id),
                                             store.insertion_order_.end());
                break;
            case ManifestRecord::Kind::Update:
                if (live.count(rec.id)) live[rec.id].crc = rec.crc;
                break;
        }
    }

    for (const auto& [id, pending] : live) {
        const auto path = dir / pending.file;
        if (!std::filesystem::exists(path)) {
            throw DataError("manifest references missing payload file for buffer " +
                            std::to_string(id));
        }
        if (file_crc32(path) != pending.crc) {
            throw DataError("checksum mismatch for buffer " + std::to_string(id));
        }
        std::ifstream pf(path, std::ios::binary);
        char magic[4];
        pf.read(magic, 4);
        std::uint32_t version = 0, frame_count = 0;
        StoredBuffer buffer;
        if (pf.gcount() != 4 || std::memcmp(magic, kPayloadMagic, 4) != 0 ||
            !read_pod(pf, version) || version != kPayloadVersion ||
            !read_pod(pf, buffer.id) || !read_pod(pf, buffer.priority) ||
            !read_pod(pf, frame_count)) {
            throw DataError("payload file corrupt for buffer " + std::to_string(id));
        }
        buffer.frames.resize(frame_count);
        for (StoredFrame& f : buffer.frames) {
            std::uint8_t label = 0, flags = 0;
            std::uint64_t payload_size = 0;
            if (!read_pod(pf, f.frame_index) || !read_pod(pf, label) || !read_pod(pf, flags) ||
                !read_pod(pf, f.v) || !read_pod(pf, f.v_hat) || !read_pod(pf, f.d) ||
                !read_pod(pf, f.reference_buffer) || !read_pod(pf, payload_size)) {
                throw DataError("payload file truncated for buffer " + std::to_string(id));
            }
            f.label = static_cast<EventKind>(label);
            f.is_reference = flags != 0;
            f.payload.resize(payload_size);
            pf.read(reinterpret_cast<char*>(f.payload.data()),
                    static_cast<std::streamsize>(payload_size));
            f.payload_bytes = payload_size;
            if (pf.gcount() != static_cast<std::streamsize>(payload_size)) {
                throw DataError("payload file truncated for buffer " + std::to_string(id));
            }
            if (!f.is_reference) store.frame_owner_[f.frame_index] = id;
        }
        buffer.first_frame = buffer.frames.empty() ? 0 : buffer.frames.front().frame_index;
        buffer.last_frame = buffer.frames.empty() ? 0 : buffer.frames.back().frame_index;
        for (const StoredFrame& f : buffer.frames) {
            if (std::find(buffer.event_tags.begin(), buffer.event_tags.end(), f.label) ==
                buffer.event_tags.end() && f.label != EventKind::Normal) {
                buffer.event_tags.push_back(f.label);
            }
        }
        store.buffers_.emplace(id, std::move(buffer));
    }
    return store;
}

void BufferStore::compact_manifest(const std::filesystem::path& dir) {
    const auto manifest_path = dir / kManifestName;
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    if (lines.empty()) throw DataError("manifest empty: " + manifest_path.string());

    // Drop STORE/UPDATE entries whose id was later evicted, and the tombstones.
    std::vector<std::uint64_t> evicted;
    for (const auto& l : lines) {
        ManifestRecord rec;
        if (parse_manifest_line(l, rec) && rec.kind == ManifestRecord::Kind::Evict) {
            evicted.push_back(rec.id);
        }
    }
    const auto gone = [&evicted](std::uint64_t id) {
        return std::find(evicted.begin(), evicted.end(), id) != evicted.end();
    };
    std::ofstream out(manifest_path, std::ios::trunc);
    out << lines.front() << '\n';
    for (std::size_t i = 1; i < lines.size(); ++i) {
        ManifestRecord rec;
        if (!parse_manifest_line(lines[i], rec)) continue;  // drops torn tails too
        if (rec.kind == ManifestRecord::Kind::Evict || gone(rec.id)) continue;
        out << lines[i] << '\n';
    }
}

} // namespace sbb
