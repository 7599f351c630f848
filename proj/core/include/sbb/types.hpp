#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace sbb {

inline constexpr int kNumRegions = 6;

/// x of a region slot with no vehicle in it. y takes the corresponding lane
/// center and vx is 0.
inline constexpr double kAbsentNeighborX = 100.0;

/// Per-frame accounting overhead (frame header, indices, decision metadata)
/// added on top of payload bytes in all storage cost computations.
inline constexpr std::uint64_t kFrameMetadataBytes = 64;

struct VehicleState {
    double x = 0.0;  ///< longitudinal position, m (relative to host for neighbors)
    double y = 0.0;  ///< lateral position, m from the road right edge
    double vx = 0.0; ///< longitudinal speed, m/s
};

enum class PayloadKind { Synthetic, Image };

/// Opaque payload handle: either a synthetic size descriptor or an image file.
struct PayloadRef {
    PayloadKind kind = PayloadKind::Synthetic;
    std::string path;        // image file path (Image kind)
    std::uint64_t size = 0;  // raw payload bytes
};

/// One timestep of traffic state around the host vehicle.
struct FrameRecord {
    double t = 0.0;
    std::int64_t frame_index = 0;
    VehicleState host;  // host.x == 0 by construction
    /// Slot r holds the closest vehicle of region r+1: front-left(1),
    /// rear-left(2), front-center(3), rear-center(4), front-right(5),
    /// rear-right(6). Absent regions carry the sentinel state.
    std::array<VehicleState, kNumRegions> neighbors{};
    std::array<bool, kNumRegions> neighbor_present{};
    PayloadRef payload;
    std::uint64_t raw_size = 0;

    /// Storage cost of this frame in bytes, payload plus metadata.
    std::uint64_t cost_bytes() const { return raw_size + kFrameMetadataBytes; }
};

/// Road and vehicle geometry plus detection thresholds.
struct GeometryConfig {
    double lane_width = 3.5;           // m
    double car_width = 1.8;            // m
    double car_length = 4.5;           // m
    double proximity_front = 1.22;     // m ahead of the lead front bumper (4 ft)
    double proximity_rear = 9.14;      // m behind the lead rear bumper (30 ft)
    double hard_brake_threshold = -4.4; // m/s^2
    double frame_rate = 10.0;          // Hz
    int n_lanes = 3;

    double dt() const { return 1.0 / frame_rate; }
    double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
    int lane_of(double y) const;
    double road_width() const { return n_lanes * lane_width; }

    /// Throws ConfigError if any field is out of range.
    void validate() const;
};

enum class EventKind : int {
    Normal = 1,
    Cutin = 2,
    HardBraking = 3,
    Conflict = 4,
    Crash = 5,
};

inline constexpr std::array<EventKind, 5> kAllEventKinds = {
    EventKind::Normal, EventKind::Cutin, EventKind::HardBraking,
    EventKind::Conflict, EventKind::Crash};

const char* to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(const std::string& name);

/// Frame classification: exactly one kind, plus the cut-in range when the
/// frame involves a cut-in geometry (cutin or conflict).
struct EventLabel {
    EventKind kind = EventKind::Normal;
    std::optional<double> cutin_range;  // m, > 0 when present

    bool is_eoi() const { return kind != EventKind::Normal; }
};

} // namespace sbb
