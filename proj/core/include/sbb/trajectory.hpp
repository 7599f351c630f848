#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sbb/types.hpp"

namespace sbb {

/// First line of a trajectory file. Records how the data was produced so a
/// run can be reproduced from the file alone.
struct TrajectoryHeader {
    int version = 1;
    double frame_rate = 10.0;
    int n_lanes = 3;
    double lane_width = 3.5;
    std::uint64_t seed = 0;
    std::string generator_config;  // serialized SimConfig JSON; empty for external data
};

struct Trajectory {
    TrajectoryHeader header;
    std::vector<FrameRecord> frames;
};

/// One frame per line as a self-describing JSON record. Absent neighbors are
/// omitted on disk; the reader injects sentinel states (x = 100 m, vx = 0,
/// y at the region's lane center).
void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

/// Throws DataError on malformed records (duplicate/out-of-range region,
/// nonpositive raw size, missing fields).
Trajectory read_trajectory(const std::filesystem::path& path);

/// Sentinel state for an absent region given the host lateral position.
VehicleState absent_neighbor_state(int region, double host_y, int n_lanes, double lane_width);

/// Fills every non-present slot of the frame with its sentinel.
void inject_sentinels(FrameRecord& frame, int n_lanes, double lane_width);

} // namespace sbb
