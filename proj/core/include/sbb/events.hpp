#pragma once

#include <span>
#include <vector>

#include "sbb/types.hpp"

namespace sbb {

/// True iff the host box overlaps the lead car's proximity zone: the band from
/// proximity_front ahead of the lead front bumper to proximity_rear behind its
/// rear bumper, laterally within one car width. All interval checks closed.
bool in_proximity_zone(const VehicleState& host, const VehicleState& lead,
                       const GeometryConfig& geo);

/// Classifies one frame against the threshold rules, returning the single
/// highest-value label under the priority crash > conflict > hardbraking >
/// cutin > normal. `prev` must be the immediately preceding frame when given;
/// without it the lateral-velocity and deceleration tests are disabled.
EventLabel detect(const FrameRecord& frame, const FrameRecord* prev,
                  const GeometryConfig& geo);

/// detect() over a whole trajectory.
std::vector<EventLabel> label_trajectory(std::span<const FrameRecord> frames,
                                         const GeometryConfig& geo);

/// Index of the closest front vehicle (regions 1/3/5 with x > 0), or -1.
int closest_front_region(const FrameRecord& frame);

} // namespace sbb
