#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "liefm/data.hpp"
#include "liefm/groups.hpp"

namespace liefm {

/**
 * Trajectory table with columns `sample_id,step,t,<coords...>`, where the
 * coordinates are the group payload named by Group::coordinate_names().
 * One row per (sample, step); a trajectory with `steps` steps has steps + 1
 * rows with t = step / steps.
 */
struct TrajectoryRow {
  long sample_id = 0;
  long step = 0;
  double t = 0.0;
  GroupElement element;
};

std::string trajectory_header(const Group& group);

void write_trajectories(std::ostream& out, const Group& group,
                        const std::vector<std::vector<GroupElement>>& trajectories);

/// Throws ParseError (with line number) on a wrong header, column count or
/// unparseable number.
std::vector<TrajectoryRow> read_trajectories(std::istream& in, const Group& group);

/// Last-step row of every sample_id, ordered by sample_id.
SampleBatch trajectory_endpoints(const std::vector<TrajectoryRow>& rows);

}  // namespace liefm
