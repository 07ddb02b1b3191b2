#pragma once

#include "loralab/probe.hpp"

#include <ostream>
#include <string>

namespace loralab {

/// Shortest round-trip decimal form, locale-independent ("." separator).
std::string format_double(double v);

/// Header: step,norm_a,norm_b,rms_delta1,rms_delta2,rms_delta3,rms_delta_y,rms_gaz,loss,shrink_active
/// One row per completed step; a diverged run keeps its partial rows and ends
/// with a "# DIVERGED at step k" comment line.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

/// Header: quantity,measure_step,slope,intercept,r_squared,n_points,n_excluded_zeros
void write_slopes_csv(std::ostream& out, const SweepResult& result);

/// Trajectory rows for both arms, tagged by a leading `arm` column.
void write_dynamics_csv(std::ostream& out, const Fig2Result& result);

}  // namespace loralab
