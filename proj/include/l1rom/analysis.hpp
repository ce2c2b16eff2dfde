#pragma once

#include "l1rom/core.hpp"

namespace l1rom {

double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

/// Wave positions (cell-center coordinates) read off a blended Riemann
/// density profile: fan, contact and shock, each located as the |d rho|
/// mass centroid of its jump cluster.
struct EulerFeatures {
  double fan_x = 0.0;
  double contact_x = 0.0;
  double shock_x = 0.0;
};

/// Feature positions of a (presumably clean) HDM density profile.
EulerFeatures locate_euler_features(const GridField& state);

/// Feature positions of an arbitrary density profile, searched inside
/// windows of +-window_cells around reference positions. Reconstruction
/// mixtures smear jumps into stairs; the windowed centroid still lands on
/// the feature.
EulerFeatures locate_euler_features_near(const GridField& state,
                                         const EulerFeatures& reference,
                                         std::size_t window_cells = 40);

/// Position of the strongest downward jump of a periodic scalar profile,
/// refined to the |du| centroid over a few neighbouring cells.
double shock_position(const GridField& u);

/// Least-squares slope of (unwrapped) shock position against time over
/// [t_begin, t_end] of a scalar trajectory.
double shock_speed(const Trajectory& traj, double t_begin, double t_end);

}  // namespace l1rom
