#pragma once

#include <vector>

#include "nbp/core.hpp"
#include "nbp/sensor.hpp"
#include "nbp/window.hpp"

namespace nbp {

/// Model input: K slice-density images plus a past-pose visit histogram, all
/// agent-centred. Values are raw counts; the learner normalizes.
struct ExplorationEmbedding {
    std::vector<Grid2D<float>> slices;
    Grid2D<float> trajectory;
    Pose center;
    WindowSpec spec;
};

/// Points within the closed axis-aligned square window of half-extent r
/// centred at the pose's horizontal position.
std::vector<Vec3> crop_filter(const SurfelCloud& cloud, const Pose& center, const WindowSpec& spec,
                              double cell_size = 0.5);

/// Per-slice point counts under the centred projection; each point lands in
/// exactly one slice band by height.
std::vector<Grid2D<float>> slice_densities(const std::vector<Vec3>& points, const Pose& center,
                                           const WindowSpec& spec, double cell_size = 0.5);

/// Visit counts of past poses (current pose included) within the window.
Grid2D<float> trajectory_histogram(const std::vector<Pose>& history, const Pose& center,
                                   const WindowSpec& spec, double cell_size = 0.5);

ExplorationEmbedding build_embedding(const SurfelCloud& cloud, const std::vector<Pose>& history,
                                     const Pose& center, const WindowSpec& spec,
                                     double cell_size = 0.5);

/// Centred projection of a world point into window pixel coordinates.
/// Returns false when the pixel falls outside the image.
bool project_to_window(const Vec3& p, const Vec3& center_pos, const WindowSpec& spec, int* u,
                       int* v);

/// Debug dump of one channel as a binary PGM image.
void dump_pgm(const Grid2D<float>& image, const std::string& path);

}  // namespace nbp
