#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nbp/core.hpp"
#include "nbp/window.hpp"

namespace nbp {

/// Open vertical interval [z_lo, z_hi) in a wall column, metres above the floor.
struct WindowBand {
    float z_lo = 0.0f;
    float z_hi = 0.0f;
    bool operator==(const WindowBand&) const = default;
};

struct DifficultyParams {
    std::pair<int, int> room_count_range{3, 5};
    std::pair<double, double> room_size_range{2.0, 5.0};  // metres
    double corridor_width = 0.5;
    double door_width = 1.0;
    double window_fraction = 0.1;
    double branching_factor = 0.5;  // mean extra links beyond the spanning tree
    uint64_t seed = 0;

    void validate(double cell_size) const;
};

/// 2.5D voxel world: extruded wall plan, window bands, navgrid and GT surfels.
/// Immutable after generation; safe to share across threads.
struct Scene {
    double cell_size = 0.5;
    double wall_height = 3.0;
    double agent_height = 1.65;
    Grid2D<uint8_t> wall_grid;               // 1 = wall column
    Grid2D<uint8_t> navgrid;                 // 1 = traversable free cell
    std::vector<std::optional<WindowBand>> windows;  // per wall cell, row-major

    int width() const { return wall_grid.width(); }
    int height() const { return wall_grid.height(); }
    int vertical_cells() const { return static_cast<int>(std::lround(wall_height / cell_size)); }

    bool is_wall(int x, int z) const {
        return !wall_grid.in_bounds(x, z) || wall_grid.at(x, z) != 0;
    }
    bool is_nav(int x, int z) const { return wall_grid.in_bounds(x, z) && navgrid.at(x, z) != 0; }

    const std::optional<WindowBand>& window_at(int x, int z) const {
        return windows[static_cast<size_t>(z) * wall_grid.width() + x];
    }

    /// Solid test for the 3D voxel (x, iy, z); iy indexes vertical cells.
    /// Out-of-bounds columns and voxels outside [0, wall_height) are solid.
    bool is_solid(int x, int iy, int z) const;

    /// Solid test at a continuous height (used for the agent-height plane).
    bool is_solid_at_height(int x, int z, double y) const;

    Vec3 cell_center(CellIndex c) const {
        return {(c.x + 0.5) * cell_size, agent_height, (c.z + 0.5) * cell_size};
    }

    std::vector<CellIndex> nav_cells() const;

    bool operator==(const Scene&) const = default;
};

Scene generate_scene(const DifficultyParams& params);

/// Surfel centres: faces of free voxels adjacent to solid voxels, floor or
/// ceiling. Free voxels are navgrid columns plus window-band voxels.
std::vector<Vec3> gt_surface_points(const Scene& scene);

/// Max sampled ratio of 4-connected geodesic to euclidean distance.
/// A lower bound on the true maximum when sample_fraction < 1.
double nav_complexity(const Scene& scene, double sample_fraction, uint64_t seed);

/// Binary obstacle grid at agent height, centred on `center`.
/// Out-of-bounds cells are obstacles.
Grid2D<uint8_t> obstacle_slice(const Scene& scene, const Pose& center, const WindowSpec& window);

void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

/// Difficulty presets ("simple", "normal", "hard", "insane"); throws on
/// unknown names. The preset seed field is filled by the caller.
DifficultyParams difficulty_preset(const std::string& name);

}  // namespace nbp
