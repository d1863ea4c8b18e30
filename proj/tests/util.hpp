#pragma once

#include <optional>
#include <vector>

#include "nbp/scene.hpp"

namespace nbp::testutil {

/// Rectangular room: boundary walls, interior navigable, no windows.
inline Scene box_scene(int nav_w, int nav_h, double wall_height = 3.0, double cell = 0.5,
                       double agent_height = 1.65) {
    Scene s;
    s.cell_size = cell;
    s.wall_height = wall_height;
    s.agent_height = agent_height;
    const int w = nav_w + 2, h = nav_h + 2;
    s.wall_grid = Grid2D<uint8_t>(w, h, 0);
    s.navgrid = Grid2D<uint8_t>(w, h, 0);
    for (int z = 0; z < h; ++z)
        for (int x = 0; x < w; ++x) {
            const bool border = x == 0 || z == 0 || x == w - 1 || z == h - 1;
            s.wall_grid.at(x, z) = border ? 1 : 0;
            s.navgrid.at(x, z) = border ? 0 : 1;
        }
    s.windows.assign(static_cast<size_t>(w) * h, std::nullopt);
    return s;
}

inline void set_wall(Scene& s, int x, int z) {
    s.wall_grid.at(x, z) = 1;
    s.navgrid.at(x, z) = 0;
}

inline void set_window(Scene& s, int x, int z, float z_lo, float z_hi) {
    s.windows[static_cast<size_t>(z) * s.wall_grid.width() + x] = WindowBand{z_lo, z_hi};
}

}  // namespace nbp::testutil
