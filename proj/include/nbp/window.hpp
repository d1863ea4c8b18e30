#pragma once

#include "nbp/core.hpp"

namespace nbp {

/// Agent-centred square observation window. Grid cells are the same size as
/// scene cells, so window cells map one-to-one onto scene cells.
struct WindowSpec {
    double extent = 16.0;  // metres, full side length
    int grid_w = 32;
    int grid_h = 32;
    int slices = 4;        // K vertical slice bands
    double y_min = 0.0;
    double y_max = 3.0;

    double radius() const { return extent / 2.0; }
    double slice_height() const { return (y_max - y_min) / slices; }

    /// Window cell holding a scene cell, for a window centred on `center`.
    CellIndex to_window(CellIndex scene_cell, CellIndex center) const {
        return {scene_cell.x - center.x + grid_w / 2, scene_cell.z - center.z + grid_h / 2};
    }
    CellIndex to_scene(CellIndex window_cell, CellIndex center) const {
        return {window_cell.x + center.x - grid_w / 2, window_cell.z + center.z - grid_h / 2};
    }
    bool contains(CellIndex window_cell) const {
        return window_cell.x >= 0 && window_cell.x < grid_w && window_cell.z >= 0 &&
               window_cell.z < grid_h;
    }

    bool operator==(const WindowSpec&) const = default;
};

}  // namespace nbp
