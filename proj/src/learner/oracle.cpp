#include "nbp/learner/oracle.hpp"

#include <algorithm>
#include <optional>

namespace nbp {

namespace {

int travel_yaw(CellIndex from, CellIndex to) {
    const int dx = to.x - from.x, dz = to.z - from.z;
    if (dx == 1) return 0;
    if (dz == 1) return 2;
    if (dx == -1) return 4;
    if (dz == -1) return 6;
    throw NbpError("travel_yaw: cells are not 4-adjacent");
}

}  // namespace

Prediction oracle_predict(const Scene& scene, const std::vector<Vec3>& gt,
                          const EpisodeState& state, const WindowSpec& window, int stride,
                          const CameraModel& camera, const VisibilityIndex* vis) {
    if (stride < 1) throw NbpError("oracle_predict: stride must be >= 1");
    std::optional<VisibilityIndex> local_vis;
    if (!vis) {
        local_vis.emplace(scene, gt, CoverageConfig{}, camera);
        vis = &*local_vis;
    }
    Prediction pred;
    pred.obstacle_map.window = window;
    pred.obstacle_map.center = state.pose;
    pred.obstacle_map.probs = Grid2D<float>(window.grid_w, window.grid_h, 1.0f);
    const Grid2D<uint8_t> slice = obstacle_slice(scene, state.pose, window);
    for (int z = 0; z < window.grid_h; ++z)
        for (int x = 0; x < window.grid_w; ++x)
            pred.obstacle_map.probs.at(x, z) = slice.at(x, z) ? 1.0f : 0.0f;

    pred.value_map.window = window;
    pred.value_map.center = state.pose;
    pred.value_map.init_zero();

    // Routing map: GT slice with the agent's cell forced free.
    ObstacleMap route_map = pred.obstacle_map;
    const CellIndex self = window.to_window(state.pose.cell, state.pose.cell);
    route_map.probs.at(self.x, self.z) = 0.0f;

    const size_t n_gt = gt.size();
    const std::vector<uint8_t>& base_flags = state.tracker.covered_flags();

    Grid2D<uint8_t> computed(window.grid_w, window.grid_h, 0);
    std::vector<uint8_t> flags;
    for (int gz = 0; gz < window.grid_h; gz += stride)
        for (int gx = 0; gx < window.grid_w; gx += stride) {
            if (route_map.blocked(gx, gz) && !(CellIndex{gx, gz} == self)) continue;
            const auto route = dijkstra_path(route_map, self, {gx, gz});
            if (!route) continue;
            computed.at(gx, gz) = 1;
            flags = base_flags;
            size_t gained_mid = 0;
            // Intermediate poses face the travel direction.
            for (size_t i = 1; i + 1 < route->size(); ++i) {
                const Pose pose{window.to_scene((*route)[i], state.pose.cell),
                                travel_yaw((*route)[i - 1], (*route)[i])};
                for (uint32_t idx : vis->covered_from(pose))
                    if (!flags[idx]) {
                        flags[idx] = 1;
                        ++gained_mid;
                    }
            }
            const CellIndex terminal = window.to_scene({gx, gz}, state.pose.cell);
            for (int yaw = 0; yaw < kNumYaw; ++yaw) {
                size_t gained = gained_mid;
                for (uint32_t idx : vis->covered_from({terminal, yaw})) gained += !flags[idx];
                pred.value_map.at(gx, gz, yaw) =
                    n_gt ? static_cast<double>(gained) / n_gt : 0.0;
            }
        }

    // Nearest-computed fill for off-subgrid cells.
    auto snap = [&](int v, int limit) {
        int s = (v + stride / 2) / stride * stride;
        if (s >= limit) s -= stride;
        return s;
    };
    for (int gz = 0; gz < window.grid_h; ++gz)
        for (int gx = 0; gx < window.grid_w; ++gx) {
            if (gx % stride == 0 && gz % stride == 0) continue;
            const int sx = snap(gx, window.grid_w);
            const int sz = snap(gz, window.grid_h);
            if (!computed.at(sx, sz)) continue;
            for (int yaw = 0; yaw < kNumYaw; ++yaw)
                pred.value_map.at(gx, gz, yaw) = pred.value_map.at(sx, sz, yaw);
        }
    return pred;
}

Prediction OracleObstaclePredictor::predict(const ExplorationEmbedding& embedding) {
    Prediction pred = base_.predict(embedding);
    const Grid2D<uint8_t> slice = obstacle_slice(scene_, embedding.center, embedding.spec);
    pred.obstacle_map.window = embedding.spec;
    pred.obstacle_map.center = embedding.center;
    pred.obstacle_map.probs = Grid2D<float>(embedding.spec.grid_w, embedding.spec.grid_h, 1.0f);
    for (int z = 0; z < embedding.spec.grid_h; ++z)
        for (int x = 0; x < embedding.spec.grid_w; ++x)
            pred.obstacle_map.probs.at(x, z) = slice.at(x, z) ? 1.0f : 0.0f;
    return pred;
}

}  // namespace nbp
