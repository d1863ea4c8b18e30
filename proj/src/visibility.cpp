#include "nbp/visibility.hpp"

#include <cmath>

namespace nbp {

VisibilityIndex::VisibilityIndex(const Scene& scene, const std::vector<Vec3>& gt,
                                 const CoverageConfig& cfg, CameraModel camera)
    : scene_(scene), camera_(camera), probe_(gt, cfg), gt_count_(gt.size()) {}

const std::vector<uint32_t>& VisibilityIndex::covered_from(const Pose& pose) const {
    const int64_t key =
        (static_cast<int64_t>(pose.cell.z) * scene_.width() + pose.cell.x) * kNumYaw +
        pose.yaw_index;
    {
        std::lock_guard<std::mutex> lock(mu_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const DepthImage depth = render_depth(scene_, pose, camera_);
    const auto points = backproject(depth, pose, camera_, scene_.cell_size, scene_.agent_height);
    std::vector<uint32_t> indices = probe_.hit_indices(points);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(key, std::move(indices)).first->second;
}

Pose greedy_nbv_goal_fast(const EpisodeState& state, const Scene& scene,
                          const VisibilityIndex& vis, int candidate_radius) {
    Pose best = state.pose;
    size_t best_gain = 0;
    bool first = true;
    for (int dz = -candidate_radius; dz <= candidate_radius; ++dz)
        for (int dx = -candidate_radius; dx <= candidate_radius; ++dx) {
            if (std::abs(dx) + std::abs(dz) > candidate_radius) continue;
            const CellIndex cell{state.pose.cell.x + dx, state.pose.cell.z + dz};
            if (!scene.is_nav(cell.x, cell.z)) continue;
            for (int yaw = 0; yaw < kNumYaw; ++yaw) {
                const Pose candidate{cell, yaw};
                const size_t gain = state.tracker.count_uncovered(vis.covered_from(candidate));
                if (first || gain > best_gain) {
                    best = candidate;
                    best_gain = gain;
                    first = false;
                }
            }
        }
    return best;
}

}  // namespace nbp
