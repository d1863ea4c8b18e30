#pragma once

#include <mutex>
#include <unordered_map>

#include "nbp/planning.hpp"

namespace nbp {

/// Per-scene memo of which GT surfels a pose observes. Pose visibility is
/// pure geometry (render + backproject + epsilon match), so it is shared
/// across episodes and planners; lookups are thread-safe.
class VisibilityIndex {
public:
    VisibilityIndex(const Scene& scene, const std::vector<Vec3>& gt,
                    const CoverageConfig& cfg = {}, CameraModel camera = {});

    /// Sorted unique GT indices within epsilon of the pose's back-projected
    /// depth points. Identical to tracker.hit_indices(backproject(render)).
    const std::vector<uint32_t>& covered_from(const Pose& pose) const;

    size_t gt_count() const { return gt_count_; }

private:
    const Scene& scene_;
    CameraModel camera_;
    CoverageTracker probe_;  // geometry-only queries; covered flags unused
    size_t gt_count_ = 0;
    mutable std::mutex mu_;
    mutable std::unordered_map<int64_t, std::vector<uint32_t>> cache_;
};

/// greedy_nbv_goal with memoized visibility; identical choice to the
/// render-based version.
Pose greedy_nbv_goal_fast(const EpisodeState& state, const Scene& scene,
                          const VisibilityIndex& vis, int candidate_radius = 1);

}  // namespace nbp
