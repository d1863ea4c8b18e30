#pragma once

#include <string>
#include <vector>

#include "nbp/coverage.hpp"
#include "nbp/planning.hpp"
#include "nbp/predictor.hpp"
#include "nbp/progress.hpp"
#include "nbp/scene.hpp"

namespace nbp {

/// One supervised value-map cell in the sample's agent-centred frame.
struct ValueLabel {
    int gx = 0, gz = 0, yaw = 0;
    double gain = 0.0;  // coverage delta in [0, 1]

    bool operator==(const ValueLabel&) const = default;
};

struct TrainingSample {
    ExplorationEmbedding embedding;
    std::vector<ValueLabel> value_labels;  // sparse; unlabeled cells carry no gradient
    Grid2D<uint8_t> obstacle_gt;
    int step_index = 0;  // position within the source trajectory
    int iteration = 0;
};

/// Append-only sample store. Holdout samples live in a separate list and are
/// never visible to batch assembly.
class ReplayMemory {
public:
    void append(TrainingSample s) { samples_.push_back(std::move(s)); }
    size_t size() const { return samples_.size(); }
    const TrainingSample& at(size_t i) const { return samples_[i]; }

    std::vector<TrainingSample> holdout;

    void save(const std::string& path) const;
    static ReplayMemory load(const std::string& path);

private:
    std::vector<TrainingSample> samples_;
};

/// GT labels for every sub-path of one shortest path: for each start index i,
/// labels for all later poses j expressed in pose i's window frame. Labels
/// whose goal falls outside the window are dropped. `covered_counts[i]` is the
/// GT covered count after arriving at pose i.
std::vector<std::vector<ValueLabel>> subpath_gains(const Path& path,
                                                   const std::vector<size_t>& covered_counts,
                                                   size_t gt_count, const WindowSpec& window);

/// Identical contract to the worldgen obstacle slice.
Grid2D<uint8_t> obstacle_gt(const Scene& scene, const Pose& pose, const WindowSpec& window);

struct RolloutConfig {
    int length = 60;     // executed steps per rollout
    double beta = 0.1;   // goal-sampling temperature
    int goal_retries = 32;
    WindowSpec window;
    CoverageConfig coverage;
    CameraModel camera;
};

/// One training rollout: Boltzmann goals on the predicted value map, routing
/// on the ground-truth obstacle map, sub-path labels and obstacle GT for every
/// pose. Truncates early only when no frontier remains.
std::vector<TrainingSample> rollout_collect(const Scene& scene, const std::vector<Vec3>& gt,
                                            Predictor& predictor, const Pose& start,
                                            const RolloutConfig& cfg, Rng& rng);

/// Curriculum filter + balanced replay (Algorithm-style memory update).
/// During iterations <= curriculum_cutoff, fresh samples with step_index < 10
/// are dropped. Survivors are appended to `mem`; the returned batch holds
/// memory indices of the survivors plus an equal-size uniform sample of older
/// memory (all of it if smaller).
std::vector<size_t> memory_update_and_batch(ReplayMemory& mem, std::vector<TrainingSample> fresh,
                                            int iteration, int curriculum_cutoff, Rng& rng);

}  // namespace nbp
