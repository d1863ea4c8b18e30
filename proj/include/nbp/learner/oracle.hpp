#pragma once

#include "nbp/labels.hpp"
#include "nbp/predictor.hpp"
#include "nbp/visibility.hpp"

namespace nbp {

/// Brute-force value map: for every window cell on a stride-s subgrid, route
/// on the true obstacle map, simulate the renders along the path and record
/// the exact coverage gain per terminal yaw. Skipped cells copy the nearest
/// computed cell; unreachable cells are 0. Obstacle map is the exact GT slice.
/// A shared VisibilityIndex avoids re-rendering recurring poses; without one
/// an internal per-call index is used.
Prediction oracle_predict(const Scene& scene, const std::vector<Vec3>& gt,
                          const EpisodeState& state, const WindowSpec& window, int stride,
                          const CameraModel& camera, const VisibilityIndex* vis = nullptr);

/// Predictor view over oracle_predict, bound to a live episode state.
class OraclePredictor : public Predictor {
public:
    OraclePredictor(const Scene& scene, const std::vector<Vec3>& gt, const EpisodeState& state,
                    int stride = 4, CameraModel camera = {}, const VisibilityIndex* vis = nullptr)
        : scene_(scene), gt_(gt), state_(state), stride_(stride), camera_(camera), vis_(vis) {}

    Prediction predict(const ExplorationEmbedding& embedding) override {
        return oracle_predict(scene_, gt_, state_, embedding.spec, stride_, camera_, vis_);
    }

private:
    const Scene& scene_;
    const std::vector<Vec3>& gt_;
    const EpisodeState& state_;
    int stride_;
    CameraModel camera_;
    const VisibilityIndex* vis_;
};

/// Ablation wrapper: value map from the base predictor, obstacle map replaced
/// by the exact GT slice.
class OracleObstaclePredictor : public Predictor {
public:
    OracleObstaclePredictor(Predictor& base, const Scene& scene) : base_(base), scene_(scene) {}

    Prediction predict(const ExplorationEmbedding& embedding) override;

private:
    Predictor& base_;
    const Scene& scene_;
};

}  // namespace nbp
