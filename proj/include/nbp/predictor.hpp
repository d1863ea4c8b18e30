#pragma once

#include "nbp/planning.hpp"
#include "nbp/progress.hpp"

namespace nbp {

struct Prediction {
    ValueMap value_map;
    ObstacleMap obstacle_map;
};

/// Anything that maps an exploration embedding to (value map, obstacle map).
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual Prediction predict(const ExplorationEmbedding& embedding) = 0;
};

}  // namespace nbp
