#pragma once

#include "nbp/labels.hpp"
#include "nbp/learner/net.hpp"
#include "nbp/scene.hpp"

namespace nbp {

struct TrainConfig {
    int iterations = 5;            // N outer iterations
    int curriculum_cutoff = 1;     // N_e: early iterations drop step_index < 10
    int trajectories_first = 2;    // S_n for iteration 1
    int trajectories_later = 1;    // S_n afterwards
    int epochs = 30;               // E
    int batch_size = 32;
    int accumulation = 4;          // effective batch = batch_size * accumulation
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double lr_decay = 0.1;         // on holdout plateau
    int plateau_patience = 4;      // epochs without improvement before decay
    int holdout_size = 200;        // drawn once from the first collection
    uint64_t seed = 1;
    int threads = 1;
    RolloutConfig rollout;
    NetConfig net;
};

struct TrainRecord {
    int iteration = 0;
    int epoch = 0;
    double train_loss = 0.0;
    double holdout_loss = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double learning_rate = 0.0;
    int batch_samples = 0;
};

/// Builds the net-frame loss sample: normalized input, value targets divided
/// by the net's gain scale, flattened obstacle GT.
LossSample make_loss_sample(const NbpNet& net, const TrainingSample& sample);

/// Full online training loop: collect rollouts, curriculum + balanced replay,
/// minibatch SGD with momentum and plateau decay, holdout early stopping.
/// Deterministic for a fixed seed at threads=1.
NbpNet train(const std::vector<Scene>& scenes, const std::vector<std::vector<Vec3>>& gts,
             const TrainConfig& cfg, std::vector<TrainRecord>* log = nullptr,
             ReplayMemory* memory_out = nullptr);

}  // namespace nbp
