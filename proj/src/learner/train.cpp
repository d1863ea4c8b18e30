#include "nbp/learner/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace nbp {

LossSample make_loss_sample(const NbpNet& net, const TrainingSample& sample) {
    LossSample ls;
    ls.input = net.make_input(sample.embedding);
    const int hw = net.config().input_hw;
    ls.value_labels.reserve(sample.value_labels.size());
    for (const ValueLabel& l : sample.value_labels) {
        const size_t idx = (static_cast<size_t>(l.yaw) * hw + l.gz) * hw + l.gx;
        ls.value_labels.emplace_back(idx, l.gain / net.gain_scale);
    }
    ls.obstacle_gt.assign(sample.obstacle_gt.raw().begin(), sample.obstacle_gt.raw().end());
    return ls;
}

namespace {

struct RolloutTask {
    size_t scene = 0;
    int trajectory = 0;
    uint64_t seed = 0;
};

std::vector<TrainingSample> collect_iteration(const std::vector<Scene>& scenes,
                                              const std::vector<std::vector<Vec3>>& gts,
                                              NbpNet& net, const TrainConfig& cfg, int iteration) {
    const int per_scene =
        iteration == 1 ? cfg.trajectories_first : cfg.trajectories_later;
    std::vector<RolloutTask> tasks;
    for (size_t s = 0; s < scenes.size(); ++s)
        for (int t = 0; t < per_scene; ++t)
            tasks.push_back({s, t,
                             cfg.seed * 1000003ull + static_cast<uint64_t>(iteration) * 10007ull +
                                 s * 131ull + static_cast<uint64_t>(t)});

    std::vector<std::vector<TrainingSample>> per_task(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            const RolloutTask& task = tasks[i];
            Rng rng(task.seed);
            const Scene& scene = scenes[task.scene];
            const auto cells = scene.nav_cells();
            std::uniform_int_distribution<size_t> cell_dist(0, cells.size() - 1);
            std::uniform_int_distribution<int> yaw_dist(0, kNumYaw - 1);
            const Pose start{cells[cell_dist(rng)], yaw_dist(rng)};
            per_task[i] =
                rollout_collect(scene, gts[task.scene], net, start, cfg.rollout, rng);
        }
    };
    const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(tasks.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::vector<TrainingSample> fresh;
    for (auto& chunk : per_task)
        for (auto& s : chunk) fresh.push_back(std::move(s));
    return fresh;
}

class SgdMomentum {
public:
    SgdMomentum(std::vector<ParamBlock> blocks, double momentum)
        : blocks_(std::move(blocks)), momentum_(momentum) {
        for (const ParamBlock& b : blocks_) velocity_.emplace_back(b.size, 0.0);
    }

    /// One update from gradients accumulated over `n_samples` samples.
    void step(double lr, size_t n_samples) {
        const double scale = 1.0 / static_cast<double>(n_samples);
        for (size_t b = 0; b < blocks_.size(); ++b)
            for (size_t i = 0; i < blocks_[b].size; ++i) {
                double& v = velocity_[b][i];
                v = momentum_ * v - lr * blocks_[b].grad[i] * scale;
                blocks_[b].data[i] += v;
            }
    }

private:
    std::vector<ParamBlock> blocks_;
    std::vector<std::vector<double>> velocity_;
    double momentum_;
};

}  // namespace

NbpNet train(const std::vector<Scene>& scenes, const std::vector<std::vector<Vec3>>& gts,
             const TrainConfig& cfg, std::vector<TrainRecord>* log, ReplayMemory* memory_out) {
    if (scenes.empty()) throw NbpError("train: at least one scene required");
    if (scenes.size() != gts.size()) throw NbpError("train: one GT set per scene required");

    NbpNet net(cfg.net, cfg.seed);
    ReplayMemory mem;
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    SgdMomentum opt(net.param_blocks(), cfg.momentum);
    double lr = cfg.learning_rate;
    double best_holdout = std::numeric_limits<double>::infinity();
    int stall = 0;
    bool stopped = false;

    for (int iteration = 1; iteration <= cfg.iterations && !stopped; ++iteration) {
        std::vector<TrainingSample> fresh = collect_iteration(scenes, gts, net, cfg, iteration);

        if (iteration == 1) {
            double max_gain = 0.0;
            for (const TrainingSample& s : fresh)
                for (const ValueLabel& l : s.value_labels) max_gain = std::max(max_gain, l.gain);
            net.gain_scale = std::max(1e-3, max_gain);

            const size_t n_hold = std::min<size_t>(cfg.holdout_size, fresh.size() / 2);
            std::vector<size_t> order(fresh.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<uint8_t> held(fresh.size(), 0);
            for (size_t i = 0; i < n_hold; ++i) {
                mem.holdout.push_back(fresh[order[i]]);
                held[order[i]] = 1;
            }
            std::vector<TrainingSample> kept;
            kept.reserve(fresh.size() - n_hold);
            for (size_t i = 0; i < fresh.size(); ++i)
                if (!held[i]) kept.push_back(std::move(fresh[i]));
            fresh = std::move(kept);
        }

        std::vector<size_t> batch =
            memory_update_and_batch(mem, std::move(fresh), iteration, cfg.curriculum_cutoff, rng);
        if (batch.empty()) continue;

        std::vector<LossSample> holdout_ls;
        holdout_ls.reserve(mem.holdout.size());
        for (const TrainingSample& s : mem.holdout) holdout_ls.push_back(make_loss_sample(net, s));

        const size_t effective = static_cast<size_t>(cfg.batch_size) * cfg.accumulation;
        for (int epoch = 1; epoch <= cfg.epochs && !stopped; ++epoch) {
            std::shuffle(batch.begin(), batch.end(), rng);
            double train_loss = 0.0;
            size_t seen = 0;
            for (size_t base = 0; base < batch.size(); base += effective) {
                const size_t n = std::min(effective, batch.size() - base);
                net.zero_grad();
                for (size_t i = 0; i < n; ++i) {
                    const LossSample ls = make_loss_sample(net, mem.at(batch[base + i]));
                    train_loss += net.loss_and_grad(ls).total;
                }
                seen += n;
                opt.step(lr, n);
            }
            train_loss /= std::max<size_t>(1, seen);
            if (!std::isfinite(train_loss))
                throw NbpError("train: diverged (non-finite training loss) at iteration " +
                               std::to_string(iteration));

            double holdout_loss = train_loss;
            if (!holdout_ls.empty()) {
                holdout_loss = 0.0;
                for (const LossSample& ls : holdout_ls) holdout_loss += net.loss_only(ls).total;
                holdout_loss /= holdout_ls.size();
            }
            if (!std::isfinite(holdout_loss))
                throw NbpError("train: diverged (non-finite holdout loss) at iteration " +
                               std::to_string(iteration));

            if (log)
                log->push_back({iteration, epoch, train_loss, holdout_loss,
                                std::exp(net.log_sigma1), std::exp(net.log_sigma2), lr,
                                static_cast<int>(batch.size())});

            if (holdout_loss < best_holdout - 1e-5) {
                best_holdout = holdout_loss;
                stall = 0;
            } else if (++stall >= cfg.plateau_patience) {
                lr *= cfg.lr_decay;
                stall = 0;
                if (lr < 1e-6) stopped = true;  // plateau persisted through decays
            }
        }
    }
    if (memory_out) *memory_out = std::move(mem);
    return net;
}

}  // namespace nbp
