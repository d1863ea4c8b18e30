#include "nbp/labels.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

namespace nbp {

std::vector<std::vector<ValueLabel>> subpath_gains(const Path& path,
                                                   const std::vector<size_t>& covered_counts,
                                                   size_t gt_count, const WindowSpec& window) {
    if (path.size() != covered_counts.size())
        throw NbpError("subpath_gains: snapshots must align with path poses");
    if (gt_count == 0) throw NbpError("subpath_gains: empty ground truth");
    std::vector<std::vector<ValueLabel>> labels(path.empty() ? 0 : path.size() - 1);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        for (size_t j = i + 1; j < path.size(); ++j) {
            const CellIndex wc = window.to_window(path[j].cell, path[i].cell);
            if (!window.contains(wc)) continue;  // inexpressible in the fixed window
            const double gain =
                static_cast<double>(covered_counts[j] - covered_counts[i]) / gt_count;
            labels[i].push_back({wc.x, wc.z, path[j].yaw_index, gain});
        }
    }
    return labels;
}

Grid2D<uint8_t> obstacle_gt(const Scene& scene, const Pose& pose, const WindowSpec& window) {
    return obstacle_slice(scene, pose, window);
}

namespace {

ObstacleMap gt_obstacle_map(const Scene& scene, const Pose& center, const WindowSpec& window) {
    ObstacleMap o;
    o.window = window;
    o.center = center;
    o.probs = Grid2D<float>(window.grid_w, window.grid_h, 1.0f);
    const Grid2D<uint8_t> slice = obstacle_slice(scene, center, window);
    for (int z = 0; z < window.grid_h; ++z)
        for (int x = 0; x < window.grid_w; ++x)
            o.probs.at(x, z) = slice.at(x, z) ? 1.0f : 0.0f;
    const CellIndex self = window.to_window(center.cell, center.cell);
    o.probs.at(self.x, self.z) = 0.0f;  // agent cell is free by construction
    return o;
}

/// Shortest navgrid path to the nearest frontier, clipped to the poses that
/// stay inside the window. Empty when no frontier is reachable.
std::vector<CellIndex> frontier_path(const EpisodeState& state, const Scene& scene,
                                     const WindowSpec& window) {
    const auto frontier = frontier_goal(state.known, state.pose.cell);
    if (!frontier) return {};
    // BFS on the true navgrid (training phase has GT traversability).
    Grid2D<int32_t> prev(scene.width(), scene.height(), -2);
    std::deque<CellIndex> queue{state.pose.cell};
    prev.at(state.pose.cell.x, state.pose.cell.z) = -1;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        if (c == *frontier) break;
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const CellIndex n{c.x + dx[i], c.z + dz[i]};
            if (!scene.is_nav(n.x, n.z) || prev.at(n.x, n.z) != -2) continue;
            prev.at(n.x, n.z) = c.z * scene.width() + c.x;
            queue.push_back(n);
        }
    }
    if (prev.at(frontier->x, frontier->z) == -2) return {};
    std::vector<CellIndex> path;
    for (CellIndex at = *frontier;;) {
        path.push_back(at);
        const int32_t p = prev.at(at.x, at.z);
        if (p < 0) break;
        at = {p % scene.width(), p / scene.width()};
    }
    std::reverse(path.begin(), path.end());
    size_t keep = 0;
    while (keep < path.size() && window.contains(window.to_window(path[keep], state.pose.cell)))
        ++keep;
    path.resize(keep);
    return path;
}

}  // namespace

std::vector<TrainingSample> rollout_collect(const Scene& scene, const std::vector<Vec3>& gt,
                                            Predictor& predictor, const Pose& start,
                                            const RolloutConfig& cfg, Rng& rng) {
    if (!scene.is_nav(start.cell.x, start.cell.z))
        throw NbpError("rollout_collect: start is not on the navgrid");
    if (cfg.length <= 0) throw NbpError("rollout_collect: length must be positive");

    EpisodeState state = make_episode_state(scene, gt, start, cfg.coverage, cfg.camera);
    std::vector<TrainingSample> samples;
    int executed = 0;

    while (executed < cfg.length) {
        const ExplorationEmbedding embedding =
            build_embedding(state.cloud, state.history, state.pose, cfg.window, scene.cell_size);
        const Prediction pred = predictor.predict(embedding);
        const ObstacleMap gt_map = gt_obstacle_map(scene, state.pose, cfg.window);
        const CellIndex self = cfg.window.to_window(state.pose.cell, state.pose.cell);

        // Goal sampling with rejection of unreachable / no-op goals.
        std::optional<std::vector<CellIndex>> route;
        Pose goal = state.pose;
        for (int attempt = 0; attempt < cfg.goal_retries && !route; ++attempt) {
            goal = boltzmann_sample(pred.value_map, cfg.beta, rng);
            if (goal == state.pose) continue;  // no-op goal
            const auto r = dijkstra_path(gt_map, self, cfg.window.to_window(goal.cell, state.pose.cell));
            if (r) route = r;
        }

        Path path;
        if (route) {
            std::vector<CellIndex> positions;
            positions.reserve(route->size());
            for (const CellIndex& wc : *route)
                positions.push_back(cfg.window.to_scene(wc, state.pose.cell));
            path = assign_orientations(positions, pred.value_map, OrientationMode::Sample, cfg.beta,
                                       rng);
            path.front() = state.pose;
            path.back() = goal;  // terminal pose keeps the sampled goal yaw
        } else {
            const std::vector<CellIndex> positions = frontier_path(state, scene, cfg.window);
            if (positions.size() < 2) break;  // nothing left to explore
            path = assign_orientations(positions, pred.value_map, OrientationMode::Sample, cfg.beta,
                                       rng);
            path.front() = state.pose;
        }

        // Execute the segment, snapshotting one embedding + covered count per
        // pose so sub-path labels are exact.
        struct Snapshot {
            Pose pose;
            ExplorationEmbedding embedding;
            size_t covered = 0;
            int step_index = 0;
        };
        std::vector<Snapshot> seg;
        seg.push_back({state.pose, embedding, state.tracker.covered_count(), executed});
        for (size_t i = 1; i < path.size() && executed < cfg.length; ++i) {
            const Pose& next = path[i];
            if (next == state.pose) continue;
            if (!(next.cell == state.pose.cell) && !scene.is_nav(next.cell.x, next.cell.z))
                throw NbpError("rollout_collect: GT-routed path hit an obstacle");
            state.pose = next;
            state.history.push_back(next);
            state.observe(scene, cfg.camera);
            state.coverage_series.push_back(state.tracker.coverage());
            ++executed;
            seg.push_back({state.pose,
                           build_embedding(state.cloud, state.history, state.pose, cfg.window,
                                           scene.cell_size),
                           state.tracker.covered_count(), executed});
        }
        if (seg.size() < 2) break;  // degenerate segment; avoid livelock

        Path seg_path;
        std::vector<size_t> counts;
        for (const Snapshot& s : seg) {
            seg_path.push_back(s.pose);
            counts.push_back(s.covered);
        }
        const auto labels = subpath_gains(seg_path, counts, gt.size(), cfg.window);
        for (size_t i = 0; i + 1 < seg.size(); ++i) {
            TrainingSample sample;
            sample.embedding = seg[i].embedding;
            sample.value_labels = labels[i];
            sample.obstacle_gt = obstacle_gt(scene, seg[i].pose, cfg.window);
            sample.step_index = seg[i].step_index;
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

std::vector<size_t> memory_update_and_batch(ReplayMemory& mem, std::vector<TrainingSample> fresh,
                                            int iteration, int curriculum_cutoff, Rng& rng) {
    std::vector<TrainingSample> survivors;
    survivors.reserve(fresh.size());
    for (TrainingSample& s : fresh) {
        if (iteration <= curriculum_cutoff && s.step_index < 10) continue;
        s.iteration = iteration;
        survivors.push_back(std::move(s));
    }
    std::vector<size_t> old_indices(mem.size());
    for (size_t i = 0; i < old_indices.size(); ++i) old_indices[i] = i;

    std::vector<size_t> batch;
    batch.reserve(survivors.size() * 2);
    for (TrainingSample& s : survivors) {
        batch.push_back(mem.size());
        mem.append(std::move(s));
    }
    const size_t replay_n = std::min(batch.size(), old_indices.size());
    std::sample(old_indices.begin(), old_indices.end(), std::back_inserter(batch), replay_n, rng);
    return batch;
}

namespace {

constexpr char kReplayMagic[8] = {'N', 'B', 'P', 'R', 'P', 'L', '0', '1'};

template <typename T>
void w_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T r_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NbpError("truncated replay file");
    return v;
}

void write_grid(std::ostream& os, const Grid2D<float>& g) {
    w_pod<int32_t>(os, g.width());
    w_pod<int32_t>(os, g.height());
    os.write(reinterpret_cast<const char*>(g.raw().data()), g.raw().size() * sizeof(float));
}

Grid2D<float> read_grid(std::istream& is) {
    const int w = r_pod<int32_t>(is);
    const int h = r_pod<int32_t>(is);
    Grid2D<float> g(w, h, 0.0f);
    is.read(reinterpret_cast<char*>(g.raw().data()), g.raw().size() * sizeof(float));
    if (!is) throw NbpError("truncated replay file");
    return g;
}

void write_sample(std::ostream& os, const TrainingSample& s) {
    w_pod<int32_t>(os, static_cast<int32_t>(s.embedding.slices.size()));
    for (const auto& slice : s.embedding.slices) write_grid(os, slice);
    write_grid(os, s.embedding.trajectory);
    w_pod<int32_t>(os, s.embedding.center.cell.x);
    w_pod<int32_t>(os, s.embedding.center.cell.z);
    w_pod<int32_t>(os, s.embedding.center.yaw_index);
    w_pod(os, s.embedding.spec.extent);
    w_pod<int32_t>(os, s.embedding.spec.grid_w);
    w_pod<int32_t>(os, s.embedding.spec.grid_h);
    w_pod<int32_t>(os, s.embedding.spec.slices);
    w_pod(os, s.embedding.spec.y_min);
    w_pod(os, s.embedding.spec.y_max);
    w_pod<int32_t>(os, static_cast<int32_t>(s.value_labels.size()));
    for (const ValueLabel& l : s.value_labels) {
        w_pod<int32_t>(os, l.gx);
        w_pod<int32_t>(os, l.gz);
        w_pod<int32_t>(os, l.yaw);
        w_pod(os, l.gain);
    }
    w_pod<int32_t>(os, s.obstacle_gt.width());
    w_pod<int32_t>(os, s.obstacle_gt.height());
    os.write(reinterpret_cast<const char*>(s.obstacle_gt.raw().data()), s.obstacle_gt.raw().size());
    w_pod<int32_t>(os, s.step_index);
    w_pod<int32_t>(os, s.iteration);
}

TrainingSample read_sample(std::istream& is) {
    TrainingSample s;
    const int n_slices = r_pod<int32_t>(is);
    for (int i = 0; i < n_slices; ++i) s.embedding.slices.push_back(read_grid(is));
    s.embedding.trajectory = read_grid(is);
    s.embedding.center.cell.x = r_pod<int32_t>(is);
    s.embedding.center.cell.z = r_pod<int32_t>(is);
    s.embedding.center.yaw_index = r_pod<int32_t>(is);
    s.embedding.spec.extent = r_pod<double>(is);
    s.embedding.spec.grid_w = r_pod<int32_t>(is);
    s.embedding.spec.grid_h = r_pod<int32_t>(is);
    s.embedding.spec.slices = r_pod<int32_t>(is);
    s.embedding.spec.y_min = r_pod<double>(is);
    s.embedding.spec.y_max = r_pod<double>(is);
    const int n_labels = r_pod<int32_t>(is);
    for (int i = 0; i < n_labels; ++i) {
        ValueLabel l;
        l.gx = r_pod<int32_t>(is);
        l.gz = r_pod<int32_t>(is);
        l.yaw = r_pod<int32_t>(is);
        l.gain = r_pod<double>(is);
        s.value_labels.push_back(l);
    }
    const int w = r_pod<int32_t>(is);
    const int h = r_pod<int32_t>(is);
    s.obstacle_gt = Grid2D<uint8_t>(w, h, 0);
    is.read(reinterpret_cast<char*>(s.obstacle_gt.raw().data()), s.obstacle_gt.raw().size());
    s.step_index = r_pod<int32_t>(is);
    s.iteration = r_pod<int32_t>(is);
    if (!is) throw NbpError("truncated replay file");
    return s;
}

}  // namespace

void ReplayMemory::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NbpError("cannot open " + path + " for writing");
    os.write(kReplayMagic, sizeof(kReplayMagic));
    w_pod<int64_t>(os, static_cast<int64_t>(samples_.size()));
    w_pod<int64_t>(os, static_cast<int64_t>(holdout.size()));
    for (const TrainingSample& s : samples_) write_sample(os, s);
    for (const TrainingSample& s : holdout) write_sample(os, s);
    if (!os) throw NbpError("failed writing replay file " + path);
}

ReplayMemory ReplayMemory::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NbpError("cannot open replay file " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || !std::equal(magic, magic + 8, kReplayMagic))
        throw NbpError("bad replay header in " + path);
    const auto n = r_pod<int64_t>(is);
    const auto n_holdout = r_pod<int64_t>(is);
    ReplayMemory mem;
    for (int64_t i = 0; i < n; ++i) mem.samples_.push_back(read_sample(is));
    for (int64_t i = 0; i < n_holdout; ++i) mem.holdout.push_back(read_sample(is));
    return mem;
}

}  // namespace nbp
