#include "nbp/planning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>

namespace nbp {

namespace {

/// Cells crossed in the xz-plane between the origin and a hit in the agent's
/// own height layer are traversable there (the ray's height stays inside the
/// layer); marking them free keeps the known map connected.
void mark_ray_corridor(KnownMap& known, const Scene& scene, const Vec3& origin, const Vec3& dir,
                       int hit_x, int hit_z) {
    const double cs = scene.cell_size;
    int ix = static_cast<int>(std::floor(origin.x / cs));
    int iz = static_cast<int>(std::floor(origin.z / cs));
    const int step_x = dir.x > 0 ? 1 : -1;
    const int step_z = dir.z > 0 ? 1 : -1;
    auto boundary_t = [&](double o, double d, int i, int step) {
        if (d == 0.0) return std::numeric_limits<double>::infinity();
        return ((i + (step > 0 ? 1 : 0)) * cs - o) / d;
    };
    double tx = boundary_t(origin.x, dir.x, ix, step_x);
    double tz = boundary_t(origin.z, dir.z, iz, step_z);
    const double dtx =
        dir.x != 0.0 ? cs / std::abs(dir.x) : std::numeric_limits<double>::infinity();
    const double dtz =
        dir.z != 0.0 ? cs / std::abs(dir.z) : std::numeric_limits<double>::infinity();
    const int max_steps = 2 * (scene.width() + scene.height());
    for (int i = 0; i < max_steps; ++i) {
        if (ix == hit_x && iz == hit_z) return;
        known.mark_free(ix, iz);
        if (tx <= tz) {
            tx += dtx;
            ix += step_x;
        } else {
            tz += dtz;
            iz += step_z;
        }
    }
}

}  // namespace

void EpisodeState::observe(const Scene& scene, const CameraModel& cam) {
    if (!scene.is_nav(pose.cell.x, pose.cell.z))
        throw NbpError("observe: pose is not on the navgrid");
    const Vec3 origin = scene.cell_center(pose.cell);
    const int agent_layer = static_cast<int>(std::floor(scene.agent_height / scene.cell_size));
    known.mark_free(pose.cell.x, pose.cell.z);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u) {
            const Vec3 dir = pixel_ray(pose, cam, u, v);
            const auto hit = cast_ray_hit(scene, origin, dir);
            if (!hit) continue;
            // Matches render_depth + backproject bit-for-bit: depths round
            // through float before back-projection.
            const double d = static_cast<double>(static_cast<float>(hit->t));
            const Vec3 p = origin + dir * d;
            if (cloud.insert(p)) tracker.add_point(p);
            if (hit->iy < 0) {
                known.mark_free(hit->ix, hit->iz);  // visible floor
            } else if (hit->iy < scene.vertical_cells()) {
                known.mark_obstacle(hit->ix, hit->iz);
                if (hit->iy == agent_layer)
                    mark_ray_corridor(known, scene, origin, dir, hit->ix, hit->iz);
            }
        }
}

EpisodeState make_episode_state(const Scene& scene, const std::vector<Vec3>& gt, const Pose& start,
                                const CoverageConfig& cfg, const CameraModel& cam) {
    EpisodeState state;
    state.pose = start;
    state.cloud = SurfelCloud(scene.cell_size);
    state.tracker = CoverageTracker(gt, cfg);
    state.known = KnownMap(scene.width(), scene.height());
    state.history.push_back(start);
    state.observe(scene, cam);
    return state;
}

namespace {

Pose pose_from_flat(const ValueMap& m, size_t flat) {
    const int yaw = static_cast<int>(flat % kNumYaw);
    const size_t cell = flat / kNumYaw;
    const int gx = static_cast<int>(cell % m.window.grid_w);
    const int gz = static_cast<int>(cell / m.window.grid_w);
    return {m.window.to_scene({gx, gz}, m.center.cell), yaw};
}

}  // namespace

Pose boltzmann_sample(const ValueMap& m, double beta, Rng& rng) {
    if (beta <= 0.0) throw NbpError("boltzmann_sample: beta must be positive");
    double max_v = -std::numeric_limits<double>::infinity();
    for (double v : m.values) {
        if (!std::isfinite(v)) throw NbpError("boltzmann_sample: non-finite value map");
        max_v = std::max(max_v, v);
    }
    std::vector<double> weights(m.values.size());
    double total = 0.0;
    for (size_t i = 0; i < m.values.size(); ++i) {
        weights[i] = std::exp((m.values[i] - max_v) / beta);
        total += weights[i];
    }
    std::uniform_real_distribution<double> unit(0.0, total);
    double r = unit(rng);
    size_t chosen = m.values.size() - 1;
    for (size_t i = 0; i < weights.size(); ++i) {
        r -= weights[i];
        if (r <= 0.0) {
            chosen = i;
            break;
        }
    }
    return pose_from_flat(m, chosen);
}

Pose argmax_goal(const ValueMap& m) {
    size_t best = 0;
    for (size_t i = 1; i < m.values.size(); ++i)
        if (m.values[i] > m.values[best]) best = i;
    return pose_from_flat(m, best);
}

std::vector<Pose> ranked_goals(const ValueMap& m, size_t limit) {
    std::vector<size_t> order(m.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return m.values[a] > m.values[b]; });
    std::vector<Pose> goals;
    for (size_t i = 0; i < order.size() && i < limit; ++i)
        goals.push_back(pose_from_flat(m, order[i]));
    return goals;
}

std::optional<std::vector<CellIndex>> dijkstra_path(const ObstacleMap& o, CellIndex start,
                                                    CellIndex goal) {
    const int w = o.window.grid_w, h = o.window.grid_h;
    auto blocked = [&](CellIndex c) { return o.blocked(c.x, c.z); };
    if (!o.window.contains(start)) throw NbpError("dijkstra_path: start outside window");
    if (blocked(start)) throw NbpError("dijkstra_path: start cell is blocked");
    if (!o.window.contains(goal) || blocked(goal)) return std::nullopt;

    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> dist(static_cast<size_t>(w) * h, kInf);
    std::vector<int> prev(static_cast<size_t>(w) * h, -1);
    auto idx = [&](CellIndex c) { return static_cast<size_t>(c.z) * w + c.x; };
    using Entry = std::pair<int, int>;  // (dist, flat index) for deterministic order
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[idx(start)] = 0;
    queue.emplace(0, static_cast<int>(idx(start)));
    while (!queue.empty()) {
        const auto [d, flat] = queue.top();
        queue.pop();
        if (d > dist[flat]) continue;
        const CellIndex c{flat % w, flat / w};
        if (c == goal) break;
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const CellIndex n{c.x + dx[i], c.z + dz[i]};
            if (!o.window.contains(n) || blocked(n)) continue;
            if (d + 1 < dist[idx(n)]) {
                dist[idx(n)] = d + 1;
                prev[idx(n)] = flat;
                queue.emplace(d + 1, static_cast<int>(idx(n)));
            }
        }
    }
    if (dist[idx(goal)] == kInf) return std::nullopt;
    std::vector<CellIndex> path;
    for (int at = static_cast<int>(idx(goal)); at != -1; at = prev[at])
        path.push_back({at % w, at / w});
    std::reverse(path.begin(), path.end());
    return path;
}

Path assign_orientations(const std::vector<CellIndex>& positions, const ValueMap& m,
                         OrientationMode mode, double beta, Rng& rng) {
    Path path;
    path.reserve(positions.size());
    for (const CellIndex& scene_cell : positions) {
        const CellIndex wc = m.window.to_window(scene_cell, m.center.cell);
        if (!m.window.contains(wc))
            throw NbpError("assign_orientations: position outside value-map window");
        int yaw = 0;
        if (mode == OrientationMode::Argmax) {
            for (int k = 1; k < kNumYaw; ++k)
                if (m.at(wc.x, wc.z, k) > m.at(wc.x, wc.z, yaw)) yaw = k;
        } else {
            double max_v = m.at(wc.x, wc.z, 0);
            for (int k = 1; k < kNumYaw; ++k) max_v = std::max(max_v, m.at(wc.x, wc.z, k));
            double total = 0.0;
            double weights[kNumYaw];
            for (int k = 0; k < kNumYaw; ++k) {
                weights[k] = std::exp((m.at(wc.x, wc.z, k) - max_v) / beta);
                total += weights[k];
            }
            std::uniform_real_distribution<double> unit(0.0, total);
            double r = unit(rng);
            yaw = kNumYaw - 1;
            for (int k = 0; k < kNumYaw; ++k) {
                r -= weights[k];
                if (r <= 0.0) {
                    yaw = k;
                    break;
                }
            }
        }
        path.push_back({scene_cell, yaw});
    }
    return path;
}

ExecResult execute_path(EpisodeState& state, const Path& path, const Scene& scene,
                        const CameraModel& cam, int& budget) {
    if (path.empty() || !(path.front().cell == state.pose.cell))
        throw NbpError("execute_path: path must start at the agent's position");
    ExecResult result;
    for (size_t i = 0; i < path.size(); ++i) {
        const Pose& next = path[i];
        if (next == state.pose) continue;
        if (budget <= 0) {
            result.halt = HaltReason::BudgetExhausted;
            return result;
        }
        if (!(next.cell == state.pose.cell) && !scene.is_nav(next.cell.x, next.cell.z)) {
            result.halt = HaltReason::CollisionReplan;
            return result;
        }
        state.pose = next;
        state.history.push_back(next);
        state.observe(scene, cam);
        state.coverage_series.push_back(state.tracker.coverage());
        --budget;
        ++result.steps;
    }
    result.halt = HaltReason::PathComplete;
    return result;
}

std::optional<CellIndex> frontier_goal(const KnownMap& known, CellIndex agent_cell) {
    const auto& grid = known.cells;
    if (!grid.in_bounds(agent_cell.x, agent_cell.z) ||
        grid.at(agent_cell.x, agent_cell.z) != CellState::Free)
        throw NbpError("frontier_goal: agent cell must be known-free");
    auto is_frontier = [&](CellIndex c) {
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const int nx = c.x + dx[i], nz = c.z + dz[i];
            if (grid.in_bounds(nx, nz) && grid.at(nx, nz) == CellState::Unknown) return true;
        }
        return false;
    };
    Grid2D<uint8_t> seen(grid.width(), grid.height(), 0);
    std::deque<CellIndex> queue{agent_cell};
    seen.at(agent_cell.x, agent_cell.z) = 1;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        if (is_frontier(c)) return c;
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const CellIndex n{c.x + dx[i], c.z + dz[i]};
            if (grid.in_bounds(n.x, n.z) && !seen.at(n.x, n.z) &&
                grid.at(n.x, n.z) == CellState::Free) {
                seen.at(n.x, n.z) = 1;
                queue.push_back(n);
            }
        }
    }
    return std::nullopt;
}

Pose greedy_nbv_goal(const EpisodeState& state, const Scene& scene, const CameraModel& cam,
                     int candidate_radius) {
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
                const DepthImage depth = render_depth(scene, candidate, cam);
                const auto points =
                    backproject(depth, candidate, cam, scene.cell_size, scene.agent_height);
                const size_t gain = state.tracker.would_cover(points);
                if (first || gain > best_gain) {
                    best = candidate;
                    best_gain = gain;
                    first = false;
                }
            }
        }
    return best;
}

Pose random_policy(const EpisodeState& state, const Scene& scene, Rng& rng) {
    std::vector<Pose> moves;
    const int dx[4] = {1, -1, 0, 0};
    const int dz[4] = {0, 0, 1, -1};
    for (int i = 0; i < 4; ++i) {
        const CellIndex cell{state.pose.cell.x + dx[i], state.pose.cell.z + dz[i]};
        if (!scene.is_nav(cell.x, cell.z)) continue;
        for (int yaw = 0; yaw < kNumYaw; ++yaw) moves.push_back({cell, yaw});
    }
    if (moves.empty()) {
        // Boxed in: rotate in place.
        std::uniform_int_distribution<int> yaw_dist(0, kNumYaw - 1);
        return {state.pose.cell, yaw_dist(rng)};
    }
    std::uniform_int_distribution<size_t> pick(0, moves.size() - 1);
    return moves[pick(rng)];
}

}  // namespace nbp
