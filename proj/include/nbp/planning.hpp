#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nbp/core.hpp"
#include "nbp/coverage.hpp"
#include "nbp/scene.hpp"
#include "nbp/sensor.hpp"
#include "nbp/window.hpp"

namespace nbp {

/// Agent-centred value map over positions x orientations. Flat index order is
/// ((z * W + x) * kNumYaw + yaw); ties in argmax resolve to the lowest index.
struct ValueMap {
    WindowSpec window;
    Pose center;
    std::vector<double> values;  // grid_h * grid_w * kNumYaw

    void init_zero() {
        values.assign(static_cast<size_t>(window.grid_w) * window.grid_h * kNumYaw, 0.0);
    }
    size_t flat(int gx, int gz, int yaw) const {
        return (static_cast<size_t>(gz) * window.grid_w + gx) * kNumYaw + yaw;
    }
    double& at(int gx, int gz, int yaw) { return values[flat(gx, gz, yaw)]; }
    double at(int gx, int gz, int yaw) const { return values[flat(gx, gz, yaw)]; }
};

/// Agent-centred traversability probabilities; cells with prob > 0.5 are
/// treated as obstacles, the agent's own cell is always forced free.
struct ObstacleMap {
    WindowSpec window;
    Pose center;
    Grid2D<float> probs;

    bool blocked(int gx, int gz) const { return probs.at(gx, gz) > 0.5f; }
};

using Path = std::vector<Pose>;

enum class CellState : int8_t { Unknown = 0, Free = 1, Obstacle = 2 };

/// Tristate map over scene cells derived from observations and traversal.
struct KnownMap {
    Grid2D<CellState> cells;

    explicit KnownMap(int w = 0, int h = 0) : cells(w, h, CellState::Unknown) {}
    void mark_free(int x, int z) {
        if (cells.in_bounds(x, z) && cells.at(x, z) != CellState::Free)
            cells.at(x, z) = CellState::Free;
    }
    void mark_obstacle(int x, int z) {
        if (cells.in_bounds(x, z) && cells.at(x, z) == CellState::Unknown)
            cells.at(x, z) = CellState::Obstacle;
    }
    /// Overrides a Free mark; used after a collision proves a cell blocked.
    void mark_obstacle_force(int x, int z) {
        if (cells.in_bounds(x, z)) cells.at(x, z) = CellState::Obstacle;
    }
};

enum class HaltReason { PathComplete, CollisionReplan, BudgetExhausted };

/// Per-episode mutable agent state shared by all planners.
struct EpisodeState {
    Pose pose;
    SurfelCloud cloud;
    CoverageTracker tracker;
    KnownMap known;
    std::vector<Pose> history;          // every executed pose, start included
    std::vector<double> coverage_series;  // coverage after each executed step

    /// Render at the current pose, integrate and update coverage/known map.
    void observe(const Scene& scene, const CameraModel& cam);
};

EpisodeState make_episode_state(const Scene& scene, const std::vector<Vec3>& gt, const Pose& start,
                                const CoverageConfig& cfg, const CameraModel& cam);

/// Boltzmann goal sampling over all value-map cells (Eq.-style softmax with
/// max subtraction). Returns the goal pose in scene coordinates.
Pose boltzmann_sample(const ValueMap& m, double beta, Rng& rng);

Pose argmax_goal(const ValueMap& m);

/// Goal poses ranked by value, highest first (used for argmax with fallback).
std::vector<Pose> ranked_goals(const ValueMap& m, size_t limit);

/// Shortest 4-connected path over free cells of the binarized obstacle map.
/// start/goal are window coordinates; returns window-coordinate positions
/// (start included), or nullopt when the goal is blocked or unreachable.
/// Throws when the start cell is blocked.
std::optional<std::vector<CellIndex>> dijkstra_path(const ObstacleMap& o, CellIndex start,
                                                    CellIndex goal);

enum class OrientationMode { Sample, Argmax };

/// Assigns one orientation per position from the value map's yaw channels.
/// Positions are scene coordinates and must fall inside the map's window.
Path assign_orientations(const std::vector<CellIndex>& positions, const ValueMap& m,
                         OrientationMode mode, double beta, Rng& rng);

struct ExecResult {
    int steps = 0;
    HaltReason halt = HaltReason::PathComplete;
};

/// Advances pose-by-pose along the path; one step per pose change. Renders
/// and integrates after each move. A blocked move halts without consuming a
/// step. `budget` is decremented in place.
ExecResult execute_path(EpisodeState& state, const Path& path, const Scene& scene,
                        const CameraModel& cam, int& budget);

/// Nearest known-free cell adjacent to unknown space, or nullopt.
std::optional<CellIndex> frontier_goal(const KnownMap& known, CellIndex agent_cell);

/// Oracle-scored one-step NBV: evaluates poses within `candidate_radius`
/// cells (manhattan) x 8 yaws by true immediate coverage gain.
Pose greedy_nbv_goal(const EpisodeState& state, const Scene& scene, const CameraModel& cam,
                     int candidate_radius = 1);

/// Uniform over feasible single-step moves (4 translations x 8 yaws).
Pose random_policy(const EpisodeState& state, const Scene& scene, Rng& rng);

}  // namespace nbp
