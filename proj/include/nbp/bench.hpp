#pragma once

#include <string>
#include <vector>

#include "nbp/labels.hpp"
#include "nbp/learner/net.hpp"
#include "nbp/learner/oracle.hpp"
#include "nbp/planning.hpp"
#include "nbp/scene.hpp"

namespace nbp {

enum class PlannerKind { Random, Fbe, GreedyNbv, NbpOracle, NbpLearned, NbpOracleObstacle };

PlannerKind planner_from_name(const std::string& name);
std::string planner_name(PlannerKind kind);

struct PlannerSpec {
    PlannerKind kind = PlannerKind::Random;
    NbpNet* net = nullptr;  // required for the learned variants
    const VisibilityIndex* vis = nullptr;  // optional shared per-scene memo
    int oracle_stride = 4;
    double beta = 0.1;      // unused at inference (argmax) but kept for parity
    WindowSpec window;
    CameraModel camera;
    CoverageConfig coverage;
};

struct StepRecord {
    int step = 0;  // 0 = initial observation
    Pose pose;
    double coverage = 0.0;
};

struct EpisodeLog {
    std::string scene_id;
    std::string planner;
    uint64_t seed = 0;
    int budget = 0;
    std::vector<StepRecord> steps;
    std::vector<std::string> events;  // halt / replan markers
    double final_coverage = 0.0;
    double auc_value = 0.0;
    double comp_pct = 0.0;
    double comp_cm = 0.0;
    double wall_time_s = 0.0;
    bool aborted = false;
    std::string abort_reason;
};

/// Decide/execute loop to budget exhaustion; coverage recorded per step.
EpisodeLog run_episode(const Scene& scene, const std::vector<Vec3>& gt, const PlannerSpec& planner,
                       const Pose& start, int budget, uint64_t seed);

struct BenchConfig {
    std::string difficulty = "normal";
    int scene_count = 10;
    int trials = 5;
    int budget = 100;
    std::vector<std::string> planners{"random", "fbe"};
    uint64_t seed = 1;
    int threads = 1;
    std::string checkpoint;  // learned-planner weights
    int oracle_stride = 4;
    WindowSpec window;
    CameraModel camera;
    CoverageConfig coverage;
};

struct PlannerStats {
    std::string planner;
    int episodes = 0;
    double mean_cov = 0.0, std_cov = 0.0;
    double mean_auc = 0.0, std_auc = 0.0;
    double mean_comp_pct = 0.0;
    double mean_comp_cm = 0.0;
};

struct Report {
    std::vector<EpisodeLog> episodes;  // sorted (planner, scene, seed)
    std::vector<PlannerStats> stats;
};

/// Fair-start comparison: identical scenes and start poses for every planner,
/// episodes scheduled across a worker pool, deterministic aggregation.
Report evaluate(const BenchConfig& cfg);

/// Recomputes per-planner stats from raw episode logs.
std::vector<PlannerStats> aggregate(const std::vector<EpisodeLog>& episodes);

void write_report(const Report& report, const std::string& out_dir);
void write_trace(const EpisodeLog& log, const std::string& path);
EpisodeLog read_trace(const std::string& path);

/// Plot-ready CSV (step, coverage) plus a PGM trajectory overlay.
void trace_export(const std::string& trace_path, const std::string& out_prefix);

}  // namespace nbp
