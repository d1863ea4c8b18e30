#include "nbp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <thread>

#include <json.hpp>

#include "nbp/coverage.hpp"

namespace nbp {

using nlohmann::json;

PlannerKind planner_from_name(const std::string& name) {
    if (name == "random") return PlannerKind::Random;
    if (name == "fbe") return PlannerKind::Fbe;
    if (name == "greedy-nbv") return PlannerKind::GreedyNbv;
    if (name == "nbp-oracle") return PlannerKind::NbpOracle;
    if (name == "nbp") return PlannerKind::NbpLearned;
    if (name == "nbp-oracle-obstacle") return PlannerKind::NbpOracleObstacle;
    throw NbpError("unknown planner: " + name);
}

std::string planner_name(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::Random: return "random";
        case PlannerKind::Fbe: return "fbe";
        case PlannerKind::GreedyNbv: return "greedy-nbv";
        case PlannerKind::NbpOracle: return "nbp-oracle";
        case PlannerKind::NbpLearned: return "nbp";
        case PlannerKind::NbpOracleObstacle: return "nbp-oracle-obstacle";
    }
    throw NbpError("unknown planner kind");
}

namespace {

/// One step that may be a pure rotation or no-op; always consumes budget.
void apply_step(EpisodeState& state, const Pose& next, const Scene& scene, const CameraModel& cam,
                int& budget) {
    if (!(next == state.pose)) {
        state.pose = next;
        state.history.push_back(next);
        state.observe(scene, cam);
    }
    state.coverage_series.push_back(state.tracker.coverage());
    --budget;
}

int travel_yaw_or(CellIndex from, CellIndex to, int fallback) {
    const int dx = to.x - from.x, dz = to.z - from.z;
    if (dx == 1 && dz == 0) return 0;
    if (dx == 0 && dz == 1) return 2;
    if (dx == -1 && dz == 0) return 4;
    if (dx == 0 && dz == -1) return 6;
    return fallback;
}

/// BFS path over known-free cells; empty when unreachable.
std::vector<CellIndex> known_free_path(const KnownMap& known, CellIndex start, CellIndex goal) {
    const auto& grid = known.cells;
    Grid2D<int32_t> prev(grid.width(), grid.height(), -2);
    std::deque<CellIndex> queue{start};
    prev.at(start.x, start.z) = -1;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        if (c == goal) break;
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const CellIndex n{c.x + dx[i], c.z + dz[i]};
            if (!grid.in_bounds(n.x, n.z) || prev.at(n.x, n.z) != -2 ||
                grid.at(n.x, n.z) != CellState::Free)
                continue;
            prev.at(n.x, n.z) = c.z * grid.width() + c.x;
            queue.push_back(n);
        }
    }
    if (prev.at(goal.x, goal.z) == -2) return {};
    std::vector<CellIndex> path;
    for (CellIndex at = goal;;) {
        path.push_back(at);
        const int32_t p = prev.at(at.x, at.z);
        if (p < 0) break;
        at = {p % grid.width(), p / grid.width()};
    }
    std::reverse(path.begin(), path.end());
    return path;
}

/// Nearest frontier cell outside `ignored`, or nullopt.
std::optional<CellIndex> nearest_frontier(const KnownMap& known, CellIndex agent,
                                          const std::set<std::pair<int, int>>& ignored) {
    const auto& grid = known.cells;
    auto is_frontier = [&](CellIndex c) {
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i)
            if (grid.in_bounds(c.x + dx[i], c.z + dz[i]) &&
                grid.at(c.x + dx[i], c.z + dz[i]) == CellState::Unknown)
                return true;
        return false;
    };
    Grid2D<uint8_t> seen(grid.width(), grid.height(), 0);
    std::deque<CellIndex> queue{agent};
    seen.at(agent.x, agent.z) = 1;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        if (is_frontier(c) && !ignored.count({c.x, c.z})) return c;
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

/// After a collision halt, correct the known map: the move that failed proves
/// the target cell is blocked.
void mark_collision(KnownMap& known, const Path& path, const Pose& pose) {
    for (size_t i = path.size(); i-- > 1;) {
        if (path[i - 1].cell == pose.cell && !(path[i].cell == pose.cell)) {
            known.mark_obstacle_force(path[i].cell.x, path[i].cell.z);
            return;
        }
    }
}

void run_random(EpisodeState& state, const Scene& scene, const PlannerSpec& spec, int& budget,
                Rng& rng) {
    while (budget > 0) apply_step(state, random_policy(state, scene, rng), scene, spec.camera, budget);
}

void run_greedy_nbv(EpisodeState& state, const Scene& scene, const PlannerSpec& spec, int& budget) {
    while (budget > 0) {
        const Pose next = spec.vis ? greedy_nbv_goal_fast(state, scene, *spec.vis, 1)
                                   : greedy_nbv_goal(state, scene, spec.camera, 1);
        apply_step(state, next, scene, spec.camera, budget);
    }
}

void run_fbe(EpisodeState& state, const Scene& scene, const PlannerSpec& spec, int& budget,
             EpisodeLog& log) {
    std::set<std::pair<int, int>> exhausted;
    int rotations_here = 0;
    CellIndex last_frontier{-1, -1};
    while (budget > 0) {
        const auto frontier = nearest_frontier(state.known, state.pose.cell, exhausted);
        if (!frontier) {
            log.events.push_back("no_frontier@" + std::to_string(state.coverage_series.size()));
            break;
        }
        if (!(*frontier == last_frontier)) {
            last_frontier = *frontier;
            rotations_here = 0;
        }
        if (*frontier == state.pose.cell) {
            // Sweep in place; give up on this frontier after a full turn.
            if (++rotations_here > kNumYaw) {
                exhausted.insert({frontier->x, frontier->z});
                rotations_here = 0;
                continue;
            }
            apply_step(state, {state.pose.cell, (state.pose.yaw_index + 1) % kNumYaw}, scene,
                       spec.camera, budget);
            continue;
        }
        const auto cells = known_free_path(state.known, state.pose.cell, *frontier);
        if (cells.size() < 2) {
            exhausted.insert({frontier->x, frontier->z});
            continue;
        }
        Path path;
        path.push_back(state.pose);
        for (size_t i = 1; i < cells.size(); ++i)
            path.push_back({cells[i], travel_yaw_or(cells[i - 1], cells[i], state.pose.yaw_index)});
        const ExecResult exec = execute_path(state, path, scene, spec.camera, budget);
        if (exec.halt == HaltReason::CollisionReplan) {
            log.events.push_back("collision_replan@" + std::to_string(state.coverage_series.size()));
            mark_collision(state.known, path, state.pose);
        }
    }
}

Prediction nbp_prediction(const PlannerSpec& spec, const Scene& scene, const std::vector<Vec3>& gt,
                          const EpisodeState& state, const ExplorationEmbedding& embedding) {
    switch (spec.kind) {
        case PlannerKind::NbpOracle:
            return oracle_predict(scene, gt, state, spec.window, spec.oracle_stride, spec.camera,
                                  spec.vis);
        case PlannerKind::NbpLearned:
            if (!spec.net) throw NbpError("learned planner requires a checkpoint");
            return spec.net->predict(embedding);
        case PlannerKind::NbpOracleObstacle: {
            if (!spec.net) throw NbpError("learned planner requires a checkpoint");
            OracleObstaclePredictor wrapped(*spec.net, scene);
            return wrapped.predict(embedding);
        }
        default:
            throw NbpError("nbp_prediction: not an NBP planner");
    }
}

void run_nbp(EpisodeState& state, const Scene& scene, const std::vector<Vec3>& gt,
             const PlannerSpec& spec, int& budget, EpisodeLog& log, Rng& rng) {
    int zero_streak = 0;
    while (budget > 0) {
        const ExplorationEmbedding embedding =
            build_embedding(state.cloud, state.history, state.pose, spec.window, scene.cell_size);
        const Prediction pred = nbp_prediction(spec, scene, gt, state, embedding);

        ObstacleMap route_map = pred.obstacle_map;
        const CellIndex self = spec.window.to_window(state.pose.cell, state.pose.cell);
        route_map.probs.at(self.x, self.z) = 0.0f;  // agent cell forced free

        // Highest-value reachable goal (argmax with ranked fallback, mirroring
        // the training-time retry-then-frontier rule).
        Path path;
        const auto goals = ranked_goals(pred.value_map, 64);
        for (const Pose& goal : goals) {
            if (goal == state.pose) continue;
            const auto route =
                dijkstra_path(route_map, self, spec.window.to_window(goal.cell, state.pose.cell));
            if (!route) continue;
            std::vector<CellIndex> positions;
            for (const CellIndex& wc : *route)
                positions.push_back(spec.window.to_scene(wc, state.pose.cell));
            path = assign_orientations(positions, pred.value_map, OrientationMode::Argmax, spec.beta,
                                       rng);
            path.front() = state.pose;
            path.back() = goal;
            break;
        }
        if (path.empty()) {
            // All ranked candidates unreachable: head for the nearest frontier.
            const auto frontier = nearest_frontier(state.known, state.pose.cell, {});
            const auto cells =
                frontier ? known_free_path(state.known, state.pose.cell, *frontier)
                         : std::vector<CellIndex>{};
            if (cells.size() < 2) {
                apply_step(state, random_policy(state, scene, rng), scene, spec.camera, budget);
                continue;
            }
            path.push_back(state.pose);
            for (size_t i = 1; i < cells.size(); ++i)
                path.push_back(
                    {cells[i], travel_yaw_or(cells[i - 1], cells[i], state.pose.yaw_index)});
        }

        const ExecResult exec = execute_path(state, path, scene, spec.camera, budget);
        if (exec.halt == HaltReason::CollisionReplan) {
            log.events.push_back("collision_replan@" + std::to_string(state.coverage_series.size()));
            mark_collision(state.known, path, state.pose);
        }
        if (exec.steps == 0 && ++zero_streak >= 3) {
            // Livelock guard: burn one step on a random feasible move.
            apply_step(state, random_policy(state, scene, rng), scene, spec.camera, budget);
            zero_streak = 0;
        } else if (exec.steps > 0) {
            zero_streak = 0;
        }
    }
}

}  // namespace

EpisodeLog run_episode(const Scene& scene, const std::vector<Vec3>& gt, const PlannerSpec& planner,
                       const Pose& start, int budget, uint64_t seed) {
    EpisodeLog log;
    log.planner = planner_name(planner.kind);
    log.seed = seed;
    log.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        EpisodeState state =
            make_episode_state(scene, gt, start, planner.coverage, planner.camera);
        log.steps.push_back({0, start, state.tracker.coverage()});
        int remaining = budget;
        Rng rng(seed);
        switch (planner.kind) {
            case PlannerKind::Random: run_random(state, scene, planner, remaining, rng); break;
            case PlannerKind::GreedyNbv: run_greedy_nbv(state, scene, planner, remaining); break;
            case PlannerKind::Fbe: run_fbe(state, scene, planner, remaining, log); break;
            default: run_nbp(state, scene, gt, planner, remaining, log, rng); break;
        }
        for (size_t k = 0; k < state.coverage_series.size(); ++k) {
            const Pose pose =
                k + 1 < state.history.size() ? state.history[k + 1] : state.history.back();
            log.steps.push_back({static_cast<int>(k) + 1, pose, state.coverage_series[k]});
        }
        log.final_coverage = state.tracker.coverage();
        std::vector<double> series;
        for (size_t i = 1; i < log.steps.size(); ++i) series.push_back(log.steps[i].coverage);
        if (series.empty()) series.push_back(log.steps.front().coverage);
        log.auc_value = auc(series, std::max(budget, 1));
        const Completeness comp = completeness(gt, state.cloud, planner.coverage);
        log.comp_pct = comp.pct;
        log.comp_cm = comp.dist * 100.0;
    } catch (const std::exception& e) {
        log.aborted = true;
        log.abort_reason = e.what();
    }
    log.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return log;
}

std::vector<PlannerStats> aggregate(const std::vector<EpisodeLog>& episodes) {
    std::vector<std::string> names;
    for (const EpisodeLog& e : episodes)
        if (std::find(names.begin(), names.end(), e.planner) == names.end())
            names.push_back(e.planner);
    std::sort(names.begin(), names.end());
    std::vector<PlannerStats> stats;
    for (const std::string& name : names) {
        PlannerStats s;
        s.planner = name;
        std::vector<double> covs, aucs;
        for (const EpisodeLog& e : episodes) {
            if (e.planner != name || e.aborted) continue;
            covs.push_back(e.final_coverage);
            aucs.push_back(e.auc_value);
            s.mean_comp_pct += e.comp_pct;
            s.mean_comp_cm += e.comp_cm;
        }
        s.episodes = static_cast<int>(covs.size());
        if (s.episodes == 0) {
            stats.push_back(s);
            continue;
        }
        auto mean_std = [&](const std::vector<double>& xs, double* mean, double* sd) {
            *mean = 0.0;
            for (double x : xs) *mean += x;
            *mean /= xs.size();
            double var = 0.0;
            for (double x : xs) var += (x - *mean) * (x - *mean);
            *sd = std::sqrt(var / xs.size());
        };
        mean_std(covs, &s.mean_cov, &s.std_cov);
        mean_std(aucs, &s.mean_auc, &s.std_auc);
        s.mean_comp_pct /= s.episodes;
        s.mean_comp_cm /= s.episodes;
        stats.push_back(s);
    }
    return stats;
}

Report evaluate(const BenchConfig& cfg) {
    if (cfg.trials < 1) throw NbpError("evaluate: trials must be >= 1");
    std::vector<Scene> scenes;
    std::vector<std::vector<Vec3>> gts;
    std::vector<std::string> scene_ids;
    for (int i = 0; i < cfg.scene_count; ++i) {
        DifficultyParams params = difficulty_preset(cfg.difficulty);
        params.seed = cfg.seed * 7919ull + static_cast<uint64_t>(i);
        scenes.push_back(generate_scene(params));
        gts.push_back(gt_surface_points(scenes.back()));
        scene_ids.push_back(cfg.difficulty + "-" + std::to_string(i));
    }

    // Identical start pose per (scene, trial), shared by every planner.
    std::vector<std::vector<Pose>> starts(scenes.size());
    for (size_t s = 0; s < scenes.size(); ++s) {
        const auto cells = scenes[s].nav_cells();
        for (int t = 0; t < cfg.trials; ++t) {
            Rng rng(cfg.seed * 104729ull + s * 1009ull + static_cast<uint64_t>(t));
            std::uniform_int_distribution<size_t> cell_dist(0, cells.size() - 1);
            std::uniform_int_distribution<int> yaw_dist(0, kNumYaw - 1);
            starts[s].push_back({cells[cell_dist(rng)], yaw_dist(rng)});
        }
    }

    NbpNet net;
    bool net_loaded = false;
    std::vector<PlannerKind> kinds;
    for (const std::string& name : cfg.planners) {
        const PlannerKind kind = planner_from_name(name);
        kinds.push_back(kind);
        if ((kind == PlannerKind::NbpLearned || kind == PlannerKind::NbpOracleObstacle) &&
            !net_loaded) {
            if (cfg.checkpoint.empty())
                throw NbpError("planner '" + name + "' requires checkpoint=<path>");
            net = NbpNet::load(cfg.checkpoint);
            net_loaded = true;
        }
    }

    const bool needs_vis =
        std::any_of(kinds.begin(), kinds.end(), [](PlannerKind k) {
            return k == PlannerKind::GreedyNbv || k == PlannerKind::NbpOracle;
        });
    std::vector<std::unique_ptr<VisibilityIndex>> vis(scenes.size());
    if (needs_vis)
        for (size_t s = 0; s < scenes.size(); ++s)
            vis[s] = std::make_unique<VisibilityIndex>(scenes[s], gts[s], cfg.coverage, cfg.camera);

    struct Job {
        size_t planner, scene;
        int trial;
    };
    std::vector<Job> jobs;
    for (size_t p = 0; p < kinds.size(); ++p)
        for (size_t s = 0; s < scenes.size(); ++s)
            for (int t = 0; t < cfg.trials; ++t) jobs.push_back({p, s, t});

    std::vector<EpisodeLog> episodes(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            const Job& job = jobs[i];
            PlannerSpec spec;
            spec.kind = kinds[job.planner];
            spec.net = net_loaded ? &net : nullptr;
            spec.vis = vis[job.scene].get();
            spec.oracle_stride = cfg.oracle_stride;
            spec.window = cfg.window;
            spec.camera = cfg.camera;
            spec.coverage = cfg.coverage;
            const uint64_t seed = cfg.seed * 31ull + job.planner * 10007ull + job.scene * 101ull +
                                  static_cast<uint64_t>(job.trial);
            episodes[i] = run_episode(scenes[job.scene], gts[job.scene], spec,
                                      starts[job.scene][job.trial], cfg.budget, seed);
            episodes[i].scene_id = scene_ids[job.scene];
        }
    };
    const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(jobs.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    Report report;
    report.episodes = std::move(episodes);
    std::stable_sort(report.episodes.begin(), report.episodes.end(),
                     [](const EpisodeLog& a, const EpisodeLog& b) {
                         return std::tie(a.planner, a.scene_id, a.seed) <
                                std::tie(b.planner, b.scene_id, b.seed);
                     });
    report.stats = aggregate(report.episodes);
    return report;
}

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void write_report(const Report& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir + "/report.csv");
        if (!csv) throw NbpError("cannot write report.csv in " + out_dir);
        csv << "record,planner,scene,seed,steps,final_coverage,auc,comp_pct,comp_cm,aborted\n";
        for (const EpisodeLog& e : report.episodes)
            csv << "episode," << e.planner << ',' << e.scene_id << ',' << e.seed << ','
                << (e.steps.empty() ? 0 : e.steps.size() - 1) << ',' << fmt6(e.final_coverage) << ',' << fmt6(e.auc_value)
                << ',' << fmt6(e.comp_pct) << ',' << fmt6(e.comp_cm) << ',' << (e.aborted ? 1 : 0)
                << '\n';
        for (const PlannerStats& s : report.stats)
            csv << "summary," << s.planner << ",all,0," << s.episodes << ',' << fmt6(s.mean_cov)
                << ',' << fmt6(s.mean_auc) << ',' << fmt6(s.mean_comp_pct) << ','
                << fmt6(s.mean_comp_cm) << ",0\n";
    }
    {
        std::ofstream txt(out_dir + "/report.txt");
        if (!txt) throw NbpError("cannot write report.txt in " + out_dir);
        txt << "planner              episodes  cov(mean±std)        auc(mean±std)        comp%    "
               "comp-cm\n";
        for (const PlannerStats& s : report.stats) {
            char line[160];
            std::snprintf(line, sizeof(line),
                          "%-20s %8d  %.4f ± %.4f      %.4f ± %.4f      %.4f   %.2f\n",
                          s.planner.c_str(), s.episodes, s.mean_cov, s.std_cov, s.mean_auc,
                          s.std_auc, s.mean_comp_pct, s.mean_comp_cm);
            txt << line;
        }
    }
}

void write_trace(const EpisodeLog& log, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw NbpError("cannot open " + path + " for writing");
    json header{{"type", "header"},
                {"scene", log.scene_id},
                {"planner", log.planner},
                {"seed", log.seed},
                {"budget", log.budget},
                {"final_coverage", log.final_coverage},
                {"auc", log.auc_value},
                {"comp_pct", log.comp_pct},
                {"comp_cm", log.comp_cm},
                {"wall_time_s", log.wall_time_s},
                {"aborted", log.aborted},
                {"abort_reason", log.abort_reason},
                {"events", log.events}};
    os << header.dump() << '\n';
    for (const StepRecord& s : log.steps) {
        json rec{{"type", "step"},
                 {"step", s.step},
                 {"x", s.pose.cell.x},
                 {"z", s.pose.cell.z},
                 {"yaw", s.pose.yaw_index},
                 {"coverage", s.coverage}};
        os << rec.dump() << '\n';
    }
}

EpisodeLog read_trace(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw NbpError("cannot open trace " + path);
    EpisodeLog log;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        if (rec.at("type") == "header") {
            log.scene_id = rec.value("scene", "");
            log.planner = rec.value("planner", "");
            log.seed = rec.value("seed", 0ull);
            log.budget = rec.value("budget", 0);
            log.final_coverage = rec.value("final_coverage", 0.0);
            log.auc_value = rec.value("auc", 0.0);
            log.comp_pct = rec.value("comp_pct", 0.0);
            log.comp_cm = rec.value("comp_cm", 0.0);
            log.wall_time_s = rec.value("wall_time_s", 0.0);
            log.aborted = rec.value("aborted", false);
            log.abort_reason = rec.value("abort_reason", "");
            log.events = rec.value("events", std::vector<std::string>{});
            have_header = true;
        } else {
            StepRecord s;
            s.step = rec.at("step");
            s.pose.cell.x = rec.at("x");
            s.pose.cell.z = rec.at("z");
            s.pose.yaw_index = rec.at("yaw");
            s.coverage = rec.at("coverage");
            log.steps.push_back(s);
        }
    }
    if (!have_header) throw NbpError("trace " + path + " has no header record");
    return log;
}

void trace_export(const std::string& trace_path, const std::string& out_prefix) {
    const EpisodeLog log = read_trace(trace_path);
    {
        std::ofstream csv(out_prefix + "_coverage.csv");
        if (!csv) throw NbpError("cannot write " + out_prefix + "_coverage.csv");
        csv << "step,coverage\n";
        for (const StepRecord& s : log.steps) csv << s.step << ',' << fmt6(s.coverage) << '\n';
    }
    // Trajectory overlay: visit counts on a canvas sized to the poses.
    int max_x = 1, max_z = 1;
    for (const StepRecord& s : log.steps) {
        max_x = std::max(max_x, s.pose.cell.x + 2);
        max_z = std::max(max_z, s.pose.cell.z + 2);
    }
    Grid2D<int> visits(max_x, max_z, 0);
    for (const StepRecord& s : log.steps) ++visits.at(s.pose.cell.x, s.pose.cell.z);
    int peak = 1;
    for (int v : visits.raw()) peak = std::max(peak, v);
    std::ofstream pgm(out_prefix + "_trajectory.pgm", std::ios::binary);
    if (!pgm) throw NbpError("cannot write " + out_prefix + "_trajectory.pgm");
    pgm << "P5\n" << max_x << ' ' << max_z << "\n255\n";
    for (int z = 0; z < max_z; ++z)
        for (int x = 0; x < max_x; ++x) {
            const int v = visits.at(x, z);
            const uint8_t px = v == 0 ? 255 : static_cast<uint8_t>(200 - (v * 180) / peak);
            pgm.write(reinterpret_cast<const char*>(&px), 1);
        }
}

}  // namespace nbp
