#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "doctest.h"
#include "nbp/planning.hpp"
#include "nbp/visibility.hpp"
#include "util.hpp"

using namespace nbp;

namespace {

ValueMap make_map(int w = 32, int h = 32) {
    ValueMap m;
    m.window.grid_w = w;
    m.window.grid_h = h;
    m.window.extent = w * 0.5;
    m.init_zero();
    return m;
}

ObstacleMap make_obstacles(int w, int h, float fill = 0.0f) {
    ObstacleMap o;
    o.window.grid_w = w;
    o.window.grid_h = h;
    o.probs = Grid2D<float>(w, h, fill);
    return o;
}

// BFS distance oracle over the binarized obstacle map.
int bfs_cost(const ObstacleMap& o, CellIndex start, CellIndex goal) {
    Grid2D<int> dist(o.probs.width(), o.probs.height(), -1);
    std::deque<CellIndex> queue{start};
    dist.at(start.x, start.z) = 0;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        if (c == goal) return dist.at(c.x, c.z);
        const int dx[4] = {1, -1, 0, 0}, dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const CellIndex n{c.x + dx[i], c.z + dz[i]};
            if (o.probs.in_bounds(n.x, n.z) && dist.at(n.x, n.z) < 0 && !o.blocked(n.x, n.z)) {
                dist.at(n.x, n.z) = dist.at(c.x, c.z) + 1;
                queue.push_back(n);
            }
        }
    }
    return -1;
}

}  // namespace

TEST_CASE("boltzmann: two-cell distribution matches the closed form") {
    ValueMap m = make_map(2, 2);
    // Keep only two live cells apart in value; others far below so their mass
    // is negligible at beta = 1.
    for (double& v : m.values) v = -1e3;
    m.values[m.flat(0, 0, 0)] = 1.0;
    m.values[m.flat(1, 0, 0)] = 0.0;
    Rng rng(1);
    int first = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const Pose g = boltzmann_sample(m, 1.0, rng);
        const CellIndex wcell = m.window.to_window(g.cell, m.center.cell);
        if (wcell.x == 0 && wcell.z == 0 && g.yaw_index == 0) ++first;
    }
    CHECK(std::abs(first / static_cast<double>(draws) - 0.7311) <= 0.015);
}

TEST_CASE("boltzmann: uniform map samples uniformly") {
    ValueMap m = make_map(2, 2);
    Rng rng(2);
    std::map<size_t, int> counts;
    const int draws = 16000;
    for (int i = 0; i < draws; ++i) {
        const Pose g = boltzmann_sample(m, 1.0, rng);
        const CellIndex w = m.window.to_window(g.cell, m.center.cell);
        counts[m.flat(w.x, w.z, g.yaw_index)]++;
    }
    const double expect = draws / 32.0;
    const double sigma = std::sqrt(expect * (1.0 - 1.0 / 32.0));
    for (const auto& [cell, n] : counts) CHECK(std::abs(n - expect) <= 3.5 * sigma);
    CHECK(counts.size() == 32);
}

TEST_CASE("boltzmann: beta -> 0 recovers the argmax") {
    ValueMap m = make_map(4, 4);
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : m.values) v = u(rng);
    const Pose best = argmax_goal(m);
    int hits = 0;
    for (int i = 0; i < 2000; ++i)
        if (boltzmann_sample(m, 1e-6, rng) == best) ++hits;
    CHECK(hits >= 1998);  // >= 0.999 frequency
}

TEST_CASE("value shift invariance for sampling and argmax") {
    ValueMap m = make_map(4, 4);
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : m.values) v = u(rng);
    ValueMap shifted = m;
    for (double& v : shifted.values) v += 7.25;
    CHECK(argmax_goal(m) == argmax_goal(shifted));
    Rng ra(77), rb(77);
    for (int i = 0; i < 200; ++i)
        CHECK(boltzmann_sample(m, 0.3, ra) == boltzmann_sample(shifted, 0.3, rb));
}

TEST_CASE("argmax: ties resolve to the lowest flat index; scan oracle") {
    ValueMap m = make_map(4, 4);
    m.values[m.flat(1, 2, 3)] = 5.0;
    m.values[m.flat(3, 2, 1)] = 5.0;
    const Pose g = argmax_goal(m);
    const CellIndex w = m.window.to_window(g.cell, m.center.cell);
    CHECK(m.flat(w.x, w.z, g.yaw_index) == m.flat(1, 2, 3));

    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        for (double& v : m.values) v = u(rng);
        const Pose got = argmax_goal(m);
        const size_t oracle =
            std::max_element(m.values.begin(), m.values.end()) - m.values.begin();
        const CellIndex wc = m.window.to_window(got.cell, m.center.cell);
        CHECK(m.flat(wc.x, wc.z, got.yaw_index) == oracle);
    }
}

TEST_CASE("dijkstra: trivial, straight line, sealed goal, blocked start") {
    ObstacleMap o = make_obstacles(8, 8);
    const auto self = dijkstra_path(o, {2, 2}, {2, 2});
    REQUIRE(self.has_value());
    CHECK(self->size() == 1);

    const auto row = dijkstra_path(o, {0, 0}, {3, 0});
    REQUIRE(row.has_value());
    CHECK(row->size() == 4);
    CHECK(static_cast<int>(row->size()) - 1 == bfs_cost(o, {0, 0}, {3, 0}));

    ObstacleMap sealed = make_obstacles(8, 8);
    for (int i = 0; i < 8; ++i) sealed.probs.at(4, i) = 1.0f;
    CHECK(!dijkstra_path(sealed, {0, 0}, {6, 0}).has_value());

    ObstacleMap blocked = make_obstacles(4, 4);
    blocked.probs.at(1, 1) = 1.0f;
    CHECK_THROWS_AS(dijkstra_path(blocked, {1, 1}, {3, 3}), NbpError);
}

TEST_CASE("dijkstra cost equals BFS on random maps; sub-paths optimal") {
    Rng rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int inst = 0; inst < 100; ++inst) {
        ObstacleMap o = make_obstacles(12, 12);
        for (float& p : o.probs.raw()) p = u(rng) < 0.25 ? 1.0f : 0.0f;
        o.probs.at(0, 0) = 0.0f;
        std::uniform_int_distribution<int> cell(0, 11);
        const CellIndex goal{cell(rng), cell(rng)};
        const auto path = dijkstra_path(o, {0, 0}, goal);
        const int oracle = o.blocked(goal.x, goal.z) ? -1 : bfs_cost(o, {0, 0}, goal);
        if (!path) {
            CHECK(oracle == -1);
            continue;
        }
        CHECK(static_cast<int>(path->size()) - 1 == oracle);
        // Every sub-path of a shortest path is shortest.
        for (size_t i = 0; i < path->size(); i += 3)
            for (size_t j = i; j < path->size(); j += 4) {
                const auto sub = dijkstra_path(o, (*path)[i], (*path)[j]);
                REQUIRE(sub.has_value());
                CHECK(sub->size() - 1 == j - i);
            }
    }
}

TEST_CASE("orientation assignment: argmax dominance and sampled limit") {
    ValueMap m = make_map(8, 8);
    m.center = Pose{{10, 10}, 0};
    for (int gz = 0; gz < 8; ++gz)
        for (int gx = 0; gx < 8; ++gx) m.at(gx, gz, 5) = 10.0;
    std::vector<CellIndex> cells;
    for (int i = 0; i < 4; ++i)
        cells.push_back(m.window.to_scene({i + 2, 3}, m.center.cell));
    Rng rng(7);
    const Path p = assign_orientations(cells, m, OrientationMode::Argmax, 0.1, rng);
    REQUIRE(p.size() == cells.size());
    for (const Pose& pose : p) CHECK(pose.yaw_index == 5);

    // Near-zero temperature sampling equals argmax.
    const Path ps = assign_orientations(cells, m, OrientationMode::Sample, 1e-6, rng);
    for (const Pose& pose : ps) CHECK(pose.yaw_index == 5);

    // Uniform values sample uniformly.
    ValueMap flat = make_map(8, 8);
    flat.center = m.center;
    std::vector<int> yaw_counts(kNumYaw, 0);
    for (int i = 0; i < 2000; ++i) {
        const Path q = assign_orientations({cells[0]}, flat, OrientationMode::Sample, 1.0, rng);
        yaw_counts[q[0].yaw_index]++;
    }
    const double expect = 2000.0 / kNumYaw;
    const double sigma = std::sqrt(expect * (1.0 - 1.0 / kNumYaw));
    for (int n : yaw_counts) CHECK(std::abs(n - expect) <= 3.5 * sigma);

    const CellIndex outside = m.window.to_scene({40, 3}, m.center.cell);
    CHECK_THROWS_AS(assign_orientations({outside}, m, OrientationMode::Argmax, 0.1, rng),
                    NbpError);
}

TEST_CASE("execute_path: open run, wall collision, budget halt") {
    const Scene s = testutil::box_scene(10, 1);
    const auto gt = gt_surface_points(s);
    const CameraModel cam;
    const CoverageConfig cfg;

    auto straight = [&](int from_x, int n) {
        Path p;
        for (int i = 0; i <= n; ++i) p.push_back({{from_x + i, 1}, 0});
        return p;
    };

    EpisodeState st = make_episode_state(s, gt, {{1, 1}, 0}, cfg, cam);
    int budget = 100;
    const ExecResult open = execute_path(st, straight(1, 4), s, cam, budget);
    CHECK(open.steps == 4);
    CHECK(open.halt == HaltReason::PathComplete);
    CHECK(budget == 96);
    CHECK(st.pose == Pose{{5, 1}, 0});

    // Second position is a wall: zero moves, collision halt, no step consumed.
    EpisodeState st2 = make_episode_state(s, gt, {{1, 1}, 0}, cfg, cam);
    int budget2 = 100;
    Path into_wall{{{1, 1}, 0}, {{1, 0}, 0}};
    const ExecResult hit = execute_path(st2, into_wall, s, cam, budget2);
    CHECK(hit.steps == 0);
    CHECK(hit.halt == HaltReason::CollisionReplan);
    CHECK(budget2 == 100);

    EpisodeState st3 = make_episode_state(s, gt, {{1, 1}, 0}, cfg, cam);
    int budget3 = 2;
    const ExecResult cut = execute_path(st3, straight(1, 9), s, cam, budget3);
    CHECK(cut.steps == 2);
    CHECK(cut.halt == HaltReason::BudgetExhausted);
    CHECK(budget3 == 0);
}

TEST_CASE("frontier goal: none when fully known, else nearest") {
    KnownMap known(6, 6);
    for (int z = 0; z < 6; ++z)
        for (int x = 0; x < 6; ++x) known.cells.at(x, z) = CellState::Free;
    CHECK(!frontier_goal(known, {2, 2}).has_value());

    known.cells.at(5, 5) = CellState::Unknown;
    const auto f = frontier_goal(known, {0, 0});
    REQUIRE(f.has_value());
    CHECK((*f == CellIndex{4, 5} || *f == CellIndex{5, 4}));

    // Two frontiers at different distances: the nearer one wins.
    KnownMap two(10, 3);
    for (int z = 0; z < 3; ++z)
        for (int x = 0; x < 10; ++x) two.cells.at(x, z) = CellState::Free;
    two.cells.at(0, 1) = CellState::Unknown;  // distance 3 from (3,1) via (1,1)
    two.cells.at(9, 1) = CellState::Unknown;
    const auto near = frontier_goal(two, {3, 1});
    REQUIRE(near.has_value());
    CHECK(*near == CellIndex{1, 1});
}

TEST_CASE("greedy NBV picks the revealing candidate; stall rule documented") {
    const Scene s = testutil::box_scene(12, 12);
    const auto gt = gt_surface_points(s);
    const CameraModel cam;
    const CoverageConfig cfg;
    EpisodeState st = make_episode_state(s, gt, {{6, 6}, 0}, cfg, cam);
    const Pose pick = greedy_nbv_goal(st, s, cam, 1);
    // Fresh state: some candidate must reveal new surface.
    CHECK(st.tracker.would_cover(backproject(render_depth(s, pick, cam), pick, cam, s.cell_size,
                                             s.agent_height)) > 0);

    // Radius 0 restricts to yaw-only choices.
    const Pose spin = greedy_nbv_goal(st, s, cam, 0);
    CHECK(spin.cell == st.pose.cell);

    // All-covered state: gain 0 everywhere, lowest-index pose returned.
    for (const CellIndex c : s.nav_cells())
        for (int yaw = 0; yaw < kNumYaw; ++yaw) {
            const Pose p{c, yaw};
            st.tracker.mark_indices(st.tracker.hit_indices(
                backproject(render_depth(s, p, cam), p, cam, s.cell_size, s.agent_height)));
        }
    const Pose stall = greedy_nbv_goal(st, s, cam, 1);
    CHECK(stall == Pose{{6, 5}, 0});  // first enumerated candidate (dz = -1)
}

TEST_CASE("fast greedy NBV equals the render-based version") {
    DifficultyParams params = difficulty_preset("simple");
    params.seed = 23;
    const Scene s = generate_scene(params);
    const auto gt = gt_surface_points(s);
    const CameraModel cam;
    const CoverageConfig cfg;
    const VisibilityIndex vis(s, gt, cfg, cam);
    Rng rng(41);
    const auto nav = s.nav_cells();
    std::uniform_int_distribution<size_t> cell(0, nav.size() - 1);
    std::uniform_int_distribution<int> yaw(0, kNumYaw - 1);
    for (int i = 0; i < 10; ++i) {
        EpisodeState st = make_episode_state(s, gt, {nav[cell(rng)], yaw(rng)}, cfg, cam);
        // Partially cover to vary the uncovered pattern.
        for (int k = 0; k < 3; ++k) {
            const Pose p{nav[cell(rng)], yaw(rng)};
            st.tracker.mark_indices(st.tracker.hit_indices(
                backproject(render_depth(s, p, cam), p, cam, s.cell_size, s.agent_height)));
        }
        CHECK(greedy_nbv_goal_fast(st, s, vis, 1) == greedy_nbv_goal(st, s, cam, 1));
    }
}

TEST_CASE("visibility index matches render + hit_indices exactly") {
    DifficultyParams params = difficulty_preset("simple");
    params.seed = 29;
    const Scene s = generate_scene(params);
    const auto gt = gt_surface_points(s);
    const CameraModel cam;
    const CoverageConfig cfg;
    const VisibilityIndex vis(s, gt, cfg, cam);
    const CoverageTracker probe(gt, cfg);
    Rng rng(43);
    const auto nav = s.nav_cells();
    std::uniform_int_distribution<size_t> cell(0, nav.size() - 1);
    std::uniform_int_distribution<int> yaw(0, kNumYaw - 1);
    for (int i = 0; i < 15; ++i) {
        const Pose p{nav[cell(rng)], yaw(rng)};
        const auto direct = probe.hit_indices(
            backproject(render_depth(s, p, cam), p, cam, s.cell_size, s.agent_height));
        CHECK(vis.covered_from(p) == direct);
    }
}

TEST_CASE("random policy: feasible moves only, reproducible, uniform") {
    const Scene s = testutil::box_scene(3, 3);
    const auto gt = gt_surface_points(s);
    const CameraModel cam;
    const CoverageConfig cfg;
    // Corner cell: only two of four translations are feasible.
    EpisodeState st = make_episode_state(s, gt, {{1, 1}, 0}, cfg, cam);
    Rng rng(8);
    std::map<std::pair<int, int>, int> counts;
    const int draws = 8000;
    for (int i = 0; i < draws; ++i) {
        const Pose p = random_policy(st, s, rng);
        CHECK(s.is_nav(p.cell.x, p.cell.z));
        counts[{p.cell.x, p.cell.z}]++;
    }
    CHECK(counts.size() == 2);  // exactly the two open neighbours
    const double expect = draws / 2.0;
    for (const auto& [cell2, n] : counts) CHECK(std::abs(n - expect) <= 3.5 * std::sqrt(expect * 0.5));

    Rng ra(9), rb(9);
    for (int i = 0; i < 100; ++i) CHECK(random_policy(st, s, ra) == random_policy(st, s, rb));
}
