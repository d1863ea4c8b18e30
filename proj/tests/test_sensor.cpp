#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "nbp/coverage.hpp"
#include "nbp/scene.hpp"
#include "nbp/sensor.hpp"
#include "util.hpp"

using namespace nbp;

namespace {

// Brute-force reference: march the ray in 1cm steps until a solid voxel.
double ray_march(const Scene& s, const Vec3& origin, const Vec3& dir, double max_t = 100.0) {
    const double step = 0.01;
    for (double t = step; t < max_t; t += step) {
        const Vec3 p = origin + dir * t;
        const int x = static_cast<int>(std::floor(p.x / s.cell_size));
        const int z = static_cast<int>(std::floor(p.z / s.cell_size));
        const int iy = static_cast<int>(std::floor(p.y / s.cell_size));
        if (s.is_solid(x, iy, z)) return t;
    }
    return -1.0;
}

double nearest_gt(const std::vector<Vec3>& gt, const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& g : gt) best = std::min(best, (g - p).norm());
    return best;
}

}  // namespace

TEST_CASE("center pixel depth to a facing wall is analytic") {
    // Corridor along +x: agent at cell 1, wall starts 6 cells (3.0m) past the
    // agent's cell centre.
    const Scene s = testutil::box_scene(6, 1);
    const Pose pose{{1, 1}, 0};  // facing +x
    const CameraModel cam;
    const DepthImage img = render_depth(s, pose, cam);
    // Wall face sits at x = 7 * cell_size = 3.5; agent centre at 0.75.
    const double expected = 7 * s.cell_size - (1 + 0.5) * s.cell_size;
    const double center = img.at(cam.width / 2, cam.height / 2);
    CHECK(std::abs(center - expected) <= s.cell_size / 2);
}

TEST_CASE("downward pixels hit the floor at agent_height / cos(declination)") {
    const Scene s = testutil::box_scene(20, 20);
    const Pose pose{{10, 10}, 0};
    const CameraModel cam;
    const DepthImage img = render_depth(s, pose, cam);
    // Bottom rows of the centre column look down at the floor.
    for (int v = cam.height - 4; v < cam.height; ++v) {
        const Vec3 dir = pixel_ray(pose, cam, cam.width / 2, v);
        REQUIRE(dir.y < 0.0);
        const double expected = s.agent_height / -dir.y;  // = h / cos(declination)
        CHECK(img.at(cam.width / 2, v) == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("rays pass through window bands to the surface beyond") {
    Scene s = testutil::box_scene(6, 1);
    // Interior wall at x=4 with a band covering agent height; the ray should
    // continue to the far boundary wall.
    testutil::set_wall(s, 4, 1);
    testutil::set_window(s, 4, 1, 1.0f, 2.2f);
    const Pose pose{{1, 1}, 0};
    const Vec3 origin = s.cell_center(pose.cell);
    const Vec3 dir = yaw_direction(0);
    const double t = cast_ray(s, origin, dir);
    const double beyond_wall = 4 * s.cell_size - origin.x;
    CHECK(t > beyond_wall);
    const double oracle = ray_march(s, origin, dir);
    REQUIRE(oracle > 0.0);
    CHECK(std::abs(t - oracle) <= s.cell_size / 2);
}

TEST_CASE("DDA matches the 1cm ray-march oracle on random rays") {
    DifficultyParams p = difficulty_preset("normal");
    p.seed = 21;
    const Scene s = generate_scene(p);
    Rng rng(99);
    const auto nav = s.nav_cells();
    std::uniform_int_distribution<size_t> cell(0, nav.size() - 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const Vec3 origin = s.cell_center(nav[cell(rng)]);
        Vec3 dir{unit(rng), unit(rng) * 0.5, unit(rng)};
        if (dir.norm() < 1e-6) dir = {1, 0, 0};
        dir = dir * (1.0 / dir.norm());
        const double t = cast_ray(s, origin, dir);
        const double oracle = ray_march(s, origin, dir);
        REQUIRE(t > 0.0);
        REQUIRE(oracle > 0.0);
        CHECK(std::abs(t - oracle) <= s.cell_size / 2);
    }
}

TEST_CASE("watertight: every pixel depth positive and finite") {
    DifficultyParams p = difficulty_preset("simple");
    p.seed = 13;
    const Scene s = generate_scene(p);
    const CameraModel cam;
    Rng rng(7);
    const auto nav = s.nav_cells();
    std::uniform_int_distribution<size_t> cell(0, nav.size() - 1);
    std::uniform_int_distribution<int> yaw(0, kNumYaw - 1);
    for (int i = 0; i < 5; ++i) {
        const Pose pose{nav[cell(rng)], yaw(rng)};
        const DepthImage img = render_depth(s, pose, cam);
        for (float d : img.depth) {
            CHECK(d > 0.0f);
            CHECK(std::isfinite(d));
        }
    }
}

TEST_CASE("render off the navgrid is an error") {
    const Scene s = testutil::box_scene(4, 4);
    CHECK_THROWS_AS(render_depth(s, Pose{{0, 0}, 0}, CameraModel{}), NbpError);
}

TEST_CASE("backprojected points lie on scene surfaces") {
    DifficultyParams p = difficulty_preset("simple");
    p.seed = 17;
    const Scene s = generate_scene(p);
    const auto gt = gt_surface_points(s);
    const CameraModel cam;
    const Pose pose{s.nav_cells().front(), 3};
    const DepthImage img = render_depth(s, pose, cam);
    const auto pts = backproject(img, pose, cam, s.cell_size, s.agent_height);
    REQUIRE(!pts.empty());
    // A hit can land anywhere on a voxel face; the face-centre surfel is at
    // most half a face diagonal (cell/sqrt(2)) away.
    for (size_t i = 0; i < pts.size(); i += 37)
        CHECK(nearest_gt(gt, pts[i]) <= s.cell_size / std::sqrt(2.0) + 1e-6);
}

TEST_CASE("yaw rotation by 90 degrees rotates the back-projection") {
    const Scene s = testutil::box_scene(9, 9);
    const CameraModel cam;
    const Pose a{{5, 5}, 0};
    const Pose b{{5, 5}, 2};  // +90 degrees
    const auto pa = backproject(render_depth(s, a, cam), a, cam, s.cell_size, s.agent_height);
    const auto pb = backproject(render_depth(s, b, cam), b, cam, s.cell_size, s.agent_height);
    REQUIRE(pa.size() == pb.size());
    const Vec3 c = s.cell_center(a.cell);
    for (size_t i = 0; i < pa.size(); i += 101) {
        // Rotate pa[i] by +90 degrees about the vertical axis through the agent.
        const Vec3 r{c.x - (pa[i].z - c.z), pa[i].y, c.z + (pa[i].x - c.x)};
        CHECK((r - pb[i]).norm() < 1e-4);
    }
}

TEST_CASE("integration is idempotent and deduplicating") {
    SurfelCloud cloud(0.5);
    const std::vector<Vec3> pts{{0.1, 0.1, 0.1}, {0.2, 0.2, 0.2}, {1.4, 0.1, 0.1}};
    integrate(cloud, pts);
    CHECK(cloud.size() == 2);  // first two share a voxel
    const size_t before = cloud.size();
    integrate(cloud, pts);
    CHECK(cloud.size() == before);
}

TEST_CASE("integrated size bounded by the sum of parts") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    SurfelCloud a(0.5), b(0.5), both(0.5);
    std::vector<Vec3> pa, pb;
    for (int i = 0; i < 200; ++i) pa.push_back({u(rng), u(rng), u(rng)});
    for (int i = 0; i < 200; ++i) pb.push_back({u(rng), u(rng), u(rng)});
    integrate(a, pa);
    integrate(b, pb);
    integrate(both, pa);
    integrate(both, pb);
    CHECK(both.size() <= a.size() + b.size());
}

TEST_CASE("nearest_distance agrees with a linear scan") {
    Rng rng(6);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    SurfelCloud cloud(0.5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    integrate(cloud, pts);
    const auto stored = cloud.to_points();
    for (int i = 0; i < 50; ++i) {
        const Vec3 q{u(rng), u(rng), u(rng)};
        const double got = cloud.nearest_distance(q, 0.5);
        double scan = std::numeric_limits<double>::infinity();
        for (const Vec3& p : stored) scan = std::min(scan, (p - q).norm());
        if (std::isfinite(got)) CHECK(got >= scan - 1e-12);
        if (scan < 0.25) CHECK(got == doctest::Approx(scan));  // well inside the probe radius
    }
}
