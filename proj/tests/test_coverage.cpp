#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "nbp/coverage.hpp"

using namespace nbp;

namespace {

std::vector<Vec3> random_points(Rng& rng, size_t n, double extent) {
    std::uniform_real_distribution<double> u(0.0, extent);
    std::vector<Vec3> pts;
    for (size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    return pts;
}

double coverage_scan(const std::vector<Vec3>& gt, const std::vector<Vec3>& cloud, double eps) {
    size_t hit = 0;
    for (const Vec3& g : gt) {
        for (const Vec3& p : cloud)
            if ((g - p).norm() < eps) {
                ++hit;
                break;
            }
    }
    return static_cast<double>(hit) / gt.size();
}

Completeness completeness_scan(const std::vector<Vec3>& gt, const std::vector<Vec3>& cloud,
                               const CoverageConfig& cfg) {
    Completeness out;
    size_t hit = 0;
    double sum = 0.0;
    for (const Vec3& g : gt) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& p : cloud) best = std::min(best, (g - p).norm());
        if (!std::isfinite(best)) best = cfg.comp_cap;
        best = std::min(best, cfg.comp_cap);
        if (best < cfg.comp_threshold) ++hit;
        sum += best;
    }
    out.pct = static_cast<double>(hit) / gt.size();
    out.dist = sum / gt.size();
    return out;
}

}  // namespace

TEST_CASE("coverage identity and empty cases") {
    const std::vector<Vec3> gt{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const CoverageConfig cfg;
    SurfelCloud full(0.5);
    for (const Vec3& g : gt) full.insert(g);
    CHECK(coverage(gt, full, cfg) == doctest::Approx(1.0));
    CHECK(coverage(gt, SurfelCloud(0.5), cfg) == doctest::Approx(0.0));
    CHECK_THROWS_AS(coverage({}, full, cfg), NbpError);
}

TEST_CASE("coverage: 3 of 4 points within epsilon is 0.75") {
    const std::vector<Vec3> gt{{0, 0, 0}, {2, 0, 0}, {4, 0, 0}, {9, 0, 0}};
    CoverageConfig cfg;
    cfg.epsilon = 0.5;
    SurfelCloud cloud(0.5);
    cloud.insert({0.1, 0, 0});
    cloud.insert({2.2, 0, 0});
    cloud.insert({4.0, 0.3, 0});
    cloud.insert({7.0, 0, 0});  // 2.0 away from the last GT point
    CHECK(coverage(gt, cloud, cfg) == doctest::Approx(0.75));
    CHECK(coverage(gt, cloud, cfg) ==
          doctest::Approx(coverage_scan(gt, cloud.to_points(), cfg.epsilon)));
}

TEST_CASE("coverage matches the quadratic scan oracle") {
    Rng rng(31);
    for (int inst = 0; inst < 25; ++inst) {
        std::uniform_int_distribution<size_t> n(1, 400);
        const auto gt = random_points(rng, n(rng), 4.0);
        SurfelCloud cloud(0.5);
        for (const Vec3& p : random_points(rng, n(rng), 4.0)) cloud.insert(p);
        const CoverageConfig cfg;
        CHECK(coverage(gt, cloud, cfg) ==
              doctest::Approx(coverage_scan(gt, cloud.to_points(), cfg.epsilon)));
    }
}

TEST_CASE("coverage gain basics and monotonicity precondition") {
    const std::vector<Vec3> gt{{0, 0, 0}, {2, 0, 0}, {4, 0, 0}, {6, 0, 0}};
    const CoverageConfig cfg;
    SurfelCloud t(0.5), g(0.5);
    t.insert({0.1, 0, 0});
    g.insert({0.1, 0, 0});
    g.insert({2.1, 0, 0});
    g.insert({4.1, 0, 0});
    CHECK(coverage_gain(gt, t, t, cfg) == doctest::Approx(0.0));
    CHECK(coverage_gain(gt, t, g, cfg) == doctest::Approx(0.5));
    SurfelCloud empty(0.5), full(0.5);
    for (const Vec3& p : gt) full.insert(p);
    CHECK(coverage_gain(gt, empty, full, cfg) == doctest::Approx(1.0));
    CHECK_THROWS_AS(coverage_gain(gt, g, t, cfg), NbpError);  // g is not a superset of t
}

TEST_CASE("auc: constant, ramp, direct-sum oracle") {
    CHECK(auc(std::vector<double>(10, 0.4), 10) == doctest::Approx(0.4));
    std::vector<double> ramp;
    const int T = 100;
    for (int t = 1; t <= T; ++t) ramp.push_back(static_cast<double>(t) / T);
    CHECK(std::abs(auc(ramp, T) - 0.5) <= 1.0 / T);

    // Short series pads with its final value.
    const std::vector<double> series{0.1, 0.3, 0.6};
    const double oracle = (0.1 + 0.3 + 0.6 + 0.6 + 0.6) / 5.0;
    CHECK(auc(series, 5) == doctest::Approx(oracle));
    CHECK_THROWS_AS(auc({}, 5), NbpError);
}

TEST_CASE("completeness basics and cap convention") {
    const std::vector<Vec3> gt{{0, 0, 0}, {1, 0, 0}};
    const CoverageConfig cfg;
    SurfelCloud full(0.5);
    for (const Vec3& g : gt) full.insert(g);
    const Completeness ident = completeness(gt, full, cfg);
    CHECK(ident.pct == doctest::Approx(1.0));
    CHECK(ident.dist == doctest::Approx(0.0));
    const Completeness empty = completeness(gt, SurfelCloud(0.5), cfg);
    CHECK(empty.pct == doctest::Approx(0.0));
    CHECK(empty.dist == doctest::Approx(cfg.comp_cap));
}

TEST_CASE("completeness matches the scan oracle") {
    Rng rng(33);
    for (int inst = 0; inst < 10; ++inst) {
        const auto gt = random_points(rng, 50, 3.0);
        SurfelCloud cloud(0.5);
        for (const Vec3& p : random_points(rng, 50, 3.0)) cloud.insert(p);
        const CoverageConfig cfg;
        const Completeness got = completeness(gt, cloud, cfg);
        const Completeness oracle = completeness_scan(gt, cloud.to_points(), cfg);
        CHECK(got.pct == doctest::Approx(oracle.pct));
        CHECK(got.dist == doctest::Approx(oracle.dist));
    }
}

TEST_CASE("incremental tracker equals batch coverage") {
    Rng rng(35);
    const auto gt = random_points(rng, 300, 4.0);
    const CoverageConfig cfg;
    CoverageTracker tracker(gt, cfg);
    SurfelCloud cloud(0.5);
    // The tracker mirrors the cloud: only newly stored points feed it.
    for (const Vec3& p : random_points(rng, 500, 4.0))
        if (cloud.insert(p)) tracker.add_point(p);
    CHECK(tracker.coverage() == doctest::Approx(coverage(gt, cloud, cfg)));
}

TEST_CASE("tracker index queries are consistent with would_cover") {
    Rng rng(37);
    const auto gt = random_points(rng, 200, 3.0);
    const CoverageConfig cfg;
    CoverageTracker tracker(gt, cfg);
    for (const Vec3& p : random_points(rng, 60, 3.0)) tracker.add_point(p);

    const auto probe = random_points(rng, 40, 3.0);
    const auto indices = tracker.hit_indices(probe);
    CHECK(std::is_sorted(indices.begin(), indices.end()));
    CHECK(std::adjacent_find(indices.begin(), indices.end()) == indices.end());
    CHECK(tracker.count_uncovered(indices) == tracker.would_cover(probe));

    // Marking the indices covers exactly those GT points.
    const size_t expect = tracker.covered_count() + tracker.count_uncovered(indices);
    CoverageTracker copy = tracker;
    copy.mark_indices(indices);
    CHECK(copy.covered_count() == expect);
    CHECK(copy.count_uncovered(indices) == 0);
}
