#include "nbp/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nbp {

double coverage(const std::vector<Vec3>& gt, const SurfelCloud& cloud, const CoverageConfig& cfg) {
    if (gt.empty()) throw NbpError("coverage: empty ground truth set");
    size_t covered = 0;
    for (const Vec3& x : gt)
        if (cloud.nearest_distance(x, cfg.epsilon) < cfg.epsilon) ++covered;
    return static_cast<double>(covered) / gt.size();
}

double coverage_gain(const std::vector<Vec3>& gt, const SurfelCloud& cloud_t,
                     const SurfelCloud& cloud_g, const CoverageConfig& cfg) {
    if (cloud_g.size() < cloud_t.size())
        throw NbpError("coverage_gain: later cloud must contain the earlier one");
    bool subset = true;
    cloud_t.for_each([&](const Vec3& p) {
        if (!cloud_g.has_key(cloud_g.key_of(p))) subset = false;
    });
    if (!subset) throw NbpError("coverage_gain: later cloud must contain the earlier one");
    return coverage(gt, cloud_g, cfg) - coverage(gt, cloud_t, cfg);
}

double auc(const std::vector<double>& series, int horizon) {
    if (series.empty()) throw NbpError("auc: empty series");
    if (horizon <= 0 || static_cast<int>(series.size()) > horizon)
        throw NbpError("auc: series longer than horizon");
    double sum = 0.0;
    for (int t = 0; t < horizon; ++t)
        sum += t < static_cast<int>(series.size()) ? series[t] : series.back();
    return sum / horizon;
}

Completeness completeness(const std::vector<Vec3>& gt, const SurfelCloud& cloud,
                          const CoverageConfig& cfg) {
    if (gt.empty()) throw NbpError("completeness: empty ground truth set");
    Completeness result;
    if (cloud.size() == 0) {
        result.pct = 0.0;
        result.dist = cfg.comp_cap;
        return result;
    }
    size_t within = 0;
    double dist_sum = 0.0;
    const double vs = cloud.voxel_size();
    for (const Vec3& x : gt) {
        double d = std::numeric_limits<double>::infinity();
        const int max_r = static_cast<int>(std::ceil(cfg.comp_cap / vs)) + 1;
        for (int r = 1; r <= max_r; ++r) {
            d = cloud.nearest_distance(x, (r - 1) * vs);
            if (d <= (r - 1) * vs) break;  // no closer point can exist outside the cube
        }
        d = std::min(d, cfg.comp_cap);
        if (d < cfg.comp_threshold) ++within;
        dist_sum += d;
    }
    result.pct = static_cast<double>(within) / gt.size();
    result.dist = dist_sum / gt.size();
    return result;
}

CoverageTracker::CoverageTracker(const std::vector<Vec3>& gt, const CoverageConfig& cfg)
    : covered_(gt.size(), 0), epsilon_(cfg.epsilon), voxel_(cfg.epsilon) {
    gt_ = std::make_shared<const std::vector<Vec3>>(gt);
    auto index = std::make_shared<std::unordered_map<int64_t, std::vector<uint32_t>>>();
    for (uint32_t i = 0; i < gt.size(); ++i)
        (*index)[SurfelCloud::key_of(gt[i], voxel_)].push_back(i);
    index_ = index;
    probe_radius_ = 1;
}

template <typename Visit>
static void visit_candidates(
    const std::unordered_map<int64_t, std::vector<uint32_t>>& index, const Vec3& p, double voxel,
    int radius, Visit&& visit) {
    const auto qx = static_cast<int64_t>(std::floor(p.x / voxel));
    const auto qy = static_cast<int64_t>(std::floor(p.y / voxel));
    const auto qz = static_cast<int64_t>(std::floor(p.z / voxel));
    for (int dz = -radius; dz <= radius; ++dz)
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const Vec3 probe{(qx + dx + 0.5) * voxel, (qy + dy + 0.5) * voxel,
                                 (qz + dz + 0.5) * voxel};
                const auto it = index.find(SurfelCloud::key_of(probe, voxel));
                if (it == index.end()) continue;
                for (uint32_t i : it->second) visit(i);
            }
}

void CoverageTracker::add_point(const Vec3& p) {
    if (!index_) return;
    visit_candidates(*index_, p, voxel_, probe_radius_, [&](uint32_t i) {
        if (covered_[i]) return;
        if (((*gt_)[i] - p).norm() < epsilon_) {
            covered_[i] = 1;
            ++covered_count_;
        }
    });
}

size_t CoverageTracker::would_cover(const std::vector<Vec3>& pts) const {
    if (!index_) return 0;
    std::vector<uint32_t> hits;
    for (const Vec3& p : pts) {
        visit_candidates(*index_, p, voxel_, probe_radius_, [&](uint32_t i) {
            if (!covered_[i] && ((*gt_)[i] - p).norm() < epsilon_) hits.push_back(i);
        });
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    return hits.size();
}

std::vector<uint32_t> CoverageTracker::hit_indices(const std::vector<Vec3>& pts) const {
    std::vector<uint32_t> hits;
    if (!index_) return hits;
    for (const Vec3& p : pts) {
        visit_candidates(*index_, p, voxel_, probe_radius_, [&](uint32_t i) {
            if (((*gt_)[i] - p).norm() < epsilon_) hits.push_back(i);
        });
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    return hits;
}

size_t CoverageTracker::count_uncovered(const std::vector<uint32_t>& indices) const {
    size_t n = 0;
    for (uint32_t i : indices) n += !covered_[i];
    return n;
}

void CoverageTracker::mark_indices(const std::vector<uint32_t>& indices) {
    for (uint32_t i : indices) {
        if (!covered_[i]) {
            covered_[i] = 1;
            ++covered_count_;
        }
    }
}

}  // namespace nbp
