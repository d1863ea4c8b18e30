#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "nbp/core.hpp"
#include "nbp/sensor.hpp"

namespace nbp {

struct CoverageConfig {
    double epsilon = 0.5;          // match threshold, strict inequality
    double comp_threshold = 0.25;  // completeness threshold
    double comp_cap = 10.0;        // distance cap reported for empty clouds
};

/// Fraction of GT points with a cloud point strictly within epsilon.
double coverage(const std::vector<Vec3>& gt, const SurfelCloud& cloud, const CoverageConfig& cfg);

/// coverage(cloud_g) - coverage(cloud_t); requires cloud_g to contain every
/// voxel of cloud_t (accumulation is monotone).
double coverage_gain(const std::vector<Vec3>& gt, const SurfelCloud& cloud_t,
                     const SurfelCloud& cloud_g, const CoverageConfig& cfg);

/// Mean of the per-step series over a fixed budget of T steps, padding a
/// short series with its final value.
double auc(const std::vector<double>& series, int horizon);

struct Completeness {
    double pct = 0.0;
    double dist = 0.0;
};

Completeness completeness(const std::vector<Vec3>& gt, const SurfelCloud& cloud,
                          const CoverageConfig& cfg);

/// Incremental covered-count over a fixed GT set. Feeding every cloud point
/// through add_point yields exactly the batch coverage value.
class CoverageTracker {
public:
    CoverageTracker() = default;
    CoverageTracker(const std::vector<Vec3>& gt, const CoverageConfig& cfg);

    void add_point(const Vec3& p);

    /// How many currently-uncovered GT points the given points would cover.
    /// Does not mutate the tracker.
    size_t would_cover(const std::vector<Vec3>& pts) const;

    /// Unique GT indices within epsilon of any of the points, regardless of
    /// the current covered state (pure geometry).
    std::vector<uint32_t> hit_indices(const std::vector<Vec3>& pts) const;

    /// How many of the given GT indices are currently uncovered.
    size_t count_uncovered(const std::vector<uint32_t>& indices) const;

    void mark_indices(const std::vector<uint32_t>& indices);

    const std::vector<uint8_t>& covered_flags() const { return covered_; }

    size_t covered_count() const { return covered_count_; }
    size_t gt_count() const { return covered_.size(); }
    double coverage() const {
        return covered_.empty() ? 0.0 : static_cast<double>(covered_count_) / covered_.size();
    }

private:
    // GT geometry and its spatial index are immutable and shared across
    // copies; only the covered flags are per-instance.
    std::shared_ptr<const std::vector<Vec3>> gt_;
    std::shared_ptr<const std::unordered_map<int64_t, std::vector<uint32_t>>> index_;
    std::vector<uint8_t> covered_;
    size_t covered_count_ = 0;
    double epsilon_ = 0.5;
    double voxel_ = 0.5;
    int probe_radius_ = 1;
};

}  // namespace nbp
