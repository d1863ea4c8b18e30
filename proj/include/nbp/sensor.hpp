#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nbp/core.hpp"
#include "nbp/scene.hpp"

namespace nbp {

struct CameraModel {
    int width = 64;
    int height = 48;
    double hfov_deg = 90.0;

    double focal() const {
        return width / (2.0 * std::tan(hfov_deg * 0.5 * 3.14159265358979323846 / 180.0));
    }
    double cx() const { return width * 0.5; }
    double cy() const { return height * 0.5; }
};

/// Per-pixel depth in metres, row-major; 0 encodes no-return.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<float> depth;

    float at(int u, int v) const { return depth[static_cast<size_t>(v) * width + u]; }
    float& at(int u, int v) { return depth[static_cast<size_t>(v) * width + u]; }
};

/// Accumulated reconstructed point set, deduplicated by a voxel hash at the
/// scene cell size. Integration is monotone; points are never removed.
class SurfelCloud {
public:
    explicit SurfelCloud(double voxel_size = 0.5) : voxel_size_(voxel_size) {}

    double voxel_size() const { return voxel_size_; }
    size_t size() const { return points_.size(); }

    static int64_t key_of(const Vec3& p, double voxel_size);
    int64_t key_of(const Vec3& p) const { return key_of(p, voxel_size_); }

    /// Returns true when the point landed in a previously empty voxel.
    bool insert(const Vec3& p);

    bool has_key(int64_t key) const { return points_.count(key) != 0; }

    /// Distance to the nearest stored point, restricted to voxels within
    /// `radius` of p. Returns +inf when no candidate exists.
    double nearest_distance(const Vec3& p, double radius) const;

    void for_each(const std::function<void(const Vec3&)>& fn) const;
    std::vector<Vec3> to_points() const;

    void dump_xyz(const std::string& path) const;

private:
    double voxel_size_;
    std::unordered_map<int64_t, Vec3> points_;
};

/// World-frame ray direction (unit length) through pixel (u, v).
Vec3 pixel_ray(const Pose& pose, const CameraModel& cam, int u, int v);

/// First solid voxel along the ray and the euclidean entry distance.
struct RayHit {
    double t = 0.0;
    int ix = 0, iy = 0, iz = 0;
};

/// Exact 3D DDA traversal; empty only on traversal failure (never happens in
/// a watertight scene).
std::optional<RayHit> cast_ray_hit(const Scene& scene, const Vec3& origin, const Vec3& dir);

/// Exact 3D DDA raycast; returns euclidean distance to the first solid voxel
/// boundary, or a negative value only on traversal failure (never happens in
/// a watertight scene).
double cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir);

DepthImage render_depth(const Scene& scene, const Pose& pose, const CameraModel& cam);

/// Pose translation is the cell centre at agent height, matching render_depth.
std::vector<Vec3> backproject(const DepthImage& depth, const Pose& pose, const CameraModel& cam,
                              double cell_size = 0.5, double agent_height = 1.65);

/// Union with voxel-hash dedup; returns the number of newly stored points.
size_t integrate(SurfelCloud& cloud, const std::vector<Vec3>& points);

}  // namespace nbp
