#include "nbp/sensor.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace nbp {

int64_t SurfelCloud::key_of(const Vec3& p, double voxel_size) {
    const auto qx = static_cast<int64_t>(std::floor(p.x / voxel_size));
    const auto qy = static_cast<int64_t>(std::floor(p.y / voxel_size));
    const auto qz = static_cast<int64_t>(std::floor(p.z / voxel_size));
    // 21 bits per axis, offset to keep indices positive.
    constexpr int64_t kOffset = 1 << 20;
    constexpr int64_t kMask = (1 << 21) - 1;
    return ((qx + kOffset) & kMask) | (((qy + kOffset) & kMask) << 21) |
           (((qz + kOffset) & kMask) << 42);
}

bool SurfelCloud::insert(const Vec3& p) {
    return points_.emplace(key_of(p), p).second;
}

double SurfelCloud::nearest_distance(const Vec3& p, double radius) const {
    const int r = static_cast<int>(std::ceil(radius / voxel_size_)) + 1;
    const auto qx = static_cast<int64_t>(std::floor(p.x / voxel_size_));
    const auto qy = static_cast<int64_t>(std::floor(p.y / voxel_size_));
    const auto qz = static_cast<int64_t>(std::floor(p.z / voxel_size_));
    double best = std::numeric_limits<double>::infinity();
    for (int dz = -r; dz <= r; ++dz)
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                const Vec3 probe{(qx + dx + 0.5) * voxel_size_, (qy + dy + 0.5) * voxel_size_,
                                 (qz + dz + 0.5) * voxel_size_};
                const auto it = points_.find(key_of(probe));
                if (it != points_.end()) best = std::min(best, (it->second - p).norm());
            }
    return best;
}

void SurfelCloud::for_each(const std::function<void(const Vec3&)>& fn) const {
    for (const auto& [key, p] : points_) fn(p);
}

std::vector<Vec3> SurfelCloud::to_points() const {
    std::vector<Vec3> pts;
    pts.reserve(points_.size());
    for (const auto& [key, p] : points_) pts.push_back(p);
    return pts;
}

void SurfelCloud::dump_xyz(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw NbpError("cannot open " + path + " for writing");
    for (const auto& [key, p] : points_) os << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

Vec3 pixel_ray(const Pose& pose, const CameraModel& cam, int u, int v) {
    const double dx = (u + 0.5 - cam.cx()) / cam.focal();
    const double dy = (v + 0.5 - cam.cy()) / cam.focal();
    const Vec3 forward = yaw_direction(pose.yaw_index);
    const Vec3 right{-forward.z, 0.0, forward.x};
    const Vec3 down{0.0, -1.0, 0.0};
    Vec3 dir = right * dx + down * dy + forward;
    const double n = dir.norm();
    return dir * (1.0 / n);
}

std::optional<RayHit> cast_ray_hit(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    const double cs = scene.cell_size;
    int ix = static_cast<int>(std::floor(origin.x / cs));
    int iy = static_cast<int>(std::floor(origin.y / cs));
    int iz = static_cast<int>(std::floor(origin.z / cs));

    const int step_x = dir.x > 0 ? 1 : -1;
    const int step_y = dir.y > 0 ? 1 : -1;
    const int step_z = dir.z > 0 ? 1 : -1;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    auto boundary_t = [&](double o, double d, int i, int step) {
        if (d == 0.0) return kInf;
        const double edge = (i + (step > 0 ? 1 : 0)) * cs;
        return (edge - o) / d;
    };
    double tx = boundary_t(origin.x, dir.x, ix, step_x);
    double ty = boundary_t(origin.y, dir.y, iy, step_y);
    double tz = boundary_t(origin.z, dir.z, iz, step_z);
    const double dtx = dir.x != 0.0 ? cs / std::abs(dir.x) : kInf;
    const double dty = dir.y != 0.0 ? cs / std::abs(dir.y) : kInf;
    const double dtz = dir.z != 0.0 ? cs / std::abs(dir.z) : kInf;

    const int max_steps = 4 * (scene.width() + scene.height() + scene.vertical_cells()) + 16;
    for (int i = 0; i < max_steps; ++i) {
        double t;
        if (tx <= ty && tx <= tz) {
            t = tx;
            tx += dtx;
            ix += step_x;
        } else if (ty <= tz) {
            t = ty;
            ty += dty;
            iy += step_y;
        } else {
            t = tz;
            tz += dtz;
            iz += step_z;
        }
        if (scene.is_solid(ix, iy, iz)) return RayHit{t, ix, iy, iz};
    }
    return std::nullopt;
}

double cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    const auto hit = cast_ray_hit(scene, origin, dir);
    return hit ? hit->t : -1.0;
}

DepthImage render_depth(const Scene& scene, const Pose& pose, const CameraModel& cam) {
    if (!scene.is_nav(pose.cell.x, pose.cell.z))
        throw NbpError("render_depth: pose is not on the navgrid");
    DepthImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.depth.assign(static_cast<size_t>(cam.width) * cam.height, 0.0f);
    const Vec3 origin = scene.cell_center(pose.cell);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u) {
            const double d = cast_ray(scene, origin, pixel_ray(pose, cam, u, v));
            img.at(u, v) = d > 0.0 ? static_cast<float>(d) : 0.0f;
        }
    return img;
}

std::vector<Vec3> backproject(const DepthImage& depth, const Pose& pose, const CameraModel& cam,
                              double cell_size, double agent_height) {
    std::vector<Vec3> points;
    points.reserve(depth.depth.size());
    const Vec3 origin{(pose.cell.x + 0.5) * cell_size, agent_height,
                      (pose.cell.z + 0.5) * cell_size};
    // Depths are euclidean, so each point sits at distance D along the unit
    // pixel ray.
    for (int v = 0; v < depth.height; ++v)
        for (int u = 0; u < depth.width; ++u) {
            const double d = depth.at(u, v);
            if (d <= 0.0) continue;
            points.push_back(origin + pixel_ray(pose, cam, u, v) * d);
        }
    return points;
}

size_t integrate(SurfelCloud& cloud, const std::vector<Vec3>& points) {
    size_t added = 0;
    for (const Vec3& p : points) added += cloud.insert(p);
    return added;
}

}  // namespace nbp
