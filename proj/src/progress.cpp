#include "nbp/progress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace nbp {

namespace {
Vec3 pose_position(const Pose& pose, double cell_size) {
    return {(pose.cell.x + 0.5) * cell_size, 0.0, (pose.cell.z + 0.5) * cell_size};
}
}  // namespace

bool project_to_window(const Vec3& p, const Vec3& center_pos, const WindowSpec& spec, int* u,
                       int* v) {
    const double r = spec.radius();
    const double fx = (p.x - center_pos.x + r) * spec.grid_w / (2.0 * r);
    const double fz = (p.z - center_pos.z + r) * spec.grid_h / (2.0 * r);
    int iu = static_cast<int>(std::floor(fx));
    int iv = static_cast<int>(std::floor(fz));
    // A point exactly on the +r window edge belongs to the last pixel.
    if (iu == spec.grid_w && fx <= spec.grid_w + 1e-9) iu = spec.grid_w - 1;
    if (iv == spec.grid_h && fz <= spec.grid_h + 1e-9) iv = spec.grid_h - 1;
    if (iu < 0 || iu >= spec.grid_w || iv < 0 || iv >= spec.grid_h) return false;
    *u = iu;
    *v = iv;
    return true;
}

std::vector<Vec3> crop_filter(const SurfelCloud& cloud, const Pose& center, const WindowSpec& spec,
                              double cell_size) {
    const Vec3 c = pose_position(center, cell_size);
    const double r = spec.radius();
    std::vector<Vec3> result;
    cloud.for_each([&](const Vec3& p) {
        if (std::abs(p.x - c.x) <= r && std::abs(p.z - c.z) <= r) result.push_back(p);
    });
    return result;
}

std::vector<Grid2D<float>> slice_densities(const std::vector<Vec3>& points, const Pose& center,
                                           const WindowSpec& spec, double cell_size) {
    std::vector<Grid2D<float>> slices(spec.slices, Grid2D<float>(spec.grid_w, spec.grid_h, 0.0f));
    const Vec3 c = pose_position(center, cell_size);
    const double h_slice = spec.slice_height();
    for (const Vec3& p : points) {
        int u, v;
        if (!project_to_window(p, c, spec, &u, &v)) continue;
        int j = static_cast<int>(std::floor((p.y - spec.y_min) / h_slice));
        j = std::clamp(j, 0, spec.slices - 1);
        slices[j].at(u, v) += 1.0f;
    }
    return slices;
}

Grid2D<float> trajectory_histogram(const std::vector<Pose>& history, const Pose& center,
                                   const WindowSpec& spec, double cell_size) {
    Grid2D<float> hist(spec.grid_w, spec.grid_h, 0.0f);
    const Vec3 c = pose_position(center, cell_size);
    for (const Pose& pose : history) {
        int u, v;
        if (project_to_window(pose_position(pose, cell_size), c, spec, &u, &v))
            hist.at(u, v) += 1.0f;
    }
    return hist;
}

ExplorationEmbedding build_embedding(const SurfelCloud& cloud, const std::vector<Pose>& history,
                                     const Pose& center, const WindowSpec& spec,
                                     double cell_size) {
    ExplorationEmbedding emb;
    emb.center = center;
    emb.spec = spec;
    emb.slices = slice_densities(crop_filter(cloud, center, spec, cell_size), center, spec,
                                 cell_size);
    emb.trajectory = trajectory_histogram(history, center, spec, cell_size);
    return emb;
}

void dump_pgm(const Grid2D<float>& image, const std::string& path) {
    float max_v = 1.0f;
    for (float v : image.raw()) max_v = std::max(max_v, v);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NbpError("cannot open " + path + " for writing");
    os << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    for (float v : image.raw())
        os.put(static_cast<char>(std::lround(255.0f * v / max_v)));
}

}  // namespace nbp
