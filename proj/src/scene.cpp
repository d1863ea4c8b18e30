#include "nbp/scene.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <fstream>
#include <numeric>
#include <queue>

namespace nbp {

namespace {

constexpr double kCellSize = 0.5;

struct RoomRect {
    int x0, z0, w, h;  // interior cells
    bool intersects_padded(const RoomRect& o) const {
        return x0 - 1 < o.x0 + o.w + 1 && o.x0 - 1 < x0 + w + 1 && z0 - 1 < o.z0 + o.h + 1 &&
               o.z0 - 1 < z0 + h + 1;
    }
    CellIndex center() const { return {x0 + w / 2, z0 + h / 2}; }
    bool on_perimeter(int x, int z) const {
        const bool inside_pad =
            x >= x0 - 1 && x < x0 + w + 1 && z >= z0 - 1 && z < z0 + h + 1;
        const bool inside = x >= x0 && x < x0 + w && z >= z0 && z < z0 + h;
        return inside_pad && !inside;
    }
};

int to_cells(double metres) { return std::max(1, static_cast<int>(std::lround(metres / kCellSize))); }

void carve_span(Grid2D<uint8_t>& carved, int x, int z, int half_lo, int half_hi, bool horizontal) {
    for (int d = -half_lo; d <= half_hi; ++d) {
        const int cx = horizontal ? x : x + d;
        const int cz = horizontal ? z + d : z;
        if (cx >= 1 && cx < carved.width() - 1 && cz >= 1 && cz < carved.height() - 1)
            carved.at(cx, cz) = 1;
    }
}

// Carves one corridor cell; widens the opening to door width where the path
// crosses a room perimeter wall.
void carve_corridor_cell(Grid2D<uint8_t>& carved, const std::vector<RoomRect>& rooms, int x, int z,
                         bool horizontal_move, int corridor_cells, int door_cells) {
    int width_cells = corridor_cells;
    for (const RoomRect& r : rooms) {
        if (r.on_perimeter(x, z)) {
            width_cells = std::max(width_cells, door_cells);
            break;
        }
    }
    const int half_lo = (width_cells - 1) / 2;
    const int half_hi = width_cells / 2;
    carve_span(carved, x, z, half_lo, half_hi, horizontal_move);
}

void carve_l_path(Grid2D<uint8_t>& carved, const std::vector<RoomRect>& rooms, CellIndex a,
                  CellIndex b, bool x_first, int corridor_cells, int door_cells) {
    CellIndex p = a;
    auto step_x = [&] {
        while (p.x != b.x) {
            p.x += p.x < b.x ? 1 : -1;
            carve_corridor_cell(carved, rooms, p.x, p.z, true, corridor_cells, door_cells);
        }
    };
    auto step_z = [&] {
        while (p.z != b.z) {
            p.z += p.z < b.z ? 1 : -1;
            carve_corridor_cell(carved, rooms, p.x, p.z, false, corridor_cells, door_cells);
        }
    };
    carve_corridor_cell(carved, rooms, p.x, p.z, x_first, corridor_cells, door_cells);
    if (x_first) {
        step_x();
        step_z();
    } else {
        step_z();
        step_x();
    }
}

int flood_fill_count(const Grid2D<uint8_t>& grid, CellIndex start) {
    Grid2D<uint8_t> seen(grid.width(), grid.height());
    std::deque<CellIndex> queue{start};
    seen.at(start.x, start.z) = 1;
    int count = 0;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        ++count;
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const int nx = c.x + dx[i], nz = c.z + dz[i];
            if (grid.in_bounds(nx, nz) && grid.at(nx, nz) && !seen.at(nx, nz)) {
                seen.at(nx, nz) = 1;
                queue.push_back({nx, nz});
            }
        }
    }
    return count;
}

bool try_generate(const DifficultyParams& params, Rng& rng, Scene& out) {
    std::uniform_int_distribution<int> room_count_dist(params.room_count_range.first,
                                                       params.room_count_range.second);
    const int n_rooms = room_count_dist(rng);
    const int min_cells = to_cells(params.room_size_range.first);
    const int max_cells = to_cells(params.room_size_range.second);

    const int side = std::clamp(
        static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_rooms)) * (max_cells + 4) * 1.2)),
        std::max(12, max_cells + 4), 80);

    Grid2D<uint8_t> carved(side, side, 0);
    std::vector<RoomRect> rooms;
    std::uniform_int_distribution<int> size_dist(min_cells, max_cells);
    for (int i = 0; i < n_rooms; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            RoomRect r;
            r.w = size_dist(rng);
            r.h = size_dist(rng);
            std::uniform_int_distribution<int> x_dist(1, side - r.w - 1);
            std::uniform_int_distribution<int> z_dist(1, side - r.h - 1);
            r.x0 = x_dist(rng);
            r.z0 = z_dist(rng);
            placed = std::none_of(rooms.begin(), rooms.end(),
                                  [&](const RoomRect& o) { return r.intersects_padded(o); });
            if (placed) rooms.push_back(r);
        }
        if (!placed) return false;
    }
    for (const RoomRect& r : rooms)
        for (int z = r.z0; z < r.z0 + r.h; ++z)
            for (int x = r.x0; x < r.x0 + r.w; ++x) carved.at(x, z) = 1;

    // Spanning tree over room centres (Prim on jittered manhattan weights),
    // plus branching_factor extra links.
    const int corridor_cells = to_cells(params.corridor_width);
    const int door_cells = to_cells(params.door_width);
    if (rooms.size() > 1) {
        std::vector<bool> in_tree(rooms.size(), false);
        in_tree[0] = true;
        std::vector<std::pair<int, int>> edges;
        std::uniform_real_distribution<double> jitter(0.0, 4.0);
        for (size_t added = 1; added < rooms.size(); ++added) {
            double best = 1e18;
            int bi = -1, bj = -1;
            for (size_t i = 0; i < rooms.size(); ++i) {
                if (!in_tree[i]) continue;
                for (size_t j = 0; j < rooms.size(); ++j) {
                    if (in_tree[j]) continue;
                    const CellIndex a = rooms[i].center(), b = rooms[j].center();
                    const double w = std::abs(a.x - b.x) + std::abs(a.z - b.z) + jitter(rng);
                    if (w < best) {
                        best = w;
                        bi = static_cast<int>(i);
                        bj = static_cast<int>(j);
                    }
                }
            }
            in_tree[bj] = true;
            edges.emplace_back(bi, bj);
        }
        const int extra = static_cast<int>(std::lround(params.branching_factor * n_rooms));
        std::uniform_int_distribution<int> node_dist(0, static_cast<int>(rooms.size()) - 1);
        for (int e = 0; e < extra; ++e) {
            const int i = node_dist(rng);
            const int j = node_dist(rng);
            if (i != j) edges.emplace_back(i, j);
        }
        std::bernoulli_distribution x_first(0.5);
        for (auto [i, j] : edges)
            carve_l_path(carved, rooms, rooms[i].center(), rooms[j].center(), x_first(rng),
                         corridor_cells, door_cells);
    }

    // Connectivity gate
    CellIndex start{-1, -1};
    int nav_count = 0;
    for (int z = 0; z < side; ++z)
        for (int x = 0; x < side; ++x)
            if (carved.at(x, z)) {
                if (start.x < 0) start = {x, z};
                ++nav_count;
            }
    if (nav_count == 0 || flood_fill_count(carved, start) != nav_count) return false;

    out.cell_size = kCellSize;
    out.wall_height = 3.0;
    out.agent_height = 1.65;
    out.wall_grid = Grid2D<uint8_t>(side, side, 1);
    out.navgrid = carved;
    for (int z = 0; z < side; ++z)
        for (int x = 0; x < side; ++x) out.wall_grid.at(x, z) = carved.at(x, z) ? 0 : 1;
    out.windows.assign(static_cast<size_t>(side) * side, std::nullopt);

    // Window bands on room-perimeter wall cells separating two free cells.
    // Bands sit above agent height so the moving plane stays consistent with
    // the navgrid.
    if (params.window_fraction > 0.0) {
        std::vector<CellIndex> candidates;
        for (int z = 1; z < side - 1; ++z)
            for (int x = 1; x < side - 1; ++x) {
                if (!out.wall_grid.at(x, z)) continue;
                const bool sep_x = carved.at(x - 1, z) && carved.at(x + 1, z);
                const bool sep_z = carved.at(x, z - 1) && carved.at(x, z + 1);
                if (!sep_x && !sep_z) continue;
                const bool near_room = std::any_of(rooms.begin(), rooms.end(), [&](const RoomRect& r) {
                    return r.on_perimeter(x, z);
                });
                if (near_room) candidates.push_back({x, z});
            }
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const size_t n_windows =
            static_cast<size_t>(std::lround(params.window_fraction * candidates.size()));
        const float band_lo = static_cast<float>(out.wall_height - 2 * kCellSize);
        const float band_hi = static_cast<float>(out.wall_height);
        for (size_t i = 0; i < n_windows && i < candidates.size(); ++i) {
            const CellIndex c = candidates[i];
            out.windows[static_cast<size_t>(c.z) * side + c.x] = WindowBand{band_lo, band_hi};
        }
    }
    return true;
}

}  // namespace

void DifficultyParams::validate(double cell_size) const {
    if (room_count_range.first < 1 || room_count_range.second < room_count_range.first)
        throw NbpError("invalid room_count_range");
    if (room_size_range.first < 2.0 * cell_size || room_size_range.second < room_size_range.first)
        throw NbpError("room_size_range min must be >= 2*cell_size");
    if (corridor_width < cell_size) throw NbpError("corridor_width must be >= cell_size");
    if (window_fraction < 0.0 || window_fraction > 1.0)
        throw NbpError("window_fraction must lie in [0,1]");
}

bool Scene::is_solid(int x, int iy, int z) const {
    if (iy < 0 || iy >= vertical_cells()) return true;
    if (!wall_grid.in_bounds(x, z)) return true;
    if (!wall_grid.at(x, z)) return false;
    const auto& band = window_at(x, z);
    if (!band) return true;
    const double lo = iy * cell_size;
    const double hi = (iy + 1) * cell_size;
    return !(lo >= band->z_lo - 1e-9 && hi <= band->z_hi + 1e-9);
}

bool Scene::is_solid_at_height(int x, int z, double y) const {
    if (y < 0.0 || y >= wall_height) return true;
    if (!wall_grid.in_bounds(x, z)) return true;
    if (!wall_grid.at(x, z)) return false;
    const auto& band = window_at(x, z);
    return !(band && y >= band->z_lo && y < band->z_hi);
}

std::vector<CellIndex> Scene::nav_cells() const {
    std::vector<CellIndex> cells;
    for (int z = 0; z < height(); ++z)
        for (int x = 0; x < width(); ++x)
            if (navgrid.at(x, z)) cells.push_back({x, z});
    return cells;
}

Scene generate_scene(const DifficultyParams& params) {
    params.validate(kCellSize);
    Rng rng(params.seed);
    Scene scene;
    for (int attempt = 0; attempt < 16; ++attempt)
        if (try_generate(params, rng, scene)) return scene;
    throw NbpError("scene generation failed after bounded retries (seed " +
                   std::to_string(params.seed) + ")");
}

std::vector<Vec3> gt_surface_points(const Scene& scene) {
    std::vector<Vec3> points;
    const int ny = scene.vertical_cells();
    const double cs = scene.cell_size;
    auto free_voxel = [&](int x, int iy, int z) { return !scene.is_solid(x, iy, z); };
    for (int z = 0; z < scene.height(); ++z) {
        for (int x = 0; x < scene.width(); ++x) {
            for (int iy = 0; iy < ny; ++iy) {
                if (!free_voxel(x, iy, z)) continue;
                const double cx = (x + 0.5) * cs, cy = (iy + 0.5) * cs, cz = (z + 0.5) * cs;
                if (scene.is_solid(x + 1, iy, z)) points.push_back({(x + 1) * cs, cy, cz});
                if (scene.is_solid(x - 1, iy, z)) points.push_back({x * cs, cy, cz});
                if (scene.is_solid(x, iy, z + 1)) points.push_back({cx, cy, (z + 1) * cs});
                if (scene.is_solid(x, iy, z - 1)) points.push_back({cx, cy, z * cs});
                if (scene.is_solid(x, iy + 1, z)) points.push_back({cx, (iy + 1) * cs, cz});
                if (scene.is_solid(x, iy - 1, z)) points.push_back({cx, iy * cs, cz});
            }
        }
    }
    return points;
}

namespace {

Grid2D<int> bfs_distances(const Scene& scene, CellIndex start) {
    Grid2D<int> dist(scene.width(), scene.height(), -1);
    std::deque<CellIndex> queue{start};
    dist.at(start.x, start.z) = 0;
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        const int dx[4] = {1, -1, 0, 0};
        const int dz[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            const int nx = c.x + dx[i], nz = c.z + dz[i];
            if (scene.is_nav(nx, nz) && dist.at(nx, nz) < 0) {
                dist.at(nx, nz) = dist.at(c.x, c.z) + 1;
                queue.push_back({nx, nz});
            }
        }
    }
    return dist;
}

}  // namespace

double nav_complexity(const Scene& scene, double sample_fraction, uint64_t seed) {
    if (sample_fraction <= 0.0 || sample_fraction > 1.0)
        throw NbpError("sample_fraction must lie in (0,1]");
    const std::vector<CellIndex> cells = scene.nav_cells();
    const size_t n = cells.size();
    if (n < 2) throw NbpError("nav_complexity needs at least 2 navigable cells");

    auto ratio_from = [&](CellIndex a, const Grid2D<int>& dist, CellIndex b) -> double {
        const int steps = dist.at(b.x, b.z);
        if (steps <= 0) return 0.0;
        const double euclid =
            std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.z - b.z)) *
            scene.cell_size;
        return steps * scene.cell_size / euclid;
    };

    double best = 0.0;
    if (sample_fraction >= 1.0) {
        for (size_t i = 0; i + 1 < n; ++i) {
            const Grid2D<int> dist = bfs_distances(scene, cells[i]);
            for (size_t j = i + 1; j < n; ++j) best = std::max(best, ratio_from(cells[i], dist, cells[j]));
        }
        return best;
    }

    const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const size_t samples = static_cast<size_t>(std::ceil(sample_fraction * total_pairs));
    Rng rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    // Group sampled pairs by source so each source needs a single BFS.
    std::vector<std::vector<size_t>> targets(n);
    for (size_t s = 0; s < samples; ++s) {
        size_t i = pick(rng), j = pick(rng);
        while (j == i) j = pick(rng);
        targets[i].push_back(j);
    }
    for (size_t i = 0; i < n; ++i) {
        if (targets[i].empty()) continue;
        const Grid2D<int> dist = bfs_distances(scene, cells[i]);
        for (size_t j : targets[i]) best = std::max(best, ratio_from(cells[i], dist, cells[j]));
    }
    return best;
}

Grid2D<uint8_t> obstacle_slice(const Scene& scene, const Pose& center, const WindowSpec& window) {
    Grid2D<uint8_t> grid(window.grid_w, window.grid_h, 1);
    for (int gz = 0; gz < window.grid_h; ++gz)
        for (int gx = 0; gx < window.grid_w; ++gx) {
            const CellIndex sc = window.to_scene({gx, gz}, center.cell);
            grid.at(gx, gz) =
                scene.is_solid_at_height(sc.x, sc.z, scene.agent_height) ? 1 : 0;
        }
    return grid;
}

namespace {
constexpr char kSceneMagic[8] = {'N', 'B', 'P', 'S', 'C', 'N', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw NbpError("truncated scene file");
    return v;
}
}  // namespace

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NbpError("cannot open " + path + " for writing");
    os.write(kSceneMagic, sizeof(kSceneMagic));
    write_pod(os, scene.cell_size);
    write_pod(os, scene.wall_height);
    write_pod(os, scene.agent_height);
    write_pod<int32_t>(os, scene.width());
    write_pod<int32_t>(os, scene.height());
    os.write(reinterpret_cast<const char*>(scene.wall_grid.raw().data()),
             scene.wall_grid.raw().size());
    os.write(reinterpret_cast<const char*>(scene.navgrid.raw().data()), scene.navgrid.raw().size());
    int32_t n_windows = 0;
    for (const auto& w : scene.windows) n_windows += w.has_value();
    write_pod(os, n_windows);
    for (int z = 0; z < scene.height(); ++z)
        for (int x = 0; x < scene.width(); ++x) {
            const auto& w = scene.window_at(x, z);
            if (!w) continue;
            write_pod<int32_t>(os, x);
            write_pod<int32_t>(os, z);
            write_pod(os, w->z_lo);
            write_pod(os, w->z_hi);
        }
    if (!os) throw NbpError("failed writing scene to " + path);
}

Scene load_scene(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NbpError("cannot open scene file " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kSceneMagic, sizeof(magic)) != 0)
        throw NbpError("bad scene file header in " + path);
    Scene scene;
    scene.cell_size = read_pod<double>(is);
    scene.wall_height = read_pod<double>(is);
    scene.agent_height = read_pod<double>(is);
    const int w = read_pod<int32_t>(is);
    const int h = read_pod<int32_t>(is);
    if (w <= 0 || h <= 0 || w > 4096 || h > 4096) throw NbpError("bad scene dimensions");
    scene.wall_grid = Grid2D<uint8_t>(w, h);
    scene.navgrid = Grid2D<uint8_t>(w, h);
    is.read(reinterpret_cast<char*>(scene.wall_grid.raw().data()), scene.wall_grid.raw().size());
    is.read(reinterpret_cast<char*>(scene.navgrid.raw().data()), scene.navgrid.raw().size());
    scene.windows.assign(static_cast<size_t>(w) * h, std::nullopt);
    const int n_windows = read_pod<int32_t>(is);
    for (int i = 0; i < n_windows; ++i) {
        const int x = read_pod<int32_t>(is);
        const int z = read_pod<int32_t>(is);
        WindowBand band;
        band.z_lo = read_pod<float>(is);
        band.z_hi = read_pod<float>(is);
        if (!scene.wall_grid.in_bounds(x, z)) throw NbpError("window outside grid");
        scene.windows[static_cast<size_t>(z) * w + x] = band;
    }
    return scene;
}

DifficultyParams difficulty_preset(const std::string& name) {
    DifficultyParams p;
    if (name == "simple") {
        p.room_count_range = {3, 4};
        p.room_size_range = {2.5, 4.5};
        p.corridor_width = 1.0;
        p.window_fraction = 0.05;
        p.branching_factor = 0.3;
    } else if (name == "normal") {
        p.room_count_range = {5, 7};
        p.room_size_range = {2.0, 4.0};
        p.corridor_width = 1.0;
        p.window_fraction = 0.10;
        p.branching_factor = 0.5;
    } else if (name == "hard") {
        p.room_count_range = {8, 11};
        p.room_size_range = {1.5, 3.5};
        p.corridor_width = 0.5;
        p.window_fraction = 0.15;
        p.branching_factor = 0.8;
    } else if (name == "insane") {
        p.room_count_range = {12, 16};
        p.room_size_range = {1.0, 3.0};
        p.corridor_width = 0.5;
        p.door_width = 0.5;
        p.window_fraction = 0.20;
        p.branching_factor = 1.2;
    } else {
        throw NbpError("unknown difficulty preset: " + name);
    }
    return p;
}

}  // namespace nbp
