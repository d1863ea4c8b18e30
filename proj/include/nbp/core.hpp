#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nbp {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

struct CellIndex {
    int x = 0, z = 0;
    bool operator==(const CellIndex&) const = default;
};

/// Agent camera state: navgrid cell plus one of kNumYaw discrete headings.
struct Pose {
    CellIndex cell;
    int yaw_index = 0;
    bool operator==(const Pose&) const = default;
};

inline constexpr int kNumYaw = 8;
inline constexpr double kYawStepDeg = 360.0 / kNumYaw;

/// World-frame heading for a yaw index (y-up, angle in the xz-plane).
inline Vec3 yaw_direction(int yaw_index) {
    const double a = yaw_index * kYawStepDeg * 3.14159265358979323846 / 180.0;
    return {std::cos(a), 0.0, std::sin(a)};
}

template <typename T>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(int x, int z) const { return x >= 0 && x < width_ && z >= 0 && z < height_; }

    T& at(int x, int z) { return data_[static_cast<size_t>(z) * width_ + x]; }
    const T& at(int x, int z) const { return data_[static_cast<size_t>(z) * width_ + x]; }

    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    bool operator==(const Grid2D&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Rng = std::mt19937_64;

struct NbpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nbp
