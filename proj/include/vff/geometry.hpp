#pragma once

#include <cmath>
#include <cstddef>
#include <string>

namespace vff {

/// A point, offset or angular frequency in (x, y, t) order. Units are input
/// samples (positions) or radians per input sample (frequencies).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.t + b.t}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.t - b.t}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.t}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.t * b.t; }

inline bool is_finite(Vec3 v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.t); }

/// Extents of a T x H x W lattice (frames, rows, columns).
struct Dims3 {
    int t = 0;
    int h = 0;
    int w = 0;

    constexpr std::size_t count() const
    {
        return static_cast<std::size_t>(t) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    constexpr bool empty() const { return t <= 0 || h <= 0 || w <= 0; }
    friend constexpr bool operator==(Dims3, Dims3) = default;

    std::string str() const
    {
        return std::to_string(t) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
};

struct VoxelIndex {
    int t = 0;
    int y = 0;
    int x = 0;

    friend constexpr bool operator==(VoxelIndex, VoxelIndex) = default;
};

constexpr std::size_t linear_index(Dims3 d, VoxelIndex j)
{
    return (static_cast<std::size_t>(j.t) * static_cast<std::size_t>(d.h) + static_cast<std::size_t>(j.y)) *
               static_cast<std::size_t>(d.w) +
           static_cast<std::size_t>(j.x);
}

constexpr bool contains(Dims3 d, VoxelIndex j)
{
    return j.t >= 0 && j.t < d.t && j.y >= 0 && j.y < d.h && j.x >= 0 && j.x < d.w;
}

} // namespace vff
