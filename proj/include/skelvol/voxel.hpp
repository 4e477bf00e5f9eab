#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "skelvol/geometry.hpp"
#include "skelvol/preprocess.hpp"

namespace skelvol {

inline constexpr std::size_t kDefaultResolution = 50;
inline constexpr double kDefaultMargin = 0.05;
/// Lower bound on the cube half-extent, in meters, for (near-)degenerate clouds.
inline constexpr double kMinHalfExtent = 0.1;

/// Axis-aligned cube in meters.
struct GridBounds {
  Vec3 center;
  double half_extent = kMinHalfExtent;

  Vec3 min_corner() const { return {center.x - half_extent, center.y - half_extent, center.z - half_extent}; }
  friend bool operator==(const GridBounds&, const GridBounds&) = default;
};

enum class VolumeKind : std::uint8_t { Spatial = 0, Temporal = 1 };

/// Dense R^3 scalar field. Index (i, j, k) follows (x, y, z); storage is
/// x-major, z fastest.
struct VoxelGrid {
  std::size_t resolution = 0;
  std::vector<float> values;
  GridBounds bounds;
  VolumeKind kind = VolumeKind::Spatial;

  static VoxelGrid zeros(std::size_t resolution, const GridBounds& bounds, VolumeKind kind);

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const { return (i * resolution + j) * resolution + k; }
  float at(std::size_t i, std::size_t j, std::size_t k) const { return values[offset(i, j, k)]; }
  std::size_t nonzero_count() const;

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;
};

/// Cube around the bounding box of every point over all frames. Throws
/// EmptyInput when there are no points.
GridBounds fit_bounds(const PointCloudSequence& pcs, double margin = kDefaultMargin);

/// floor((c - min) / (2h) * R) per axis, clamped to [0, R-1]. Throws
/// OutOfBounds for points outside the cube.
std::array<std::size_t, 3> point_to_voxel(const Vec3& p, const GridBounds& bounds, std::size_t resolution);

/// Occupancy: 1 where any point of any frame lands, 0 elsewhere.
VoxelGrid encode_spatial(const PointCloudSequence& pcs, const GridBounds& bounds, std::size_t resolution);

/// Each touched voxel holds (f - 1) / (F - 1) for the last frame f that
/// touched it (1 when F == 1); untouched voxels are 0.
VoxelGrid encode_temporal(const PointCloudSequence& pcs, const GridBounds& bounds, std::size_t resolution);

/// The value encode_temporal assigns to frame f (1-based) of F.
float temporal_value(std::size_t frame, std::size_t frame_count);

void write_volume(std::ostream& out, const VoxelGrid& grid);
VoxelGrid read_volume(std::istream& in);
void save_volume_file(const std::string& path, const VoxelGrid& grid);
VoxelGrid load_volume_file(const std::string& path);

// --- inspection -----------------------------------------------------------

enum class Plane { XY, XZ, YZ };

/// Row-major 2D image, values in [0, 1].
struct Image2D {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  float at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

Plane parse_plane(const std::string& name);

/// Slice at `index` along the axis normal to `plane`. Image columns run
/// along the first named axis and rows along the second (XY: col = x,
/// row = y). Throws IndexOutOfRange when index >= R.
Image2D extract_slice(const VoxelGrid& grid, Plane plane, std::size_t index);

/// Maximum along the axis normal to `plane`.
Image2D max_projection(const VoxelGrid& grid, Plane plane);

/// Binary P5 graymap, pixel = round(255 * value).
void write_pgm(std::ostream& out, const Image2D& img);
void write_image_csv(std::ostream& out, const Image2D& img);

}  // namespace skelvol
