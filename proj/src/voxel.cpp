#include "skelvol/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "skelvol/binary_io.hpp"
#include "skelvol/error.hpp"

namespace skelvol {
namespace {

constexpr std::string_view kVolumeMagic = "SKVG";
constexpr std::uint32_t kVolumeVersion = 1;
constexpr std::size_t kMaxResolution = 1024;

void require_points(const PointCloudSequence& pcs) {
  if (pcs.point_count() == 0) throw Error(ErrorCode::EmptyInput, "point cloud sequence has no points");
}

void require_resolution(std::size_t resolution) {
  if (resolution == 0 || resolution > kMaxResolution)
    throw Error(ErrorCode::InvalidParams, "grid resolution must be in 1.." + std::to_string(kMaxResolution));
}

}  // namespace

VoxelGrid VoxelGrid::zeros(std::size_t resolution, const GridBounds& bounds, VolumeKind kind) {
  require_resolution(resolution);
  VoxelGrid g;
  g.resolution = resolution;
  g.values.assign(resolution * resolution * resolution, 0.0f);
  g.bounds = bounds;
  g.kind = kind;
  return g;
}

std::size_t VoxelGrid::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](float v) { return v != 0.0f; }));
}

GridBounds fit_bounds(const PointCloudSequence& pcs, double margin) {
  require_points(pcs);
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw Error(ErrorCode::InvalidParams, "margin must be a finite non-negative fraction");
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf};
  Vec3 hi{-inf, -inf, -inf};
  for (const auto& frame : pcs.frames)
    for (const auto& p : frame) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  GridBounds b;
  b.center = 0.5 * (lo + hi);
  const double half = 0.5 * std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  b.half_extent = std::max((1.0 + margin) * half, kMinHalfExtent);
  return b;
}

std::array<std::size_t, 3> point_to_voxel(const Vec3& p, const GridBounds& bounds, std::size_t resolution) {
  const Vec3 lo = bounds.min_corner();
  const double side = 2.0 * bounds.half_extent;
  // Slack for the rounding in center +/- half_extent.
  const double slack = 1e-9 * bounds.half_extent;
  auto axis = [&](double c, double min) {
    const double rel = c - min;
    if (!(rel >= -slack && rel <= side + slack))
      throw Error(ErrorCode::OutOfBounds, "point outside grid bounds");
    const double scaled = std::floor(rel / side * static_cast<double>(resolution));
    return static_cast<std::size_t>(std::clamp(scaled, 0.0, static_cast<double>(resolution - 1)));
  };
  return {axis(p.x, lo.x), axis(p.y, lo.y), axis(p.z, lo.z)};
}

float temporal_value(std::size_t frame, std::size_t frame_count) {
  if (frame_count <= 1) return 1.0f;
  return static_cast<float>(static_cast<double>(frame - 1) / static_cast<double>(frame_count - 1));
}

VoxelGrid encode_spatial(const PointCloudSequence& pcs, const GridBounds& bounds, std::size_t resolution) {
  require_points(pcs);
  VoxelGrid g = VoxelGrid::zeros(resolution, bounds, VolumeKind::Spatial);
  for (const auto& frame : pcs.frames)
    for (const auto& p : frame) {
      const auto [i, j, k] = point_to_voxel(p, bounds, resolution);
      g.values[g.offset(i, j, k)] = 1.0f;
    }
  return g;
}

VoxelGrid encode_temporal(const PointCloudSequence& pcs, const GridBounds& bounds, std::size_t resolution) {
  require_points(pcs);
  VoxelGrid g = VoxelGrid::zeros(resolution, bounds, VolumeKind::Temporal);
  const std::size_t F = pcs.frames.size();
  // Frames are visited in order, so the last touch overwrites earlier ones.
  for (std::size_t f = 0; f < F; ++f) {
    const float value = temporal_value(f + 1, F);
    for (const auto& p : pcs.frames[f]) {
      const auto [i, j, k] = point_to_voxel(p, bounds, resolution);
      g.values[g.offset(i, j, k)] = value;
    }
  }
  return g;
}

void write_volume(std::ostream& out, const VoxelGrid& grid) {
  using namespace binio;
  if (grid.values.size() != grid.resolution * grid.resolution * grid.resolution)
    throw Error(ErrorCode::ShapeMismatch, "volume value count does not match resolution");
  put_magic(out, kVolumeMagic);
  put_u32(out, kVolumeVersion);
  put_u8(out, static_cast<std::uint8_t>(grid.kind));
  put_u32(out, static_cast<std::uint32_t>(grid.resolution));
  put_f64(out, grid.bounds.center.x);
  put_f64(out, grid.bounds.center.y);
  put_f64(out, grid.bounds.center.z);
  put_f64(out, grid.bounds.half_extent);
  for (float v : grid.values) put_f32(out, v);
  if (!out) throw Error(ErrorCode::IoError, "write failed");
}

VoxelGrid read_volume(std::istream& in) {
  using namespace binio;
  expect_magic(in, kVolumeMagic);
  const std::uint32_t version = get_u32(in);
  if (version != kVolumeVersion) throw Error(ErrorCode::VersionMismatch, "unsupported volume version " + std::to_string(version));
  const std::uint8_t kind = get_u8(in);
  if (kind > 1) throw Error(ErrorCode::IoError, "unknown volume kind " + std::to_string(kind));
  const std::uint32_t resolution = get_u32(in);
  if (resolution == 0 || resolution > kMaxResolution) throw Error(ErrorCode::IoError, "implausible resolution");
  GridBounds b;
  b.center.x = get_f64(in);
  b.center.y = get_f64(in);
  b.center.z = get_f64(in);
  b.half_extent = get_f64(in);
  VoxelGrid g = VoxelGrid::zeros(resolution, b, static_cast<VolumeKind>(kind));
  for (auto& v : g.values) v = get_f32(in);
  return g;
}

void save_volume_file(const std::string& path, const VoxelGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, path + ": cannot open for writing");
  write_volume(out, grid);
}

VoxelGrid load_volume_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path + ": cannot open for reading");
  try {
    return read_volume(in);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

Plane parse_plane(const std::string& name) {
  if (name == "xy" || name == "XY") return Plane::XY;
  if (name == "xz" || name == "XZ") return Plane::XZ;
  if (name == "yz" || name == "YZ") return Plane::YZ;
  throw Error(ErrorCode::InvalidParams, "unknown plane '" + name + "' (expected xy, xz or yz)");
}

namespace {

// Maps (row, col, depth) in plane coordinates back to (i, j, k).
std::array<std::size_t, 3> plane_to_grid(Plane plane, std::size_t row, std::size_t col, std::size_t depth) {
  switch (plane) {
    case Plane::XY: return {col, row, depth};
    case Plane::XZ: return {col, depth, row};
    default: return {depth, col, row};
  }
}

}  // namespace

Image2D extract_slice(const VoxelGrid& grid, Plane plane, std::size_t index) {
  const std::size_t R = grid.resolution;
  if (index >= R)
    throw Error(ErrorCode::IndexOutOfRange, "slice index " + std::to_string(index) + " >= resolution " + std::to_string(R));
  Image2D img{R, R, std::vector<float>(R * R)};
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < R; ++c) {
      const auto [i, j, k] = plane_to_grid(plane, r, c, index);
      img.pixels[r * R + c] = grid.at(i, j, k);
    }
  return img;
}

Image2D max_projection(const VoxelGrid& grid, Plane plane) {
  const std::size_t R = grid.resolution;
  Image2D img{R, R, std::vector<float>(R * R, 0.0f)};
  for (std::size_t d = 0; d < R; ++d)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < R; ++c) {
        const auto [i, j, k] = plane_to_grid(plane, r, c, d);
        img.pixels[r * R + c] = std::max(img.pixels[r * R + c], grid.at(i, j, k));
      }
  return img;
}

void write_pgm(std::ostream& out, const Image2D& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  for (float v : img.pixels) {
    const long level = std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    out.put(static_cast<char>(static_cast<unsigned char>(level)));
  }
}

void write_image_csv(std::ostream& out, const Image2D& img) {
  out << std::setprecision(9);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) out << (c ? "," : "") << img.at(r, c);
    out << '\n';
  }
}

}  // namespace skelvol
