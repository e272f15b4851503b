#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cabinsim/geometry.hpp"

namespace cabinsim {

struct SeatSpec {
  double width = 0.50;
  double depth = 0.60;
  double surface_height = 0.45;
  double back_height = 1.10;
  double back_thickness = 0.10;
};

struct ReflectivityMap {
  double ceiling = 0.8;
  double side_walls = 0.8;
  double floor = 0.3;
  double end_walls = 0.3;
};

/// Parametric cabin: cuboid hull, rows of 3-4-3 seating, reading-light
/// mounts on the ceiling over each seat group.
struct CabinConfig {
  double length = 57.0;
  double width = 6.37;
  double height = 2.41;
  int rows = 54;
  int seats_per_row = 10;  // 3-4-3 layout
  double row_pitch = 0.81;
  SeatSpec seat;
  ReflectivityMap reflectivity;
};

/// 1-based inclusive row range.
struct RowSpan {
  int first = 1;
  int last = 1;
  int count() const { return last - first + 1; }
};

enum class SurfaceClass : std::uint8_t {
  ceiling,
  floor,
  side_wall_low,   // y = 0
  side_wall_high,  // y = width
  end_wall_front,  // x = slice start
  end_wall_back,   // x = slice end
};

/// One boundary rectangle: origin + two edge vectors, inward normal.
struct SurfaceRect {
  SurfaceClass cls;
  Vec3 origin;
  Vec3 edge_u;
  Vec3 edge_v;
  Vec3 normal;
  double reflectivity;
};

struct Seat {
  int row = 1;           // 1-based cabin row
  int index_in_row = 0;  // 0..9, window side (y=0) first
  int id = 0;            // (row-1)*seats_per_row + index_in_row + 1
  Vec3 surface_center;   // centre of the cushion top face
};

enum class UnitKind : std::uint8_t { side3, middle4 };

struct UnitMount {
  UnitKind kind;
  int row = 1;
  int group = 0;  // 0,1,2 across the width
  Vec3 position;  // on the ceiling, z = cabin height
};

struct Scene {
  CabinConfig config;
  RowSpan span;
  double x_begin = 0.0;  // slice bounds along the cabin
  double x_end = 0.0;
  std::vector<SurfaceRect> surfaces;
  std::vector<Seat> seats;
  std::vector<UnitMount> mounts;
  OccluderGrid occluders;
};

struct SubdivisionSpec {
  double first_order_element = 0.05;
  double second_order_element = 0.20;
  double time_bin = 5e-11;
};

enum class SubdivisionOrder { first, second };

/// One reflecting element. Elements re-emit as ideal Lambertian sources
/// (emission order 1).
struct SurfaceElement {
  Vec3 center;
  Vec3 normal;
  double area = 0.0;
  double reflectivity = 0.0;
  double emission_order = 1.0;
  int surface = -1;  // index into Scene::surfaces
};

namespace detail {

/// Seat centres across the width for the 3-4-3 layout. Groups are flush
/// against each side wall with the two aisles splitting the leftover width.
inline std::vector<double> seat_y_centers(const CabinConfig& c) {
  const double aisle = (c.width - c.seats_per_row * c.seat.width) / 2.0;
  std::vector<double> ys;
  ys.reserve(c.seats_per_row);
  double y = 0.0;
  const std::array<int, 3> groups = {3, 4, 3};
  for (int g = 0; g < 3; ++g) {
    for (int s = 0; s < groups[g]; ++s) {
      ys.push_back(y + (s + 0.5) * c.seat.width);
    }
    y += groups[g] * c.seat.width;
    if (g < 2) y += aisle;
  }
  return ys;
}

inline std::array<double, 3> group_y_centers(const CabinConfig& c) {
  const auto ys = seat_y_centers(c);
  return {(ys[0] + ys[2]) / 2.0, (ys[3] + ys[6]) / 2.0, (ys[7] + ys[9]) / 2.0};
}

}  // namespace detail

/// Builds the slice of the cabin covering `span`: six boundary surfaces,
/// seat occluder boxes, and ceiling mount points for the reading lights.
inline Scene build_scene(const CabinConfig& config, RowSpan span) {
  if (config.length <= 0 || config.width <= 0 || config.height <= 0)
    throw std::invalid_argument("cabin dimensions must be positive");
  if (config.rows < 1 || config.row_pitch <= 0)
    throw std::invalid_argument("cabin rows and row pitch must be positive");
  if (config.seats_per_row != 10)
    throw std::invalid_argument("only the 3-4-3 layout (10 seats per row) is supported");
  if (span.first > span.last) throw std::invalid_argument("row span is empty");
  if (span.first < 1 || span.last > config.rows)
    throw std::invalid_argument("row span exceeds cabin rows");
  if (config.seats_per_row * config.seat.width > config.width + 1e-12)
    throw std::invalid_argument("seats do not fit the cabin cross-section");
  if (config.rows * config.row_pitch > config.length + 1e-12)
    throw std::invalid_argument("rows do not fit the cabin length");
  const SeatSpec& st = config.seat;
  if (st.width <= 0 || st.depth <= 0 || st.surface_height <= 0 || st.back_height <= 0 ||
      st.back_thickness <= 0)
    throw std::invalid_argument("seat dimensions must be positive");
  if (st.depth > config.row_pitch)
    throw std::invalid_argument("seat depth exceeds row pitch");
  for (double r : {config.reflectivity.ceiling, config.reflectivity.floor,
                   config.reflectivity.side_walls, config.reflectivity.end_walls}) {
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("reflectivity outside [0, 1]");
  }

  Scene scene;
  scene.config = config;
  scene.span = span;

  // Rows are centred along the cabin; the slice clips to whole rows.
  const double rows_x0 = (config.length - config.rows * config.row_pitch) / 2.0;
  scene.x_begin = rows_x0 + (span.first - 1) * config.row_pitch;
  scene.x_end = rows_x0 + span.last * config.row_pitch;
  const double dx = scene.x_end - scene.x_begin;
  const double W = config.width, H = config.height;
  const Vec3 o{scene.x_begin, 0.0, 0.0};
  const ReflectivityMap& rho = config.reflectivity;

  scene.surfaces = {
      {SurfaceClass::ceiling, {o.x, 0, H}, {dx, 0, 0}, {0, W, 0}, {0, 0, -1}, rho.ceiling},
      {SurfaceClass::floor, {o.x, 0, 0}, {dx, 0, 0}, {0, W, 0}, {0, 0, 1}, rho.floor},
      {SurfaceClass::side_wall_low, {o.x, 0, 0}, {dx, 0, 0}, {0, 0, H}, {0, 1, 0}, rho.side_walls},
      {SurfaceClass::side_wall_high, {o.x, W, 0}, {dx, 0, 0}, {0, 0, H}, {0, -1, 0}, rho.side_walls},
      {SurfaceClass::end_wall_front, {o.x, 0, 0}, {0, W, 0}, {0, 0, H}, {1, 0, 0}, rho.end_walls},
      {SurfaceClass::end_wall_back, {scene.x_end, 0, 0}, {0, W, 0}, {0, 0, H}, {-1, 0, 0}, rho.end_walls},
  };

  // Seats: cushion box fills the space under the seat surface (blocked per
  // the occlusion model); the back rises at the rear edge of the cushion.
  const auto ys = detail::seat_y_centers(config);
  std::vector<Aabb> boxes;
  boxes.reserve(static_cast<std::size_t>(span.count()) * ys.size() * 2);
  for (int row = span.first; row <= span.last; ++row) {
    const double row_x0 = rows_x0 + (row - 1) * config.row_pitch;
    const double legroom = config.row_pitch - st.depth;
    const double cushion_x0 = row_x0 + legroom;
    const double cushion_x1 = row_x0 + config.row_pitch;
    for (std::size_t s = 0; s < ys.size(); ++s) {
      const double y0 = ys[s] - st.width / 2.0;
      const double y1 = ys[s] + st.width / 2.0;
      boxes.push_back({{cushion_x0, y0, 0.0}, {cushion_x1, y1, st.surface_height}});
      boxes.push_back({{cushion_x1 - st.back_thickness, y0, 0.0}, {cushion_x1, y1, st.back_height}});
      Seat seat;
      seat.row = row;
      seat.index_in_row = static_cast<int>(s);
      seat.id = (row - 1) * config.seats_per_row + static_cast<int>(s) + 1;
      seat.surface_center = {(cushion_x0 + cushion_x1) / 2.0, ys[s], st.surface_height};
      scene.seats.push_back(seat);
    }
    const auto gys = detail::group_y_centers(config);
    const double mount_x = row_x0 + config.row_pitch / 2.0;
    scene.mounts.push_back({UnitKind::side3, row, 0, {mount_x, gys[0], H}});
    scene.mounts.push_back({UnitKind::middle4, row, 1, {mount_x, gys[1], H}});
    scene.mounts.push_back({UnitKind::side3, row, 2, {mount_x, gys[2], H}});
  }
  scene.occluders = OccluderGrid(std::move(boxes));
  return scene;
}

/// Grid counts per edge: count = round(len/element), clamped to >= 1; the
/// actual pitch stretches so elements tile the surface exactly.
inline int subdivision_count(double len, double element) {
  return std::max(1, static_cast<int>(std::llround(len / element)));
}

/// Tiles every boundary surface with equal elements of roughly the selected
/// size. Normals point into the cabin; the summed element area reproduces
/// each surface area exactly (up to rounding of the per-element product).
inline std::vector<SurfaceElement> subdivide(const Scene& scene, const SubdivisionSpec& spec,
                                             SubdivisionOrder order) {
  const double target =
      order == SubdivisionOrder::first ? spec.first_order_element : spec.second_order_element;
  if (target <= 0) throw std::invalid_argument("element size must be positive");
  if (spec.time_bin <= 0) throw std::invalid_argument("time bin must be positive");

  std::vector<SurfaceElement> out;
  for (std::size_t si = 0; si < scene.surfaces.size(); ++si) {
    const SurfaceRect& surf = scene.surfaces[si];
    const double len_u = norm(surf.edge_u);
    const double len_v = norm(surf.edge_v);
    const int cu = subdivision_count(len_u, target);
    const int cv = subdivision_count(len_v, target);
    const double area = len_u * len_v / (static_cast<double>(cu) * cv);
    out.reserve(out.size() + static_cast<std::size_t>(cu) * cv);
    for (int i = 0; i < cu; ++i) {
      for (int j = 0; j < cv; ++j) {
        SurfaceElement e;
        e.center = surf.origin + surf.edge_u * ((i + 0.5) / cu) + surf.edge_v * ((j + 0.5) / cv);
        e.normal = surf.normal;
        e.area = area;
        e.reflectivity = surf.reflectivity;
        e.surface = static_cast<int>(si);
        out.push_back(e);
      }
    }
  }
  return out;
}

/// Visibility query: true iff no seat occluder blocks the open segment.
inline bool visible(const Vec3& p, const Vec3& q, const Scene& scene) {
  return !scene.occluders.blocked(p, q);
}

}  // namespace cabinsim
