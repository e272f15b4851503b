#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cabinsim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator*(double s, const Vec3& a) { return a * s; }
inline Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (n <= 0.0) throw std::invalid_argument("cannot normalize zero vector");
  return a / n;
}

/// Two unit vectors completing `axis` to a right-handed orthonormal frame.
inline void orthonormal_basis(const Vec3& axis, Vec3& u, Vec3& v) {
  const Vec3 ref = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  u = normalized(cross(ref, axis));
  v = cross(axis, u);
}

struct Aabb {
  Vec3 lo;
  Vec3 hi;
};

/// True iff the open segment (p,q) passes through the interior of the box.
/// Boundary contact (tangent rays, endpoints on a face, rays in a face plane)
/// does not count as a hit; an endpoint on a face with the segment heading
/// into the box does.
inline bool open_segment_hits_box(const Vec3& p, const Vec3& q, const Aabb& b) {
  double tmin = 0.0;
  double tmax = 1.0;
  const double pc[3] = {p.x, p.y, p.z};
  const double qc[3] = {q.x, q.y, q.z};
  const double lo[3] = {b.lo.x, b.lo.y, b.lo.z};
  const double hi[3] = {b.hi.x, b.hi.y, b.hi.z};
  for (int a = 0; a < 3; ++a) {
    const double d = qc[a] - pc[a];
    if (d == 0.0) {
      // Parallel to the slab: interior crossing needs lo < p < hi strictly.
      if (pc[a] <= lo[a] || pc[a] >= hi[a]) return false;
    } else {
      double t0 = (lo[a] - pc[a]) / d;
      double t1 = (hi[a] - pc[a]) / d;
      if (t0 > t1) std::swap(t0, t1);
      tmin = std::max(tmin, t0);
      tmax = std::min(tmax, t1);
      if (tmin >= tmax) return false;
    }
  }
  // Strict: a degenerate interval (corner/edge graze) is boundary contact.
  return tmin < tmax;
}

/// Axis-aligned occluder set with a uniform xy grid for segment queries.
/// Queries are pure and safe for concurrent use.
class OccluderGrid {
 public:
  OccluderGrid() = default;

  explicit OccluderGrid(std::vector<Aabb> boxes, double cell_size = 0.5)
      : boxes_(std::move(boxes)), cell_(cell_size) {
    if (boxes_.empty()) return;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (const Aabb& b : boxes_) {
      x0 = std::min(x0, b.lo.x);
      x1 = std::max(x1, b.hi.x);
      y0 = std::min(y0, b.lo.y);
      y1 = std::max(y1, b.hi.y);
      max_top_ = std::max(max_top_, b.hi.z);
    }
    x0_ = x0 - 1e-9;
    y0_ = y0 - 1e-9;
    nx_ = std::max(1, static_cast<int>(std::ceil((x1 - x0_) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((y1 - y0_) / cell_)));
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::uint32_t i = 0; i < boxes_.size(); ++i) {
      const Aabb& b = boxes_[i];
      const int cx0 = cell_index_x(b.lo.x), cx1 = cell_index_x(b.hi.x);
      const int cy0 = cell_index_y(b.lo.y), cy1 = cell_index_y(b.hi.y);
      for (int cy = cy0; cy <= cy1; ++cy)
        for (int cx = cx0; cx <= cx1; ++cx) cells_[cell_id(cx, cy)].push_back(i);
    }
  }

  const std::vector<Aabb>& boxes() const { return boxes_; }
  double max_top() const { return max_top_; }

  /// True iff the open segment (p,q) passes through any occluder interior.
  bool blocked(const Vec3& p, const Vec3& q) const {
    if (boxes_.empty()) return false;
    // Anything running entirely above the tallest occluder is free.
    if (std::min(p.z, q.z) >= max_top_) return false;
    if (nx_ == 1 && ny_ == 1) return test_cell(0, 0, p, q);

    // Clip the xy projection of the segment against the grid rectangle,
    // then walk the covered cells (2D DDA).
    const double gx1 = x0_ + nx_ * cell_, gy1 = y0_ + ny_ * cell_;
    double ta = 0.0, tb = 1.0;
    const double dx = q.x - p.x, dy = q.y - p.y;
    if (!clip_axis(p.x, dx, x0_, gx1, ta, tb)) return false;
    if (!clip_axis(p.y, dy, y0_, gy1, ta, tb)) return false;

    const double ax = p.x + ta * dx, ay = p.y + ta * dy;
    int cx = cell_index_x(ax), cy = cell_index_y(ay);
    const int step_x = dx > 0 ? 1 : -1;
    const int step_y = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double t_next_x = inf, t_next_y = inf, t_dx = inf, t_dy = inf;
    if (dx != 0.0) {
      const double edge = x0_ + (cx + (step_x > 0 ? 1 : 0)) * cell_;
      t_next_x = (edge - p.x) / dx;
      t_dx = cell_ / std::abs(dx);
    }
    if (dy != 0.0) {
      const double edge = y0_ + (cy + (step_y > 0 ? 1 : 0)) * cell_;
      t_next_y = (edge - p.y) / dy;
      t_dy = cell_ / std::abs(dy);
    }
    while (true) {
      if (test_cell(cx, cy, p, q)) return true;
      if (t_next_x <= t_next_y) {
        if (t_next_x > tb) return false;
        cx += step_x;
        if (cx < 0 || cx >= nx_) return false;
        t_next_x += t_dx;
      } else {
        if (t_next_y > tb) return false;
        cy += step_y;
        if (cy < 0 || cy >= ny_) return false;
        t_next_y += t_dy;
      }
    }
  }

 private:
  static bool clip_axis(double p0, double d, double lo, double hi, double& ta, double& tb) {
    if (d == 0.0) return p0 >= lo && p0 <= hi;
    double t0 = (lo - p0) / d, t1 = (hi - p0) / d;
    if (t0 > t1) std::swap(t0, t1);
    ta = std::max(ta, t0);
    tb = std::min(tb, t1);
    return ta <= tb;
  }

  int cell_index_x(double x) const {
    return std::clamp(static_cast<int>((x - x0_) / cell_), 0, nx_ - 1);
  }
  int cell_index_y(double y) const {
    return std::clamp(static_cast<int>((y - y0_) / cell_), 0, ny_ - 1);
  }
  std::size_t cell_id(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * nx_ + cx;
  }

  bool test_cell(int cx, int cy, const Vec3& p, const Vec3& q) const {
    for (std::uint32_t i : cells_[cell_id(cx, cy)])
      if (open_segment_hits_box(p, q, boxes_[i])) return true;
    return false;
  }

  std::vector<Aabb> boxes_;
  double cell_ = 0.5;
  double x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;
  double max_top_ = -std::numeric_limits<double>::infinity();
};

}  // namespace cabinsim
