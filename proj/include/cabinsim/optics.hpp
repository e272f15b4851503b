#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cabinsim/geometry.hpp"
#include "cabinsim/scene.hpp"

namespace cabinsim {

inline constexpr double kDegree = std::numbers::pi / 180.0;

/// Pointing given as elevation above the horizontal plane (negative = down)
/// and azimuth in the xy plane measured from +x towards +y.
struct Orientation {
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;

  Vec3 direction() const {
    const double el = elevation_deg * kDegree;
    const double az = azimuth_deg * kDegree;
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  }
};

/// Lambertian emission order from the half-power semi-angle:
/// cos(semi_angle)^n = 1/2.
inline double lambertian_order(double semi_angle_deg) {
  if (!(semi_angle_deg > 0.0) || !(semi_angle_deg < 90.0))
    throw std::invalid_argument("semi-angle must lie in (0, 90) degrees");
  return -std::numbers::ln2 / std::log(std::cos(semi_angle_deg * kDegree));
}

/// Radiant intensity of a generalized Lambertian source in W/sr:
/// I(phi) = P (n+1)/(2 pi) cos^n(phi). Integrates to P over the hemisphere.
inline double radiant_intensity(double power_w, double order_n, double phi_rad) {
  const double c = std::cos(phi_rad);
  if (c <= 0.0) return 0.0;
  return power_w * (order_n + 1.0) / (2.0 * std::numbers::pi) * std::pow(c, order_n);
}

/// Photodetector (an ADR branch, or one ImR pixel behind the lens).
struct Detector {
  Vec3 position;
  Vec3 axis;  // unit pointing direction, towards the scene
  double area = 4e-6;
  double fov_deg = 21.0;
  double responsivity = 0.4;
};

/// Point Lambertian emitter for line-of-sight gain evaluation.
struct PointEmitter {
  Vec3 position;
  Vec3 axis;
  double order_n = 1.0;
};

/// LOS channel gain (received/emitted power ratio):
/// (n+1) A cos^n(phi) cos(theta) / (2 pi d^2), zero outside the detector FOV
/// or for back-facing geometry.
inline double los_gain(const PointEmitter& e, const Detector& d) {
  const Vec3 sep = d.position - e.position;
  const double d2 = norm2(sep);
  if (d2 <= 0.0) throw std::invalid_argument("emitter and detector coincide");
  const Vec3 u = sep / std::sqrt(d2);
  const double cos_phi = dot(e.axis, u);
  const double cos_theta = dot(d.axis, -u);
  if (cos_phi <= 0.0 || cos_theta <= 0.0) return 0.0;
  if (cos_theta < std::cos(d.fov_deg * kDegree)) return 0.0;
  return (e.order_n + 1.0) * d.area * std::pow(cos_phi, e.order_n) * cos_theta /
         (2.0 * std::numbers::pi * d2);
}

// Imaging-receiver lens, transmission vs incidence angle (radians).
inline constexpr double kLensCoeffY2 = -0.1982;
inline constexpr double kLensCoeffY1 = 0.0425;
inline constexpr double kLensCoeffY0 = 0.8778;
inline constexpr double kImrFovDeg = 40.0;
inline constexpr int kImrGridSize = 5;

/// Lens transmission factor at incidence angle Y (radians), clamped to
/// [0, 1] and zero outside the receiver FOV.
inline double lens_transmission(double incidence_rad, double fov_deg = kImrFovDeg) {
  if (incidence_rad < 0.0) throw std::invalid_argument("incidence angle must be non-negative");
  if (incidence_rad > fov_deg * kDegree) return 0.0;
  const double t = (kLensCoeffY2 * incidence_rad + kLensCoeffY1) * incidence_rad + kLensCoeffY0;
  return std::clamp(t, 0.0, 1.0);
}

/// Maps an arrival direction (unit vector in the receiver frame, z = receiver
/// normal) to the pixel whose direction-cosine cell contains it.
///
/// The pixel grid splits [-s, s]^2 in (u, v) = (sin Y cos a, sin Y sin a)
/// into grid x grid cells, s = sin(fov). Upper edges are exclusive. Returns
/// nullopt outside the FOV.
inline std::optional<int> pixel_for_direction(const Vec3& arrival_rx_frame,
                                              double fov_deg = kImrFovDeg,
                                              int grid = kImrGridSize) {
  if (std::abs(norm(arrival_rx_frame) - 1.0) > 1e-9)
    throw std::invalid_argument("arrival direction must be a unit vector");
  const double cos_fov = std::cos(fov_deg * kDegree);
  if (arrival_rx_frame.z < cos_fov) return std::nullopt;
  const double s = std::sin(fov_deg * kDegree);
  const double cell = 2.0 * s / grid;
  const int col = static_cast<int>(std::floor((arrival_rx_frame.x + s) / cell));
  const int row = static_cast<int>(std::floor((arrival_rx_frame.y + s) / cell));
  if (col < 0 || col >= grid || row < 0 || row >= grid) return std::nullopt;
  return row * grid + col;
}

/// One reading-light branch. The paper tabulates branch azimuths relative to
/// the across-cabin axis, so world pointing adds the unit mount yaw.
struct Branch {
  Vec3 position;
  Orientation orientation;  // as tabulated (azimuth about the unit frame)
  double mount_yaw_deg = 0.0;
  double semi_angle_deg = 14.0;
  double order_n = 1.0;  // derived from semi_angle_deg
  double power_w = 1.0;  // aggregate RYGB optical power

  Vec3 world_axis() const {
    Orientation o{orientation.elevation_deg, orientation.azimuth_deg + mount_yaw_deg};
    return o.direction();
  }
};

struct TransmitterUnit {
  UnitKind kind;
  int row = 1;
  int group = 0;
  std::vector<Branch> branches;
};

namespace detail {

inline Branch make_branch(const Vec3& pos, double el, double az, double yaw, double semi,
                          double power) {
  Branch b;
  b.position = pos;
  b.orientation = {el, az};
  b.mount_yaw_deg = yaw;
  b.semi_angle_deg = semi;
  b.order_n = lambertian_order(semi);
  b.power_w = power;
  return b;
}

}  // namespace detail

/// Instantiates the reading-light units on the scene's ceiling mounts:
/// 3-branch units over the wall-side seat groups (semi-angle 14 degrees),
/// 4-branch units over the middle group (semi-angle 10 degrees). Mounts are
/// yawed so branch azimuth 0 points across the cabin (+y).
inline std::vector<TransmitterUnit> place_units(const Scene& scene, double power_w = 1.0,
                                                double side_semi_deg = 14.0,
                                                double middle_semi_deg = 10.0) {
  if (scene.config.seats_per_row != 10)
    throw std::invalid_argument("transmitter placement requires the 3-4-3 layout");
  constexpr double yaw = 90.0;  // paper azimuths are about the across-cabin axis
  std::vector<TransmitterUnit> units;
  units.reserve(scene.mounts.size());
  for (const UnitMount& m : scene.mounts) {
    TransmitterUnit u;
    u.kind = m.kind;
    u.row = m.row;
    u.group = m.group;
    if (m.kind == UnitKind::side3) {
      u.branches = {
          detail::make_branch(m.position, -55.0, 180.0, yaw, side_semi_deg, power_w),
          detail::make_branch(m.position, -90.0, 0.0, yaw, side_semi_deg, power_w),
          detail::make_branch(m.position, -55.0, 0.0, yaw, side_semi_deg, power_w),
      };
    } else {
      u.branches = {
          detail::make_branch(m.position, -65.0, 180.0, yaw, middle_semi_deg, power_w),
          detail::make_branch(m.position, -80.0, 180.0, yaw, middle_semi_deg, power_w),
          detail::make_branch(m.position, -80.0, 0.0, yaw, middle_semi_deg, power_w),
          detail::make_branch(m.position, -65.0, 0.0, yaw, middle_semi_deg, power_w),
      };
    }
    units.push_back(std::move(u));
  }
  return units;
}

enum class ReceiverKind : std::uint8_t { adr, imr };

inline const char* receiver_kind_name(ReceiverKind k) {
  return k == ReceiverKind::adr ? "adr" : "imr";
}

/// Seat-level receiver: either 4 tilted narrow-FOV detectors (ADR) or a
/// 25-pixel imaging receiver behind one lens (ImR). ImR pixels share the
/// receiver position and normal; arrival direction selects the pixel.
struct Receiver {
  ReceiverKind kind = ReceiverKind::adr;
  Vec3 position;
  Vec3 axis{0, 0, 1};  // receiver normal (ImR frame z)
  Vec3 frame_u{1, 0, 0};
  Vec3 frame_v{0, 1, 0};
  std::vector<Detector> detectors;
  double imr_fov_deg = kImrFovDeg;

  int branch_count() const { return static_cast<int>(detectors.size()); }
};

inline Receiver make_adr_receiver(const Vec3& position, double elevation_deg = 70.0,
                                  double fov_deg = 21.0, double area = 4e-6,
                                  double responsivity = 0.4) {
  Receiver r;
  r.kind = ReceiverKind::adr;
  r.position = position;
  r.detectors.reserve(4);
  for (double az : {45.0, 135.0, 225.0, 315.0}) {
    Detector d;
    d.position = position;
    d.axis = Orientation{elevation_deg, az}.direction();
    d.area = area;
    d.fov_deg = fov_deg;
    d.responsivity = responsivity;
    r.detectors.push_back(d);
  }
  return r;
}

inline Receiver make_imr_receiver(const Vec3& position, const Vec3& axis = {0, 0, 1},
                                  double area = 4e-6, double responsivity = 0.4) {
  Receiver r;
  r.kind = ReceiverKind::imr;
  r.position = position;
  r.axis = normalized(axis);
  if (std::abs(r.axis.z - 1.0) < 1e-12) {
    r.frame_u = {1, 0, 0};
    r.frame_v = {0, 1, 0};
  } else {
    orthonormal_basis(r.axis, r.frame_u, r.frame_v);
  }
  r.detectors.assign(kImrGridSize * kImrGridSize, Detector{});
  for (Detector& d : r.detectors) {
    d.position = position;
    d.axis = r.axis;
    d.area = area;
    d.fov_deg = kImrFovDeg;
    d.responsivity = responsivity;
  }
  return r;
}

}  // namespace cabinsim
