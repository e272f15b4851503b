#pragma once

// Brute-force reference implementations used only by tests. Everything here
// is written independently of the library headers: plain double[3] math,
// literal nested loops, no shared transport arithmetic. Deliberately slow.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

inline constexpr double kC = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

struct V3 {
  double v[3];
  double operator[](int i) const { return v[i]; }
};

inline V3 sub(const V3& a, const V3& b) { return {{a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2]}}; }
inline double dp(const V3& a, const V3& b) {
  return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2];
}
inline double len(const V3& a) { return std::sqrt(dp(a, a)); }

/// One rectangular reflecting patch, tiled nu x nv.
struct Patch {
  V3 origin;
  V3 edge_u;
  V3 edge_v;
  V3 normal;  // unit, towards the room
  double rho = 0.5;
  int nu = 1;
  int nv = 1;
};

struct Emitter {
  V3 pos;
  V3 axis;  // unit
  double order = 1.0;
  double power = 1.0;
};

struct DetectorSpec {
  V3 pos;
  V3 axis;  // unit
  double area = 4e-6;
  double fov_deg = 90.0;
};

/// Tiny scene: a handful of coarse patches, one emitter, one detector.
struct OracleScene {
  std::vector<Patch> patches;
  Emitter emitter;
  DetectorSpec detector;
  double time_bin = 5e-11;
};

struct Element {
  V3 center;
  V3 normal;
  double area;
  double rho;
};

inline std::vector<Element> tile(const std::vector<Patch>& patches) {
  std::vector<Element> out;
  for (const Patch& p : patches) {
    const double lu = len(p.edge_u), lv = len(p.edge_v);
    const double du = (lu / p.nu) * (lv / p.nv);
    for (int i = 0; i < p.nu; ++i) {
      for (int j = 0; j < p.nv; ++j) {
        Element e;
        const double fu = (i + 0.5) / p.nu, fv = (j + 0.5) / p.nv;
        for (int k = 0; k < 3; ++k)
          e.center.v[k] = p.origin.v[k] + p.edge_u.v[k] * fu + p.edge_v.v[k] * fv;
        e.normal = p.normal;
        e.area = du;
        e.rho = p.rho;
        out.push_back(e);
      }
    }
  }
  return out;
}

inline void add_bin(std::vector<double>& bins, long k, double p) {
  if (k < 0) return;
  if (static_cast<std::size_t>(k) >= bins.size()) bins.resize(static_cast<std::size_t>(k) + 1, 0.0);
  bins[static_cast<std::size_t>(k)] += p;
}

/// Exhaustive path summation. Binning contract mirrors the tracer's
/// documented one: per-hop delays are d/c terms summed left to right; LOS
/// and first-order paths bin at floor(t / dt); second-order paths quantise
/// the first two hops at the second-bounce element (floor) and re-emit from
/// the bin centre, i.e. bin = floor(t12/dt) + floor(t3/dt + 1/2).
inline std::vector<double> oracle_trace(const OracleScene& sc, int max_order) {
  std::vector<double> bins;
  const double dt = sc.time_bin;
  const Emitter& em = sc.emitter;
  const DetectorSpec& det = sc.detector;
  const double cos_fov = std::cos(det.fov_deg * (kPi / 180.0));
  const std::vector<Element> elems = tile(sc.patches);

  // Emitted intensity towards a target point, W/sr. Zero behind the source.
  const auto emit_intensity = [&](const V3& to, double dist) {
    const double c = dp(em.axis, to) / dist;
    if (c <= 0.0) return 0.0;
    return em.power * (em.order + 1.0) / (2.0 * kPi) * std::pow(c, em.order);
  };
  // Detector capture factor for a ray arriving from `from`: area cos(theta),
  // zero outside the FOV.
  const auto capture = [&](const V3& from, double dist) {
    V3 d = sub(from, det.pos);
    const double c = dp(det.axis, d) / dist;
    if (c <= 0.0 || c < cos_fov) return 0.0;
    return det.area * c;
  };

  {  // LOS
    const V3 v = sub(det.pos, em.pos);
    const double d = len(v);
    if (d * d >= 1e-12) {
      const double p = emit_intensity(v, d) * capture(em.pos, d) / (d * d);
      if (p > 0.0) add_bin(bins, static_cast<long>(std::floor(d / kC / dt)), p);
    }
  }
  if (max_order < 1) return bins;

  // First order: emitter -> element -> detector.
  std::vector<double> incident(elems.size(), 0.0);
  std::vector<double> t_in(elems.size(), 0.0);
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const Element& e = elems[i];
    const V3 v = sub(e.center, em.pos);
    const double d = len(v);
    if (d * d < 1e-12) continue;
    const double cin = -dp(e.normal, v) / d;
    if (cin <= 0.0) continue;
    const double inten = emit_intensity(v, d);
    if (inten <= 0.0) continue;
    incident[i] = inten * e.area * cin / (d * d);
    t_in[i] = d / kC;
    const V3 w = sub(det.pos, e.center);
    const double d2 = len(w);
    if (d2 * d2 < 1e-12) continue;
    const double cem = dp(e.normal, w) / d2;
    if (cem <= 0.0) continue;
    const double cap = capture(e.center, d2);
    if (cap <= 0.0) continue;
    const double p = e.rho * incident[i] * (1.0 / kPi) * cem * cap / (d2 * d2);
    add_bin(bins, static_cast<long>(std::floor((t_in[i] + d2 / kC) / dt)), p);
  }
  if (max_order < 2) return bins;

  // Second order: emitter -> e1 -> e2 -> detector.
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (incident[i] <= 0.0) continue;
    const Element& a = elems[i];
    for (std::size_t j = 0; j < elems.size(); ++j) {
      const Element& b = elems[j];
      const V3 v = sub(b.center, a.center);
      const double d12 = len(v);
      if (d12 * d12 < 1e-12) continue;
      const double cem1 = dp(a.normal, v) / d12;
      if (cem1 <= 0.0) continue;
      const double cin2 = -dp(b.normal, v) / d12;
      if (cin2 <= 0.0) continue;
      const V3 w = sub(det.pos, b.center);
      const double d3 = len(w);
      if (d3 * d3 < 1e-12) continue;
      const double cem2 = dp(b.normal, w) / d3;
      if (cem2 <= 0.0) continue;
      const double cap = capture(b.center, d3);
      if (cap <= 0.0) continue;
      const double at_e2 = a.rho * incident[i] * (1.0 / kPi) * cem1 * cin2 * b.area / (d12 * d12);
      const double p = b.rho * at_e2 * (1.0 / kPi) * cem2 * cap / (d3 * d3);
      const long b12 = static_cast<long>(std::floor((t_in[i] + d12 / kC) / dt));
      const long shift = static_cast<long>(std::floor(d3 / kC / dt + 0.5));
      add_bin(bins, b12 + shift, p);
    }
  }
  return bins;
}

/// Direct two-pass RMS spread of a (time, power) tap list.
inline double oracle_delay_spread(const std::vector<std::pair<double, double>>& taps,
                                  bool power_squared) {
  double wsum = 0.0, tsum = 0.0;
  for (const auto& [t, p] : taps) {
    const double w = power_squared ? p * p : p;
    wsum += w;
    tsum += t * w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("oracle delay spread of zero power");
  const double mean = tsum / wsum;
  double acc = 0.0;
  for (const auto& [t, p] : taps) {
    const double w = power_squared ? p * p : p;
    acc += (t - mean) * (t - mean) * w;
  }
  return std::sqrt(acc / wsum);
}

}  // namespace oracle
