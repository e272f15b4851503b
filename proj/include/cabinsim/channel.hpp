#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cabinsim/geometry.hpp"
#include "cabinsim/optics.hpp"
#include "cabinsim/parallel.hpp"
#include "cabinsim/scene.hpp"

namespace cabinsim {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Time-binned received power for one (unit, branch, detector) link.
/// Bin k covers [start_time + k*bin_width, start_time + (k+1)*bin_width).
struct ImpulseResponse {
  double bin_width = 5e-11;
  double start_time = 0.0;
  std::vector<double> bins;
  int unit = -1;
  int branch = -1;
  int detector = -1;

  void add_bin(std::int64_t bin, double power) {
    if (bin < 0) throw std::logic_error("negative time bin");
    if (static_cast<std::size_t>(bin) >= bins.size()) bins.resize(static_cast<std::size_t>(bin) + 1, 0.0);
    bins[static_cast<std::size_t>(bin)] += power;
  }

  void add(double time, double power) {
    add_bin(static_cast<std::int64_t>(std::floor((time - start_time) / bin_width)), power);
  }

  double bin_time(std::size_t k) const { return start_time + static_cast<double>(k) * bin_width; }
};

inline double total_power(const ImpulseResponse& ir) {
  double s = 0.0;
  for (double p : ir.bins) s += p;
  return s;
}

struct TraceRequest {
  const Scene* scene = nullptr;
  const std::vector<SurfaceElement>* first_order = nullptr;
  const std::vector<SurfaceElement>* second_order = nullptr;
  const std::vector<TransmitterUnit>* units = nullptr;
  const Receiver* receiver = nullptr;
  int max_order = 2;  // 0 = LOS only, 1 = +first bounce, 2 = +second bounce
  double time_bin = 5e-11;
  int threads = 1;
};

namespace detail {

inline constexpr double kInvPi = 1.0 / std::numbers::pi;
inline constexpr double kMinDistanceSq = 1e-12;

/// Bit matrix of usable first-to-second-bounce element pairs: facing
/// cosines positive and the connecting segment unobstructed. Independent of
/// the transmitter and receiver, so built once per scene.
struct PairUsability {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t words = 0;
  std::vector<std::uint64_t> bits;

  const std::uint64_t* row(std::size_t i2) const { return bits.data() + i2 * words; }
  bool usable(std::size_t i2, std::size_t i1) const {
    return (row(i2)[i1 >> 6] >> (i1 & 63)) & 1u;
  }
};

inline PairUsability build_pair_usability(const Scene& scene,
                                          const std::vector<SurfaceElement>& e1s,
                                          const std::vector<SurfaceElement>& e2s, int threads) {
  PairUsability u;
  u.n1 = e1s.size();
  u.n2 = e2s.size();
  u.words = (u.n1 + 63) / 64;
  u.bits.assign(u.words * u.n2, 0);
  parallel_blocks(u.n2, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i2 = b; i2 < e; ++i2) {
      const SurfaceElement& t = e2s[i2];
      std::uint64_t* row = u.bits.data() + i2 * u.words;
      for (std::size_t i1 = 0; i1 < u.n1; ++i1) {
        const SurfaceElement& s = e1s[i1];
        const Vec3 v = t.center - s.center;
        if (norm2(v) < kMinDistanceSq) continue;
        if (dot(s.normal, v) <= 0.0) continue;
        if (dot(t.normal, v) >= 0.0) continue;
        if (scene.occluders.blocked(s.center, t.center)) continue;
        row[i1 >> 6] |= std::uint64_t{1} << (i1 & 63);
      }
    }
  });
  return u;
}

/// Power arriving at a second-bounce element, binned on the global time
/// grid. start_bin is the straight-line lower bound, so bins never grow at
/// the front.
struct ElementHistogram {
  std::int64_t start_bin = 0;
  std::vector<double> power;
};

/// Per-branch precomputation, reusable across every receiver position:
/// first-bounce incident power/delay per fine element, and the arrival
/// histogram per coarse element (first two hops of second-order paths).
struct BranchCache {
  std::vector<double> incident_power;
  std::vector<double> arrival_time;
  std::vector<ElementHistogram> second_bounce;
};

inline BranchCache build_branch_cache(const Branch& br, const Scene& scene,
                                      const std::vector<SurfaceElement>& e1s,
                                      const std::vector<SurfaceElement>& e2s,
                                      const PairUsability* usable, double dt, int max_order,
                                      int threads) {
  BranchCache c;
  if (max_order < 1) return c;
  const Vec3 axis = br.world_axis();
  const double emit_scale = br.power_w * (br.order_n + 1.0) / (2.0 * std::numbers::pi);

  c.incident_power.assign(e1s.size(), 0.0);
  c.arrival_time.assign(e1s.size(), 0.0);
  parallel_blocks(e1s.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i1 = b; i1 < e; ++i1) {
      const SurfaceElement& s = e1s[i1];
      const Vec3 v = s.center - br.position;
      const double d2 = norm2(v);
      if (d2 < kMinDistanceSq) continue;
      const double d = std::sqrt(d2);
      const double cos_phi = dot(axis, v) / d;
      if (cos_phi <= 0.0) continue;
      const double cos_inc = -dot(s.normal, v) / d;
      if (cos_inc <= 0.0) continue;
      if (scene.occluders.blocked(br.position, s.center)) continue;
      c.incident_power[i1] = emit_scale * std::pow(cos_phi, br.order_n) * s.area * cos_inc / d2;
      c.arrival_time[i1] = d / kSpeedOfLight;
    }
  });

  if (max_order < 2) return c;
  if (!usable) throw std::invalid_argument("second-order trace requires pair usability");
  c.second_bounce.resize(e2s.size());
  parallel_blocks(e2s.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i2 = b; i2 < e; ++i2) {
      const SurfaceElement& t = e2s[i2];
      ElementHistogram& h = c.second_bounce[i2];
      h.start_bin = static_cast<std::int64_t>(
          std::floor(norm(t.center - br.position) / kSpeedOfLight / dt));
      const std::uint64_t* row = usable->row(i2);
      for (std::size_t w = 0; w < usable->words; ++w) {
        std::uint64_t word = row[w];
        while (word) {
          const std::size_t i1 = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
          word &= word - 1;
          const double p1 = c.incident_power[i1];
          if (p1 <= 0.0) continue;
          const SurfaceElement& s = e1s[i1];
          const Vec3 v = t.center - s.center;
          const double d2 = norm2(v);
          const double d = std::sqrt(d2);
          const double cos_emit = dot(s.normal, v) / d;
          const double cos_inc = -dot(t.normal, v) / d;
          const double p = s.reflectivity * p1 * kInvPi * cos_emit * cos_inc * t.area / d2;
          const double t12 = c.arrival_time[i1] + d / kSpeedOfLight;
          const auto bin = static_cast<std::int64_t>(std::floor(t12 / dt)) - h.start_bin;
          if (bin < 0) continue;  // numeric guard; the bound makes this unreachable
          if (static_cast<std::size_t>(bin) >= h.power.size())
            h.power.resize(static_cast<std::size_t>(bin) + 1, 0.0);
          h.power[static_cast<std::size_t>(bin)] += p;
        }
      }
    }
  });
  return c;
}

/// Receiver-side element geometry, shared by all detectors of a seat
/// receiver (they are co-located): unit direction receiver->element,
/// distance, and seat-occlusion visibility.
struct ElementView {
  std::vector<Vec3> dir;
  std::vector<double> dist;
  std::vector<std::uint8_t> vis;
};

inline ElementView build_element_view(const Vec3& rx, const Scene& scene,
                                      const std::vector<SurfaceElement>& elems, int threads) {
  ElementView g;
  const std::size_t n = elems.size();
  g.dir.resize(n);
  g.dist.resize(n);
  g.vis.assign(n, 0);
  parallel_blocks(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec3 v = elems[i].center - rx;
      const double d2 = norm2(v);
      if (d2 < kMinDistanceSq) continue;
      const double d = std::sqrt(d2);
      g.dir[i] = v / d;
      g.dist[i] = d;
      g.vis[i] = scene.occluders.blocked(rx, elems[i].center) ? 0 : 1;
    }
  });
  return g;
}

struct ReceiverView {
  ElementView first;
  ElementView second;
};

inline ReceiverView build_receiver_view(const Vec3& rx, const Scene& scene,
                                        const std::vector<SurfaceElement>& e1s,
                                        const std::vector<SurfaceElement>& e2s, int max_order,
                                        int threads) {
  ReceiverView v;
  if (max_order >= 1) v.first = build_element_view(rx, scene, e1s, threads);
  if (max_order >= 2) v.second = build_element_view(rx, scene, e2s, threads);
  return v;
}

/// Detector acceptance of one arrival direction (unit vector receiver ->
/// source): detector index and the area*cos(theta)*lens weight, for every
/// detector whose FOV admits the ray. ADR rays may hit several detectors;
/// ImR rays map to at most one pixel.
class ReceiverAcceptance {
 public:
  explicit ReceiverAcceptance(const Receiver& rx) : rx_(&rx) {
    cos_fov_.reserve(rx.detectors.size());
    for (const Detector& d : rx.detectors) cos_fov_.push_back(std::cos(d.fov_deg * kDegree));
    imr_cos_fov_ = std::cos(rx.imr_fov_deg * kDegree);
  }

  using Hit = std::pair<int, double>;

  /// Appends (detector, weight) hits; returns the number appended.
  int collect(const Vec3& arrival, Hit* out) const {
    const Receiver& rx = *rx_;
    if (rx.kind == ReceiverKind::adr) {
      int n = 0;
      for (std::size_t j = 0; j < rx.detectors.size(); ++j) {
        const Detector& d = rx.detectors[j];
        const double ct = dot(d.axis, arrival);
        if (ct <= 0.0 || ct < cos_fov_[j]) continue;
        out[n++] = {static_cast<int>(j), d.area * ct};
      }
      return n;
    }
    const double cy = dot(rx.axis, arrival);
    if (cy <= 0.0 || cy < imr_cos_fov_) return 0;
    const Vec3 local{dot(arrival, rx.frame_u), dot(arrival, rx.frame_v), cy};
    const auto px = pixel_for_direction(local, rx.imr_fov_deg);
    if (!px) return 0;
    const double y = std::acos(std::min(cy, 1.0));
    const double tc = lens_transmission(y, rx.imr_fov_deg);
    if (tc <= 0.0) return 0;
    out[0] = {*px, rx.detectors[static_cast<std::size_t>(*px)].area * cy * tc};
    return 1;
  }

 private:
  const Receiver* rx_;
  std::vector<double> cos_fov_;
  double imr_cos_fov_ = 0.0;
};

/// Adds one branch's LOS, first-, and second-order contributions to the
/// per-detector bin vectors (dense, global grid from t = 0).
inline void accumulate_branch(const Branch& br, const BranchCache& cache, const Receiver& rx,
                              const ReceiverAcceptance& accept, const ReceiverView& view,
                              const Scene& scene, const std::vector<SurfaceElement>& e1s,
                              const std::vector<SurfaceElement>& e2s, double dt, int max_order,
                              std::vector<std::vector<double>>& det_bins) {
  std::array<ReceiverAcceptance::Hit, 32> hits;
  const auto add = [&](int det, std::int64_t bin, double p) {
    auto& bins = det_bins[static_cast<std::size_t>(det)];
    if (static_cast<std::size_t>(bin) >= bins.size())
      bins.resize(static_cast<std::size_t>(bin) + 1, 0.0);
    bins[static_cast<std::size_t>(bin)] += p;
  };

  // Line of sight.
  {
    const Vec3 v = rx.position - br.position;
    const double d2 = norm2(v);
    if (d2 >= kMinDistanceSq) {
      const double d = std::sqrt(d2);
      const Vec3 u = v / d;
      const double cos_phi = dot(br.world_axis(), u);
      if (cos_phi > 0.0 && !scene.occluders.blocked(br.position, rx.position)) {
        const double intensity = br.power_w * (br.order_n + 1.0) /
                                 (2.0 * std::numbers::pi) * std::pow(cos_phi, br.order_n);
        const int n = accept.collect(-u, hits.data());
        const auto bin = static_cast<std::int64_t>(std::floor(d / kSpeedOfLight / dt));
        for (int k = 0; k < n; ++k) add(hits[k].first, bin, intensity * hits[k].second / d2);
      }
    }
  }

  if (max_order < 1 || cache.incident_power.empty()) return;

  // First bounce: branch -> fine element -> detector.
  for (std::size_t i1 = 0; i1 < e1s.size(); ++i1) {
    const double p1 = cache.incident_power[i1];
    if (p1 <= 0.0 || !view.first.vis[i1]) continue;
    const Vec3 a = view.first.dir[i1];  // receiver -> element = arrival direction
    const SurfaceElement& s = e1s[i1];
    const double cos_emit = -dot(s.normal, a);  // element emits towards the receiver
    if (cos_emit <= 0.0) continue;
    const int n = accept.collect(a, hits.data());
    if (n == 0) continue;
    const double d = view.first.dist[i1];
    const double base = s.reflectivity * p1 * kInvPi * cos_emit / (d * d);
    const double t = cache.arrival_time[i1] + d / kSpeedOfLight;
    const auto bin = static_cast<std::int64_t>(std::floor(t / dt));
    for (int k = 0; k < n; ++k) add(hits[k].first, bin, base * hits[k].second);
  }

  if (max_order < 2 || cache.second_bounce.empty()) return;

  // Second bounce: replay each coarse element's arrival histogram through
  // the final hop. Arrivals re-emit from the centre of their time bin.
  for (std::size_t i2 = 0; i2 < e2s.size(); ++i2) {
    const ElementHistogram& h = cache.second_bounce[i2];
    if (h.power.empty() || !view.second.vis[i2]) continue;
    const Vec3 a = view.second.dir[i2];
    const SurfaceElement& t = e2s[i2];
    const double cos_emit = -dot(t.normal, a);
    if (cos_emit <= 0.0) continue;
    const int n = accept.collect(a, hits.data());
    if (n == 0) continue;
    const double d = view.second.dist[i2];
    const double base = t.reflectivity * kInvPi * cos_emit / (d * d);
    const auto shift = static_cast<std::int64_t>(std::floor(d / kSpeedOfLight / dt + 0.5));
    const std::int64_t out0 = h.start_bin + shift;
    for (int k = 0; k < n; ++k) {
      auto& bins = det_bins[static_cast<std::size_t>(hits[k].first)];
      const std::size_t need = static_cast<std::size_t>(out0) + h.power.size();
      if (bins.size() < need) bins.resize(need, 0.0);
      const double f = base * hits[k].second;
      double* out = bins.data() + out0;
      const double* in = h.power.data();
      for (std::size_t m = 0; m < h.power.size(); ++m) out[m] += in[m] * f;
    }
  }
}

inline void trim_trailing_zeros(std::vector<double>& bins) {
  std::size_t n = bins.size();
  while (n > 0 && bins[n - 1] == 0.0) --n;
  bins.resize(n);
}

}  // namespace detail

/// Deterministic ray trace of every (branch, detector) pair: LOS plus up to
/// two Lambertian bounces (fine grid for the first, coarse for the second).
/// Same request, same result, for any thread count.
inline std::vector<ImpulseResponse> trace(const TraceRequest& req) {
  if (!req.scene || !req.units || !req.receiver)
    throw std::invalid_argument("trace request missing scene, units, or receiver");
  if (req.max_order < 0 || req.max_order > 2)
    throw std::invalid_argument("max_order must be 0, 1, or 2");
  if (req.time_bin <= 0.0) throw std::invalid_argument("time bin must be positive");
  static const std::vector<SurfaceElement> kNone;
  const auto& e1s = req.first_order ? *req.first_order : kNone;
  const auto& e2s = req.second_order ? *req.second_order : kNone;
  if (req.max_order >= 1 && e1s.empty())
    throw std::invalid_argument("first-order trace requires first-order elements");
  if (req.max_order >= 2 && e2s.empty())
    throw std::invalid_argument("second-order trace requires second-order elements");

  detail::PairUsability usable;
  if (req.max_order >= 2)
    usable = detail::build_pair_usability(*req.scene, e1s, e2s, req.threads);
  const detail::ReceiverView view = detail::build_receiver_view(
      req.receiver->position, *req.scene, e1s, e2s, req.max_order, req.threads);
  const detail::ReceiverAcceptance accept(*req.receiver);

  const int dets = req.receiver->branch_count();
  std::vector<ImpulseResponse> out;
  std::vector<std::vector<double>> det_bins;
  for (std::size_t ui = 0; ui < req.units->size(); ++ui) {
    const TransmitterUnit& unit = (*req.units)[ui];
    for (std::size_t bi = 0; bi < unit.branches.size(); ++bi) {
      const detail::BranchCache cache =
          detail::build_branch_cache(unit.branches[bi], *req.scene, e1s, e2s,
                                     req.max_order >= 2 ? &usable : nullptr, req.time_bin,
                                     req.max_order, req.threads);
      det_bins.assign(static_cast<std::size_t>(dets), {});
      detail::accumulate_branch(unit.branches[bi], cache, *req.receiver, accept, view, *req.scene,
                                e1s, e2s, req.time_bin, req.max_order, det_bins);
      for (int dj = 0; dj < dets; ++dj) {
        ImpulseResponse ir;
        ir.bin_width = req.time_bin;
        ir.unit = static_cast<int>(ui);
        ir.branch = static_cast<int>(bi);
        ir.detector = dj;
        ir.bins = std::move(det_bins[static_cast<std::size_t>(dj)]);
        detail::trim_trailing_zeros(ir.bins);
        out.push_back(std::move(ir));
      }
    }
  }
  return out;
}

}  // namespace cabinsim
