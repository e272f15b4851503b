#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cabinsim/analysis.hpp"
#include "cabinsim/channel.hpp"
#include "cabinsim/config.hpp"
#include "cabinsim/optics.hpp"
#include "cabinsim/parallel.hpp"
#include "cabinsim/report.hpp"
#include "cabinsim/scene.hpp"

namespace cabinsim {

inline constexpr double kTargetBer = 1e-9;

struct RunSpec {
  SimConfig config;
  RowSpan span{1, 4};
  std::vector<ReceiverKind> receivers{ReceiverKind::adr};
  std::vector<Combiner> combiners{Combiner::sc, Combiner::mrc};
  double bit_rate_hz = 1e9;
  bool find_max_rate = false;
  int max_order = 2;
  bool dump_ir = false;
  std::string out_dir;  // empty: in-memory only, no files written
  int threads = 0;      // 0: hardware concurrency
};

struct RunResult {
  std::vector<LinkReport> reports;  // ADR seats first, then ImR (as requested)
  std::string report_path;          // set when files were written
};

namespace detail {

/// Mutable per-(seat, receiver-kind) state carried through the branch sweep.
struct SeatSweepState {
  // Rolling serving candidate: per-detector bins of the best branch so far.
  int serving_flat = -1;
  double serving_metric = -1.0;
  std::vector<std::vector<double>> serving_bins;
  // Total received power per (flat branch, detector), for interference.
  std::vector<double> branch_det_power;
  // Serving-selection metric per flat branch.
  std::vector<double> branch_metric;
};

/// Sum of the first bit window starting at the first nonzero bin; the
/// serving-branch selection metric at a fixed rate.
inline double window_power(const std::vector<double>& bins, double dt, double bit_period) {
  std::size_t k0 = 0;
  while (k0 < bins.size() && bins[k0] <= 0.0) ++k0;
  if (k0 == bins.size()) return 0.0;
  auto m = static_cast<std::int64_t>(std::ceil(bit_period / dt));
  while (m > 1 && (static_cast<double>(m - 1) * dt) >= bit_period) --m;
  while (static_cast<double>(m) * dt < bit_period) ++m;
  const std::size_t end = std::min(bins.size(), k0 + static_cast<std::size_t>(m));
  double s = 0.0;
  for (std::size_t k = k0; k < end; ++k) s += bins[k];
  return s;
}

inline Receiver make_seat_receiver(ReceiverKind kind, const Seat& seat, const ReceiverConfig& rc) {
  const Vec3 pos = seat.surface_center + Vec3{rc.offset_x, rc.offset_y, rc.height_above_seat};
  return kind == ReceiverKind::adr ? make_adr_receiver(pos) : make_imr_receiver(pos);
}

}  // namespace detail

/// Full per-seat sweep: traces every reading-light branch to every seat
/// receiver, selects the serving branch per seat, and derives the link
/// metrics. Deterministic for any thread count.
inline RunResult simulate(const RunSpec& spec) {
  if (spec.receivers.empty()) throw std::invalid_argument("no receiver kind selected");
  if (spec.combiners.empty()) throw std::invalid_argument("no combiner selected");
  if (spec.bit_rate_hz <= 0.0) throw std::invalid_argument("bit rate must be positive");
  if (spec.max_order < 0 || spec.max_order > 2)
    throw std::invalid_argument("max_order must be 0, 1, or 2");

  const SimConfig& cfg = spec.config;
  const Scene scene = build_scene(cfg.cabin, spec.span);
  const std::vector<SurfaceElement> e1s =
      spec.max_order >= 1 ? subdivide(scene, cfg.subdivision, SubdivisionOrder::first)
                          : std::vector<SurfaceElement>{};
  const std::vector<SurfaceElement> e2s =
      spec.max_order >= 2 ? subdivide(scene, cfg.subdivision, SubdivisionOrder::second)
                          : std::vector<SurfaceElement>{};
  const std::vector<TransmitterUnit> units =
      place_units(scene, cfg.transmitter.power_w, cfg.transmitter.side_semi_angle_deg,
                  cfg.transmitter.middle_semi_angle_deg);
  const double dt = cfg.subdivision.time_bin;
  const double bit_period = 1.0 / spec.bit_rate_hz;
  const int threads = resolve_thread_count(spec.threads);

  struct FlatBranch {
    int unit;
    int branch;
    const Branch* b;
  };
  std::vector<FlatBranch> flat;
  for (std::size_t u = 0; u < units.size(); ++u)
    for (std::size_t b = 0; b < units[u].branches.size(); ++b)
      flat.push_back({static_cast<int>(u), static_cast<int>(b), &units[u].branches[b]});

  detail::PairUsability usable;
  if (spec.max_order >= 2) usable = detail::build_pair_usability(scene, e1s, e2s, threads);

  // Seat receivers share a position across kinds, so element views are
  // built once per seat.
  const std::size_t n_seats = scene.seats.size();
  std::vector<detail::ReceiverView> views(n_seats);
  for (std::size_t s = 0; s < n_seats; ++s) {
    const Vec3 pos = scene.seats[s].surface_center +
                     Vec3{cfg.receiver.offset_x, cfg.receiver.offset_y,
                          cfg.receiver.height_above_seat};
    views[s] = detail::build_receiver_view(pos, scene, e1s, e2s, spec.max_order, threads);
  }

  struct KindContext {
    ReceiverKind kind;
    std::vector<Receiver> receivers;                   // per seat
    std::vector<detail::ReceiverAcceptance> accepts;   // per seat
    std::vector<detail::SeatSweepState> states;        // per seat
  };
  std::vector<KindContext> kinds;
  for (ReceiverKind k : spec.receivers) {
    KindContext ctx;
    ctx.kind = k;
    ctx.receivers.reserve(n_seats);
    for (std::size_t s = 0; s < n_seats; ++s)
      ctx.receivers.push_back(detail::make_seat_receiver(k, scene.seats[s], cfg.receiver));
    for (const Receiver& r : ctx.receivers) ctx.accepts.emplace_back(r);
    ctx.states.resize(n_seats);
    const std::size_t dets = ctx.receivers.front().detectors.size();
    for (auto& st : ctx.states) {
      st.branch_det_power.assign(flat.size() * dets, 0.0);
      st.branch_metric.assign(flat.size(), 0.0);
    }
    kinds.push_back(std::move(ctx));
  }

  // Branch sweep: one cache per branch, applied to every seat and kind.
  for (std::size_t fb = 0; fb < flat.size(); ++fb) {
    const detail::BranchCache cache = detail::build_branch_cache(
        *flat[fb].b, scene, e1s, e2s, spec.max_order >= 2 ? &usable : nullptr, dt,
        spec.max_order, threads);
    parallel_blocks(n_seats, threads, [&](std::size_t sb, std::size_t se) {
      for (std::size_t s = sb; s < se; ++s) {
        for (KindContext& ctx : kinds) {
          const Receiver& rx = ctx.receivers[s];
          const std::size_t dets = rx.detectors.size();
          std::vector<std::vector<double>> det_bins(dets);
          detail::accumulate_branch(*flat[fb].b, cache, rx, ctx.accepts[s], views[s], scene, e1s,
                                    e2s, dt, spec.max_order, det_bins);
          detail::SeatSweepState& st = ctx.states[s];
          double metric = 0.0;
          for (std::size_t d = 0; d < dets; ++d) {
            double total = 0.0;
            for (double p : det_bins[d]) total += p;
            st.branch_det_power[fb * dets + d] = total;
            metric += spec.find_max_rate ? total : detail::window_power(det_bins[d], dt, bit_period);
          }
          st.branch_metric[fb] = metric;
          if (metric > st.serving_metric) {
            st.serving_metric = metric;
            st.serving_flat = static_cast<int>(fb);
            st.serving_bins = std::move(det_bins);
          }
        }
      }
    });
  }

  // Per-seat metrics from the serving branch plus interference scalars.
  RunResult result;
  result.reports.resize(kinds.size() * n_seats);
  std::vector<std::vector<ImpulseResponse>> dump_irs;  // per (kind, seat) when requested
  if (spec.dump_ir) dump_irs.resize(kinds.size() * n_seats);
  for (std::size_t kc = 0; kc < kinds.size(); ++kc) {
    KindContext& ctx = kinds[kc];
    parallel_blocks(n_seats, threads, [&](std::size_t sb, std::size_t se) {
      for (std::size_t s = sb; s < se; ++s) {
        detail::SeatSweepState& st = ctx.states[s];
        const std::size_t dets = ctx.receivers[s].detectors.size();
        const double responsivity = ctx.receivers[s].detectors.front().responsivity;
        LinkReport rep;
        rep.seat_id = scene.seats[s].id;
        rep.receiver = ctx.kind;
        rep.branch_sinr.assign(dets, 0.0);

        if (st.serving_flat >= 0 && st.serving_metric > 0.0) {
          const std::size_t fb = static_cast<std::size_t>(st.serving_flat);
          rep.serving_unit = flat[fb].unit;
          rep.serving_branch = flat[fb].branch;

          std::vector<ImpulseResponse> serving(dets);
          for (std::size_t d = 0; d < dets; ++d) {
            serving[d].bin_width = dt;
            serving[d].unit = flat[fb].unit;
            serving[d].branch = flat[fb].branch;
            serving[d].detector = static_cast<int>(d);
            serving[d].bins = std::move(st.serving_bins[d]);
            detail::trim_trailing_zeros(serving[d].bins);
          }

          // Interference per detector: every branch except the serving one.
          std::vector<std::vector<double>> interferers(dets);
          for (std::size_t d = 0; d < dets; ++d) {
            interferers[d].reserve(flat.size() - 1);
            for (std::size_t ob = 0; ob < flat.size(); ++ob) {
              if (ob == fb) continue;
              interferers[d].push_back(st.branch_det_power[ob * dets + d]);
            }
          }

          for (std::size_t d = 0; d < dets; ++d) {
            if (serving[d].bins.empty()) continue;
            rep.branch_sinr[d] = sinr_at_rate(serving[d], interferers[d], cfg.noise, responsivity,
                                              spec.bit_rate_hz);
          }
          rep.sinr_sc = combine_sc(rep.branch_sinr);
          rep.sinr_mrc = combine_mrc(rep.branch_sinr);
          rep.ber_sc = ber(rep.sinr_sc);
          rep.ber_mrc = ber(rep.sinr_mrc);

          // Delay spread of the strongest serving element (selection view).
          std::size_t best = 0;
          double best_power = -1.0;
          for (std::size_t d = 0; d < dets; ++d) {
            const double p = total_power(serving[d]);
            if (p > best_power) {
              best_power = p;
              best = d;
            }
          }
          rep.delay_spread_s =
              best_power > 0.0
                  ? delay_spread(serving[best], cfg.analysis.delay_spread_weighting)
                  : 0.0;

          if (spec.find_max_rate) {
            const auto combined_feasible = [&](Combiner comb) {
              return [&, comb](double rate) {
                std::vector<double> per_det(dets, 0.0);
                for (std::size_t d = 0; d < dets; ++d) {
                  if (serving[d].bins.empty()) continue;
                  per_det[d] =
                      sinr_at_rate(serving[d], interferers[d], cfg.noise, responsivity, rate);
                }
                const double s_comb =
                    comb == Combiner::sc ? combine_sc(per_det) : combine_mrc(per_det);
                return ber(s_comb) <= kTargetBer;
              };
            };
            rep.max_rate_sc_bps = search_max_rate(combined_feasible(Combiner::sc));
            rep.max_rate_mrc_bps = search_max_rate(combined_feasible(Combiner::mrc));
          } else {
            rep.max_rate_sc_bps = spec.bit_rate_hz;
            rep.max_rate_mrc_bps = spec.bit_rate_hz;
          }

          if (spec.dump_ir) dump_irs[kc * n_seats + s] = std::move(serving);
        }
        result.reports[kc * n_seats + s] = std::move(rep);
      }
    });
  }

  if (!spec.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    const auto open = [](const fs::path& p) {
      std::ofstream os(p, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + p.string());
      return os;
    };
    {
      auto os = open(fs::path(spec.out_dir) / "link_report.csv");
      write_link_report_csv(os, result.reports, spec.combiners);
      result.report_path = (fs::path(spec.out_dir) / "link_report.csv").string();
    }
    {
      auto os = open(fs::path(spec.out_dir) / "run_meta.toml");
      write_resolved_config(os, cfg);
      os << "\n[run]\n";
      os << "rows_first = " << spec.span.first << "\n";
      os << "rows_last = " << spec.span.last << "\n";
      os << "receivers = [";
      for (std::size_t i = 0; i < spec.receivers.size(); ++i)
        os << (i ? ", " : "") << '"' << receiver_kind_name(spec.receivers[i]) << '"';
      os << "]\n";
      os << "combiners = [";
      for (std::size_t i = 0; i < spec.combiners.size(); ++i)
        os << (i ? ", " : "") << '"' << combiner_name(spec.combiners[i]) << '"';
      os << "]\n";
      os << "bit_rate_hz = " << detail::format_number(spec.bit_rate_hz) << "\n";
      os << "find_max_rate = " << (spec.find_max_rate ? "true" : "false") << "\n";
      os << "max_order = " << spec.max_order << "\n";
    }
    if (spec.dump_ir) {
      for (std::size_t kc = 0; kc < kinds.size(); ++kc) {
        for (std::size_t s = 0; s < n_seats; ++s) {
          const auto& irs = dump_irs[kc * n_seats + s];
          if (irs.empty()) continue;
          char name[64];
          std::snprintf(name, sizeof(name), "ir_%s_seat%04d.csv",
                        receiver_kind_name(kinds[kc].kind), scene.seats[s].id);
          auto os = open(fs::path(spec.out_dir) / name);
          write_impulse_response_csv(os, irs);
        }
      }
    }
  }
  return result;
}

}  // namespace cabinsim
