#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cabinsim/channel.hpp"
#include "cabinsim/optics.hpp"

namespace cabinsim {

inline constexpr double kElectronCharge = 1.602176634e-19;

enum class DelaySpreadWeighting { power_squared, power };

/// RMS delay spread of a time-binned response. Default weighting squares
/// the bin powers; the linear variant is selectable.
inline double delay_spread(const ImpulseResponse& ir,
                           DelaySpreadWeighting weighting = DelaySpreadWeighting::power_squared) {
  double wsum = 0.0, mean_num = 0.0;
  for (std::size_t k = 0; k < ir.bins.size(); ++k) {
    const double p = ir.bins[k];
    if (p <= 0.0) continue;
    const double w = weighting == DelaySpreadWeighting::power_squared ? p * p : p;
    wsum += w;
    mean_num += ir.bin_time(k) * w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("delay spread of a zero-power response");
  const double mean = mean_num / wsum;
  double var_num = 0.0;
  for (std::size_t k = 0; k < ir.bins.size(); ++k) {
    const double p = ir.bins[k];
    if (p <= 0.0) continue;
    const double w = weighting == DelaySpreadWeighting::power_squared ? p * p : p;
    const double dtk = ir.bin_time(k) - mean;
    var_num += dtk * dtk * w;
  }
  return std::sqrt(var_num / wsum);
}

struct OokPartition {
  double ps1 = 0.0;  // power inside the first bit window
  double ps0 = 0.0;  // ISI floor beyond it
};

/// Splits a response at one bit period past the first arrival. The window
/// is [t0, t0 + 1/bit_rate); a bin starting exactly on the boundary counts
/// as ISI. ps0 is defined as total - ps1 so the two always sum back to
/// total_power.
inline OokPartition ook_partition(const ImpulseResponse& ir, double bit_rate) {
  if (bit_rate <= 0.0) throw std::invalid_argument("bit rate must be positive");
  const double dt = ir.bin_width;
  const double bit_period = 1.0 / bit_rate;
  std::size_t k0 = 0;
  while (k0 < ir.bins.size() && ir.bins[k0] <= 0.0) ++k0;
  if (k0 == ir.bins.size()) throw std::invalid_argument("partition of a zero-power response");

  // Smallest m with m*dt >= bit period: window bins are k0 .. k0+m-1.
  auto m = static_cast<std::int64_t>(std::ceil(bit_period / dt));
  while (m > 1 && (static_cast<double>(m - 1) * dt) >= bit_period) --m;
  while (static_cast<double>(m) * dt < bit_period) ++m;

  const std::size_t window_end = std::min(ir.bins.size(), k0 + static_cast<std::size_t>(m));
  OokPartition p;
  for (std::size_t k = k0; k < window_end; ++k) p.ps1 += ir.bins[k];

  // ps0 is the ISI complement. The pair is nudged within one ulp so that
  // ps1 + ps0 reproduces the total bit-for-bit: the plain subtraction can
  // land one ulp off when it rounds on a tie, and if the tie persists while
  // stepping ps0 (same-binade lattice), moving ps1 one ulp breaks it.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double total = total_power(ir);
  double a = p.ps1;
  double b = std::max(0.0, total - a);
  const auto settle = [&] {
    for (int i = 0; i < 8; ++i) {
      const double s = a + b;
      if (s == total) return true;
      const double nb = std::nextafter(b, s > total ? -inf : inf);
      if (nb < 0.0 || nb == b) break;
      b = nb;
    }
    return a + b == total;
  };
  if (!settle()) {
    a = std::nextafter(a, 0.0);
    b = std::max(0.0, total - a);
    settle();
  }
  p.ps1 = a;
  p.ps0 = b;
  return p;
}

struct NoiseBreakdown {
  double sigma_preamp = 0.0;      // A
  double sigma_background = 0.0;  // A
  double sigma_signal = 0.0;      // A
  double sigma_total = 0.0;       // A
  double bandwidth = 0.0;         // Hz
  double background_current = 0.0;  // A
};

/// Receiver noise at bandwidth B: signal shot noise from the logic-1 power,
/// background shot noise from the ambient photocurrent, and white
/// preamplifier noise. Total combines in quadrature.
inline NoiseBreakdown noise_sigma(double ps1_w, double background_current_a, double bandwidth_hz,
                                  double responsivity, double preamp_density_a_sqrthz) {
  if (bandwidth_hz <= 0.0) throw std::invalid_argument("bandwidth must be positive");
  if (ps1_w < 0.0 || background_current_a < 0.0 || responsivity < 0.0 ||
      preamp_density_a_sqrthz < 0.0)
    throw std::invalid_argument("noise inputs must be non-negative");
  NoiseBreakdown n;
  n.bandwidth = bandwidth_hz;
  n.background_current = background_current_a;
  n.sigma_signal = std::sqrt(2.0 * kElectronCharge * responsivity * ps1_w * bandwidth_hz);
  n.sigma_background = std::sqrt(2.0 * kElectronCharge * background_current_a * bandwidth_hz);
  n.sigma_preamp = preamp_density_a_sqrthz * std::sqrt(bandwidth_hz);
  n.sigma_total = std::sqrt(n.sigma_preamp * n.sigma_preamp +
                            n.sigma_background * n.sigma_background +
                            n.sigma_signal * n.sigma_signal);
  return n;
}

struct Interferer {
  double p1 = 0.0;
  double p0 = 0.0;
};

struct OokPowers {
  double ps1 = 0.0;
  double ps0 = 0.0;
  std::vector<Interferer> interferers;
};

/// Electrical SINR of one detector:
/// R^2 (Ps1-Ps0)^2 / (sigma_t^2 + sum_i R^2 (Pi1-Pi0)^2).
inline double sinr(const OokPowers& powers, const NoiseBreakdown& noise, double responsivity) {
  const double r2 = responsivity * responsivity;
  double denom = noise.sigma_total * noise.sigma_total;
  for (const Interferer& i : powers.interferers) {
    const double di = i.p1 - i.p0;
    denom += r2 * di * di;
  }
  if (denom <= 0.0) throw std::invalid_argument("zero noise and zero interference");
  const double ds = powers.ps1 - powers.ps0;
  return r2 * ds * ds / denom;
}

/// Selection combining: the best branch wins.
inline double combine_sc(const std::vector<double>& per_branch) {
  if (per_branch.empty()) throw std::invalid_argument("combining over no branches");
  return *std::max_element(per_branch.begin(), per_branch.end());
}

/// Maximum ratio combining, modelled as the sum of per-branch SINRs.
inline double combine_mrc(const std::vector<double>& per_branch) {
  if (per_branch.empty()) throw std::invalid_argument("combining over no branches");
  double s = 0.0;
  for (double v : per_branch) s += v;
  return s;
}

/// Gaussian tail probability, Q(x) = erfc(x/sqrt(2))/2.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Large-argument approximation exp(-x^2/2) / (x sqrt(2 pi)); exposed for
/// comparison against the exact form.
inline double q_function_asymptotic(double x) {
  if (x <= 0.0) throw std::invalid_argument("asymptotic Q requires x > 0");
  return std::exp(-0.5 * x * x) / (x * std::sqrt(2.0 * std::numbers::pi));
}

/// OOK bit error rate, Q(sqrt(SINR)).
inline double ber(double sinr_value) {
  if (sinr_value < 0.0) throw std::invalid_argument("SINR must be non-negative");
  return q_function(std::sqrt(sinr_value));
}

struct NoiseParams {
  double background_current = 10e-6;   // A per detector
  double preamp_density = 4.5e-12;     // A/sqrt(Hz)
};

/// Single-detector SINR at a given bit rate: the bit window and the receiver
/// bandwidth both follow the rate. A closed eye (ps1 <= ps0) yields zero.
inline double sinr_at_rate(const ImpulseResponse& ir, const std::vector<double>& interferer_powers,
                           const NoiseParams& noise, double responsivity, double bit_rate) {
  const OokPartition part = ook_partition(ir, bit_rate);
  if (part.ps1 <= part.ps0) return 0.0;
  const NoiseBreakdown nb =
      noise_sigma(part.ps1, noise.background_current, bit_rate, responsivity, noise.preamp_density);
  OokPowers powers;
  powers.ps1 = part.ps1;
  powers.ps0 = part.ps0;
  powers.interferers.reserve(interferer_powers.size());
  for (double p : interferer_powers) powers.interferers.push_back({p, 0.0});
  return sinr(powers, nb, responsivity);
}

inline double ber_at_rate(const ImpulseResponse& ir, const std::vector<double>& interferer_powers,
                          const NoiseParams& noise, double responsivity, double bit_rate) {
  return ber(sinr_at_rate(ir, interferer_powers, noise, responsivity, bit_rate));
}

// Geometric bit-rate search grid, 1% resolution.
inline constexpr double kRateGridMin = 1e6;
inline constexpr double kRateGridMax = 1e12;
inline constexpr double kRateGridStep = 1.01;

inline int rate_grid_steps() {
  return static_cast<int>(std::floor(std::log(kRateGridMax / kRateGridMin) /
                                     std::log(kRateGridStep)));
}

inline double rate_grid_point(int k) { return kRateGridMin * std::pow(kRateGridStep, k); }

/// Largest grid rate whose BER meets the target, 0 if none does. `feasible`
/// must be a nonincreasing predicate of the rate, which holds for this
/// noise/ISI model: raising the rate shrinks the bit window and widens the
/// noise bandwidth.
template <class Feasible>
double search_max_rate(Feasible&& feasible) {
  const int k_max = rate_grid_steps();
  if (!feasible(rate_grid_point(0))) return 0.0;
  if (feasible(rate_grid_point(k_max))) return rate_grid_point(k_max);
  int lo = 0, hi = k_max;  // feasible(lo), !feasible(hi)
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (feasible(rate_grid_point(mid)))
      lo = mid;
    else
      hi = mid;
  }
  return rate_grid_point(lo);
}

/// Maximum OOK data rate of one detector link against a BER target.
inline double max_data_rate(const ImpulseResponse& ir,
                            const std::vector<const ImpulseResponse*>& interferer_irs,
                            const NoiseParams& noise, double responsivity,
                            double target_ber = 1e-9) {
  if (total_power(ir) <= 0.0) throw std::invalid_argument("rate search on a zero-power response");
  std::vector<double> interferer_powers;
  interferer_powers.reserve(interferer_irs.size());
  for (const ImpulseResponse* i : interferer_irs) interferer_powers.push_back(total_power(*i));
  return search_max_rate([&](double rate) {
    return ber_at_rate(ir, interferer_powers, noise, responsivity, rate) <= target_ber;
  });
}

/// Per-seat link metrics. branch_sinr holds one entry per receiver
/// detector/pixel (J of them).
struct LinkReport {
  int seat_id = 0;
  ReceiverKind receiver = ReceiverKind::adr;
  int serving_unit = -1;
  int serving_branch = -1;
  std::vector<double> branch_sinr;
  double sinr_sc = 0.0;
  double sinr_mrc = 0.0;
  double ber_sc = 0.5;
  double ber_mrc = 0.5;
  double delay_spread_s = 0.0;
  double max_rate_sc_bps = 0.0;
  double max_rate_mrc_bps = 0.0;
};

}  // namespace cabinsim
