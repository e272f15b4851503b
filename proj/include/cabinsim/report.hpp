#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cabinsim/analysis.hpp"
#include "cabinsim/channel.hpp"

namespace cabinsim {

enum class Combiner { sc, mrc };

inline const char* combiner_name(Combiner c) { return c == Combiner::sc ? "sc" : "mrc"; }

namespace detail {

inline std::string format_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

inline double sinr_db(double sinr_linear) { return 10.0 * std::log10(sinr_linear); }

inline constexpr const char* kLinkReportHeader =
    "seat,receiver,combiner,sinr_db,ber,delay_spread_ns,max_rate_gbps";

/// One LinkReport CSV row per (seat, receiver, combiner).
inline void write_link_report_csv(std::ostream& os, const std::vector<LinkReport>& reports,
                                  const std::vector<Combiner>& combiners) {
  os << kLinkReportHeader << "\n";
  for (const LinkReport& r : reports) {
    for (Combiner c : combiners) {
      const double s = c == Combiner::sc ? r.sinr_sc : r.sinr_mrc;
      const double b = c == Combiner::sc ? r.ber_sc : r.ber_mrc;
      const double rate = c == Combiner::sc ? r.max_rate_sc_bps : r.max_rate_mrc_bps;
      os << r.seat_id << ',' << receiver_kind_name(r.receiver) << ',' << combiner_name(c) << ','
         << detail::format_number(sinr_db(s)) << ',' << detail::format_number(b) << ','
         << detail::format_number(r.delay_spread_s * 1e9) << ','
         << detail::format_number(rate * 1e-9) << "\n";
    }
  }
}

struct LinkReportRow {
  int seat = 0;
  std::string receiver;
  std::string combiner;
  double sinr_db = 0.0;
  double ber = 0.0;
  double delay_spread_ns = 0.0;
  double max_rate_gbps = 0.0;
};

/// Reads rows written by write_link_report_csv. Throws on malformed input.
inline std::vector<LinkReportRow> read_link_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty report");
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != kLinkReportHeader)
    throw std::runtime_error(path + ": unexpected report header '" + line + "'");
  std::vector<LinkReportRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 7)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 7 fields");
    try {
      LinkReportRow r;
      r.seat = std::stoi(f[0]);
      r.receiver = f[1];
      r.combiner = f[2];
      r.sinr_db = std::stod(f[3]);
      r.ber = std::stod(f[4]);
      r.delay_spread_ns = std::stod(f[5]);
      r.max_rate_gbps = std::stod(f[6]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  if (rows.empty()) throw std::runtime_error(path + ": report has no data rows");
  return rows;
}

/// Impulse-response dump, nonzero bins only. Stable column order:
/// unit, branch, detector, bin_index, time_s, power_w.
inline void write_impulse_response_csv(std::ostream& os,
                                       const std::vector<ImpulseResponse>& responses) {
  os << "unit,branch,detector,bin_index,time_s,power_w\n";
  for (const ImpulseResponse& ir : responses) {
    for (std::size_t k = 0; k < ir.bins.size(); ++k) {
      if (ir.bins[k] == 0.0) continue;
      os << ir.unit << ',' << ir.branch << ',' << ir.detector << ',' << k << ','
         << detail::format_number(ir.bin_time(k)) << ',' << detail::format_number(ir.bins[k])
         << "\n";
    }
  }
}

}  // namespace cabinsim
