#pragma once

#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "cabinsim/analysis.hpp"
#include "cabinsim/optics.hpp"
#include "cabinsim/scene.hpp"
#include "cabinsim/toml.hpp"

namespace cabinsim {

/// Config or schema problem; the message carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TransmitterConfig {
  double power_w = 1.0;  // aggregate RYGB optical power per branch
  double side_semi_angle_deg = 14.0;
  double middle_semi_angle_deg = 10.0;
};

struct ReceiverConfig {
  ReceiverKind kind = ReceiverKind::adr;
  double offset_x = 0.0;  // applied to every seat's receiver position
  double offset_y = 0.0;
  double height_above_seat = 0.30;
};

struct AnalysisConfig {
  DelaySpreadWeighting delay_spread_weighting = DelaySpreadWeighting::power_squared;
};

struct SimConfig {
  CabinConfig cabin;
  SubdivisionSpec subdivision;
  TransmitterConfig transmitter;
  ReceiverConfig receiver;
  NoiseParams noise;
  AnalysisConfig analysis;
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const toml::Document& doc) : doc_(&doc) {}

  double number(const std::string& key, double fallback) {
    const toml::Value* v = take(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(key + ": expected a number");
    return v->as_number();
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(key + ": must be positive");
    return v;
  }

  double unit_interval(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (v < 0.0 || v > 1.0) throw ConfigError(key + ": must lie in [0, 1]");
    return v;
  }

  int integer(const std::string& key, int fallback) {
    const toml::Value* v = take(key);
    if (!v) return fallback;
    if (!v->is_integer()) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(v->as_integer());
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const toml::Value* v = take(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(key + ": expected a string");
    return v->as_string();
  }

  void reject_unknown() const {
    for (const auto& [key, value] : doc_->entries)
      if (!seen_.count(key)) throw ConfigError(key + ": unknown config key");
  }

 private:
  const toml::Value* take(const std::string& key) {
    seen_.insert(key);
    return doc_->find(key);
  }

  const toml::Document* doc_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline SimConfig config_from_toml(const toml::Document& doc) {
  SimConfig cfg;
  detail::ConfigReader r(doc);

  cfg.cabin.length = r.positive("cabin.length", cfg.cabin.length);
  cfg.cabin.width = r.positive("cabin.width", cfg.cabin.width);
  cfg.cabin.height = r.positive("cabin.height", cfg.cabin.height);
  cfg.cabin.rows = r.integer("cabin.rows", cfg.cabin.rows);
  if (cfg.cabin.rows < 1) throw ConfigError("cabin.rows: must be at least 1");
  cfg.cabin.seats_per_row = r.integer("cabin.seats_per_row", cfg.cabin.seats_per_row);
  if (cfg.cabin.seats_per_row != 10)
    throw ConfigError("cabin.seats_per_row: only the 3-4-3 layout (10) is supported");
  cfg.cabin.row_pitch = r.positive("cabin.row_pitch", cfg.cabin.row_pitch);

  cfg.cabin.seat.width = r.positive("seat.width", cfg.cabin.seat.width);
  cfg.cabin.seat.depth = r.positive("seat.depth", cfg.cabin.seat.depth);
  cfg.cabin.seat.surface_height = r.positive("seat.surface_height", cfg.cabin.seat.surface_height);
  cfg.cabin.seat.back_height = r.positive("seat.back_height", cfg.cabin.seat.back_height);
  cfg.cabin.seat.back_thickness =
      r.positive("seat.back_thickness", cfg.cabin.seat.back_thickness);

  cfg.subdivision.first_order_element =
      r.positive("subdivision.first_order_element", cfg.subdivision.first_order_element);
  cfg.subdivision.second_order_element =
      r.positive("subdivision.second_order_element", cfg.subdivision.second_order_element);
  cfg.subdivision.time_bin = r.positive("subdivision.time_bin", cfg.subdivision.time_bin);

  cfg.cabin.reflectivity.ceiling =
      r.unit_interval("reflectivity.ceiling", cfg.cabin.reflectivity.ceiling);
  cfg.cabin.reflectivity.side_walls =
      r.unit_interval("reflectivity.side_walls", cfg.cabin.reflectivity.side_walls);
  cfg.cabin.reflectivity.floor = r.unit_interval("reflectivity.floor", cfg.cabin.reflectivity.floor);
  cfg.cabin.reflectivity.end_walls =
      r.unit_interval("reflectivity.end_walls", cfg.cabin.reflectivity.end_walls);

  cfg.transmitter.power_w = r.positive("transmitter.power_w", cfg.transmitter.power_w);
  cfg.transmitter.side_semi_angle_deg =
      r.positive("transmitter.side_semi_angle_deg", cfg.transmitter.side_semi_angle_deg);
  cfg.transmitter.middle_semi_angle_deg =
      r.positive("transmitter.middle_semi_angle_deg", cfg.transmitter.middle_semi_angle_deg);
  if (cfg.transmitter.side_semi_angle_deg >= 90.0)
    throw ConfigError("transmitter.side_semi_angle_deg: must be below 90");
  if (cfg.transmitter.middle_semi_angle_deg >= 90.0)
    throw ConfigError("transmitter.middle_semi_angle_deg: must be below 90");

  const std::string kind = r.string("receiver.kind", "adr");
  if (kind == "adr")
    cfg.receiver.kind = ReceiverKind::adr;
  else if (kind == "imr")
    cfg.receiver.kind = ReceiverKind::imr;
  else
    throw ConfigError("receiver.kind: expected \"adr\" or \"imr\"");
  cfg.receiver.offset_x = r.number("receiver.offset_x", cfg.receiver.offset_x);
  cfg.receiver.offset_y = r.number("receiver.offset_y", cfg.receiver.offset_y);
  cfg.receiver.height_above_seat =
      r.number("receiver.height_above_seat", cfg.receiver.height_above_seat);

  cfg.noise.background_current =
      r.number("noise.background_current_a", cfg.noise.background_current);
  cfg.noise.preamp_density = r.number("noise.preamp_density_a_sqrthz", cfg.noise.preamp_density);
  if (cfg.noise.background_current < 0.0)
    throw ConfigError("noise.background_current_a: must be non-negative");
  if (cfg.noise.preamp_density < 0.0)
    throw ConfigError("noise.preamp_density_a_sqrthz: must be non-negative");

  const std::string weighting =
      r.string("analysis.delay_spread_weighting", "power-squared");
  if (weighting == "power-squared")
    cfg.analysis.delay_spread_weighting = DelaySpreadWeighting::power_squared;
  else if (weighting == "power")
    cfg.analysis.delay_spread_weighting = DelaySpreadWeighting::power;
  else
    throw ConfigError("analysis.delay_spread_weighting: expected \"power-squared\" or \"power\"");

  r.reject_unknown();
  return cfg;
}

inline SimConfig load_config(const std::string& path) {
  toml::Document doc;
  try {
    doc = toml::parse_file(path);
  } catch (const toml::ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return config_from_toml(doc);
}

/// Echoes the fully resolved configuration; loading the echo reproduces the
/// run.
inline void write_resolved_config(std::ostream& os, const SimConfig& c) {
  const auto num = [&](const char* key, double v) {
    os << key << " = " << v << "\n";
  };
  os.precision(17);
  os << "[cabin]\n";
  num("length", c.cabin.length);
  num("width", c.cabin.width);
  num("height", c.cabin.height);
  os << "rows = " << c.cabin.rows << "\n";
  os << "seats_per_row = " << c.cabin.seats_per_row << "\n";
  num("row_pitch", c.cabin.row_pitch);
  os << "\n[seat]\n";
  num("width", c.cabin.seat.width);
  num("depth", c.cabin.seat.depth);
  num("surface_height", c.cabin.seat.surface_height);
  num("back_height", c.cabin.seat.back_height);
  num("back_thickness", c.cabin.seat.back_thickness);
  os << "\n[subdivision]\n";
  num("first_order_element", c.subdivision.first_order_element);
  num("second_order_element", c.subdivision.second_order_element);
  num("time_bin", c.subdivision.time_bin);
  os << "\n[reflectivity]\n";
  num("ceiling", c.cabin.reflectivity.ceiling);
  num("side_walls", c.cabin.reflectivity.side_walls);
  num("floor", c.cabin.reflectivity.floor);
  num("end_walls", c.cabin.reflectivity.end_walls);
  os << "\n[transmitter]\n";
  num("power_w", c.transmitter.power_w);
  num("side_semi_angle_deg", c.transmitter.side_semi_angle_deg);
  num("middle_semi_angle_deg", c.transmitter.middle_semi_angle_deg);
  os << "\n[receiver]\n";
  os << "kind = \"" << receiver_kind_name(c.receiver.kind) << "\"\n";
  num("offset_x", c.receiver.offset_x);
  num("offset_y", c.receiver.offset_y);
  num("height_above_seat", c.receiver.height_above_seat);
  os << "\n[noise]\n";
  num("background_current_a", c.noise.background_current);
  num("preamp_density_a_sqrthz", c.noise.preamp_density);
  os << "\n[analysis]\n";
  os << "delay_spread_weighting = \""
     << (c.analysis.delay_spread_weighting == DelaySpreadWeighting::power_squared
             ? "power-squared"
             : "power")
     << "\"\n";
}

}  // namespace cabinsim
