#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cabinsim/config.hpp"
#include "cabinsim/run.hpp"
#include "cabinsim/svg.hpp"

namespace {

cabinsim::RowSpan parse_row_span(const std::string& text) {
  const std::size_t pos = text.find("..");
  try {
    if (pos == std::string::npos) {
      const int r = std::stoi(text);
      return {r, r};
    }
    return {std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + 2))};
  } catch (const std::exception&) {
    throw cabinsim::ConfigError("--rows: expected A..B or a single row number");
  }
}

int run_simulate(const std::string& config_path, const std::string& rows,
                 const std::string& receiver, const std::string& combiner, double bitrate_gbps,
                 bool find_max_rate, bool dump_ir, const std::string& out_dir, int threads) {
  cabinsim::RunSpec spec;
  if (!config_path.empty()) spec.config = cabinsim::load_config(config_path);
  spec.span = parse_row_span(rows);
  if (receiver == "adr")
    spec.receivers = {cabinsim::ReceiverKind::adr};
  else if (receiver == "imr")
    spec.receivers = {cabinsim::ReceiverKind::imr};
  else if (receiver == "both")
    spec.receivers = {cabinsim::ReceiverKind::adr, cabinsim::ReceiverKind::imr};
  else if (receiver == "config")
    spec.receivers = {spec.config.receiver.kind};
  else
    throw cabinsim::ConfigError("--receiver: expected adr, imr, or both");
  if (combiner == "sc")
    spec.combiners = {cabinsim::Combiner::sc};
  else if (combiner == "mrc")
    spec.combiners = {cabinsim::Combiner::mrc};
  else if (combiner == "both")
    spec.combiners = {cabinsim::Combiner::sc, cabinsim::Combiner::mrc};
  else
    throw cabinsim::ConfigError("--combiner: expected sc, mrc, or both");
  if (bitrate_gbps > 0.0) spec.bit_rate_hz = bitrate_gbps * 1e9;
  spec.find_max_rate = find_max_rate;
  spec.dump_ir = dump_ir;
  spec.out_dir = out_dir;
  spec.threads = threads;

  const cabinsim::RunResult result = cabinsim::simulate(spec);
  std::cout << "wrote " << result.report_path << " (" << result.reports.size()
            << " seat reports)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aircraft-cabin visible light link simulator"};
  app.require_subcommand(1);

  std::string config_path, rows = "1..4", receiver = "config", combiner = "both";
  std::string out_dir = "out";
  double bitrate_gbps = 0.0;
  bool find_max_rate = false, dump_ir = false;
  int threads = 0;

  CLI::App* sim = app.add_subcommand("simulate", "Run the per-seat link sweep");
  sim->add_option("--config", config_path, "TOML scene/receiver/noise config (defaults apply)");
  sim->add_option("--rows", rows, "Row span A..B (1-based, inclusive)");
  sim->add_option("--receiver", receiver, "adr | imr | both (default: config file setting)");
  sim->add_option("--combiner", combiner, "sc | mrc | both");
  sim->add_option("--bitrate", bitrate_gbps, "Fixed OOK bit rate in Gbps (default 1)");
  sim->add_flag("--find-max-rate", find_max_rate, "Search the highest rate meeting BER 1e-9");
  sim->add_flag("--dump-ir", dump_ir, "Also dump serving impulse responses per seat");
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--threads", threads, "Worker thread hint (0 = hardware)");

  std::string reports_path, plot_out = "out";
  CLI::App* plot = app.add_subcommand("plot", "Render SVG charts from a LinkReport CSV");
  plot->add_option("--reports", reports_path, "link_report.csv path")->required();
  plot->add_option("--out", plot_out, "Output directory");

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return run_simulate(config_path, rows, receiver, combiner, bitrate_gbps, find_max_rate,
                          dump_ir, out_dir, threads);
    if (plot->parsed()) {
      for (const std::string& p : cabinsim::plot_reports(reports_path, plot_out))
        std::cout << "wrote " << p << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const cabinsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
