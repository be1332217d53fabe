// Command-line front end: propagate, parameter scans and JSON reports.
// Exit codes: 0 success, 1 configuration error, 2 numeric failure.

#include <tripod/config.hpp>
#include <tripod/errors.hpp>
#include <tripod/report.hpp>
#include <tripod/scan.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct CommonOptions {
  std::string config;
  std::string out = "-";
  std::size_t workers = 0;
  std::optional<double> tol;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config, "YAML configuration file")->required();
  sub->add_option("--out", o.out, "Output path ('-' for stdout)");
  sub->add_option("--workers", o.workers, "Worker threads (0 = hardware concurrency)");
  sub->add_option("--tol", o.tol, "Integrator tolerance, overrides grid.tol")
      ->check(CLI::PositiveNumber);
}

std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tripod::ConfigError(path + ": cannot open for writing");
  out << text;
  if (!out) throw tripod::ConfigError(path + ": write failed");
}

void write_meta(const CommonOptions& o, const std::string& command, const tripod::ScanTable& table,
                const tripod::SystemConfig& c, double seconds, nlohmann::json extra = {}) {
  if (o.out == "-") return;
  nlohmann::json meta = extra.is_null() ? nlohmann::json::object() : extra;
  meta["command"] = command;
  meta["config"] = o.config;
  meta["columns"] = table.columns;
  meta["rows"] = table.rows.size();
  meta["tol"] = c.grid.tol;
  meta["width_factor"] = c.width_factor;
  meta["fano"] = {{"q12", c.fano.q12}, {"q13", c.fano.q13}, {"q23", c.fano.q23}};
  meta["elapsed_seconds"] = seconds;
  for (const auto& [k, v] : table.metadata) meta["scan"][k] = v;
  write_output(o.out + ".meta.json", meta.dump(2) + "\n");
}

tripod::SystemConfig load(const CommonOptions& o) {
  tripod::SystemConfig c = tripod::load_config(o.config);
  if (o.tol) c.grid.tol = *o.tol;
  return c;
}

std::string to_csv(const tripod::ScanTable& table) {
  std::ostringstream os;
  tripod::write_csv(os, table);
  return os.str();
}

int run(const std::string& command, const CommonOptions& o) {
  using clock = std::chrono::steady_clock;
  const tripod::SystemConfig c = load(o);
  const std::size_t workers = worker_count(o.workers);
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  if (command == "propagate") {
    const tripod::Trajectory traj = tripod::run_propagate(c);
    const tripod::ScanTable table = tripod::trajectory_table(traj);
    write_output(o.out, to_csv(table));
    write_meta(o, command, table, c, elapsed(),
               {{"ode", {{"accepted", traj.stats.accepted},
                         {"rejected", traj.stats.rejected},
                         {"evaluations", traj.stats.evaluations}}}});
  } else if (command == "scan-area") {
    const tripod::ScanTable table =
        tripod::run_area_scan(c, c.scan.area.value_or(tripod::AreaScan{}), workers);
    write_output(o.out, to_csv(table));
    write_meta(o, command, table, c, elapsed());
  } else if (command == "scan-width") {
    const tripod::ScanTable table =
        tripod::run_width_scan(c, c.scan.width.value_or(tripod::WidthScan{}), workers);
    write_output(o.out, to_csv(table));
    write_meta(o, command, table, c, elapsed());
  } else if (command == "scan-detuning") {
    const tripod::ScanTable table =
        tripod::run_detuning_scan(c, c.scan.detuning.value_or(tripod::DetuningGrid{}), workers);
    write_output(o.out, to_csv(table));
    write_meta(o, command, table, c, elapsed());
  } else {
    write_output(o.out, tripod::build_report(c).dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population dynamics of a three-state tripod coupled through an ionization continuum"};
  app.require_subcommand(1);

  CommonOptions opts;
  for (const char* name : {"propagate", "scan-area", "scan-width", "scan-detuning", "report"}) {
    const std::string help =
        std::string(name) == "propagate"       ? "Integrate the amplitudes; CSV t,P1,P2,P3,Pi,norm"
        : std::string(name) == "scan-area"     ? "Coincident-pulse populations versus area"
        : std::string(name) == "scan-width"    ? "Final populations versus pulse width T"
        : std::string(name) == "scan-detuning" ? "Final populations on a detuning grid"
                                               : "JSON summary of the configuration";
    add_common(app.add_subcommand(name, help), opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opts);
  } catch (const tripod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tripod::ModelError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tripod::NumericError& e) {
    std::cerr << "numeric failure at t = " << e.time() << ": " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
