#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lograd/bench/commands.hpp"

#ifndef LOGRAD_BUILD_ID
#define LOGRAD_BUILD_ID "unknown"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

using nlohmann::ordered_json;

ordered_json to_json(const lograd::bench::Cell& c) {
  struct Visitor {
    ordered_json operator()(std::monostate) const { return nullptr; }
    ordered_json operator()(std::int64_t v) const { return v; }
    ordered_json operator()(std::uint64_t v) const { return v; }
    ordered_json operator()(bool v) const { return v; }
    ordered_json operator()(const std::string& v) const { return v; }
    ordered_json operator()(double v) const { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }
  };
  return std::visit(Visitor{}, c);
}

void write_json(std::ostream& os, const lograd::bench::RunConfig& cfg, const lograd::bench::Table& t) {
  ordered_json doc;
  ordered_json echo = ordered_json::object();
  for (const auto& [k, v] : lograd::bench::echo(cfg)) echo[k] = v;
  doc["config_echo"] = echo;
  ordered_json rows = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json r = ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = to_json(row[i]);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  ordered_json summary = ordered_json::object();
  for (const auto& [k, v] : t.summary) summary[k] = to_json(v);
  doc["summary"] = std::move(summary);
  doc["notes"] = t.notes;
  // Kernels are single threaded; hardware_threads is informational.
  doc["env"] = {{"build_id", LOGRAD_BUILD_ID},
                {"threads", 1},
                {"hardware_threads", std::thread::hardware_concurrency()}};
  os << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank gradient projection benchmarks and toy training"};
  app.set_version_flag("--version", std::string(LOGRAD_BUILD_ID));

  std::string command;
  std::string config_path;
  std::string out_path;
  std::string format;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> ranks;
  std::vector<std::string> overrides;

  app.add_option("command", command,
                 "bench-projection | bench-subspace | train-toy | ablate-rank | memory-report")
      ->required();
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seeds, "seeds (overrides 'seeds')");
  app.add_option("--rank", ranks, "ranks (overrides 'ranks')");
  app.add_option("--set", overrides, "extra key=value settings, applied after the config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  using namespace lograd::bench;
  RunConfig cfg;
  try {
    cfg = defaults_for(parse_command(command));
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw lograd::ConfigError("--set expects key=value, got '" + kv + "'");
      apply_setting(cfg, detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!ranks.empty()) {
      cfg.ranks = ranks;
      cfg.train.rank = ranks.front();
    }
    if (!out_path.empty()) cfg.output_path = out_path;
    if (!format.empty()) cfg.format = format == "json" ? OutputFormat::JSON : OutputFormat::CSV;
    validate(cfg);
  } catch (const lograd::ConfigError& e) {
    std::cerr << "lograd: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  Table table;
  try {
    table = run_command(cfg);
  } catch (const lograd::ConfigError& e) {
    std::cerr << "lograd: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lograd::NumericalError& e) {
    std::cerr << "lograd: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "lograd: " << e.what() << "\n";
    return kExitError;
  }

  std::ostringstream body;
  if (cfg.format == OutputFormat::JSON) {
    write_json(body, cfg, table);
  } else {
    write_csv(body, table);
  }
  if (cfg.output_path.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(cfg.output_path);
    if (!out || !(out << body.str())) {
      std::cerr << "lograd: cannot write '" << cfg.output_path << "'\n";
      return kExitError;
    }
  }
  for (const std::string& note : table.notes) std::cerr << "note: " << note << "\n";

  if (table.numerical_failure) {
    std::cerr << "lograd: numerical failure (see notes)\n";
    return kExitNumerical;
  }
  return kExitOk;
}
