// tzclock: experiment runner.
//
//   tzclock run <config.json> [--seed N] [--shots N] [--out DIR] [--strict]
//   tzclock selftest
//   tzclock emit <results.tsv> <figure_id> [--out DIR]
//
// Exit codes: 0 success, 1 invalid config or arguments, 2 runtime failure
// (or any report warning when --strict is given).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tzclock/harness.hpp"

namespace h = tzclock::harness;

namespace {

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<int> shots,
            std::optional<std::string> out, bool strict) {
  std::ifstream in(path);
  if (!in) throw h::ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw h::ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (j.is_object()) {
    if (seed) j["seed"] = *seed;
    if (shots) j["shots_per_point"] = *shots;
    if (out) j["output_dir"] = *out;
  }
  const auto cfg = h::parse_config(j);
  const auto result = h::run(cfg);
  for (const auto& p : h::write_run(result, cfg.kind, cfg.output_dir)) std::cout << "wrote " << p << "\n";
  for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << "\n";
  if (strict && !result.report.warnings.empty()) {
    std::cerr << result.report.warnings.size() << " warning(s) escalated by --strict\n";
    return 2;
  }
  return 0;
}

int cmd_selftest() {
  const auto s = h::selftest();
  for (const auto& c : s.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.passed ? "" : ": " + c.detail) << "\n";
  std::cout << s.checks.size() - static_cast<std::size_t>(s.failures()) << "/" << s.checks.size() << " checks passed\n";
  return s.passed() ? 0 : 2;
}

int cmd_emit(const std::string& table_path, const std::string& figure, const std::string& dir) {
  const auto table = h::read_table(table_path);
  std::cout << "wrote " << h::emit_plot_data(table, figure, dir) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-ensemble optical clock simulator and estimation harness"};
  app.require_subcommand(1);

  std::string config_path, table_path, figure_id;
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  std::optional<std::string> out;
  bool strict = false;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--shots", shots, "Override shots_per_point")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Override output_dir");
  run->add_flag("--strict", strict, "Exit with code 2 if the report has warnings");

  app.add_subcommand("selftest", "Run the invariant suite at reduced sizes");

  auto* emit = app.add_subcommand("emit", "Write one plot panel from a results table");
  emit->add_option("table", table_path, "results.tsv written by run")->required();
  emit->add_option("figure_id", figure_id, "fig1d, fig2b, fig2c, fig3c, fig3d, fig3e, fig3f, fig4b or slip")->required();
  std::string emit_dir = ".";
  emit->add_option("--out", emit_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, seed, shots, out, strict);
    if (app.got_subcommand("selftest")) return cmd_selftest();
    if (*emit) return cmd_emit(table_path, figure_id, emit_dir);
  } catch (const h::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
