#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tzclock/harness/experiments.hpp"
#include "tzclock/harness/plot_data.hpp"

namespace tzclock::harness {

// results.tsv, report.txt, report.json and every panel the experiment kind
// feeds. Returns the written paths in order.
inline std::vector<std::string> write_run(const RunOutput& out, ExperimentKind kind, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  const std::filesystem::path d(dir);
  std::vector<std::string> paths;
  auto put = [&](const std::string& name, const std::string& content) {
    const std::string p = (d / name).string();
    try {
      write_text_file(p, content);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    paths.push_back(p);
  };
  put("results.tsv", to_tsv(out.table));
  put("report.txt", to_text(out.report));
  put("report.json", to_json(out.report));
  if (!out.table.empty())
    for (const auto& f : figures_for(kind)) paths.push_back(emit_plot_data(out.table, f, dir));
  return paths;
}

}  // namespace tzclock::harness
