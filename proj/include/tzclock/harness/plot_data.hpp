#pragma once

// Plot-ready panels, one tab-separated file per figure id:
//
//   fig1d  parity-sweep          dx_nm shifted shifted_stderr static static_stderr
//   fig2b  phase-pattern         dark_time_us site population stderr
//   fig2c  cardinal-tomography   target p_x p_y p_z fidelity fidelity_stderr fidelity_spam_corrected
//   fig3c  dual-quadrature       dark_time_us p_x p_x_stderr p_y p_y_stderr theta_mean
//   fig3d  dual-quadrature       dark_time_us bin_lo bin_hi density count
//   fig3e  dual-quadrature       dark_time_us sigma sigma_stderr slip_B_pi_2 slip_B_pi
//   fig3f  dual-quadrature       epsilon t_max_B_pi_2_us t_max_B_pi_us
//   fig4b  local-dd / kernel-schedule
//                                dark_time_us ensemble phase phase_stderr
//   slip   multi-ensemble-slip   sigma_full ensembles probability stderr erfc_M1
//
// Each file starts with a "# <figure_id>: <description>" line, then the
// column header.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tzclock/errors.hpp"
#include "tzclock/harness/config.hpp"
#include "tzclock/harness/result_table.hpp"

namespace tzclock::harness {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FigureSpec {
  std::string id;
  std::vector<std::string> experiments;
  std::string description;
  std::string columns;
};

inline const std::vector<FigureSpec>& figure_specs() {
  static const std::vector<FigureSpec> specs{
      {"fig1d", {"parity-sweep"}, "excited population of shifted and static sites vs displacement",
       "dx_nm\tshifted\tshifted_stderr\tstatic\tstatic_stderr"},
      {"fig2b", {"phase-pattern"}, "per-site Ramsey populations vs dark time", "dark_time_us\tsite\tpopulation\tstderr"},
      {"fig2c", {"cardinal-tomography"}, "tomography of the six cardinal targets",
       "target\tp_x\tp_y\tp_z\tfidelity\tfidelity_stderr\tfidelity_spam_corrected"},
      {"fig3c", {"dual-quadrature"}, "dual-quadrature Ramsey fringes and mean phase",
       "dark_time_us\tp_x\tp_x_stderr\tp_y\tp_y_stderr\ttheta_mean"},
      {"fig3d", {"dual-quadrature"}, "histograms of phase deviations per dark time",
       "dark_time_us\tbin_lo\tbin_hi\tdensity\tcount"},
      {"fig3e", {"dual-quadrature"}, "phase spread and slip probability vs dark time",
       "dark_time_us\tsigma\tsigma_stderr\tslip_B_pi_2\tslip_B_pi"},
      {"fig3f", {"dual-quadrature"}, "maximum dark time vs slip probability", "epsilon\tt_max_B_pi_2_us\tt_max_B_pi_us"},
      {"fig4b", {"local-dd", "kernel-schedule"}, "unwrapped phase per ensemble vs dark time",
       "dark_time_us\tensemble\tphase\tphase_stderr"},
      {"slip", {"multi-ensemble-slip"}, "cascaded-unwrap slip probability vs full-phase spread",
       "sigma_full\tensembles\tprobability\tstderr\terfc_M1"},
  };
  return specs;
}

inline std::vector<std::string> figures_for(ExperimentKind k) {
  std::vector<std::string> out;
  for (const auto& f : figure_specs())
    for (const auto& e : f.experiments)
      if (e == to_string(k)) out.push_back(f.id);
  return out;
}

namespace detail {

inline std::string row(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) s += (s.empty() ? "" : "\t") + c;
  return s + "\n";
}

// Rows of one quantity keyed by (x, label), in table order.
inline std::map<std::pair<double, std::string>, const ResultRow*> index(const ResultTable& t, const std::string& q) {
  std::map<std::pair<double, std::string>, const ResultRow*> m;
  for (const auto& r : t.rows)
    if (r.quantity == q) m[{r.x, r.label}] = &r;
  return m;
}

inline std::vector<double> xs_of(const ResultTable& t, const std::string& q) {
  std::vector<double> xs;
  std::set<double> seen;
  for (const auto& r : t.rows)
    if (r.quantity == q && seen.insert(r.x).second) xs.push_back(r.x);
  return xs;
}

inline std::string cell(const std::map<std::pair<double, std::string>, const ResultRow*>& m, double x,
                        const std::string& label, bool stderr_value = false) {
  auto it = m.find({x, label});
  if (it == m.end()) return "nan";
  return num(stderr_value ? it->second->stderr_ : it->second->mean);
}

inline std::string render(const FigureSpec& f, const ResultTable& t) {
  std::string body;
  if (f.id == "fig1d") {
    const auto p = index(t, "population");
    for (double x : xs_of(t, "population"))
      body += row({num(x), cell(p, x, "shifted"), cell(p, x, "shifted", true), cell(p, x, "static"), cell(p, x, "static", true)});
  } else if (f.id == "fig2b") {
    for (const auto& r : t.rows)
      if (r.quantity == "population") body += row({num(r.x), r.label.substr(r.label.find(':') + 1), num(r.mean), num(r.stderr_)});
  } else if (f.id == "fig2c") {
    const auto px = index(t, "p_x"), py = index(t, "p_y"), pz = index(t, "p_z");
    const auto fi = index(t, "fidelity"), fc = index(t, "fidelity_spam_corrected");
    for (const auto& r : t.rows)
      if (r.quantity == "fidelity")
        body += row({r.label, cell(px, r.x, r.label), cell(py, r.x, r.label), cell(pz, r.x, r.label), num(r.mean),
                     num(r.stderr_), cell(fc, r.x, r.label)});
  } else if (f.id == "fig3c") {
    const auto p = index(t, "population"), th = index(t, "theta_mean");
    for (double x : xs_of(t, "population"))
      body += row({num(x), cell(p, x, "X"), cell(p, x, "X", true), cell(p, x, "Y"), cell(p, x, "Y", true), cell(th, x, "")});
  } else if (f.id == "fig3d") {
    for (const auto& r : t.rows) {
      if (r.quantity != "deviation_hist") continue;
      const auto colon = r.label.find(':');
      body += row({num(r.x), r.label.substr(0, colon), r.label.substr(colon + 1), num(r.mean), std::to_string(r.n)});
    }
  } else if (f.id == "fig3e") {
    const auto s = index(t, "sigma"), e = index(t, "slip_probability");
    for (double x : xs_of(t, "population"))
      body += row({num(x), cell(s, x, "folded"), cell(s, x, "folded", true), cell(e, x, "B=pi/2"), cell(e, x, "B=pi")});
  } else if (f.id == "fig3f") {
    const auto m = index(t, "t_max");
    for (double x : xs_of(t, "t_max")) body += row({num(x), cell(m, x, "B=pi/2"), cell(m, x, "B=pi")});
  } else if (f.id == "fig4b") {
    for (const auto& r : t.rows)
      if (r.quantity == "phase") body += row({num(r.x), r.label.substr(2), num(r.mean), num(r.stderr_)});
  } else if (f.id == "slip") {
    const auto e = index(t, "slip_probability_erfc");
    for (const auto& r : t.rows)
      if (r.quantity == "slip_probability")
        body += row({num(r.x), r.label.substr(2), num(r.mean), num(r.stderr_), cell(e, r.x, "M=1")});
  }
  return "# " + f.id + ": " + f.description + "\n" + f.columns + "\n" + body;
}

}  // namespace detail

// Writes <dir>/<figure_id>.tsv and returns its path.
inline std::string emit_plot_data(const ResultTable& table, const std::string& figure_id, const std::string& dir) {
  if (table.empty()) throw InvalidArgument("emit_plot_data: result table is empty");
  const FigureSpec* spec = nullptr;
  for (const auto& f : figure_specs())
    if (f.id == figure_id) spec = &f;
  if (!spec) {
    std::string ids;
    for (const auto& f : figure_specs()) ids += (ids.empty() ? "" : ", ") + f.id;
    throw InvalidArgument("emit_plot_data: unknown figure id '" + figure_id + "' (known: " + ids + ")");
  }
  const std::string& ex = table.rows.front().experiment;
  if (std::find(spec->experiments.begin(), spec->experiments.end(), ex) == spec->experiments.end())
    throw InvalidArgument("emit_plot_data: figure " + figure_id + " needs a table from " + spec->experiments.front() +
                          ", got " + ex);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  const std::string path = (std::filesystem::path(dir) / (figure_id + ".tsv")).string();
  try {
    write_text_file(path, detail::render(*spec, table));
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  return path;
}

}  // namespace tzclock::harness
