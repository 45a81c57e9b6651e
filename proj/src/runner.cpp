#include "rabi/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rabi/ensemble_stats.hpp"
#include "rabi/errors.hpp"
#include "rabi/quantum_reference.hpp"

namespace rabi {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string method_table(const RunOutcome& r, const MethodSeries& s) {
  std::string text = "t\ttwo_g_t\tW_mean\tW_ci_low\tW_ci_high\n";
  const bool ci = !s.ci_low.empty();
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    text += format_number(r.t[k]) + '\t' + format_number(r.two_g_t[k]) + '\t' + format_number(s.W[k]) + '\t';
    if (ci) text += format_number(s.ci_low[k]) + '\t' + format_number(s.ci_high[k]);
    else text += '\t';
    text += '\n';
  }
  return text;
}

std::string comparison_table(const RunOutcome& r, const std::vector<const MethodSeries*>& ok) {
  std::string text = "t\ttwo_g_t";
  for (const auto* s : ok) {
    const std::string m = to_string(s->method);
    text += "\tW_mean_" + m + "\tW_ci_low_" + m + "\tW_ci_high_" + m;
  }
  text += '\n';
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    text += format_number(r.t[k]) + '\t' + format_number(r.two_g_t[k]);
    for (const auto* s : ok) {
      text += '\t' + format_number(s->W[k]) + '\t';
      if (!s->ci_low.empty()) text += format_number(s->ci_low[k]) + '\t' + format_number(s->ci_high[k]);
      else text += '\t';
    }
    text += '\n';
  }
  return text;
}

std::string dump_table(const TrajectoryDump& d, double two_g) {
  std::string text = "t\ttwo_g_t\tX\tY\tZ\tQ\tW\n";
  for (std::size_t k = 0; k < d.t.size(); ++k) {
    text += format_number(d.t[k]) + '\t' + format_number(two_g * d.t[k]) + '\t' +
            format_number(d.X[k].x()) + '\t' + format_number(d.X[k].y()) + '\t' +
            format_number(d.X[k].z()) + '\t' + format_number(d.Q[k]) + '\t' +
            format_number(d.W[k]) + '\n';
  }
  return text;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.14e", v);
  return buf;
}

std::uint64_t method_seed(const ScenarioParams& p, Method m) {
  if (p.shared_samples) return p.seed;
  return p.seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(m) + 1);
}

RunOutcome run(const ScenarioParams& p, const RunOptions& opts) {
  RunOutcome outcome;
  outcome.t = time_grid(p);
  outcome.two_g_t.reserve(outcome.t.size());
  for (double t : outcome.t) outcome.two_g_t.push_back(2.0 * std::abs(p.g) * t);

  fs::create_directories(opts.out_dir);
  const CoherentParams field{p.gamma_r, p.gamma_i, p.pair.nu};
  std::vector<TrajectoryDump> dumps;

  for (Method m : p.methods) {
    MethodSeries s;
    s.method = m;
    s.status = "ok";
    try {
      switch (m) {
        case Method::jc:
          s.W = jc_inversion(p.g, p.mean_photons, outcome.t, p.atom_init);
          break;
        case Method::quantum: {
          FullQuantumOptions fq;
          fq.n_max = p.fock_n_max;
          const auto r = evolve_full_quantum(p.pair, p.g, field, p.atom_init, outcome.t, fq);
          s.W = r.W;
          s.max_norm_drift = r.max_norm_drift;
          s.max_energy_drift = r.max_energy_drift;
          break;
        }
        case Method::meanfield:
        case Method::bohmian: {
          EnsembleConfig cfg;
          cfg.pair = p.pair;
          cfg.alpha = p.alpha;
          cfg.field = field;
          cfg.atom_init = p.atom_init;
          cfg.t_grid = outcome.t;
          cfg.method = m == Method::meanfield ? SemiclassicalMethod::meanfield : SemiclassicalMethod::bohmian;
          cfg.n_samples = p.n_samples;
          cfg.n_batches = p.n_batches;
          cfg.seed = method_seed(p, m);
          cfg.tol = {p.rtol, p.atol};
          cfg.workers = opts.workers;
          if (m == Method::bohmian) cfg.dump_samples = opts.dump_trajectories;
          EnsembleResult r = run_ensemble(cfg);
          s.W = std::move(r.mean_W);
          s.ci_low = std::move(r.ci_low);
          s.ci_high = std::move(r.ci_high);
          s.flagged = r.flagged;
          s.max_norm_drift = r.max_norm_drift;
          s.max_energy_drift = r.max_energy_drift;
          if (r.degraded) {
            s.status = "degraded";
            s.detail = std::to_string(r.flagged) + " of " + std::to_string(r.n_samples) +
                       " trajectories flagged at nodes";
          }
          for (auto& d : r.dumps) dumps.push_back(std::move(d));
          break;
        }
      }
    } catch (const std::exception& e) {
      s.status = "failed";
      s.detail = e.what();
      s.W.clear();
    }
    outcome.series.push_back(std::move(s));
  }

  std::vector<const MethodSeries*> written;
  json methods = json::array();
  for (const auto& s : outcome.series) {
    json entry{{"method", to_string(s.method)},
               {"status", s.status},
               {"flagged", s.flagged},
               {"max_norm_drift", s.max_norm_drift},
               {"max_energy_drift", s.max_energy_drift}};
    if (!s.detail.empty()) entry["detail"] = s.detail;
    if (s.method == Method::meanfield || s.method == Method::bohmian) {
      entry["seed"] = method_seed(p, s.method);
    }
    if (s.status != "failed") {
      const fs::path file = opts.out_dir / (std::string(to_string(s.method)) + ".tsv");
      write_text(file, method_table(outcome, s));
      outcome.artifacts.push_back(file);
      entry["file"] = file.filename().string();
      written.push_back(&s);
    }
    methods.push_back(entry);
    if (s.status == "failed") outcome.exit_code = kExitNumerical;
    else if (s.status == "degraded" && outcome.exit_code == kExitOk) outcome.exit_code = kExitDegraded;
  }

  const fs::path comparison = opts.out_dir / "comparison.tsv";
  write_text(comparison, comparison_table(outcome, written));
  outcome.artifacts.push_back(comparison);

  for (const auto& d : dumps) {
    const fs::path file = opts.out_dir / ("bohmian_traj_" + std::to_string(d.sample) + ".tsv");
    write_text(file, dump_table(d, 2.0 * std::abs(p.g)));
    outcome.artifacts.push_back(file);
  }

  if (opts.plot && !written.empty()) {
    const fs::path svg = opts.out_dir / "plot.svg";
    render_plot(comparison, svg, p.name.empty() ? "population inversion" : p.name);
    outcome.artifacts.push_back(svg);
  }

  json manifest;
  manifest["schema"] = "rabi-run/1";
  manifest["scenario"] = json::parse(write_scenario(p));
  manifest["methods"] = methods;
  json files = json::array();
  for (const auto& a : outcome.artifacts) files.push_back(a.filename().string());
  manifest["artifacts"] = files;
  manifest["exit_code"] = outcome.exit_code;
  const fs::path manifest_path = opts.out_dir / "manifest.json";
  write_text(manifest_path, manifest.dump(2) + "\n");
  outcome.artifacts.push_back(manifest_path);
  return outcome;
}

void render_plot(const fs::path& comparison_tsv, const fs::path& svg_out, const std::string& title) {
  std::ifstream in(comparison_tsv);
  if (!in) throw std::runtime_error("cannot read " + comparison_tsv.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, '\t')) header.push_back(col);
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    cells.resize(header.size());
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw std::runtime_error("comparison table has no rows");

  const double width = 900, height = 420, left = 60, right = 20, top = 36, bottom = 44;
  const double x_max = std::stod(rows.back()[1]);
  auto px = [&](double x) { return left + (width - left - right) * x / x_max; };
  auto py = [&](double w) { return top + (height - top - bottom) * (1.0 - w) / 2.0; };
  const std::map<std::string, std::string> colors{
      {"jc", "#2e8b57"}, {"quantum", "#2e8b57"}, {"meanfield", "#1f4fd1"}, {"bohmian", "#c8102e"}};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"20\">" << title << "</text>\n";
  for (double w : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    svg << "<line x1=\"" << left << "\" x2=\"" << width - right << "\" y1=\"" << py(w) << "\" y2=\""
        << py(w) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << py(w) + 4 << "\" text-anchor=\"end\">" << w
        << "</text>\n";
  }
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\">2gt</text>\n";

  int legend = 0;
  for (std::size_t c = 2; c + 2 < header.size(); c += 3) {
    const std::string method = header[c].substr(std::string("W_mean_").size());
    const std::string color = colors.contains(method) ? colors.at(method) : "#555";
    if (!rows.front()[c + 1].empty()) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (const auto& r : rows) svg << px(std::stod(r[1])) << ',' << py(std::stod(r[c + 2])) << ' ';
      for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        svg << px(std::stod((*it)[1])) << ',' << py(std::stod((*it)[c + 1])) << ' ';
      }
      svg << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (const auto& r : rows) svg << px(std::stod(r[1])) << ',' << py(std::stod(r[c])) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << width - right - 90 << "\" y=\"" << top + 14 * legend++ << "\" fill=\""
        << color << "\">" << method << "</text>\n";
  }
  svg << "</svg>\n";
  write_text(svg_out, svg.str());
}

}  // namespace rabi
