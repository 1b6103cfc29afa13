// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the CLI front end. Each command is a plain
// function over ExperimentConfig so tests can drive them directly; the
// binary in tools/ only maps flags and exit codes.

#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "hsqkd/config.hpp"
#include "hsqkd/io.hpp"
#include "hsqkd/montecarlo.hpp"
#include "hsqkd/optimizer.hpp"

namespace hsqkd::cli {

// Exit codes: 0 success, 2 config error, 3 validation failure, 4 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;

inline std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

inline SweepConfig to_sweep_config(const ExperimentConfig& cfg) {
  SweepConfig sc;
  sc.source = cfg.source;
  sc.protocol = cfg.protocol;
  sc.f_ec = cfg.f_ec;
  sc.channel = cfg.channel;
  sc.search = cfg.search;
  if (cfg.mu_fixed) {
    // A pinned mu degenerates the search to a single point.
    sc.search.mu_lo = cfg.source.mu;
    sc.search.mu_hi = cfg.source.mu * (1.0 + 1e-12);
    sc.search.grid_points = 2;
  }
  return sc;
}

struct SweepOutput {
  std::vector<SweepRecord> records;
  std::string csv_path;
  std::string svg_path;  // empty unless svg was requested
};

/// Run a loss sweep and write the CSV (and optionally an SVG rate plot).
inline SweepOutput run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                             bool svg = false) {
  if (cfg.losses.empty())
    throw error(errc::config_parse, cfg.label + ": sweep requires a non-empty loss grid");
  SweepOutput out;
  out.records = sweep(to_sweep_config(cfg), cfg.losses);
  out.csv_path = join_path(out_dir, cfg.csv_path);
  write_file(out.csv_path, sweep_csv(out.records));
  if (svg) {
    PlotSeries series;
    series.label = cfg.label;
    for (const auto& rec : out.records) series.points.emplace_back(rec.loss_db, rec.rate);
    out.svg_path = join_path(out_dir, cfg.svg_path);
    write_file(out.svg_path,
               svg_line_plot(cfg.label, "loss (dB)", "secret key rate", {series}));
  }
  return out;
}

/// Optimize mu at each loss and print a table; no files written.
inline std::string run_optimize(const ExperimentConfig& cfg) {
  if (cfg.losses.empty())
    throw error(errc::config_parse, cfg.label + ": optimize requires a non-empty loss grid");
  const auto records = sweep(to_sweep_config(cfg), cfg.losses);
  std::ostringstream out;
  out << "# " << cfg.label << " (" << source_kind_name(cfg.source.kind) << ", "
      << protocol_name(cfg.protocol) << ")\n";
  out << "loss_db mu_opt rate\n";
  for (const auto& rec : records) {
    out << format_sci(rec.loss_db) << ' ' << (rec.mu_opt ? format_sci(*rec.mu_opt) : "-") << ' '
        << format_sci(rec.rate) << '\n';
  }
  return out.str();
}

struct McValidationReport {
  bool pass = true;
  std::string text;
};

/// Compare the event-level simulation against the analytic statistics and
/// report TV distances and the click-fraction delta against the configured
/// tolerances.
inline McValidationReport run_validate_mc(const ExperimentConfig& cfg) {
  if (cfg.source.kind != SourceKind::MHPS && !cfg.source.heralded())
    throw error(errc::config_parse,
                cfg.label + ": validate-mc requires a heralded architecture");
  if (cfg.mc.trials < 1)
    throw error(errc::config_parse, cfg.label + ": INVALID_TRIALS, mc trials must be >= 1");

  McValidationReport report;
  std::ostringstream out;
  const auto res = mc::simulate(cfg.source, cfg.mc.trials, cfg.mc.seed);
  out << "# validate-mc " << cfg.label << " trials=" << cfg.mc.trials << " seed=" << cfg.mc.seed
      << "\n";
  out << "sampler: inversion_draws=" << res.inversion_draws
      << " rejection_draws=" << res.rejection_draws << "\n";

  const auto check = [&](const std::string& name, double value, double tol) {
    const bool ok = value < tol;
    report.pass = report.pass && ok;
    out << name << "=" << format_sci(value) << " tol=" << format_sci(tol) << " "
        << (ok ? "ok" : "FAIL") << "\n";
  };

  check("tv_total", mc::tv_distance(res.empirical_pmf, pmf(cfg.source)), cfg.mc.tv_tolerance);
  if (cfg.source.heralded()) {
    const double p_click = 1.0 - p_noclick(cfg.source);
    check("click_fraction_delta", std::abs(res.click_fraction - p_click),
          cfg.mc.click_tolerance);
    if (res.click_trials > 0)
      check("tv_click",
            mc::tv_distance(res.empirical_pmf_click, pmf_conditional(cfg.source, Branch::Click)),
            cfg.mc.tv_tolerance);
    if (res.click_trials < res.trials)
      check("tv_noclick",
            mc::tv_distance(res.empirical_pmf_noclick,
                            pmf_conditional(cfg.source, Branch::NoClick)),
            cfg.mc.tv_tolerance);
  }
  out << (report.pass ? "PASS" : "FAIL") << "\n";
  report.text = out.str();
  return report;
}

struct CompareOutput {
  std::vector<double> losses;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rates;  // rates[series][loss index]
  std::string csv_path;
};

/// Sweep several configs sharing one loss grid into a wide rate CSV.
inline CompareOutput run_compare(const std::vector<ExperimentConfig>& configs,
                                 const std::string& out_dir, const std::string& name) {
  if (configs.size() < 2)
    throw error(errc::grid_mismatch, "compare needs at least 2 configs");
  for (const auto& cfg : configs) {
    if (cfg.losses.empty())
      throw error(errc::config_parse, cfg.label + ": compare requires a non-empty loss grid");
    if (cfg.losses != configs.front().losses)
      throw error(errc::grid_mismatch,
                  cfg.label + ": loss grid differs from " + configs.front().label);
  }

  CompareOutput out;
  out.losses = configs.front().losses;
  for (const auto& cfg : configs) {
    out.labels.push_back(cfg.label);
    const auto records = sweep(to_sweep_config(cfg), cfg.losses);
    std::vector<double> rates;
    rates.reserve(records.size());
    for (const auto& rec : records) rates.push_back(rec.rate);
    out.rates.push_back(std::move(rates));
  }

  std::string csv = "loss_db";
  for (const auto& label : out.labels) csv += "," + label;
  csv += '\n';
  for (size_t i = 0; i < out.losses.size(); ++i) {
    csv += format_sci(out.losses[i]);
    for (const auto& rates : out.rates) csv += "," + format_sci(rates[i]);
    csv += '\n';
  }
  out.csv_path = join_path(out_dir, name);
  write_file(out.csv_path, csv);
  return out;
}

}  // namespace hsqkd::cli
