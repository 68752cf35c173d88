#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tcpr/episodes.hpp"
#include "tcpr/simulation.hpp"

namespace tcpr {

// Ordered key=value pairs describing the fully-resolved configuration of a
// run. Every output file embeds these as leading "# key=value" comment
// lines so a result can always be traced back to the exact invocation.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

ConfigEcho config_echo(const EvalConfig& config, uint64_t master_seed);

// Fixed-precision, locale-independent float formatting; all writers share
// it so identical inputs produce byte-identical files.
std::string format_fixed(double v, int decimals);

// Generic CSV writer: config comments, one header line, then rows.
void write_csv(const std::filesystem::path& path, const ConfigEcho& config,
               const std::string& header, const std::vector<std::string>& rows);

// Per-episode accuracies ("episode,accuracy") plus a one-row digest next to
// it at <path>.summary.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

// Bias curve ("bin_center,mean_accuracy,std_accuracy,count"); empty bins
// are kept so the bin structure is explicit.
void write_curve_csv(const BiasCurve& curve, const std::filesystem::path& path,
                     const ConfigEcho& config);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line plot (axes, ticks, legend, point markers). A pure
// function of its inputs: no timestamps, no randomness, byte-identical
// across runs. The config echo rides along in an XML comment.
void emit_plot(const std::filesystem::path& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series, const ConfigEcho& config);

}  // namespace tcpr
