#include "tcpr/report_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "tcpr/io_util.hpp"

namespace tcpr {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#ff7f0e", "#9467bd", "#8c564b"};

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string format_general(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string config_block(const ConfigEcho& config) {
  std::string out;
  for (const auto& [k, v] : config) {
    out += "# " + k + "=" + v + "\n";
  }
  return out;
}

}  // namespace

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("cannot open " + path.string() + " for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoFailure("failed while reading " + path.string());
  }
  return std::move(buf).str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoFailure("cannot open " + tmp.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out.good()) {
      throw IoFailure("failed while writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoFailure("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

ConfigEcho config_echo(const EvalConfig& config, uint64_t master_seed) {
  ConfigEcho echo;
  echo.emplace_back("transform", std::string(transform_kind_name(config.pipeline.transform)));
  if (config.pipeline.transform == TransformKind::tcpr) {
    echo.emplace_back("centroid",
                      std::string(centroid_kind_name(config.pipeline.estimator.kind)));
    if (config.pipeline.estimator.kind == CentroidEstimator::Kind::base_neighbors) {
      echo.emplace_back("k_neighbors", std::to_string(config.pipeline.estimator.k));
      echo.emplace_back("p", format_fixed(config.pipeline.estimator.p, 3));
    }
  }
  echo.emplace_back("classifier", std::string(classifier_kind_name(config.classifier)));
  echo.emplace_back("gamma", format_fixed(config.train.gamma, 3));
  if (config.classifier == ClassifierKind::cosine) {
    echo.emplace_back("learning_rate", format_fixed(config.train.learning_rate, 5));
    echo.emplace_back("epochs", std::to_string(config.train.epochs));
    echo.emplace_back("init", std::string(weight_init_name(config.train.init)));
  }
  echo.emplace_back("n_way", std::to_string(config.n_way));
  echo.emplace_back("k_shot", std::to_string(config.k_shot));
  echo.emplace_back("q_query", std::to_string(config.q_query));
  echo.emplace_back("episodes", std::to_string(config.episodes));
  echo.emplace_back("seed", std::to_string(master_seed));
  return echo;
}

void write_csv(const std::filesystem::path& path, const ConfigEcho& config,
               const std::string& header, const std::vector<std::string>& rows) {
  std::string out = config_block(config);
  out += header;
  out += '\n';
  for (const std::string& row : rows) {
    out += row;
    out += '\n';
  }
  atomic_write_file(path, out);
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  ConfigEcho config = config_echo(report.config, report.master_seed);

  std::vector<std::string> rows;
  rows.reserve(report.episode_index.size());
  for (std::size_t i = 0; i < report.episode_index.size(); ++i) {
    rows.push_back(std::to_string(report.episode_index[i]) + "," +
                   format_fixed(report.accuracy[i], 6));
  }
  write_csv(path, config, "episode,accuracy", rows);

  std::filesystem::path summary = path;
  summary += ".summary";
  std::string row = std::string(transform_kind_name(report.config.pipeline.transform));
  row += ",";
  row += centroid_kind_name(report.config.pipeline.estimator.kind);
  row += "," + std::to_string(report.config.pipeline.estimator.k);
  row += "," + format_fixed(report.config.pipeline.estimator.p, 3);
  row += ",";
  row += classifier_kind_name(report.config.classifier);
  row += "," + format_fixed(report.config.train.gamma, 3);
  row += "," + std::to_string(report.config.n_way);
  row += "," + std::to_string(report.config.k_shot);
  row += "," + std::to_string(report.config.q_query);
  row += "," + std::to_string(report.config.episodes);
  row += "," + std::to_string(report.failed);
  row += "," + format_fixed(report.mean_accuracy, 4);
  row += "," + format_fixed(report.ci95_half_width, 4);
  write_csv(summary, config,
            "transform,centroid,k,p,classifier,gamma,n_way,k_shot,q,episodes,failed,"
            "mean_acc,ci95",
            {row});
}

void write_curve_csv(const BiasCurve& curve, const std::filesystem::path& path,
                     const ConfigEcho& config) {
  std::vector<std::string> rows;
  rows.reserve(curve.bin_center.size());
  for (std::size_t b = 0; b < curve.bin_center.size(); ++b) {
    rows.push_back(format_fixed(curve.bin_center[b], 6) + "," +
                   format_fixed(curve.mean_accuracy[b], 6) + "," +
                   format_fixed(curve.std_accuracy[b], 6) + "," +
                   std::to_string(curve.count[b]));
  }
  write_csv(path, config, "bin_center,mean_accuracy,std_accuracy,count", rows);
}

void emit_plot(const std::filesystem::path& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<PlotSeries>& series, const ConfigEcho& config) {
  if (series.empty()) throw BadSpec("plot needs at least one series");
  bool any_point = false;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DimMismatch("plot series '" + s.name + "' has mismatched x/y lengths");
    }
    if (!s.x.empty()) any_point = true;
  }
  if (!any_point) throw BadSpec("plot needs at least one point");

  constexpr double kW = 800, kH = 520;
  constexpr double kL = 70, kR = 170, kT = 44, kB = 54;

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  }
  // Pad the ranges so points never sit on the frame; degenerate spans get a
  // fixed margin.
  double xpad = (xmax - xmin) > 0 ? 0.05 * (xmax - xmin) : 0.5;
  double ypad = (ymax - ymin) > 0 ? 0.05 * (ymax - ymin) : 0.5;
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR);
  };
  auto py = [&](double y) {
    return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
  };
  auto coord = [](double v) { return format_fixed(v, 2); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<!--\n";
  for (const auto& [k, v] : config) {
    svg += "# " + k + "=" + v + "\n";
  }
  svg += "-->\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"520\" "
         "viewBox=\"0 0 800 520\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"520\" fill=\"white\"/>\n";
  svg += "<text x=\"" + coord(kL + (kW - kL - kR) / 2) + "\" y=\"24\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         xml_escape(title) + "</text>\n";

  // Axes with 5 ticks each.
  svg += "<line x1=\"" + coord(kL) + "\" y1=\"" + coord(kH - kB) + "\" x2=\"" +
         coord(kW - kR) + "\" y2=\"" + coord(kH - kB) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + coord(kL) + "\" y1=\"" + coord(kT) + "\" x2=\"" + coord(kL) +
         "\" y2=\"" + coord(kH - kB) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i < 5; ++i) {
    double fx = xmin + (xmax - xmin) * i / 4.0;
    double fy = ymin + (ymax - ymin) * i / 4.0;
    std::string x = coord(px(fx));
    std::string y = coord(py(fy));
    svg += "<line x1=\"" + x + "\" y1=\"" + coord(kH - kB) + "\" x2=\"" + x + "\" y2=\"" +
           coord(kH - kB + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + coord(kH - kB + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_general(fx) + "</text>\n";
    svg += "<line x1=\"" + coord(kL - 5) + "\" y1=\"" + y + "\" x2=\"" + coord(kL) +
           "\" y2=\"" + y + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + coord(kL - 8) + "\" y=\"" + coord(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           format_general(fy) + "</text>\n";
  }
  svg += "<text x=\"" + coord(kL + (kW - kL - kR) / 2) + "\" y=\"" + coord(kH - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + coord(kT + (kH - kT - kB) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 " +
         coord(kT + (kH - kT - kB) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (s.x.size() > 1) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) pts += ' ';
        pts += coord(px(s.x[i])) + "," + coord(py(s.y[i]));
      }
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      svg += "<circle cx=\"" + coord(px(s.x[i])) + "\" cy=\"" + coord(py(s.y[i])) +
             "\" r=\"3\" fill=\"" + std::string(color) + "\"/>\n";
    }
    // Legend entry.
    double ly = kT + 8 + 18.0 * static_cast<double>(si);
    svg += "<rect x=\"" + coord(kW - kR + 14) + "\" y=\"" + coord(ly) +
           "\" width=\"10\" height=\"10\" fill=\"" + std::string(color) + "\"/>\n";
    svg += "<text x=\"" + coord(kW - kR + 30) + "\" y=\"" + coord(ly + 9) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(s.name) +
           "</text>\n";
  }
  svg += "</svg>\n";
  atomic_write_file(path, svg);
}

}  // namespace tcpr
