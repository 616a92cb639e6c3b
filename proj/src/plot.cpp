#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "deepo/error.hpp"
#include "deepo/trace.hpp"

namespace deepo {

namespace {

constexpr double kPanelWidth = 720.0;
constexpr double kPanelHeight = 300.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 150.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;
constexpr int kTicks = 5;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string name;
  std::vector<double> t;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

std::string quantity_label(PlotQuantity q) {
  switch (q) {
    case PlotQuantity::States: return "states";
    case PlotQuantity::MinSvd: return "minsvd";
    case PlotQuantity::Cost: return "cost";
  }
  return "value";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string tick_label(double v, bool log_axis) {
  if (log_axis) return "1e" + std::to_string(static_cast<int>(std::lround(v)));
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

bool in_window(const TraceRecord& r, const PlotOptions& o) {
  return o.max_time < 0 || r.k <= o.max_time;
}

std::vector<Panel> build_panels(const std::vector<TraceLog>& traces, PlotQuantity q,
                                const PlotOptions& o) {
  std::vector<Panel> panels;
  if (q == PlotQuantity::States) {
    for (const TraceLog& tr : traces) {
      Panel p;
      p.title = tr.label;
      for (Eigen::Index i = 0; i < tr.n; ++i) {
        Series s;
        s.name = "x" + std::to_string(i + 1);
        for (const TraceRecord& r : tr.records) {
          if (!in_window(r, o)) continue;
          s.t.push_back(r.k);
          s.y.push_back(r.x(i));
        }
        p.series.push_back(std::move(s));
      }
      panels.push_back(std::move(p));
    }
    return panels;
  }
  Panel p;
  for (const TraceLog& tr : traces) {
    Series s;
    s.name = tr.label;
    for (const TraceRecord& r : tr.records) {
      if (!in_window(r, o)) continue;
      s.t.push_back(r.k);
      s.y.push_back(q == PlotQuantity::MinSvd ? r.sigma_min_phi : r.cost);
    }
    p.series.push_back(std::move(s));
  }
  panels.push_back(std::move(p));
  return panels;
}

void draw_panel(std::ostream& svg, const Panel& panel, double top, bool log_axis,
                const std::string& ylabel) {
  const double x0 = kMarginLeft;
  const double x1 = kPanelWidth - kMarginRight;
  const double y0 = top + kMarginTop;
  const double y1 = top + kPanelHeight - kMarginBottom;

  auto value = [&](double y) {
    if (!log_axis) return y;
    return std::log10(std::max(y, std::numeric_limits<double>::min()));
  };

  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
  double vmin = tmin, vmax = -tmin;
  for (const Series& s : panel.series) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      tmin = std::min(tmin, s.t[i]);
      tmax = std::max(tmax, s.t[i]);
      vmin = std::min(vmin, value(s.y[i]));
      vmax = std::max(vmax, value(s.y[i]));
    }
  }
  if (!std::isfinite(tmin)) {
    tmin = 0;
    tmax = 1;
    vmin = 0;
    vmax = 1;
  }
  if (tmax <= tmin) tmax = tmin + 1;
  if (log_axis) {
    vmin = std::floor(vmin);
    vmax = std::ceil(vmax);
  }
  if (vmax <= vmin) {
    vmin -= 0.5;
    vmax += 0.5;
  }
  auto px = [&](double t) { return x0 + (t - tmin) / (tmax - tmin) * (x1 - x0); };
  auto py = [&](double v) { return y1 - (v - vmin) / (vmax - vmin) * (y1 - y0); };

  if (!panel.title.empty()) {
    svg << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(y0 - 12)
        << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(panel.title) << "</text>\n";
  }
  svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(y1 - y0) << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int i = 0; i <= kTicks; ++i) {
    const double t = tmin + (tmax - tmin) * i / kTicks;
    const double v = vmin + (vmax - vmin) * i / kTicks;
    svg << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(px(t))
        << "\" y2=\"" << num(y1 + 5) << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y1 + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t, false) << "</text>\n";
    svg << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(x0)
        << "\" y2=\"" << num(py(v)) << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(v, log_axis) << "</text>\n";
  }
  svg << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(y1 + 38)
      << "\" text-anchor=\"middle\" font-size=\"12\">Time [k]</text>\n";
  svg << "<text x=\"" << num(20) << "\" y=\"" << num(0.5 * (y0 + y1))
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 20 "
      << num(0.5 * (y0 + y1)) << ")\">" << escape(ylabel) << "</text>\n";

  std::size_t color = 0;
  for (const Series& s : panel.series) {
    const char* stroke = kPalette[color % std::size(kPalette)];
    svg << "<polyline class=\"series\" data-name=\"" << escape(s.name)
        << "\" fill=\"none\" stroke-width=\"1.5\" stroke=\"" << stroke << "\" points=\"";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (i) svg << ' ';
      svg << num(px(s.t[i])) << ',' << num(py(value(s.y[i])));
    }
    svg << "\"/>\n";
    const double ly = y0 + 10 + 18.0 * static_cast<double>(color);
    svg << "<line x1=\"" << num(x1 + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(x1 + 32)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << num(x1 + 38) << "\" y=\"" << num(ly + 4)
        << "\" font-size=\"11\">" << escape(s.name) << "</text>\n";
    ++color;
  }
}

}  // namespace

std::string render_plot(const std::vector<TraceLog>& traces, PlotQuantity quantity,
                        const PlotOptions& options) {
  if (traces.empty()) throw Error(ErrorKind::InvalidArgument, "emit_plot: no traces to plot");
  const std::vector<Panel> panels = build_panels(traces, quantity, options);
  const bool log_axis = quantity == PlotQuantity::MinSvd;
  const std::string ylabel = quantity_label(quantity) + (log_axis ? " (log10)" : "");

  const double title_space = options.title.empty() ? 0.0 : 30.0;
  const double height = title_space + kPanelHeight * static_cast<double>(panels.size());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kPanelWidth)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(kPanelWidth) << ' '
      << num(height) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    svg << "<text x=\"" << num(0.5 * kPanelWidth)
        << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" << escape(options.title)
        << "</text>\n";
  }
  for (std::size_t i = 0; i < panels.size(); ++i) {
    draw_panel(svg, panels[i], title_space + kPanelHeight * static_cast<double>(i), log_axis,
               ylabel);
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::vector<TraceLog>& traces, PlotQuantity quantity,
               const std::filesystem::path& path, const PlotOptions& options) {
  const std::string body = render_plot(traces, quantity, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace deepo
