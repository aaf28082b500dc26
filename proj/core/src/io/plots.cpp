/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/plots.hpp"

#include "mgrid/io/format.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace mgrid::io {

namespace {

constexpr double kWidth = 960.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kPanelHeight = 170.0;
constexpr double kPanelGap = 40.0;
constexpr double kTop = 40.0;

std::string f2(double v) { return format_fixed(v, 2); }

double nice_step(double range) {
  const double raw = range / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

struct Panel {
  double top = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  double t_end = 1.0;

  double px(double t) const { return kLeft + t / t_end * (kWidth - kLeft - kRight); }
  double py(double v) const { return top + (hi - v) / (hi - lo) * kPanelHeight; }
};

Panel make_panel(double top, double t_end, double lo, double hi) {
  if (hi - lo < 1e-6) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {top, lo - pad, hi + pad, t_end};
}

void axes(std::ostream& out, const Panel& p, const std::string& title, const std::string& unit) {
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  out << "<rect x=\"" << f2(x0) << "\" y=\"" << f2(p.top) << "\" width=\"" << f2(x1 - x0) << "\" height=\""
      << f2(kPanelHeight) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << f2(x0) << "\" y=\"" << f2(p.top - 6) << "\" font-size=\"13\">" << title << " [" << unit
      << "]</text>\n";
  const double step = nice_step(p.hi - p.lo);
  for (double v = std::ceil(p.lo / step) * step; v <= p.hi + 1e-12; v += step) {
    const double y = p.py(v);
    out << "<line x1=\"" << f2(x0 - 4) << "\" y1=\"" << f2(y) << "\" x2=\"" << f2(x1) << "\" y2=\"" << f2(y)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << f2(x0 - 8) << "\" y=\"" << f2(y + 4) << "\" font-size=\"10\" text-anchor=\"end\">"
        << format_number(std::abs(v) < 1e-12 ? 0.0 : v) << "</text>\n";
  }
  const double tstep = p.t_end > 24.0 ? 6.0 : std::max(1.0, nice_step(p.t_end));
  for (double t = 0.0; t <= p.t_end + 1e-9; t += tstep) {
    const double x = p.px(t);
    out << "<text x=\"" << f2(x) << "\" y=\"" << f2(p.top + kPanelHeight + 14)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << format_number(t) << "</text>\n";
  }
}

void polyline(std::ostream& out, const Panel& p, std::size_t n, const std::function<double(std::size_t)>& t,
              const std::function<double(std::size_t)>& v, const char* colour) {
  out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out << ' ';
    out << f2(p.px(t(i))) << ',' << f2(p.py(v(i)));
  }
  out << "\"/>\n";
}

}  // namespace

void render_trajectory_svg(const SimulationLog& log, const StoragePolytope& polytope, std::ostream& out) {
  const auto& rows = log.plant;
  const std::size_t n = rows.size();
  const double dt = log.dt_plant_h;
  const double t_end = std::max(dt, static_cast<double>(n) * dt);
  const double height = kTop + 4 * (kPanelHeight + kPanelGap);
  const auto& box = polytope.box();

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(kWidth) << "\" height=\"" << f2(height)
      << "\" viewBox=\"0 0 " << f2(kWidth) << ' ' << f2(height) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << f2(kLeft) << "\" y=\"20\" font-size=\"15\">Closed loop, " << to_string(log.mode)
      << " (time in h)</text>\n";

  auto t_at = [dt](std::size_t i) { return static_cast<double>(i) * dt; };
  auto range = [&](const std::function<double(std::size_t)>& v, double lo, double hi) {
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, v(i));
      hi = std::max(hi, v(i));
    }
    return std::pair{lo, hi};
  };

  // Fuel cell
  {
    auto v = [&](std::size_t i) { return rows[i].dispatch.p_fc; };
    const auto [lo, hi] = range(v, 0.0, 0.0);
    const Panel p = make_panel(kTop, t_end, lo, hi);
    axes(out, p, "fuel cell p_FC", "pu");
    polyline(out, p, n, t_at, v, "#c0392b");
  }
  // Battery with admissible band and violation crosses
  {
    auto v = [&](std::size_t i) { return rows[i].dispatch.p_b; };
    auto cmd = [&](std::size_t i) { return rows[i].dispatch.commanded_p_b; };
    auto [lo, hi] = range(cmd, box.p_min, box.p_max);
    const Panel p = make_panel(kTop + (kPanelHeight + kPanelGap), t_end, lo, hi);
    axes(out, p, "battery p_B", "pu");
    if (n > 0) {
      out << "<polygon fill=\"#2e86c1\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < n; ++i) {
        const auto b = polytope.power_bounds_at(polytope.clamp_energy(rows[i].x));
        out << f2(p.px(t_at(i))) << ',' << f2(p.py(b.hi)) << ' ';
      }
      for (std::size_t i = n; i-- > 0;) {
        const auto b = polytope.power_bounds_at(polytope.clamp_energy(rows[i].x));
        out << f2(p.px(t_at(i))) << ',' << f2(p.py(b.lo)) << (i > 0 ? " " : "");
      }
      out << "\"/>\n";
    }
    polyline(out, p, n, t_at, v, "#1f618d");
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].limit_violation <= 0.0) continue;
      const double x = p.px(t_at(i));
      const double y = p.py(cmd(i));
      out << "<path d=\"M" << f2(x - 3) << ',' << f2(y - 3) << " L" << f2(x + 3) << ',' << f2(y + 3) << " M"
          << f2(x - 3) << ',' << f2(y + 3) << " L" << f2(x + 3) << ',' << f2(y - 3)
          << "\" stroke=\"red\" stroke-width=\"1.2\" class=\"violation\"/>\n";
    }
  }
  // PV
  {
    auto v = [&](std::size_t i) { return rows[i].dispatch.p_pv; };
    auto avail = [&](std::size_t i) { return rows[i].w_pv; };
    const auto [lo, hi] = range(avail, 0.0, 0.0);
    const Panel p = make_panel(kTop + 2 * (kPanelHeight + kPanelGap), t_end, lo, hi);
    axes(out, p, "PV p_PV (dashed: available)", "pu");
    out << "<g stroke-dasharray=\"4 3\">\n";
    polyline(out, p, n, t_at, avail, "#b7950b");
    out << "</g>\n";
    polyline(out, p, n, t_at, v, "#d4ac0d");
  }
  // Stored energy
  {
    auto v = [&](std::size_t i) { return rows[i].x; };
    const auto [lo, hi] = range(v, box.x_min, box.x_max);
    const Panel p = make_panel(kTop + 3 * (kPanelHeight + kPanelGap), t_end, lo, hi);
    axes(out, p, "stored energy x", "pu h");
    for (double bound : {box.x_min, box.x_max}) {
      out << "<line x1=\"" << f2(kLeft) << "\" y1=\"" << f2(p.py(bound)) << "\" x2=\"" << f2(kWidth - kRight)
          << "\" y2=\"" << f2(p.py(bound)) << "\" stroke=\"#888\" stroke-dasharray=\"6 4\"/>\n";
    }
    polyline(out, p, n, t_at, v, "#117a65");
  }
  out << "</svg>\n";
}

void render_violation_histogram_svg(const ViolationReport& report, std::ostream& out) {
  constexpr double w = 640.0;
  constexpr double h = 360.0;
  constexpr double left = 60.0;
  constexpr double bottom = 300.0;
  constexpr double top = 50.0;
  const double plot_w = w - left - 20.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(w) << "\" height=\"" << f2(h)
      << "\" viewBox=\"0 0 " << f2(w) << ' ' << f2(h) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << f2(left) << "\" y=\"24\" font-size=\"15\">Violation magnitudes (bin "
      << format_number(ViolationReport::kBinWidth) << " pu)</text>\n";
  out << "<text x=\"" << f2(w - 20) << "\" y=\"24\" font-size=\"13\" text-anchor=\"end\">" << report.violation_steps
      << " events</text>\n";
  out << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(bottom) << "\" x2=\"" << f2(w - 20) << "\" y2=\""
      << f2(bottom) << "\" stroke=\"#444\"/>\n";
  out << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top) << "\" x2=\"" << f2(left) << "\" y2=\"" << f2(bottom)
      << "\" stroke=\"#444\"/>\n";

  const std::size_t bins = std::max<std::size_t>(report.histogram.size(), 4);
  const std::size_t peak = report.histogram.empty()
                               ? 1
                               : std::max<std::size_t>(1, *std::max_element(report.histogram.begin(),
                                                                            report.histogram.end()));
  const double bar_w = plot_w / static_cast<double>(bins);
  for (std::size_t b = 0; b < report.histogram.size(); ++b) {
    const double bh = static_cast<double>(report.histogram[b]) / static_cast<double>(peak) * (bottom - top);
    out << "<rect x=\"" << f2(left + bar_w * static_cast<double>(b) + 1) << "\" y=\"" << f2(bottom - bh)
        << "\" width=\"" << f2(bar_w - 2) << "\" height=\"" << f2(bh) << "\" fill=\"#c0392b\"/>\n";
    if (report.histogram[b] > 0) {
      out << "<text x=\"" << f2(left + bar_w * (static_cast<double>(b) + 0.5)) << "\" y=\"" << f2(bottom - bh - 4)
          << "\" font-size=\"10\" text-anchor=\"middle\">" << report.histogram[b] << "</text>\n";
    }
  }
  const std::size_t label_every = std::max<std::size_t>(1, bins / 10);
  for (std::size_t b = 0; b <= bins; b += label_every) {
    out << "<text x=\"" << f2(left + bar_w * static_cast<double>(b)) << "\" y=\"" << f2(bottom + 16)
        << "\" font-size=\"10\" text-anchor=\"middle\">"
        << format_number(static_cast<double>(b) * ViolationReport::kBinWidth) << "</text>\n";
  }
  out << "<text x=\"" << f2(left + plot_w / 2) << "\" y=\"" << f2(bottom + 36)
      << "\" font-size=\"12\" text-anchor=\"middle\">magnitude [pu]</text>\n";
  if (report.violation_steps == 0) {
    out << "<text x=\"" << f2(left + plot_w / 2) << "\" y=\"" << f2((top + bottom) / 2)
        << "\" font-size=\"16\" text-anchor=\"middle\" fill=\"#666\">0 events</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace mgrid::io
