#include "l1lb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

namespace l1lb {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double slow_threshold(std::size_t m) { return 0.5 - 3.0 * std::sqrt(0.25 / static_cast<double>(m)); }

}  // namespace

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeFit fit;
  fit.cells = x.size();
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  if (x.size() < 2) return fit;
  const std::size_t m = x.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) return fit;  // all cells at the same n
  const double slope = sxy / sxx;
  fit.slope = slope;
  fit.intercept = my - slope * mx;
  if (m >= 3) {
    double sse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = ly[i] - *fit.intercept - slope * lx[i];
      sse += r * r;
    }
    const double dof = static_cast<double>(m - 2);
    const double se = std::sqrt(sse / dof / sxx);
    const double q = boost::math::quantile(boost::math::students_t(dof), 0.975);
    fit.ci_low = slope - q * se;
    fit.ci_high = slope + q * se;
  }
  return fit;
}

Report build_report(const std::vector<TrialResult>& results) {
  using Key = std::tuple<int, double, Index, Index>;
  std::map<Key, std::vector<const TrialResult*>> groups;
  for (const TrialResult& r : results) groups[{r.theorem, r.sigma, r.n, r.p}].push_back(&r);

  Report report;
  for (const auto& [key, rows] : groups) {
    ReportCell cell;
    std::tie(cell.theorem, cell.sigma, cell.n, cell.p) = key;
    std::vector<double> excess;
    for (const TrialResult* r : rows) {
      ++cell.trials;
      if (r->satisfied_fast) ++cell.fast_satisfied;
      if (r->satisfied_slow) {
        ++cell.slow_applicable;
        if (*r->satisfied_slow) ++cell.slow_satisfied;
      }
      cell.fast_bound = r->fast_bound;
      if (r->slow_bound) cell.slow_bound = r->slow_bound;
      excess.push_back(r->min_excess);
    }
    cell.median_min_excess = median(std::move(excess));
    if (cell.fast_satisfied != cell.trials) report.all_passed = false;
    if (cell.slow_applicable &&
        static_cast<double>(cell.slow_satisfied) / static_cast<double>(cell.slow_applicable) <
            slow_threshold(cell.slow_applicable)) {
      report.all_passed = false;
    }
    report.cells.push_back(cell);
  }

  std::map<std::pair<int, double>, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const ReportCell& c : report.cells) {
    auto& s = series[{c.theorem, c.sigma}];
    s.first.push_back(static_cast<double>(c.n));
    s.second.push_back(c.median_min_excess);
  }
  for (const auto& [key, xy] : series) {
    SlopeFit fit = fit_loglog(xy.first, xy.second);
    fit.theorem = key.first;
    fit.sigma = key.second;
    report.fits.push_back(fit);
  }
  return report;
}

void write_report_table(const Report& report, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof line, "%-7s %7s %7s %8s %6s %9s %9s %14s %12s %12s\n", "theorem", "n", "p",
                "sigma", "trials", "fast_ok", "slow_ok", "median_excess", "fast_bound", "slow_bound");
  os << line;
  for (const ReportCell& c : report.cells) {
    const std::string slow_ok =
        c.slow_applicable ? std::to_string(c.slow_satisfied) + "/" + std::to_string(c.slow_applicable) : "-";
    const std::string fast_ok = std::to_string(c.fast_satisfied) + "/" + std::to_string(c.trials);
    std::snprintf(line, sizeof line, "%-7d %7ld %7ld %8.4g %6zu %9s %9s %14.6e %12.4e %12s\n", c.theorem,
                  static_cast<long>(c.n), static_cast<long>(c.p), c.sigma, c.trials, fast_ok.c_str(),
                  slow_ok.c_str(), c.median_min_excess, c.fast_bound,
                  c.slow_bound ? fmt("%.4e", *c.slow_bound).c_str() : "-");
    os << line;
  }
  os << '\n';
  for (const SlopeFit& f : report.fits) {
    os << "theorem " << f.theorem << " sigma " << fmt("%.4g", f.sigma) << ": ";
    if (f.insufficient_cells()) {
      os << "slope omitted (insufficient-cells, " << f.cells << ")\n";
      continue;
    }
    os << "slope " << fmt("%.4f", *f.slope);
    if (f.ci_low) os << "  95% CI [" << fmt("%.4f", *f.ci_low) << ", " << fmt("%.4f", *f.ci_high) << "]";
    os << "  (" << f.cells << " cells)\n";
  }
  os << (report.all_passed ? "all cells passed\n" : "some cells FAILED\n");
}

void write_report_svg(const Report& report, std::ostream& os) {
  constexpr double W = 640, H = 480, L = 70, R = 20, T = 20, B = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const ReportCell& c : report.cells) {
    if (!(c.median_min_excess > 0.0)) continue;
    xmin = std::min(xmin, std::log10(static_cast<double>(c.n)));
    xmax = std::max(xmax, std::log10(static_cast<double>(c.n)));
    ymin = std::min(ymin, std::log10(c.median_min_excess));
    ymax = std::max(ymax, std::log10(c.median_min_excess));
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = xmin; d <= xmax + 1e-9; d += 1.0) {
    os << "<text x=\"" << fmt("%.1f", px(d)) << "\" y=\"" << H - B + 18
       << "\" font-size=\"12\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (double d = ymin; d <= ymax + 1e-9; d += 1.0) {
    os << "<text x=\"" << L - 6 << "\" y=\"" << fmt("%.1f", py(d) + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">n</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"13\" transform=\"rotate(-90 14 " << H / 2
     << ")\" text-anchor=\"middle\">median min excess</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::size_t series = 0;
  for (const SlopeFit& f : report.fits) {
    const char* color = colors[series++ % 6];
    std::string pts;
    double x0 = 0, y0 = 0;
    bool first = true;
    for (const ReportCell& c : report.cells) {
      if (c.theorem != f.theorem || c.sigma != f.sigma || !(c.median_min_excess > 0.0)) continue;
      const double lx = std::log10(static_cast<double>(c.n)), ly = std::log10(c.median_min_excess);
      if (first) x0 = lx, y0 = ly, first = false;
      pts += fmt("%.1f", px(lx)) + "," + fmt("%.1f", py(ly)) + " ";
      os << "<circle cx=\"" << fmt("%.1f", px(lx)) << "\" cy=\"" << fmt("%.1f", py(ly)) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    }
    if (first) continue;
    os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    // reference slopes through the first point
    for (double ref : {-1.0, -0.5}) {
      const double x1 = xmax;
      const double y1 = y0 + ref * (x1 - x0);
      os << "<line x1=\"" << fmt("%.1f", px(x0)) << "\" y1=\"" << fmt("%.1f", py(y0)) << "\" x2=\""
         << fmt("%.1f", px(x1)) << "\" y2=\"" << fmt("%.1f", py(y1)) << "\" stroke=\"" << color
         << "\" stroke-dasharray=\"" << (ref < -0.75 ? "6,4" : "2,3") << "\" opacity=\"0.6\"/>\n";
    }
    os << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 * series << "\" font-size=\"12\" fill=\"" << color
       << "\">theorem " << f.theorem << ", sigma " << fmt("%.4g", f.sigma)
       << (f.slope ? ", slope " + fmt("%.3f", *f.slope) : std::string()) << "</text>\n";
  }
  os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 16
     << "\" font-size=\"11\" text-anchor=\"end\">dashed: slope -1, dotted: slope -1/2</text>\n";
  os << "</svg>\n";
}

}  // namespace l1lb
