#include "cpaint/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

namespace cpaint {

namespace {

constexpr double kRowHeight = 8.0;
constexpr double kColumnWidth = 60.0;
constexpr double kColumnGap = 24.0;
constexpr double kTop = 48.0;
constexpr double kLeft = 56.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
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

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  std::ostringstream& body() { return body_; }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width_)
        << "\" height=\"" << num(height_) << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_)
        << "\" font-family=\"sans-serif\" font-size=\"9\">\n"
        << "<defs>\n<clipPath id=\"plot-area\"><rect x=\"0\" y=\"0\" width=\"" << num(width_)
        << "\" height=\"" << num(height_) << "\"/></clipPath>\n</defs>\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(width_) << "\" height=\"" << num(height_)
        << "\" fill=\"#ffffff\"/>\n"
        << "<g clip-path=\"url(#plot-area)\">\n"
        << body_.str() << "</g>\n</svg>\n";
    return out.str();
  }

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

std::string hsl_hex(double hue, double sat, double light) {
  const double c = (1.0 - std::abs(2.0 * light - 1.0)) * sat;
  const double hp = std::fmod(hue, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = light - c / 2.0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

struct ColumnKey {
  std::string site, eu, ru;
  auto operator<=>(const ColumnKey&) const = default;
};

std::string column_title(const ColumnKey& c) {
  std::string t = c.site;
  if (!c.eu.empty()) t += " / " + c.eu;
  if (!c.ru.empty()) t += " / " + c.ru;
  return t;
}

// Column blocks in key order, each holding row indices.
std::map<ColumnKey, std::vector<std::size_t>> columns_of(const std::vector<UnitKey>& keys) {
  std::map<ColumnKey, std::vector<std::size_t>> cols;
  for (std::size_t i = 0; i < keys.size(); ++i) cols[{keys[i].site, keys[i].eu, keys[i].ru}].push_back(i);
  return cols;
}

int max_level(const std::vector<UnitKey>& keys) {
  int m = 0;
  for (const auto& k : keys) m = std::max(m, k.level);
  return m;
}

void depth_axis(std::ostringstream& b, int levels) {
  b << "<g class=\"depth-axis\" stroke=\"#000000\">\n";
  b << "<line x1=\"" << num(kLeft - 6) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft - 6)
    << "\" y2=\"" << num(kTop + (levels + 1) * kRowHeight) << "\"/>\n";
  for (int l = 0; l <= levels; l += 5) {
    const double y = kTop + l * kRowHeight;
    b << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(y + kRowHeight * 0.8)
      << "\" text-anchor=\"end\" stroke=\"none\">" << l * 10 << " cm</text>\n";
  }
  b << "</g>\n";
}

// Stacked bars of one count row inside [x, x+width).
void raw_row(std::ostringstream& b, const CountVector& counts, double x, double y, double width,
             double opacity) {
  const double total = counts.sum();
  b << "<g class=\"raw-row\" fill-opacity=\"" << num(opacity) << "\">";
  if (total > 0) {
    double cursor = x;
    for (Eigen::Index d = 0; d < counts.size(); ++d) {
      if (counts[d] == 0) continue;
      const double w = width * counts[d] / total;
      b << "<rect x=\"" << num(cursor) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(kRowHeight) << "\" fill=\"" << palette_color(static_cast<std::size_t>(d)) << "\"/>";
      cursor += w;
    }
  }
  b << "</g>\n";
}

std::string cp_color(const PaintingMatrix& p, Eigen::Index k) {
  if (p.has_residual && k == p.cols() - 1) return std::string(kResidualColor);
  return palette_color(static_cast<std::size_t>(k));
}

std::string cp_name(const PaintingMatrix& p, Eigen::Index k) {
  if (p.has_residual && k == p.cols() - 1) return "residual";
  return "CP" + std::to_string(k + 1);
}

void painting_row(std::ostringstream& b, const PaintingMatrix& p, Eigen::Index i, double x, double y,
                  double width, double opacity) {
  b << "<g class=\"cell\" data-row=\"" << i << "\" fill-opacity=\"" << num(opacity) << "\"><title>";
  bool first = true;
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    if (p.values(i, k) <= 0.0) continue;
    b << (first ? "" : "; ") << cp_name(p, k) << ": " << num(p.values(i, k));
    first = false;
  }
  b << "</title>";
  double cursor = x;
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    const double frac = p.values(i, k);
    if (frac <= 0.0) continue;
    const double w = width * frac;
    b << "<rect x=\"" << num(cursor) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\""
      << num(kRowHeight) << "\" fill=\"" << cp_color(p, k) << "\"/>";
    cursor += w;
  }
  b << "</g>\n";
}

double max_of(const Eigen::VectorXd& v) { return v.size() ? v.maxCoeff() : 0.0; }

void legend(std::ostringstream& b, double x, double y, const std::vector<std::pair<std::string, std::string>>& items) {
  b << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double yy = y + static_cast<double>(i) * 12.0;
    b << "<rect x=\"" << num(x) << "\" y=\"" << num(yy) << "\" width=\"9\" height=\"9\" fill=\""
      << items[i].second << "\"/><text x=\"" << num(x + 13) << "\" y=\"" << num(yy + 8) << "\">"
      << xml_escape(items[i].first) << "</text>\n";
  }
  b << "</g>\n";
}

}  // namespace

std::string palette_color(std::size_t k) {
  if (k < kPalette.size()) return std::string(kPalette[k]);
  return hsl_hex(static_cast<double>(k) * 137.508, 0.65, 0.5);
}

double shading_lightness(double total, double max_total) {
  if (!(max_total > 0.0)) return 0.0;
  return 1.0 - std::min(1.0, std::log1p(total) / std::log1p(max_total));
}

std::string render_raw(const CountTable& table) {
  std::vector<UnitKey> keys;
  for (const auto& u : table.units()) keys.push_back(u.key);
  const auto cols = columns_of(keys);
  const int levels = max_level(keys);
  const double nmax = table.empty() ? 0.0 : static_cast<double>(table.totals().maxCoeff());
  const double plot_w = static_cast<double>(cols.size()) * (kColumnWidth + kColumnGap);
  Svg svg(kLeft + plot_w + 140.0, std::max(kTop + (levels + 2) * kRowHeight + 20.0,
                                           kTop + 12.0 * table.dimension() + 20.0));
  auto& b = svg.body();
  depth_axis(b, levels);
  double x = kLeft;
  for (const auto& [col, rows] : cols) {
    b << "<g class=\"column\">\n<text x=\"" << num(x + kColumnWidth / 2) << "\" y=\"" << num(kTop - 8)
      << "\" text-anchor=\"middle\">" << xml_escape(column_title(col)) << "</text>\n";
    for (std::size_t i : rows) {
      const auto& u = table.unit(i);
      const double opacity = 1.0 - shading_lightness(static_cast<double>(u.total()), nmax);
      raw_row(b, u.counts, x, kTop + u.key.level * kRowHeight, kColumnWidth, opacity);
    }
    b << "</g>\n";
    x += kColumnWidth + kColumnGap;
  }
  std::vector<std::pair<std::string, std::string>> items;
  for (int d = 0; d < table.dimension(); ++d) {
    items.emplace_back(table.decoration_labels()[static_cast<std::size_t>(d)], palette_color(static_cast<std::size_t>(d)));
  }
  legend(b, kLeft + plot_w + 10.0, kTop, items);
  return svg.str();
}

std::string render_painting(const PaintingMatrix& p, bool shaded) {
  const auto cols = columns_of(p.keys);
  const int levels = max_level(p.keys);
  const double nmax = max_of(p.weights);
  const double plot_w = static_cast<double>(cols.size()) * (kColumnWidth + kColumnGap);
  Svg svg(kLeft + plot_w + 100.0,
          std::max(kTop + (levels + 2) * kRowHeight + 20.0, kTop + 12.0 * static_cast<double>(p.cols()) + 20.0));
  auto& b = svg.body();
  depth_axis(b, levels);
  double x = kLeft;
  for (const auto& [col, rows] : cols) {
    b << "<g class=\"column\">\n<text x=\"" << num(x + kColumnWidth / 2) << "\" y=\"" << num(kTop - 8)
      << "\" text-anchor=\"middle\">" << xml_escape(column_title(col)) << "</text>\n";
    for (std::size_t i : rows) {
      const auto row = static_cast<Eigen::Index>(i);
      const double opacity = shaded ? 1.0 - shading_lightness(p.weights[row], nmax) : 1.0;
      painting_row(b, p, row, x, kTop + p.keys[i].level * kRowHeight, kColumnWidth, opacity);
    }
    b << "</g>\n";
    x += kColumnWidth + kColumnGap;
  }
  std::vector<std::pair<std::string, std::string>> items;
  for (Eigen::Index k = 0; k < p.cols(); ++k) items.emplace_back(cp_name(p, k), cp_color(p, k));
  legend(b, kLeft + plot_w + 10.0, kTop, items);
  return svg.str();
}

std::string render_rcd_overlay(const PaintingMatrix& p, const CountTable& table, const std::vector<RcdRow>& rcd) {
  // Panels per EU in painting order.
  std::vector<std::string> eus;
  std::map<std::string, std::vector<std::size_t>> eu_rows;
  for (std::size_t i = 0; i < p.keys.size(); ++i) {
    const auto& eu = p.keys[i].eu;
    if (!eu_rows.count(eu)) eus.push_back(eu);
    eu_rows[eu].push_back(i);
  }
  for (const auto& r : rcd) {
    if (!eu_rows.count(r.eu)) throw InputError("render_rcd_overlay: unknown eu '" + r.eu + "'");
  }
  std::map<UnitKey, std::size_t> table_index;
  for (std::size_t i = 0; i < table.size(); ++i) table_index[table.unit(i).key] = i;

  int levels = max_level(p.keys);
  for (const auto& r : rcd) levels = std::max(levels, static_cast<int>(std::floor(r.depth_cm / 10.0)));
  const double panel_w = 2 * kColumnWidth + 8.0;
  const double plot_w = static_cast<double>(eus.size()) * (panel_w + kColumnGap);
  const double depth_bottom = kTop + (levels + 1) * kRowHeight;
  // Depth rank of each date within its EU, shallowest first.
  std::map<std::string, std::vector<std::size_t>> eu_dates;
  for (std::size_t j = 0; j < rcd.size(); ++j) eu_dates[rcd[j].eu].push_back(j);
  std::vector<std::size_t> rank(rcd.size()), per_eu(rcd.size());
  std::size_t most = 0;
  for (auto& [eu, idx] : eu_dates) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t c) { return rcd[a].depth_cm < rcd[c].depth_cm; });
    for (std::size_t r = 0; r < idx.size(); ++r) {
      rank[idx[r]] = r;
      per_eu[idx[r]] = idx.size();
    }
    most = std::max(most, idx.size());
  }
  constexpr double kLane = 3.0;
  constexpr double kBus = 4.0;
  const double band = kBus * static_cast<double>(most);
  const double axis_y = depth_bottom + 16.0 + 2.0 * band;
  const double height = rcd.empty() ? depth_bottom + 20.0 : axis_y + 70.0;
  Svg svg(kLeft + plot_w + 20.0, height);
  auto& b = svg.body();
  depth_axis(b, levels);

  const double nmax = max_of(p.weights);
  std::map<std::string, double> panel_x;
  double x = kLeft;
  for (const auto& eu : eus) {
    panel_x[eu] = x;
    b << "<g class=\"panel\" data-eu=\"" << xml_escape(eu) << "\">\n<text x=\"" << num(x + panel_w / 2)
      << "\" y=\"" << num(kTop - 8) << "\" text-anchor=\"middle\">EU " << xml_escape(eu) << "</text>\n";
    for (std::size_t i : eu_rows[eu]) {
      const auto row = static_cast<Eigen::Index>(i);
      const double y = kTop + p.keys[i].level * kRowHeight;
      painting_row(b, p, row, x, y, kColumnWidth, 1.0 - shading_lightness(p.weights[row], nmax));
      if (auto it = table_index.find(p.keys[i]); it != table_index.end()) {
        const auto& u = table.unit(it->second);
        raw_row(b, u.counts, x + kColumnWidth + 8.0, y, kColumnWidth,
                1.0 - shading_lightness(static_cast<double>(u.total()), nmax));
      }
    }
    b << "</g>\n";
    x += panel_w + kColumnGap;
  }

  if (!rcd.empty()) {
    double lo = rcd.front().age_bp - 4 * rcd.front().age_sd;
    double hi = rcd.front().age_bp + 4 * rcd.front().age_sd;
    for (const auto& r : rcd) {
      lo = std::min(lo, r.age_bp - 4 * r.age_sd);
      hi = std::max(hi, r.age_bp + 4 * r.age_sd);
    }
    lo = std::max(0.0, lo);
    const double ax0 = kLeft;
    const double ax1 = kLeft + std::max(plot_w - kColumnGap, 100.0);
    // Older dates to the left; time runs toward the present on the right.
    auto age_x = [&](double age) { return ax1 - (age - lo) / (hi - lo) * (ax1 - ax0); };

    b << "<g class=\"time-axis\" stroke=\"#000000\">\n<line x1=\"" << num(ax0) << "\" y1=\"" << num(axis_y)
      << "\" x2=\"" << num(ax1) << "\" y2=\"" << num(axis_y) << "\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double age = lo + (hi - lo) * t / 4.0;
      b << "<text x=\"" << num(age_x(age)) << "\" y=\"" << num(axis_y + 56) << "\" text-anchor=\"middle\" stroke=\"none\">"
        << std::lround(age) << " BP</text>\n";
    }
    b << "</g>\n";

    for (std::size_t j = 0; j < rcd.size(); ++j) {
      const auto& r = rcd[j];
      const double px = panel_x[r.eu];
      const int level = static_cast<int>(std::floor(r.depth_cm / 10.0));
      const double y = kTop + r.depth_cm / 10.0 * kRowHeight;
      const double cx = age_x(r.age_bp);
      b << "<g class=\"rcd\" data-eu=\"" << xml_escape(r.eu) << "\" data-level=\"" << level << "\" data-mean=\""
        << num(r.age_bp) << "\" data-sd=\"" << num(r.age_sd) << "\">\n";
      b << "<line class=\"marker\" x1=\"" << num(px) << "\" y1=\"" << num(y) << "\" x2=\"" << num(px + panel_w)
        << "\" y2=\"" << num(y) << "\" stroke=\"#000000\" stroke-dasharray=\"4 2\"/>\n";
      // Orthogonal leader: out to a lane right of the panel, down to a bus
      // row, across to the date, down to the axis. Shallower dates take
      // outer lanes. Leftward buses stack deeper-higher, rightward ones
      // deeper-lower, so dates in stratigraphic order never cross.
      const double n_eu = static_cast<double>(per_eu[j]);
      const double rk = static_cast<double>(rank[j]);
      const double lane = px + panel_w + kLane * (n_eu - rk);
      const bool leftward = cx < lane;
      const double bus = leftward ? depth_bottom + 8.0 + kBus * (n_eu - 1 - rk)
                                  : depth_bottom + 8.0 + band + kBus * rk;
      b << "<polyline class=\"leader\" fill=\"none\" points=\"" << num(px + panel_w) << ',' << num(y) << ' '
        << num(lane) << ',' << num(y) << ' ' << num(lane) << ',' << num(bus) << ' ' << num(cx) << ',' << num(bus)
        << ' ' << num(cx) << ',' << num(axis_y) << "\" stroke=\"#555555\" stroke-dasharray=\"1 2\"/>\n";
      // Normal density scaled to 40 px peak.
      b << "<polyline class=\"density\" fill=\"none\" stroke=\"" << palette_color(j) << "\" points=\"";
      for (int s = -40; s <= 40; ++s) {
        const double z = s / 10.0;
        const double age = r.age_bp + z * r.age_sd;
        b << (s == -40 ? "" : " ") << num(age_x(age)) << ',' << num(axis_y + 40.0 * std::exp(-0.5 * z * z));
      }
      b << "\"/>\n</g>\n";
    }
  }
  return svg.str();
}

std::string render_dendrogram(const Dendrogram& tree, const std::vector<std::string>& leaf_labels) {
  const int n = tree.leaves;
  // Leaf order from a left-to-right traversal of the merge tree.
  std::vector<double> node_x(static_cast<std::size_t>(n + static_cast<int>(tree.merges.size())), 0.0);
  std::vector<double> node_h(node_x.size(), 0.0);
  std::vector<int> order;
  std::vector<std::pair<int, int>> children(tree.merges.size());
  for (std::size_t i = 0; i < tree.merges.size(); ++i) children[i] = {tree.merges[i].left, tree.merges[i].right};
  std::vector<int> stack;
  if (!tree.merges.empty()) stack.push_back(n + static_cast<int>(tree.merges.size()) - 1);
  else if (n == 1) order.push_back(0);
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (node < n) {
      order.push_back(node);
    } else {
      stack.push_back(children[static_cast<std::size_t>(node - n)].second);
      stack.push_back(children[static_cast<std::size_t>(node - n)].first);
    }
  }
  const double step = 36.0;
  const double width = kLeft + step * n + 20.0;
  const double plot_h = 220.0;
  double max_h = 0.0;
  for (const auto& m : tree.merges) max_h = std::max(max_h, m.height);
  if (!(max_h > 0.0)) max_h = 1.0;
  for (std::size_t i = 0; i < order.size(); ++i) node_x[static_cast<std::size_t>(order[i])] = kLeft + step * (static_cast<double>(i) + 0.5);
  Svg svg(width, kTop + plot_h + 40.0);
  auto& b = svg.body();
  const double base_y = kTop + plot_h;
  auto y_of = [&](double h) { return base_y - h / max_h * plot_h; };
  b << "<g class=\"dendrogram\" stroke=\"#000000\" fill=\"none\">\n";
  for (std::size_t i = 0; i < tree.merges.size(); ++i) {
    const auto& m = tree.merges[i];
    const auto id = static_cast<std::size_t>(n) + i;
    const double xl = node_x[static_cast<std::size_t>(m.left)], xr = node_x[static_cast<std::size_t>(m.right)];
    const double yl = y_of(node_h[static_cast<std::size_t>(m.left)]), yr = y_of(node_h[static_cast<std::size_t>(m.right)]);
    const double ym = y_of(m.height);
    b << "<polyline data-height=\"" << num(m.height) << "\" points=\"" << num(xl) << ',' << num(yl) << ' ' << num(xl)
      << ',' << num(ym) << ' ' << num(xr) << ',' << num(ym) << ' ' << num(xr) << ',' << num(yr) << "\"/>\n";
    node_x[id] = (xl + xr) / 2.0;
    node_h[id] = m.height;
  }
  b << "</g>\n";
  for (int leaf = 0; leaf < n; ++leaf) {
    const std::string label = static_cast<std::size_t>(leaf) < leaf_labels.size()
                                  ? leaf_labels[static_cast<std::size_t>(leaf)]
                                  : std::to_string(leaf + 1);
    b << "<text x=\"" << num(node_x[static_cast<std::size_t>(leaf)]) << "\" y=\"" << num(base_y + 14)
      << "\" text-anchor=\"middle\">" << xml_escape(label) << "</text>\n";
  }
  return svg.str();
}

std::string render_trace(const TraceSeries& series) {
  const double w = 600.0, h = 200.0;
  Svg svg(kLeft + w + 20.0, kTop + h + 40.0);
  auto& b = svg.body();
  b << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kTop - 12) << "\">" << xml_escape(series.label) << "</text>\n";
  if (series.size() >= 1) {
    const auto [lo_it, hi_it] = std::minmax_element(series.values.begin(), series.values.end());
    const double lo = *lo_it;
    const double span = *hi_it - lo > 0 ? *hi_it - lo : 1.0;
    const double dx = series.size() > 1 ? w / static_cast<double>(series.size() - 1) : 0.0;
    b << "<polyline class=\"trace\" fill=\"none\" stroke=\"#4363d8\" points=\"";
    for (std::size_t i = 0; i < series.size(); ++i) {
      b << (i ? " " : "") << num(kLeft + dx * static_cast<double>(i)) << ','
        << num(kTop + h - (series.values[i] - lo) / span * h);
    }
    b << "\"/>\n";
    b << "<text x=\"" << num(kLeft - 4) << "\" y=\"" << num(kTop + 4) << "\" text-anchor=\"end\">" << num(*hi_it)
      << "</text>\n<text x=\"" << num(kLeft - 4) << "\" y=\"" << num(kTop + h) << "\" text-anchor=\"end\">" << num(lo)
      << "</text>\n";
  }
  return svg.str();
}

std::string render_incidence(const IncidenceMatrix& matrix, const std::vector<int>& order) {
  const auto n = static_cast<int>(matrix.size());
  std::vector<int> perm = order;
  if (perm.empty()) {
    perm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  }
  CPAINT_REQUIRE(static_cast<int>(perm.size()) == n, "render_incidence: order has wrong length");
  const double cell = std::max(1.0, std::min(6.0, 600.0 / std::max(n, 1)));
  Svg svg(kLeft + cell * n + 20.0, kTop + cell * n + 20.0);
  auto& b = svg.body();
  b << "<g class=\"incidence\">\n";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double v = std::clamp(matrix.values(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(c)]), 0.0, 1.0);
      // Blue (0) to red (1).
      char color[8];
      std::snprintf(color, sizeof color, "#%02x%02x%02x", static_cast<int>(std::lround(255 * v)), 0x30,
                    static_cast<int>(std::lround(255 * (1 - v))));
      b << "<rect x=\"" << num(kLeft + c * cell) << "\" y=\"" << num(kTop + r * cell) << "\" width=\"" << num(cell)
        << "\" height=\"" << num(cell) << "\" fill=\"" << color << "\"/>";
    }
    b << '\n';
  }
  b << "</g>\n";
  return svg.str();
}

std::string render_k_histogram(const std::vector<long>& histogram) {
  const double bar = 24.0, h = 200.0;
  const long peak = histogram.empty() ? 1 : std::max(1L, *std::max_element(histogram.begin(), histogram.end()));
  Svg svg(kLeft + bar * static_cast<double>(histogram.size()) + 20.0, kTop + h + 40.0);
  auto& b = svg.body();
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    const double bh = h * static_cast<double>(histogram[k]) / static_cast<double>(peak);
    const double x = kLeft + bar * static_cast<double>(k);
    b << "<rect class=\"bar\" data-k=\"" << k << "\" data-count=\"" << histogram[k] << "\" x=\"" << num(x + 2)
      << "\" y=\"" << num(kTop + h - bh) << "\" width=\"" << num(bar - 4) << "\" height=\"" << num(bh)
      << "\" fill=\"#4363d8\"/><text x=\"" << num(x + bar / 2) << "\" y=\"" << num(kTop + h + 12)
      << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  return svg.str();
}

}  // namespace cpaint
