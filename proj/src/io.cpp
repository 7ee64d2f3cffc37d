#include "coulomb/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coulomb/errors.hpp"

namespace coulomb {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_grid_csv(const std::string& path, const GridField& f, uint64_t seed) {
  std::ostringstream out;
  out << "# seed: " << seed << "\n# manifest: manifest.json\n";
  out << (f.grid.dim == 1 ? "x,value\n" : (f.grid.dim == 2 ? "x,y,value\n" : "x,y,z,value\n"));
  for (std::size_t c = 0; c < f.v.size(); ++c) {
    Vec x = f.grid.center(c);
    out << format_double(x[0]);
    for (int d = 1; d < f.grid.dim; ++d) out << "," << format_double(x[d]);
    out << "," << format_double(f.v[c]) << "\n";
  }
  write_text_file(path, out.str());
}

void write_points_csv(const std::string& path, const std::vector<PointConfiguration>& snapshots,
                      uint64_t seed) {
  std::ostringstream out;
  out << "# seed: " << seed << "\n# manifest: manifest.json\n";
  int dim = snapshots.empty() ? 2 : snapshots.front().dim;
  out << "snapshot" << (dim == 1 ? ",x" : (dim == 2 ? ",x,y" : ",x,y,z")) << "\n";
  for (std::size_t s = 0; s < snapshots.size(); ++s)
    for (const auto& p : snapshots[s].pts) {
      out << s;
      for (int d = 0; d < dim; ++d) out << "," << format_double(p[d]);
      out << "\n";
    }
  write_text_file(path, out.str());
}

PointConfiguration read_points_csv(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read points file " + path);
  PointConfiguration cfg;
  cfg.dim = dim;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // skip header lines containing letters
    bool has_alpha = false;
    for (char c : line)
      if (std::isalpha(static_cast<unsigned char>(c))) has_alpha = true;
    if (has_alpha) continue;
    std::istringstream ss(line);
    Vec p;
    std::string tok;
    int d = 0;
    while (std::getline(ss, tok, ',') && d < dim) p[d++] = std::stod(tok);
    if (d != dim) throw usage_error("points file row has fewer than dim columns: " + line);
    cfg.pts.push_back(p);
  }
  return cfg;
}

void write_gl_state_csv(const std::string& path, const GLState& s, uint64_t seed) {
  std::ostringstream out;
  out << "# seed: " << seed << "\n# manifest: manifest.json\n";
  out << "# grid: " << s.grid.nx << " " << s.grid.ny << " " << format_double(s.grid.h) << " "
      << format_double(s.grid.lox) << " " << format_double(s.grid.loy) << "\n";
  out << "x,y,re_u,im_u,a1,a2\n";
  for (int j = 0; j < s.grid.ny; ++j)
    for (int i = 0; i < s.grid.nx; ++i) {
      Vec x = s.grid.node(i, j);
      std::size_t idx = s.grid.idx(i, j);
      out << format_double(x[0]) << "," << format_double(x[1]) << ","
          << format_double(s.u[idx].real()) << "," << format_double(s.u[idx].imag()) << ","
          << format_double(s.a1[idx]) << "," << format_double(s.a2[idx]) << "\n";
    }
  write_text_file(path, out.str());
}

GLState read_gl_state_csv(const std::string& path, double eps, double h_ex) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read field file " + path);
  std::string line;
  GLGrid grid;
  bool have_grid = false;
  std::vector<std::array<double, 6>> rows;
  while (std::getline(in, line)) {
    if (line.rfind("# grid:", 0) == 0) {
      std::istringstream ss(line.substr(7));
      ss >> grid.nx >> grid.ny >> grid.h >> grid.lox >> grid.loy;
      have_grid = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    bool has_alpha = false;
    for (char c : line)
      if (std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E' && c != '-' &&
          c != '+')
        has_alpha = true;
    if (line.find("re_u") != std::string::npos || has_alpha) continue;
    std::istringstream ss(line);
    std::array<double, 6> row{};
    std::string tok;
    int d = 0;
    while (std::getline(ss, tok, ',') && d < 6) row[d++] = std::stod(tok);
    if (d == 6) rows.push_back(row);
  }
  if (!have_grid) throw usage_error("field file lacks the '# grid:' header: " + path);
  if (rows.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
    throw usage_error("field file row count does not match the grid header");
  GLState s;
  s.grid = grid;
  s.eps = eps;
  s.h_ex = h_ex;
  s.u.resize(grid.nodes());
  s.a1.resize(grid.nodes());
  s.a2.resize(grid.nodes());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    s.u[k] = {rows[k][2], rows[k][3]};
    s.a1[k] = rows[k][4];
    s.a2[k] = rows[k][5];
  }
  return s;
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (ymax == ymin) ymax = ymin + 1;
  const double W = 640, H = 420, m = 50;
  auto px = [&](double x) { return m + (x - xmin) / (xmax - xmin) * (W - 2 * m); };
  auto py = [&](double y) { return H - m - (y - ymin) / (ymax - ymin) * (H - 2 * m); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
  out << "<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  out << "<line x1='" << m << "' y1='" << m << "' x2='" << m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << "<polyline fill='none' stroke='" << colors[k % 5] << "' points='";
    for (std::size_t i = 0; i < series[k].x.size(); ++i)
      out << px(series[k].x[i]) << "," << py(series[k].y[i]) << " ";
    out << "'/>\n";
    out << "<text x='" << W - m + 4 << "' y='" << m + 16 * k << "' font-size='11' fill='"
        << colors[k % 5] << "'>" << series[k].name << "</text>\n";
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace coulomb
