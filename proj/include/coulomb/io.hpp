#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "coulomb/gas_energy.hpp"
#include "coulomb/gl.hpp"
#include "coulomb/grid.hpp"

namespace coulomb {

// CSV artifacts carry two comment headers (# seed, # manifest) followed by a
// column header; deterministic formatting so reruns are byte-identical.
void write_grid_csv(const std::string& path, const GridField& f, uint64_t seed);
void write_points_csv(const std::string& path, const std::vector<PointConfiguration>& snapshots,
                      uint64_t seed);
PointConfiguration read_points_csv(const std::string& path, int dim);

void write_gl_state_csv(const std::string& path, const GLState& s, uint64_t seed);
GLState read_gl_state_csv(const std::string& path, double eps, double h_ex);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

uint64_t fnv1a(const std::string& data);

// minimal line/scatter SVG writer; plots are conveniences, CSV is the truth
struct SvgSeries {
  std::string name;
  std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series);

std::string format_double(double v);

}  // namespace coulomb
