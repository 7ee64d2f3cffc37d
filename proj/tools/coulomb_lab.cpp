// coulomb_lab: command-line entry point for the equilibrium, gas-energy,
// jellium, sampler and Ginzburg-Landau modules. Every run writes a manifest
// with the seed and an input hash; `reproduce` re-runs a manifest and
// byte-compares the CSV outputs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/errors.hpp"
#include "coulomb/gas_energy.hpp"
#include "coulomb/gl.hpp"
#include "coulomb/io.hpp"
#include "coulomb/jellium.hpp"
#include "coulomb/sampler.hpp"
#include "coulomb/simd.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coulomb;

namespace {

constexpr const char* kVersion = "coulomb-lab 0.1.0";

struct RunContext {
  std::string outdir = ".";
  uint64_t seed = 1;
  std::vector<std::string> effective_args;
  std::vector<std::string> outputs;
  std::string inputs_digest;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (fs::path(outdir) / name).string();
  }

  void write_manifest() {
    json m;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["args"] = effective_args;
    m["inputs_hash"] = fnv1a(inputs_digest + json(effective_args).dump());
    m["outputs"] = outputs;
    m["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text_file((fs::path(outdir) / "manifest.json").string(), m.dump(2) + "\n");
  }
};

json json_with_seed(const RunContext& ctx) {
  json j;
  j["seed"] = ctx.seed;
  j["manifest"] = "manifest.json";
  return j;
}

// flags override config-file values: config keys are injected only for
// options absent from the command line
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::map<std::string, std::string> kv;
  std::string text = read_text_file(config_path);
  if (config_path.size() > 5 && config_path.substr(config_path.size() - 5) == ".json") {
    json j = json::parse(text);
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_string())
        kv[it.key()] = it.value().get<std::string>();
      else
        kv[it.key()] = it.value().dump();
    }
  } else {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (!key.empty()) kv[key] = val;
    }
  }
  for (const auto& [key, val] : kv) {
    std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    if (!present) {
      args.push_back(flag);
      args.push_back(val);
    }
  }
  return args;
}

Grid make_grid(int dim, double box, double spacing) {
  return Grid::box(dim, -box, box, spacing);
}

void run_equilibrium(RunContext& ctx, int dim, const std::string& potential, double box,
                     double spacing, bool svg) {
  PotentialSpec spec = PotentialSpec::from_name(dim, potential);
  EquilibriumSolution sol = solve_equilibrium_direct(spec, make_grid(dim, box, spacing));
  GridField mu(sol.grid), hm(sol.grid), zeta(sol.grid);
  mu.v = sol.density;
  hm.v = sol.hmu0;
  zeta.v = sol.zeta;
  write_grid_csv(ctx.path("mu0.csv"), mu, ctx.seed);
  write_grid_csv(ctx.path("hmu0.csv"), hm, ctx.seed);
  write_grid_csv(ctx.path("zeta.csv"), zeta, ctx.seed);
  json summary = json_with_seed(ctx);
  summary["c"] = sol.c;
  summary["I"] = sol.energy;
  summary["support_radius_estimate"] = sol.support_radius;
  summary["kkt_residual"] = sol.kkt_residual;
  write_text_file(ctx.path("summary.json"), summary.dump(2) + "\n");
  if (svg) {
    SvgSeries prof;
    prof.name = "radial density";
    std::vector<std::pair<double, double>> pts;
    for (std::size_t c = 0; c < sol.density.size(); ++c)
      pts.push_back({sol.grid.center(c).norm(), sol.density[c]});
    std::sort(pts.begin(), pts.end());
    for (auto& p : pts) {
      prof.x.push_back(p.first);
      prof.y.push_back(p.second);
    }
    write_svg_plot(ctx.path("density.svg"), "equilibrium radial density", {prof});
  }
  std::cout << "c = " << sol.c << ", I = " << sol.energy
            << ", support radius = " << sol.support_radius << "\n";
}

void run_energy(RunContext& ctx, const std::string& points_file, int dim,
                const std::string& potential, double box, double spacing, double eta) {
  PointConfiguration cfg = read_points_csv(points_file, dim);
  ctx.inputs_digest += read_text_file(points_file);
  PotentialSpec spec = PotentialSpec::from_name(dim, potential);
  EquilibriumSolution sol = solve_equilibrium_direct(spec, make_grid(dim, box, spacing));
  NextOrderReport rep = splitting_report(cfg, sol, eta);
  json j = json_with_seed(ctx);
  j["report"] = json::parse(rep.to_json());
  write_text_file(ctx.path("report.json"), j.dump(2) + "\n");
  std::cout << rep.to_json() << "\n";
}

void run_sample(RunContext& ctx, const GibbsSpec& base, int chains, double box, double spacing,
                bool with_eq) {
  EquilibriumSolution eq;
  bool have_eq = false;
  if (with_eq) {
    eq = solve_equilibrium_direct(base.potential, make_grid(base.dim, box, spacing));
    have_eq = true;
  }
  json stats = json_with_seed(ctx);
  std::vector<double> all_radii;
  for (int c = 0; c < chains; ++c) {
    GibbsSpec spec = base;
    spec.stream = static_cast<uint64_t>(c);
    GibbsChainResult res = sample_gibbs(spec, have_eq ? &eq : nullptr);
    write_points_csv(ctx.path("chain" + std::to_string(c) + "_snapshots.csv"), res.snapshots,
                     ctx.seed);
    json cj;
    cj["acceptance"] = res.stats.acceptance;
    cj["sigma"] = res.stats.sigma_used;
    cj["mean_energy"] = res.stats.mean_energy;
    cj["energy_stderr"] = res.stats.energy_stderr;
    cj["autocorr_time"] = res.stats.autocorr_time;
    cj["bl_distance"] = res.stats.bl_distance;
    cj["coincident_rejects"] = res.stats.coincident_rejects;
    stats["chains"].push_back(cj);
    all_radii.insert(all_radii.end(), res.stats.radial_samples.begin(),
                     res.stats.radial_samples.end());
  }
  write_text_file(ctx.path("stats.json"), stats.dump(2) + "\n");
  std::sort(all_radii.begin(), all_radii.end());
  std::ostringstream cdf;
  cdf << "# seed: " << ctx.seed << "\n# manifest: manifest.json\nr,cdf\n";
  std::size_t step = std::max<std::size_t>(1, all_radii.size() / 512);
  for (std::size_t i = 0; i < all_radii.size(); i += step)
    cdf << format_double(all_radii[i]) << ","
        << format_double(static_cast<double>(i + 1) / all_radii.size()) << "\n";
  write_text_file(ctx.path("radial_cdf.csv"), cdf.str());
  std::cout << "chains: " << chains << ", samples: " << all_radii.size() << "\n";
}

int run_reproduce(const std::string& manifest_path, bool expect_divergence,
                  const std::string& binary);

}  // namespace

int run_main(int argc, char** argv, const std::string& self) {
  CLI::App app{std::string(kVersion) + " - a numerical laboratory for Coulomb gases and "
               "Ginzburg-Landau vortices"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "flat key=value or JSON config file");

  std::string outdir = ".";
  uint64_t seed = 1;
  app.add_option("--out", outdir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "global 64-bit seed")->capture_default_str();

  // equilibrium ---------------------------------------------------------
  auto* eq_cmd = app.add_subcommand("equilibrium", "solve the Frostman equilibrium measure");
  int eq_dim = 2;
  std::string eq_pot = "quadratic";
  double eq_box = 2.5, eq_h = 1.0 / 64.0;
  bool eq_svg = false;
  eq_cmd->add_option("--dim", eq_dim, "dimension (1, 2 or 3)")->capture_default_str();
  eq_cmd->add_option("--potential", eq_pot, "potential name")->capture_default_str();
  eq_cmd->add_option("--box", eq_box, "half-width of the grid box")->capture_default_str();
  eq_cmd->add_option("--spacing", eq_h, "grid spacing")->capture_default_str();
  eq_cmd->add_flag("--svg", eq_svg, "also write an SVG density profile");

  // energy --------------------------------------------------------------
  auto* en_cmd = app.add_subcommand("energy", "next-order splitting report for a configuration");
  std::string en_points;
  int en_dim = 2;
  std::string en_pot = "quadratic";
  double en_box = 2.5, en_h = 1.0 / 64.0, en_eta = 0.0;
  en_cmd->add_option("--points", en_points, "CSV of points, one per row")->required();
  en_cmd->add_option("--dim", en_dim)->capture_default_str();
  en_cmd->add_option("--potential", en_pot)->capture_default_str();
  en_cmd->add_option("--box", en_box)->capture_default_str();
  en_cmd->add_option("--spacing", en_h)->capture_default_str();
  en_cmd->add_option("--eta", en_eta, "smearing radius (0 = 0.1 x min separation)")
      ->capture_default_str();

  // jellium ---------------------------------------------------------------
  auto* je_cmd = app.add_subcommand("jellium", "periodic renormalized energies");
  je_cmd->require_subcommand(1);
  double tau_re = 0.0, tau_im = 1.0, volume = 1.0;
  auto* jg = je_cmd->add_subcommand("green", "torus Green function value");
  double g_x = 0.5, g_y = 0.0;
  int jg_dim = 2;
  jg->add_option("--dim", jg_dim)->capture_default_str();
  jg->add_option("--tau-re", tau_re)->capture_default_str();
  jg->add_option("--tau-im", tau_im)->capture_default_str();
  jg->add_option("--volume", volume)->capture_default_str();
  jg->add_option("--x", g_x)->capture_default_str();
  jg->add_option("--y", g_y)->capture_default_str();
  auto* je = je_cmd->add_subcommand("energy", "periodic W of a configuration");
  std::string je_points;
  int je_dim = 1;
  double je_volume = 0.0;
  double je_tau_re = 0.0, je_tau_im = 1.0;
  je->add_option("--points", je_points)->required();
  je->add_option("--dim", je_dim)->capture_default_str();
  je->add_option("--volume", je_volume, "torus volume (0 = number of points)")
      ->capture_default_str();
  je->add_option("--tau-re", je_tau_re)->capture_default_str();
  je->add_option("--tau-im", je_tau_im)->capture_default_str();
  auto* js = je_cmd->add_subcommand("scan-lattices", "lattice height over the fundamental domain");
  int scan_grid = 101;
  js->add_option("--grid", scan_grid)->capture_default_str();
  auto* jm = je_cmd->add_subcommand("minimize", "gradient descent on the torus");
  int jm_N = 8, jm_dim = 1;
  double jm_tau_re = 0.0, jm_tau_im = 1.0;
  jm->add_option("--N", jm_N)->capture_default_str();
  jm->add_option("--dim", jm_dim)->capture_default_str();
  jm->add_option("--tau-re", jm_tau_re)->capture_default_str();
  jm->add_option("--tau-im", jm_tau_im)->capture_default_str();

  // sample ----------------------------------------------------------------
  auto* sa_cmd = app.add_subcommand("sample", "Metropolis sampling of the Gibbs measure");
  GibbsSpec gspec;
  int chains = 1;
  double sa_box = 2.5, sa_h = 1.0 / 32.0;
  bool sa_eq = false;
  std::size_t sa_n = 16;
  sa_cmd->add_option("--n", sa_n)->capture_default_str();
  sa_cmd->add_option("--dim", gspec.dim)->capture_default_str();
  sa_cmd->add_option("--beta", gspec.beta)->capture_default_str();
  sa_cmd->add_option("--sweeps", gspec.sweeps)->capture_default_str();
  sa_cmd->add_option("--burnin", gspec.burnin)->capture_default_str();
  sa_cmd->add_option("--thin", gspec.thin)->capture_default_str();
  sa_cmd->add_option("--sigma", gspec.sigma, "proposal std (0 = auto-tune)")
      ->capture_default_str();
  sa_cmd->add_option("--chains", chains)->capture_default_str();
  std::string sa_pot = "quadratic";
  sa_cmd->add_option("--potential", sa_pot)->capture_default_str();
  sa_cmd->add_flag("--bl-distance", sa_eq, "also solve mu0 and report BL distances");
  sa_cmd->add_option("--box", sa_box)->capture_default_str();
  sa_cmd->add_option("--spacing", sa_h)->capture_default_str();

  // gl ----------------------------------------------------------------------
  auto* gl_cmd = app.add_subcommand("gl", "Ginzburg-Landau field toolkit");
  gl_cmd->require_subcommand(1);
  std::string gl_field;
  double gl_eps = 0.02, gl_hex = 0.0;
  auto* gle = gl_cmd->add_subcommand("energy", "energy of a field file");
  gle->add_option("--field", gl_field)->required();
  gle->add_option("--eps", gl_eps)->capture_default_str();
  gle->add_option("--hex", gl_hex)->capture_default_str();
  auto* glv = gl_cmd->add_subcommand("vortices", "ball construction on a field file");
  std::string glv_field;
  double glv_eps = 0.02, glv_radius = 0.25;
  glv->add_option("--field", glv_field)->required();
  glv->add_option("--eps", glv_eps)->capture_default_str();
  glv->add_option("--total-radius", glv_radius, "target total radius of the final balls")
      ->capture_default_str();
  auto* gll = gl_cmd->add_subcommand("london", "solve -Delta h + h = mu, h = hex on the boundary");
  double gll_hex = 1.0, gll_radius = 2.0;
  int gll_nodes = 257;
  std::string gll_mu;
  gll->add_option("--hex", gll_hex)->capture_default_str();
  gll->add_option("--disk-radius", gll_radius)->capture_default_str();
  gll->add_option("--nodes", gll_nodes)->capture_default_str();
  gll->add_option("--mu", gll_mu, "optional node CSV for the vorticity source");
  auto* glo = gl_cmd->add_subcommand("obstacle", "coincidence set of the lambda obstacle problem");
  double glo_lambda = 1.0, glo_radius = 2.0;
  int glo_nodes = 193;
  glo->add_option("--lambda", glo_lambda)->required();
  glo->add_option("--disk-radius", glo_radius)->capture_default_str();
  glo->add_option("--nodes", glo_nodes)->capture_default_str();
  auto* glsplit = gl_cmd->add_subcommand("split", "splitting identity residual");
  std::string gls_field;
  double gls_eps = 0.05, gls_hex = 1.0;
  int gls_nodes = 129;
  glsplit->add_option("--field", gls_field, "field CSV (omitted: reference state)");
  glsplit->add_option("--eps", gls_eps)->capture_default_str();
  glsplit->add_option("--hex", gls_hex)->capture_default_str();
  glsplit->add_option("--nodes", gls_nodes)->capture_default_str();

  // reproduce -----------------------------------------------------------------
  auto* re_cmd = app.add_subcommand("reproduce", "re-run a manifest and compare outputs");
  std::string re_manifest;
  bool re_expect = false;
  re_cmd->add_option("manifest", re_manifest, "path to manifest.json")->required();
  re_cmd->add_flag("--expect-divergence", re_expect,
                   "treat differences as the expected outcome");

  std::vector<std::string> args = merge_config_args(argc, argv);
  std::vector<const char*> cargs;
  cargs.push_back(self.c_str());
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunContext ctx;
  ctx.outdir = outdir;
  ctx.seed = seed;
  ctx.effective_args = args;
  fs::create_directories(outdir);
  if (!config_file.empty()) ctx.inputs_digest += read_text_file(config_file);

  if (re_cmd->parsed()) return run_reproduce(re_manifest, re_expect, self);

  if (eq_cmd->parsed()) {
    run_equilibrium(ctx, eq_dim, eq_pot, eq_box, eq_h, eq_svg);
  } else if (en_cmd->parsed()) {
    run_energy(ctx, en_points, en_dim, en_pot, en_box, en_h, en_eta);
  } else if (je_cmd->parsed()) {
    if (jg->parsed()) {
      TorusLattice lat = jg_dim == 1 ? TorusLattice::line(volume)
                                     : TorusLattice::from_tau(tau_re, tau_im, volume);
      double val = torus_green(lat, Vec{g_x, g_y, 0.0});
      json j = json_with_seed(ctx);
      j["green"] = val;
      write_text_file(ctx.path("green.json"), j.dump(2) + "\n");
      std::cout << "G = " << format_double(val) << "\n";
    } else if (je->parsed()) {
      PointConfiguration pts = read_points_csv(je_points, je_dim == 1 ? 1 : 2);
      ctx.inputs_digest += read_text_file(je_points);
      double vol = je_volume > 0 ? je_volume : static_cast<double>(pts.size());
      TorusConfiguration cfg;
      cfg.lattice = je_dim == 1 ? TorusLattice::line(vol)
                                : TorusLattice::from_tau(je_tau_re, je_tau_im, vol);
      for (auto& p : pts.pts) cfg.points.push_back(p);
      double W = periodic_W(cfg);
      json j = json_with_seed(ctx);
      j["W"] = W;
      write_text_file(ctx.path("energy.json"), j.dump(2) + "\n");
      std::cout << "W = " << format_double(W) << "\n";
    } else if (js->parsed()) {
      std::ostringstream csv;
      csv << "# seed: " << seed << "\n# manifest: manifest.json\ntau_re,tau_im,height\n";
      double best = 1e300, bx = 0, by = 0;
      double y0 = std::sqrt(3.0) / 2.0;
      for (int a = 0; a < scan_grid; ++a)
        for (int b = 0; b < scan_grid; ++b) {
          double x = -0.5 + static_cast<double>(a) / (scan_grid - 1);
          double y = y0 + static_cast<double>(b) / (scan_grid - 1);
          double hgt = lattice_height(ModularPoint{x, y});
          csv << format_double(x) << "," << format_double(y) << "," << format_double(hgt)
              << "\n";
          if (hgt < best - 1e-13 || (std::fabs(hgt - best) <= 1e-13 && x > bx)) {
            best = hgt;
            bx = x;
            by = y;
          }
        }
      write_text_file(ctx.path("heights.csv"), csv.str());
      json j = json_with_seed(ctx);
      j["argmin"] = {bx, by};
      j["min_height"] = best;
      write_text_file(ctx.path("scan.json"), j.dump(2) + "\n");
      std::cout << "argmin tau = (" << bx << ", " << by << ")\n";
    } else if (jm->parsed()) {
      TorusLattice lat = jm_dim == 1
                             ? TorusLattice::line(static_cast<double>(jm_N))
                             : TorusLattice::from_tau(jm_tau_re, jm_tau_im,
                                                      static_cast<double>(jm_N));
      TorusMinimizeResult res = minimize_torus_config(lat, jm_N, seed);
      PointConfiguration out;
      out.dim = 2;
      out.pts = res.config.points;
      write_points_csv(ctx.path("minimized.csv"), {out}, seed);
      json j = json_with_seed(ctx);
      j["W"] = res.energy;
      j["iterations"] = res.iterations;
      write_text_file(ctx.path("energy.json"), j.dump(2) + "\n");
      std::cout << "W = " << format_double(res.energy) << "\n";
    }
  } else if (sa_cmd->parsed()) {
    gspec.n = sa_n;
    gspec.seed = seed;
    gspec.potential = PotentialSpec::from_name(gspec.dim, sa_pot);
    run_sample(ctx, gspec, chains, sa_box, sa_h, sa_eq);
  } else if (gl_cmd->parsed()) {
    if (gle->parsed()) {
      GLState s = read_gl_state_csv(gl_field, gl_eps, gl_hex);
      ctx.inputs_digest += read_text_file(gl_field);
      json j = json_with_seed(ctx);
      j["energy"] = gl_energy(s);
      j["free_energy"] = gl_free_energy(s);
      write_text_file(ctx.path("energy.json"), j.dump(2) + "\n");
      std::cout << "G_eps = " << format_double(gl_energy(s)) << "\n";
    } else if (glv->parsed()) {
      GLState s = read_gl_state_csv(glv_field, glv_eps, 0.0);
      ctx.inputs_digest += read_text_file(glv_field);
      BallSet init = initial_balls_from_state(s);
      BallSet balls = init;
      if (init.total_radius() > 0)
        balls = ball_construction(init, glv_radius / init.total_radius(), s.grid);
      std::ostringstream csv;
      csv << "# seed: " << seed << "\n# manifest: manifest.json\ncx,cy,r,d\n";
      for (const auto& b : balls.balls)
        csv << format_double(b.center[0]) << "," << format_double(b.center[1]) << ","
            << format_double(b.r) << "," << b.degree << "\n";
      write_text_file(ctx.path("vortices.csv"), csv.str());
      std::cout << balls.balls.size() << " balls, total degree "
                << balls.total_abs_degree() << "\n";
    } else if (gll->parsed()) {
      Domain dom = Domain::disk(gll_radius, gll_nodes);
      Grid node_grid;
      node_grid.dim = 2;
      node_grid.n = {dom.grid.nx, dom.grid.ny, 1};
      node_grid.lo = {dom.grid.lox - 0.5 * dom.grid.h, dom.grid.loy - 0.5 * dom.grid.h, 0.0};
      node_grid.h = dom.grid.h;
      GridField mu(node_grid, 0.0);
      if (!gll_mu.empty()) {
        GridField loaded(node_grid, 0.0);
        PointConfiguration rows = read_points_csv(gll_mu, 3);  // x, y, value rows
        ctx.inputs_digest += read_text_file(gll_mu);
        if (rows.pts.size() != mu.v.size())
          throw usage_error("gl london --mu: row count does not match the node grid");
        for (std::size_t k = 0; k < rows.pts.size(); ++k) loaded.v[k] = rows.pts[k][2];
        mu = loaded;
      }
      GridField h = london_solve(mu, gll_hex, dom);
      write_grid_csv(ctx.path("london.csv"), h, seed);
      CriticalFieldResult cf = first_critical_lambda(dom);
      json j = json_with_seed(ctx);
      j["lambda_Omega"] = cf.lambda_omega;
      j["argmax"] = {cf.argmax[0], cf.argmax[1]};
      write_text_file(ctx.path("london.json"), j.dump(2) + "\n");
      std::cout << "lambda_Omega = " << format_double(cf.lambda_omega) << "\n";
    } else if (glo->parsed()) {
      Domain dom = Domain::disk(glo_radius, glo_nodes);
      ObstacleResult res = gl_obstacle(glo_lambda, dom);
      CriticalFieldResult cf = first_critical_lambda(dom);
      std::ostringstream csv;
      csv << "# seed: " << seed << "\n# manifest: manifest.json\nx,y,omega\n";
      for (int j2 = 0; j2 < dom.grid.ny; ++j2)
        for (int i = 0; i < dom.grid.nx; ++i) {
          Vec x = dom.grid.node(i, j2);
          csv << format_double(x[0]) << "," << format_double(x[1]) << ","
              << int(res.coincidence[dom.grid.idx(i, j2)]) << "\n";
        }
      write_text_file(ctx.path("omega.csv"), csv.str());
      json j = json_with_seed(ctx);
      j["lambda"] = glo_lambda;
      j["lambda_Omega"] = cf.lambda_omega;
      j["mu_level"] = res.mu_level;
      std::size_t count = 0;
      for (auto v : res.coincidence) count += v;
      j["omega_nodes"] = count;
      write_text_file(ctx.path("obstacle.json"), j.dump(2) + "\n");
      std::cout << "omega nodes: " << count << "\n";
    } else if (glsplit->parsed()) {
      GLState s = gls_field.empty()
                      ? gl_splitting_reference_state(GLGrid::square(1.0, gls_nodes), gls_eps,
                                                     gls_hex)
                      : read_gl_state_csv(gls_field, gls_eps, gls_hex);
      if (!gls_field.empty()) ctx.inputs_digest += read_text_file(gls_field);
      SplittingReport rep = gl_splitting_check(s);
      json j = json_with_seed(ctx);
      j["lhs"] = rep.lhs;
      j["g0"] = rep.g0;
      j["g1"] = rep.g1;
      j["correction"] = rep.correction;
      j["residual"] = rep.residual;
      j["relative"] = rep.relative;
      write_text_file(ctx.path("split.json"), j.dump(2) + "\n");
      std::cout << "relative residual = " << format_double(rep.relative) << "\n";
    }
  }
  ctx.write_manifest();
  return 0;
}

namespace {

int run_reproduce(const std::string& manifest_path, bool expect_divergence,
                  const std::string& binary) {
  json m = json::parse(read_text_file(manifest_path));
  fs::path base = fs::path(manifest_path).parent_path();
  fs::path tmp = base / "reproduce_tmp";
  fs::create_directories(tmp);

  std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
  // redirect --out
  std::vector<std::string> newargs;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    newargs.push_back(args[i]);
  }
  std::ostringstream cmd;
  cmd << "'" << binary << "'";
  cmd << " --out '" << tmp.string() << "'";
  for (const auto& a : newargs) cmd << " '" << a << "'";
  cmd << " > /dev/null";
  int rc = std::system(cmd.str().c_str());
  if (rc != 0) {
    std::cerr << "reproduce: re-run failed with status " << rc << "\n";
    return 3;
  }
  for (const auto& out : m["outputs"]) {
    std::string name = out.get<std::string>();
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json") continue;  // timings differ
    std::string a = read_text_file((base / name).string());
    std::string b = read_text_file((tmp / name).string());
    if (a != b) {
      // locate the first divergent line and cell
      std::istringstream sa(a), sb(b);
      std::string la, lb;
      int lineno = 0;
      while (std::getline(sa, la) && std::getline(sb, lb)) {
        ++lineno;
        if (la != lb) break;
      }
      std::ostringstream report;
      report << "divergence in " << name << " at line " << lineno << ":\n  recorded: " << la
             << "\n  re-run:   " << lb << "\n";
      if (expect_divergence) {
        std::cout << "expected-divergence: " << report.str();
        return 0;
      }
      std::cerr << "reproduction mismatch: " << report.str();
      return 4;
    }
  }
  if (expect_divergence) {
    std::cerr << "expected divergence but outputs are identical\n";
    return 4;
  }
  std::cout << "reproduce: outputs identical\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv, argv[0]);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const singularity_error& e) {
    std::cerr << "singularity error: " << e.what() << "\n";
    return 2;
  } catch (const capability_error& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 2;
  } catch (const solver_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const iteration_error& e) {
    std::cerr << "iteration error: " << e.what() << " (residual " << e.last_residual << ")\n";
    return 3;
  } catch (const box_too_small_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
