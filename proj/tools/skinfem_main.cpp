// skinfem command line: runs the configured studies and writes their CSV /
// JSON reports, or generates a single mesh in the text format.
//
//   skinfem <converge|smoothing|maxreg|skin|green|galerkin> --config <path>
//           [--out <dir>] [--seed <u64>] [--level-cap <n>]
//   skinfem mesh --domain <name> --h <real> --out <path> [domain params]
//
// Exit codes: 0 all verdicts pass, 2 a verdict failed, 1 execution error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>

#include "skinfem/experiments.hpp"
#include "skinfem/mesh.hpp"

namespace {

int run_study(const std::string& study, const std::string& config_path,
              const std::string& out_dir, std::uint64_t seed, int level_cap,
              bool emit_dat) {
  const skinfem::Config cfg = skinfem::Config::parse_file(config_path);
  skinfem::Report rep;
  if (study == "converge")
    rep = skinfem::run_convergence(cfg, seed, level_cap);
  else if (study == "smoothing")
    rep = skinfem::run_smoothing(cfg, seed, level_cap);
  else if (study == "maxreg")
    rep = skinfem::run_maxreg(cfg, seed, level_cap);
  else if (study == "skin")
    rep = skinfem::run_skin(cfg, seed, level_cap);
  else if (study == "green")
    rep = skinfem::run_green(cfg, seed, level_cap);
  else if (study == "galerkin")
    rep = skinfem::run_galerkin(cfg, seed, level_cap);
  else
    throw skinfem::ConfigError("unknown study: " + study);

  std::filesystem::create_directories(out_dir);
  const std::string base = out_dir + "/" + study;
  rep.write_csv(base + ".csv");
  rep.write_summary(base + ".summary.json");
  if (emit_dat) rep.write_dat(base + ".dat");
  for (const auto& table : rep.extra_tables) {
    skinfem::Report sub;
    sub.columns = table.columns;
    sub.rows = table.rows;
    sub.write_csv(base + "." + table.name + ".csv");
    if (emit_dat) sub.write_dat(base + "." + table.name + ".dat");
  }

  for (const auto& v : rep.verdicts)
    std::printf("[%s] %s: %s\n", v.pass ? "pass" : "FAIL", v.name.c_str(),
                v.detail.c_str());
  std::printf("report: %s.csv, %s.summary.json\n", base.c_str(), base.c_str());
  return rep.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boundary-skin parabolic FEM laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", mesh_out = "mesh.txt";
  std::uint64_t seed = 0;
  int level_cap = -1;
  bool emit_dat = false;

  const std::vector<std::string> studies = {"converge", "smoothing", "maxreg",
                                            "skin",     "green",     "galerkin"};
  for (const auto& s : studies) {
    CLI::App* sub = app.add_subcommand(s, "run the " + s + " study");
    sub->add_option("--config", config_path, "INI config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--level-cap", level_cap, "limit the number of levels");
    sub->add_flag("--dat", emit_dat, "also write gnuplot .dat files");
  }

  CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate a mesh");
  std::string domain_name = "disk";
  double h = 0.2, radius = 0.5, ea = 0.5, eb = 0.25, star_r = 0.35,
         star_a = 0.2, side = 1.0;
  int star_m = 3;
  mesh_cmd->add_option("--domain", domain_name, "disk|ellipse|star|square");
  mesh_cmd->add_option("--h", h, "target mesh size")->required();
  mesh_cmd->add_option("--out", mesh_out, "output path")->required();
  mesh_cmd->add_option("--radius", radius, "disk radius");
  mesh_cmd->add_option("--a", ea, "ellipse semi-axis a");
  mesh_cmd->add_option("--b", eb, "ellipse semi-axis b");
  mesh_cmd->add_option("--base-radius", star_r, "star base radius");
  mesh_cmd->add_option("--amplitude", star_a, "star amplitude");
  mesh_cmd->add_option("--frequency", star_m, "star frequency");
  mesh_cmd->add_option("--side", side, "square side");

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) {
      skinfem::SmoothDomain d;
      if (domain_name == "disk") d = skinfem::SmoothDomain::disk(radius);
      else if (domain_name == "ellipse") d = skinfem::SmoothDomain::ellipse(ea, eb);
      else if (domain_name == "star")
        d = skinfem::SmoothDomain::star(star_r, star_a, star_m);
      else if (domain_name == "square") d = skinfem::SmoothDomain::square(side);
      else throw skinfem::ConfigError("unknown domain: " + domain_name);

      const skinfem::Mesh m = skinfem::build_mesh(d, h);
      skinfem::write_mesh(m, mesh_out);
      const skinfem::MeshMetrics mm = skinfem::mesh_metrics(m);
      nlohmann::json j = {{"h_max", mm.h_max},
                          {"h_min", mm.h_min},
                          {"min_angle_deg", mm.min_angle_deg},
                          {"triangle_count", mm.triangle_count},
                          {"vertex_count", mm.vertex_count},
                          {"boundary_vertex_count", mm.boundary_vertex_count},
                          {"domain", domain_name},
                          {"h_target", h}};
      std::ofstream jf(mesh_out + ".json");
      jf << j.dump(2) << '\n';
      std::printf("wrote %s (%d vertices, %d triangles) and %s.json\n",
                  mesh_out.c_str(), mm.vertex_count, mm.triangle_count,
                  mesh_out.c_str());
      return 0;
    }
    for (const auto& s : studies)
      if (app.get_subcommand(s)->parsed())
        return run_study(s, config_path, out_dir, seed, level_cap, emit_dat);
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
