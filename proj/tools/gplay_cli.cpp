// gplay: command-line front end for distributed gradient-play experiments.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gplay/error.hpp"
#include "gplay/format.hpp"
#include "gplay/game.hpp"
#include "gplay/harness.hpp"
#include "gplay/network.hpp"
#include "gplay/theory.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw gplay::InputError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw gplay::InputError("cannot write " + path);
  f << body;
}

std::optional<double> parse_alpha(const std::string& text) {
  if (text == "auto") return std::nullopt;
  return gplay::parse_double(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed gradient play for Nash equilibrium seeking"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write trace, summary and plot script");
  std::string config_path, preset, alpha_text, out_dir;
  run_cmd->add_option("--config", config_path, "JSON experiment config");
  run_cmd->add_option("--preset", preset, "Named preset (paper-sim)");
  run_cmd->add_option("--alpha", alpha_text, "Step size or 'auto'");
  run_cmd->add_option("--out", out_dir, "Output directory (default $GPLAY_OUT_DIR or ./gplay-out)");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "Check every invariant over a matrix of configurations");
  std::vector<long> sizes;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> topologies, mixings;
  long audit_iters = 300;
  std::string audit_alpha, audit_json;
  audit_cmd->add_option("--sizes", sizes, "Player counts (default 2 5 10 20)");
  audit_cmd->add_option("--seeds", seeds, "Seeds (default 1..5)");
  audit_cmd->add_option("--topologies", topologies, "Subset of tree ring complete star");
  audit_cmd->add_option("--mixings", mixings, "Subset of metropolis lazy-metropolis");
  audit_cmd->add_option("--iters", audit_iters, "Iterations per cell");
  audit_cmd->add_option("--alpha", audit_alpha, "Explicit step size instead of auto");
  audit_cmd->add_option("--json", audit_json, "Write the machine-readable report here");

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Print the step-size plan for given constants");
  double b_mu = 0, b_l = 0, b_sigma = 0;
  long b_n = 0;
  std::string b_alpha = "auto";
  bool b_json = false;
  bounds_cmd->add_option("--mu", b_mu, "Strong monotonicity constant")->required();
  bounds_cmd->add_option("--L", b_l, "Lipschitz constant max_i L_i")->required();
  bounds_cmd->add_option("--sigma", b_sigma, "Second largest singular value of W")->required();
  bounds_cmd->add_option("--n", b_n, "Number of players")->required();
  bounds_cmd->add_option("--alpha", b_alpha, "Step size or 'auto'");
  bounds_cmd->add_flag("--json", b_json, "Machine-readable output");

  // compare-grane
  auto* cmp_cmd = app.add_subcommand("compare-grane", "Asymptotic rate comparison against GRANE");
  double c_mu = 0, c_l = 0;
  long c_n = 0;
  std::optional<double> c_sigma;
  bool c_json = false;
  cmp_cmd->add_option("--mu", c_mu)->required();
  cmp_cmd->add_option("--L", c_l)->required();
  cmp_cmd->add_option("--n", c_n)->required();
  cmp_cmd->add_option("--sigma", c_sigma);
  cmp_cmd->add_flag("--json", c_json);

  // make-game
  auto* game_cmd = app.add_subcommand("make-game", "Generate a random strongly monotone quadratic game");
  long g_n = 20;
  std::uint64_t g_seed = 1;
  double g_coupling = 0.2;
  std::string g_out;
  game_cmd->add_option("--n", g_n);
  game_cmd->add_option("--seed", g_seed);
  game_cmd->add_option("--coupling", g_coupling);
  game_cmd->add_option("--out", g_out, "File (default stdout)");

  // make-graph
  auto* graph_cmd = app.add_subcommand("make-graph", "Generate a graph and its mixing matrix");
  std::string gr_topology = "tree", gr_mixing = "metropolis", gr_edges, gr_matrix;
  long gr_n = 20;
  std::uint64_t gr_seed = 2;
  graph_cmd->add_option("--topology", gr_topology);
  graph_cmd->add_option("--mixing", gr_mixing);
  graph_cmd->add_option("--n", gr_n);
  graph_cmd->add_option("--seed", gr_seed);
  graph_cmd->add_option("--edges", gr_edges, "Edge-list output file (default stdout)");
  graph_cmd->add_option("--matrix", gr_matrix, "Mixing matrix CSV output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      gplay::ExperimentConfig config;
      if (!preset.empty()) config = gplay::preset_by_name(preset);
      if (!config_path.empty()) config = gplay::config_from_json(read_file(config_path), config);
      if (!alpha_text.empty()) {
        config.alpha = parse_alpha(alpha_text);
        config.cap_alpha = false;
      }
      const gplay::ExperimentReport report = gplay::run_experiment(config);
      const auto dir = gplay::default_output_dir(out_dir.empty() ? std::nullopt
                                                                 : std::optional<std::string>(out_dir));
      gplay::write_report(report, dir);
      std::cout << gplay::summary_text(report);
      std::cout << "wrote " << dir.string() << "/{trace.csv,summary.txt,summary.json,plot.py}\n";
      return report.exit_status;
    }
    if (*audit_cmd) {
      gplay::AuditOptions opts;
      if (!sizes.empty()) opts.sizes = sizes;
      if (!seeds.empty()) opts.seeds = seeds;
      if (!topologies.empty()) {
        opts.topologies.clear();
        for (const auto& t : topologies) opts.topologies.push_back(gplay::topology_from_string(t));
      }
      if (!mixings.empty()) {
        opts.mixings.clear();
        for (const auto& m : mixings) opts.mixings.push_back(gplay::mixing_rule_from_string(m));
      }
      opts.iterations = audit_iters;
      if (!audit_alpha.empty()) opts.alpha = parse_alpha(audit_alpha);
      const gplay::AuditReport report = gplay::audit(opts);
      std::cout << gplay::to_text(report);
      if (!audit_json.empty()) write_file(audit_json, gplay::to_json(report));
      return report.passed() ? 0 : 1;
    }
    if (*bounds_cmd) {
      const auto plan = gplay::make_step_size_plan(b_mu, b_l, b_sigma, b_n, parse_alpha(b_alpha));
      std::cout << (b_json ? gplay::to_json(plan) : gplay::to_text(plan));
      return 0;
    }
    if (*cmp_cmd) {
      const auto cmp = gplay::grane_rate_comparison(c_mu, c_l, c_n, c_sigma);
      std::cout << (c_json ? gplay::to_json(cmp) : gplay::to_text(cmp));
      return 0;
    }
    if (*game_cmd) {
      const std::string doc = gplay::game_to_json(gplay::random_game(g_n, g_seed, g_coupling));
      if (g_out.empty()) std::cout << doc;
      else write_file(g_out, doc);
      return 0;
    }
    if (*graph_cmd) {
      const gplay::Graph g = gplay::make_graph(gplay::topology_from_string(gr_topology), gr_n, gr_seed);
      const std::string edges = gplay::graph_to_edge_list(g);
      if (gr_edges.empty()) std::cout << edges;
      else write_file(gr_edges, edges);
      if (!gr_matrix.empty()) {
        const auto w = gplay::make_mixing(gplay::mixing_rule_from_string(gr_mixing), g);
        write_file(gr_matrix, gplay::matrix_to_csv(w.w));
        std::cerr << "sigma: " << gplay::format_double(w.sigma) << '\n';
      }
      return 0;
    }
  } catch (const gplay::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 70;
  }
  return 0;
}
