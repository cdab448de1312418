#pragma once

// Configuration-driven experiments, trajectory analysis and batch audits.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gplay/dynamics.hpp"
#include "gplay/game.hpp"
#include "gplay/network.hpp"
#include "gplay/theory.hpp"

namespace gplay {

// Relative tolerance shared by every inequality check.
inline constexpr double kSlackTolerance = 1e-9;

struct ExperimentConfig {
  long n = 20;
  std::uint64_t game_seed = 1;
  std::uint64_t graph_seed = 2;
  std::uint64_t init_seed = 3;
  double coupling_scale = 0.2;
  Topology topology = Topology::kTree;
  MixingRule mixing = MixingRule::kMetropolis;
  InitKind init = InitKind::kUniform;
  std::optional<double> alpha;  // nullopt: kAutoAlphaFraction * alpha_max
  bool cap_alpha = false;       // use min(alpha, kAutoAlphaFraction * alpha_max)
  long max_iters = 1000;
  double tol = 0.0;             // relative error target; 0 runs the full horizon
  bool check_lemmas = true;
  std::string preset;           // informational, e.g. "paper-sim"
};

// n = 20 players, random tree, alpha = 0.05 capped at 0.9 alpha_max.
ExperimentConfig paper_sim_preset();
ExperimentConfig preset_by_name(const std::string& name);

// JSON schema: every ExperimentConfig field by name; "alpha" is "auto" or a
// number; enums use their string names. Missing keys keep the defaults of
// `base`.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
std::string to_json(const ExperimentConfig& config);

// Least-squares line through (t, log ||x^t - x*||^2) over the last
// `tail_fraction` of the trace. Points at or below the rounding floor
// (1e-13 of the initial distance) are dropped.
struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  long points = 0;
  double ratio() const;  // exp(slope), per-step squared-error contraction
};
std::optional<TailFit> fit_log_linear_tail(const std::vector<IterationTrace>& trace,
                                           double tail_fraction = 0.5);

// Pointwise ||x^t - x*||^2 <= C q^t for t >= 1, C from envelope_constant().
struct EnvelopeCheck {
  double constant = 0.0;
  double worst_log_margin = 0.0;  // max_t log(dist_t^2 / (C q^t)); <= 0 passes
  long worst_t = -1;
  bool passed = false;
};
EnvelopeCheck check_envelope(const std::vector<IterationTrace>& trace, const StepSizePlan& plan);

// Minimum relative slack of one inequality over a trace.
struct SlackSummary {
  std::string name;
  bool applicable = true;
  double min_relative_slack = 0.0;
  long worst_t = -1;
  long first_violation = -1;  // -1: none beyond kSlackTolerance
  bool passed() const { return !applicable || first_violation < 0; }
};

// Lemma 1, Lemma 2, Lemma 3, running-average recursion and Z comparison.
// Lemma 3 is applicable for alpha <= theta / L^2, the Z comparison for
// alpha <= mu / L^2 and 0 < sigma < 1.
std::vector<SlackSummary> summarize_slacks(const std::vector<IterationTrace>& trace, double alpha,
                                           double mu, double l, double sigma, double theta);

struct ExperimentReport {
  ExperimentReport(ExperimentConfig config_, QuadraticGame game_, Graph graph_,
                   MixingMatrix mixing_, GameConstants constants_)
      : config(std::move(config_)),
        game(std::move(game_)),
        graph(std::move(graph_)),
        mixing(std::move(mixing_)),
        constants(std::move(constants_)) {}

  ExperimentConfig config;
  QuadraticGame game;
  Graph graph;
  MixingMatrix mixing;
  GameConstants constants;
  std::optional<StepSizePlan> plan;  // absent when alpha is inadmissible or sigma = 0
  double alpha = 0.0;
  double alpha_max = 0.0;            // 0 when the ceiling is undefined
  bool alpha_admissible = false;
  std::vector<std::string> notes;
  std::optional<RunResult> result;  // absent when the run diverged
  bool diverged = false;
  long divergence_iteration = -1;
  double final_relative_error = 0.0;
  std::optional<TailFit> fit;
  std::optional<EnvelopeCheck> envelope;
  std::vector<SlackSummary> slacks;
  int exit_status = 0;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

std::string summary_text(const ExperimentReport& report);
std::string summary_json(const ExperimentReport& report);
// Stand-alone Python script turning trace.csv into plot.svg (no third-party
// modules).
std::string plot_script();

// Writes trace.csv, summary.txt, summary.json and plot.py into `dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

// Output directory: explicit value, else $GPLAY_OUT_DIR, else ./gplay-out.
std::filesystem::path default_output_dir(const std::optional<std::string>& explicit_dir);

struct AuditOptions {
  std::vector<long> sizes{2, 5, 10, 20};
  std::vector<Topology> topologies{Topology::kTree, Topology::kRing, Topology::kComplete,
                                   Topology::kStar};
  std::vector<MixingRule> mixings{MixingRule::kMetropolis, MixingRule::kLazyMetropolis};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  long iterations = 300;
  double coupling_scale = 0.2;
  int sample_vectors = 100;
  std::optional<double> alpha;  // explicit step instead of auto
};

struct InvariantResult {
  std::string name;
  long checked = 0;
  long failed = 0;
  double worst = 0.0;  // smallest relative slack / margin seen
  std::string worst_cell;
  bool passed() const { return failed == 0; }
};

struct AuditFailure {
  std::string invariant;
  std::string cell;
  std::string detail;
};

struct AuditReport {
  std::vector<InvariantResult> invariants;
  std::vector<AuditFailure> failures;
  std::vector<std::string> skipped;  // cells that hit a documented error path
  long cells = 0;
  bool passed() const { return failures.empty(); }
};

// One audit cell: a (size, topology, mixing, seed) combination.
struct AuditCell {
  long n = 0;
  Topology topology = Topology::kTree;
  MixingRule mixing = MixingRule::kMetropolis;
  std::uint64_t seed = 0;
  std::string label() const;
};

std::vector<AuditCell> audit_cells(const AuditOptions& options);
AuditReport audit(const AuditOptions& options = {});

std::string to_text(const AuditReport& report);
std::string to_json(const AuditReport& report);

}  // namespace gplay
