#include "gplay/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gplay/error.hpp"
#include "gplay/format.hpp"
#include "gplay/random.hpp"

namespace gplay {

using nlohmann::json;

ExperimentConfig paper_sim_preset() {
  ExperimentConfig c;
  c.n = 20;
  c.topology = Topology::kTree;
  c.alpha = 0.05;
  c.cap_alpha = true;
  c.max_iters = 1000;
  c.preset = "paper-sim";
  return c;
}

ExperimentConfig preset_by_name(const std::string& name) {
  if (name == "paper-sim") return paper_sim_preset();
  throw InputError("unknown preset '" + name + "' (available: paper-sim)");
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig c) {
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw InputError("config: top level must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "n") c.n = value.get<long>();
      else if (key == "game_seed") c.game_seed = value.get<std::uint64_t>();
      else if (key == "graph_seed") c.graph_seed = value.get<std::uint64_t>();
      else if (key == "init_seed") c.init_seed = value.get<std::uint64_t>();
      else if (key == "coupling_scale") c.coupling_scale = value.get<double>();
      else if (key == "topology") c.topology = topology_from_string(value.get<std::string>());
      else if (key == "mixing") c.mixing = mixing_rule_from_string(value.get<std::string>());
      else if (key == "init") c.init = init_kind_from_string(value.get<std::string>());
      else if (key == "alpha") {
        if (value.is_string()) {
          if (value.get<std::string>() != "auto") throw InputError("config: alpha must be \"auto\" or a number");
          c.alpha.reset();
        } else {
          c.alpha = value.get<double>();
        }
      } else if (key == "cap_alpha") c.cap_alpha = value.get<bool>();
      else if (key == "max_iters") c.max_iters = value.get<long>();
      else if (key == "tol") c.tol = value.get<double>();
      else if (key == "check_lemmas") c.check_lemmas = value.get<bool>();
      else if (key == "preset") c.preset = value.get<std::string>();
      else throw InputError("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (c.n < 2) throw InputError("config: n must be at least 2");
  if (c.max_iters < 0) throw InputError("config: max_iters must be nonnegative");
  if (!(c.tol >= 0.0)) throw InputError("config: tol must be nonnegative");
  if (c.alpha && !(*c.alpha > 0.0)) throw InputError("config: alpha must be positive");
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  json doc;
  doc["n"] = c.n;
  doc["game_seed"] = c.game_seed;
  doc["graph_seed"] = c.graph_seed;
  doc["init_seed"] = c.init_seed;
  doc["coupling_scale"] = c.coupling_scale;
  doc["topology"] = to_string(c.topology);
  doc["mixing"] = to_string(c.mixing);
  doc["init"] = to_string(c.init);
  doc["alpha"] = c.alpha ? json(*c.alpha) : json("auto");
  doc["cap_alpha"] = c.cap_alpha;
  doc["max_iters"] = c.max_iters;
  doc["tol"] = c.tol;
  doc["check_lemmas"] = c.check_lemmas;
  doc["preset"] = c.preset;
  return doc.dump(2) + "\n";
}

double TailFit::ratio() const { return std::exp(slope); }

std::optional<TailFit> fit_log_linear_tail(const std::vector<IterationTrace>& trace,
                                           double tail_fraction) {
  if (trace.empty()) return std::nullopt;
  const double floor = 1e-13 * trace.front().distance_to_ne;
  const auto total = static_cast<long>(trace.size());
  const long start = total - std::max(2L, static_cast<long>(std::ceil(tail_fraction * total)));
  std::vector<double> ts, ys;
  for (long k = std::max(0L, start); k < total; ++k) {
    const auto& r = trace[static_cast<std::size_t>(k)];
    if (r.distance_to_ne <= floor || r.distance_to_ne <= 0.0) continue;
    ts.push_back(static_cast<double>(r.t));
    ys.push_back(2.0 * std::log(r.distance_to_ne));
  }
  if (ts.size() < 2) return std::nullopt;

  const auto m = static_cast<double>(ts.size());
  double tbar = 0.0, ybar = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    tbar += ts[k];
    ybar += ys[k];
  }
  tbar /= m;
  ybar /= m;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - tbar) * (ts[k] - tbar);
    sty += (ts[k] - tbar) * (ys[k] - ybar);
    syy += (ys[k] - ybar) * (ys[k] - ybar);
  }
  TailFit fit;
  fit.points = static_cast<long>(ts.size());
  fit.slope = sty / stt;
  fit.intercept = ybar - fit.slope * tbar;
  double sse = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double e = ys[k] - (fit.intercept + fit.slope * ts[k]);
    sse += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

EnvelopeCheck check_envelope(const std::vector<IterationTrace>& trace, const StepSizePlan& plan) {
  EnvelopeCheck e;
  if (trace.empty()) {
    e.passed = true;
    return e;
  }
  const auto& first = trace.front();
  e.constant = envelope_constant(plan.mu, plan.l, plan.sigma, plan.n, plan.alpha,
                                 first.avg_distance_to_ne * first.avg_distance_to_ne,
                                 first.consensus_violation * first.consensus_violation);
  const double log_q = std::log1p(-plan.gap);
  const double log_c = std::log(e.constant);
  e.worst_log_margin = -std::numeric_limits<double>::infinity();
  for (const auto& r : trace) {
    if (r.t < 1) continue;
    if (r.distance_to_ne <= 0.0) continue;
    const double margin = 2.0 * std::log(r.distance_to_ne) - log_c - static_cast<double>(r.t) * log_q;
    if (margin > e.worst_log_margin) {
      e.worst_log_margin = margin;
      e.worst_t = r.t;
    }
  }
  e.passed = e.worst_log_margin <= std::log1p(kSlackTolerance);
  return e;
}

std::vector<SlackSummary> summarize_slacks(const std::vector<IterationTrace>& trace, double alpha,
                                           double mu, double l, double sigma, double theta) {
  struct Spec {
    const char* name;
    bool applicable;
  };
  const bool lemma3_ok = alpha <= theta / (l * l);
  const bool z_ok = alpha <= mu / (l * l) && sigma >= kPerfectMixingSigma && sigma < 1.0;
  std::vector<SlackSummary> out;
  for (const Spec& s : {Spec{"lemma1", true}, Spec{"lemma2", true}, Spec{"lemma3", lemma3_ok},
                        Spec{"average_recursion", true}, Spec{"z_domination", z_ok}}) {
    SlackSummary sum;
    sum.name = s.name;
    sum.applicable = s.applicable;
    sum.min_relative_slack = std::numeric_limits<double>::infinity();
    out.push_back(sum);
  }
  auto update = [](SlackSummary& s, long t, double rel) {
    if (!s.applicable) return;
    if (rel < s.min_relative_slack || std::isnan(rel)) {
      s.min_relative_slack = rel;
      s.worst_t = t;
    }
    if ((rel < -kSlackTolerance || std::isnan(rel)) && s.first_violation < 0) s.first_violation = t;
  };
  for (const auto& r : trace) {
    update(out[0], r.t, relative_slack(r.lemma1_slack, r.lemma1_rhs));
    update(out[1], r.t, relative_slack(r.lemma2_slack, r.lemma2_rhs));
    update(out[2], r.t, relative_slack(r.lemma3_slack, r.lemma3_rhs));
    update(out[3], r.t, -r.recursion_residual / r.recursion_scale);
    update(out[4], r.t,
           std::min(relative_slack(r.z_slack_avg, r.z_rhs_avg),
                    relative_slack(r.z_slack_consensus, r.z_rhs_consensus)));
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  QuadraticGame game = random_game(config.n, config.game_seed, config.coupling_scale);
  Graph graph = make_graph(config.topology, config.n, config.graph_seed);
  MixingMatrix mixing = make_mixing(config.mixing, graph);
  GameConstants constants = estimate_constants(game);
  ExperimentReport rep(config, std::move(game), std::move(graph), std::move(mixing), constants);
  const auto n = static_cast<long>(config.n);

  std::optional<TheoremTerms> terms;
  try {
    terms = theorem1_terms(constants.mu, constants.l, rep.mixing.sigma, n);
    rep.alpha_max = terms->alpha_max();
  } catch (const PerfectMixingError& e) {
    if (!config.alpha) throw;
    rep.notes.push_back(std::string("step-size ceiling undefined: ") + e.what());
  }

  if (!config.alpha) {
    rep.alpha = kAutoAlphaFraction * rep.alpha_max;
  } else if (config.cap_alpha && terms) {
    const double cap = kAutoAlphaFraction * rep.alpha_max;
    rep.alpha = std::min(*config.alpha, cap);
    if (*config.alpha >= rep.alpha_max) {
      rep.notes.push_back("requested alpha = " + format_double(*config.alpha) +
                          " exceeds the Theorem 1 ceiling alpha_max = " +
                          format_double(rep.alpha_max) + " for this game; using " +
                          format_double(kAutoAlphaFraction) + " * alpha_max = " +
                          format_double(rep.alpha));
    } else if (rep.alpha < *config.alpha) {
      rep.notes.push_back("requested alpha = " + format_double(*config.alpha) +
                          " capped at " + format_double(kAutoAlphaFraction) + " * alpha_max = " +
                          format_double(rep.alpha));
    }
  } else {
    rep.alpha = *config.alpha;
  }

  rep.alpha_admissible = terms && rep.alpha > 0.0 && rep.alpha < rep.alpha_max;
  if (rep.alpha_admissible) {
    rep.plan = make_step_size_plan(constants.mu, constants.l, rep.mixing.sigma, n, rep.alpha);
  } else if (terms) {
    rep.notes.push_back("warning: alpha = " + format_double(rep.alpha) +
                        " is outside (0, alpha_max = " + format_double(rep.alpha_max) +
                        "); geometric convergence is not guaranteed, divergence guard active");
  }

  const EstimationMatrix x0 = initial_estimates(config.init, config.n, config.init_seed);
  RunOptions opts;
  opts.max_iters = config.max_iters;
  opts.record = true;
  try {
    const Eigen::VectorXd xstar = solve_nash_equilibrium(rep.game);
    const double d0 = (x0.values().rowwise() - xstar.transpose()).norm();
    opts.tol = config.tol * d0;
    rep.result = run(rep.game, rep.mixing, rep.alpha, x0, opts);
  } catch (const DivergenceError& e) {
    rep.diverged = true;
    rep.divergence_iteration = e.iteration();
    rep.notes.push_back(e.what());
    rep.exit_status = 3;
    return rep;
  }

  const RunResult& res = *rep.result;
  rep.final_relative_error =
      res.initial_distance > 0.0 ? res.final_distance / res.initial_distance : 0.0;
  rep.fit = fit_log_linear_tail(res.trace);
  if (rep.plan) rep.envelope = check_envelope(res.trace, *rep.plan);

  if (config.check_lemmas) {
    rep.slacks = summarize_slacks(res.trace, rep.alpha, constants.mu, constants.l,
                                  rep.mixing.sigma, constants.mu);
    for (const auto& s : rep.slacks) {
      if (!s.passed()) {
        rep.notes.push_back(s.name + " violated at iteration " + std::to_string(s.first_violation));
        rep.exit_status = 2;
      }
    }
    if (rep.envelope && !rep.envelope->passed && rep.exit_status == 0) {
      rep.notes.push_back("geometric envelope exceeded at iteration " +
                          std::to_string(rep.envelope->worst_t));
      rep.exit_status = 4;
    }
  }
  return rep;
}

namespace {

const char* kRelativeErrorDefinition =
    "relative error = ||x^t - x*||_F / ||x^0 - x*||_F (estimation matrix vs consensual equilibrium)";

json slack_json(const std::vector<SlackSummary>& slacks) {
  json out = json::object();
  for (const auto& s : slacks) {
    json item;
    item["applicable"] = s.applicable;
    item["min_relative_slack"] =
        s.applicable && std::isfinite(s.min_relative_slack) ? json(s.min_relative_slack) : json(nullptr);
    item["worst_t"] = s.worst_t;
    item["first_violation"] = s.first_violation >= 0 ? json(s.first_violation) : json(nullptr);
    out[s.name] = item;
  }
  return out;
}

}  // namespace

std::string summary_text(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# " << kRelativeErrorDefinition << '\n';
  if (!r.config.preset.empty()) out << "preset: " << r.config.preset << '\n';
  out << "n: " << r.config.n << '\n'
      << "topology: " << to_string(r.config.topology) << '\n'
      << "mixing: " << to_string(r.config.mixing) << '\n'
      << "mu: " << format_double(r.constants.mu) << '\n'
      << "L: " << format_double(r.constants.l) << '\n'
      << "kappa: " << format_double(r.constants.kappa) << '\n'
      << "sigma: " << format_double(r.mixing.sigma) << '\n'
      << "alpha_max: " << format_double(r.alpha_max) << '\n'
      << "alpha: " << format_double(r.alpha) << '\n'
      << "alpha_admissible: " << (r.alpha_admissible ? "true" : "false") << '\n';
  if (r.plan) out << "q: " << format_double(r.plan->q) << '\n';
  if (r.result) {
    out << "iterations: " << r.result->iterations << '\n'
        << "converged: " << (r.result->converged ? "true" : "false") << '\n'
        << "final_relative_error: " << format_double(r.final_relative_error) << '\n';
  }
  if (r.fit) {
    out << "fitted_sq_error_ratio: " << format_double(r.fit->ratio()) << '\n'
        << "fit_r_squared: " << format_double(r.fit->r_squared) << '\n';
  }
  if (r.envelope) {
    out << "envelope_constant: " << format_double(r.envelope->constant) << '\n'
        << "envelope_passed: " << (r.envelope->passed ? "true" : "false") << '\n';
  }
  for (const auto& s : r.slacks) {
    out << s.name << "_min_relative_slack: "
        << (s.applicable ? format_double(s.min_relative_slack) : std::string("n/a")) << '\n';
  }
  out << "diverged: " << (r.diverged ? "true" : "false") << '\n';
  for (const auto& note : r.notes) out << "note: " << note << '\n';
  out << "exit_status: " << r.exit_status << '\n';
  return out.str();
}

std::string summary_json(const ExperimentReport& r) {
  json doc;
  doc["relative_error_definition"] = kRelativeErrorDefinition;
  doc["config"] = json::parse(to_json(r.config));
  doc["mu"] = r.constants.mu;
  doc["L"] = r.constants.l;
  doc["L_mapping"] = r.constants.l_mapping;
  doc["kappa"] = r.constants.kappa;
  doc["sigma"] = r.mixing.sigma;
  doc["alpha"] = r.alpha;
  doc["alpha_max"] = r.alpha_max;
  doc["alpha_admissible"] = r.alpha_admissible;
  doc["plan"] = r.plan ? json::parse(to_json(*r.plan)) : json(nullptr);
  if (r.result) {
    doc["iterations"] = r.result->iterations;
    doc["converged"] = r.result->converged;
    doc["initial_distance"] = r.result->initial_distance;
    doc["final_distance"] = r.result->final_distance;
    doc["final_relative_error"] = r.final_relative_error;
  }
  if (r.fit) {
    doc["fit"] = {{"slope", r.fit->slope},
                  {"ratio", r.fit->ratio()},
                  {"r_squared", r.fit->r_squared},
                  {"points", r.fit->points}};
  }
  if (r.envelope) {
    doc["envelope"] = {{"constant", r.envelope->constant},
                       {"worst_log_margin", r.envelope->worst_log_margin},
                       {"worst_t", r.envelope->worst_t},
                       {"passed", r.envelope->passed}};
  }
  doc["slacks"] = slack_json(r.slacks);
  doc["diverged"] = r.diverged;
  doc["divergence_iteration"] = r.diverged ? json(r.divergence_iteration) : json(nullptr);
  doc["notes"] = r.notes;
  doc["exit_status"] = r.exit_status;
  return doc.dump(2) + "\n";
}

std::string plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Render trace.csv (same directory) as plot.svg: relative error vs iteration, log scale."""
import csv
import math
import os

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "trace.csv"), newline="") as f:
    rows = list(csv.DictReader(f))

t = [int(r["t"]) for r in rows]
d = [float(r["distance_to_ne"]) for r in rows]
d0 = d[0] if d and d[0] > 0 else 1.0
y = [math.log10(max(v / d0, 1e-300)) for v in d]

W, H, M = 640, 400, 60
tmax = max(t) if t and max(t) > 0 else 1
ylo = math.floor(min(y)) if y else -1
yhi = max(0, math.ceil(max(y))) if y else 0
if yhi == ylo:
    ylo -= 1

def px(tv):
    return M + (W - 2 * M) * tv / tmax

def py(yv):
    return H - M - (H - 2 * M) * (yv - ylo) / (yhi - ylo)

pts = " ".join("%.2f,%.2f" % (px(a), py(b)) for a, b in zip(t, y))
out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">' % (W, H),
       '<rect width="100%" height="100%" fill="white"/>',
       '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (M, H - M, W - M, H - M),
       '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (M, M, M, H - M)]
for k in range(int(ylo), int(yhi) + 1):
    out.append('<text x="%d" y="%.2f" font-size="11" text-anchor="end">1e%d</text>' % (M - 6, py(k) + 4, k))
out.append('<text x="%d" y="%d" font-size="11" text-anchor="middle">0</text>' % (M, H - M + 16))
out.append('<text x="%d" y="%d" font-size="11" text-anchor="middle">%d</text>' % (W - M, H - M + 16, tmax))
out.append('<text x="%d" y="%d" font-size="12" text-anchor="middle">iteration</text>' % (W // 2, H - 15))
out.append('<text x="15" y="%d" font-size="12" transform="rotate(-90 15 %d)" text-anchor="middle">relative error</text>' % (H // 2, H // 2))
out.append('<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="%s"/>' % pts)
out.append("</svg>")
with open(os.path.join(here, "plot.svg"), "w") as f:
    f.write("\n".join(out) + "\n")
)PY";
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (dir / name).string());
    f << body;
  };
  write("trace.csv", report.result ? trace_to_csv(report.result->trace) : trace_to_csv({}));
  write("summary.txt", summary_text(report));
  write("summary.json", summary_json(report));
  write("plot.py", plot_script());
}

std::filesystem::path default_output_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("GPLAY_OUT_DIR"); env && *env) return env;
  return "gplay-out";
}

std::string AuditCell::label() const {
  std::ostringstream out;
  out << "n=" << n << " topology=" << to_string(topology) << " mixing=" << to_string(mixing)
      << " seed=" << seed;
  return out.str();
}

std::vector<AuditCell> audit_cells(const AuditOptions& o) {
  std::vector<AuditCell> cells;
  for (long n : o.sizes)
    for (Topology t : o.topologies)
      for (MixingRule m : o.mixings)
        for (std::uint64_t s : o.seeds) cells.push_back(AuditCell{n, t, m, s});
  return cells;
}

namespace {

class AuditCollector {
 public:
  explicit AuditCollector(AuditReport& report) : report_(report) {}

  // margin >= -tol passes; smaller margins are worse.
  void record(const std::string& name, const std::string& cell, double margin, bool ok,
              const std::string& detail = {}) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      it = index_.emplace(name, report_.invariants.size()).first;
      InvariantResult r;
      r.name = name;
      r.worst = std::numeric_limits<double>::infinity();
      report_.invariants.push_back(r);
    }
    InvariantResult& r = report_.invariants[it->second];
    ++r.checked;
    if (margin < r.worst || std::isnan(margin)) {
      r.worst = margin;
      r.worst_cell = cell;
    }
    if (!ok) {
      ++r.failed;
      report_.failures.push_back(AuditFailure{name, cell, detail});
    }
  }

  void fail(const std::string& name, const std::string& cell, const std::string& detail) {
    record(name, cell, -std::numeric_limits<double>::infinity(), false, detail);
  }

 private:
  AuditReport& report_;
  std::map<std::string, std::size_t> index_;
};

void audit_cell(const AuditCell& cell, const AuditOptions& o, AuditReport& report,
                AuditCollector& col) {
  const std::string label = cell.label();
  const QuadraticGame game = random_game(cell.n, cell.seed, o.coupling_scale);

  GameConstants k;
  try {
    k = estimate_constants(game);
    col.record("assumption1_mu_positive", label, k.mu, true);
  } catch (const NotStronglyMonotoneError& e) {
    col.fail("assumption1_mu_positive", label, e.what());
    return;
  }

  Rng rng(cell.seed * 7919 + static_cast<std::uint64_t>(cell.n));
  auto random_vector = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-2.0, 2.0);
    return v;
  };
  const auto nd = static_cast<double>(cell.n);
  for (int s = 0; s < o.sample_vectors; ++s) {
    const Eigen::VectorXd u = random_vector(cell.n), v = random_vector(cell.n);
    const Eigen::VectorXd fu = game_mapping(game, u), fv = game_mapping(game, v);
    const double dist = (u - v).norm();
    const double mono_rhs = k.mu * dist * dist;
    const double mono = relative_slack((fu - fv).dot(u - v) - mono_rhs, mono_rhs);
    col.record("assumption1_monotonicity", label, mono, mono >= -kSlackTolerance);
    double worst_lip = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < cell.n; ++i) {
      const double rhs = k.l_per_player(i) * dist;
      worst_lip = std::min(worst_lip, relative_slack(rhs - std::abs(fu(i) - fv(i)), rhs));
    }
    col.record("assumption2_player_lipschitz", label, worst_lip, worst_lip >= -kSlackTolerance);
    const double map_rhs = k.l * std::sqrt(nd) * dist;
    const double lip = relative_slack(map_rhs - (fu - fv).norm(), map_rhs);
    col.record("mapping_lipschitz", label, lip, lip >= -kSlackTolerance);
  }

  const Eigen::VectorXd xstar = solve_nash_equilibrium(game);
  const double residual = game_mapping(game, xstar).norm();
  const double residual_cap = 1e-10 * (1.0 + game.b().norm());
  col.record("nash_residual", label, (residual_cap - residual) / residual_cap, residual <= residual_cap,
             "||F(x*)|| = " + format_double(residual));

  std::optional<Graph> graph;
  try {
    graph = make_graph(cell.topology, cell.n, cell.seed + 1000);
  } catch (const InputError& e) {
    report.skipped.push_back(label + ": " + e.what());
    return;
  }
  const MixingMatrix w = make_mixing(cell.mixing, *graph);
  const double defect = stochasticity_defect(w.w);
  col.record("assumption3_doubly_stochastic", label, -defect, defect <= 1e-12,
             "defect = " + format_double(defect));
  col.record("assumption3_sparsity", label, 0.0, sparsity_matches(w.w, *graph));
  col.record("assumption3_symmetric", label, 0.0, w.w == w.w.transpose());
  col.record("assumption3_sigma_below_one", label, 1.0 - w.sigma, w.sigma < 1.0,
             "sigma = " + format_double(w.sigma));
  for (int s = 0; s < o.sample_vectors; ++s) {
    const AverageProperty ap = average_property_check(w, random_vector(cell.n));
    const double margin = relative_slack(ap.rhs - ap.lhs, ap.rhs);
    col.record("average_contraction", label, margin, ap.lhs <= ap.rhs + 1e-12 * (1.0 + ap.rhs));
  }

  const long n = cell.n;
  std::optional<StepSizePlan> plan;
  double alpha = 0.0;
  try {
    const TheoremTerms terms = theorem1_terms(k.mu, k.l, w.sigma, n);
    const double t5 = terms.terms[4];
    const double app = appendix_alpha_bound(k.mu, k.l, w.sigma, n);
    const double rel = std::abs(t5 - app) / t5;
    col.record("step_bound_equivalence", label, -rel, rel <= 1e-12);
    alpha = o.alpha.value_or(kAutoAlphaFraction * terms.alpha_max());
    try {
      plan = make_step_size_plan(k.mu, k.l, w.sigma, n, alpha);
      col.record("q_below_one", label, plan->gap,
                 plan->q < 1.0 && plan->lambda1 > std::abs(plan->lambda2),
                 "q = " + format_double(plan->q));
      const ProofChain pc = proof_chain(k.mu, k.l, w.sigma, n, alpha);
      const bool chain_ok = pc.consensus_factor < pc.consensus_ceiling &&
                            pc.consensus_factor < pc.gamma && pc.lambda1 < pc.lambda1_ceiling &&
                            pc.lambda1_ceiling < 1.0;
      col.record("proof_chain", label, 1.0 - pc.lambda1_ceiling, chain_ok);
    } catch (const InadmissibleStepError& e) {
      col.fail("q_below_one", label, e.what());
    }
  } catch (const PerfectMixingError& e) {
    report.skipped.push_back(label + ": documented degenerate-mixing error: " + e.what());
    if (!o.alpha) return;
    alpha = *o.alpha;
  }

  const EstimationMatrix x0 = initial_estimates(InitKind::kUniform, cell.n, cell.seed + 2000);
  RunOptions ro;
  ro.max_iters = o.iterations;
  ro.record = true;
  try {
    const RunResult res = run(game, w, alpha, x0, ro);
    for (const auto& s : summarize_slacks(res.trace, alpha, k.mu, k.l, w.sigma, k.mu)) {
      if (!s.applicable) continue;
      col.record(s.name, label, s.min_relative_slack, s.passed(),
                 "first violation at t = " + std::to_string(s.first_violation));
    }
    if (plan) {
      const EnvelopeCheck env = check_envelope(res.trace, *plan);
      col.record("geometric_envelope", label, -env.worst_log_margin, env.passed,
                 "worst at t = " + std::to_string(env.worst_t));
    } else {
      col.fail("geometric_envelope", label, "no contraction rate for alpha = " + format_double(alpha));
    }
  } catch (const DivergenceError& e) {
    col.fail("divergence_guard", label, e.what());
  }
}

}  // namespace

AuditReport audit(const AuditOptions& options) {
  AuditReport report;
  AuditCollector col(report);
  for (const AuditCell& cell : audit_cells(options)) {
    ++report.cells;
    audit_cell(cell, options, report, col);
  }
  return report;
}

std::string to_text(const AuditReport& r) {
  std::ostringstream out;
  out << "cells: " << r.cells << '\n';
  for (const auto& inv : r.invariants) {
    out << (inv.passed() ? "PASS " : "FAIL ") << inv.name << "  checked=" << inv.checked
        << " failed=" << inv.failed << " worst=" << format_double(inv.worst);
    if (!inv.worst_cell.empty()) out << " (" << inv.worst_cell << ")";
    out << '\n';
  }
  for (const auto& s : r.skipped) out << "skipped: " << s << '\n';
  for (const auto& f : r.failures) out << "failure: " << f.invariant << " [" << f.cell << "] " << f.detail << '\n';
  out << (r.passed() ? "audit passed" : "audit FAILED") << '\n';
  return out.str();
}

std::string to_json(const AuditReport& r) {
  json doc;
  doc["cells"] = r.cells;
  doc["passed"] = r.passed();
  json inv = json::array();
  for (const auto& i : r.invariants) {
    inv.push_back({{"name", i.name},
                   {"checked", i.checked},
                   {"failed", i.failed},
                   {"worst", std::isfinite(i.worst) ? json(i.worst) : json(nullptr)},
                   {"worst_cell", i.worst_cell},
                   {"passed", i.passed()}});
  }
  doc["invariants"] = inv;
  json fails = json::array();
  for (const auto& f : r.failures) {
    fails.push_back({{"invariant", f.invariant}, {"cell", f.cell}, {"detail", f.detail}});
  }
  doc["failures"] = fails;
  doc["skipped"] = r.skipped;
  return doc.dump(2) + "\n";
}

}  // namespace gplay
