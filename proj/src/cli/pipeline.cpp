#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "regret/analysis.hpp"
#include "regret/cli.hpp"
#include "regret/matrix_io.hpp"

namespace regret::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Controller {
  Mode mode;
  SynthesisResult result;
  double bound_gamma = NAN;  // certificate value shown in the bounds column
};

std::string reuse_key(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << cfg.fingerprint << '/' << std::setprecision(17) << cfg.solver.tolerance;
  return os.str();
}

fs::path out_path(const ExperimentConfig& cfg, const std::string& file) { return fs::path(cfg.output_dir) / file; }

void ensure_dir(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("output: cannot create " + cfg.output_dir);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

double json_number(double v) { return std::isfinite(v) ? v : 0.0; }

SynthesisMode synthesis_mode(Mode m) {
  switch (m) {
    case Mode::H2: return SynthesisMode::H2;
    case Mode::Hinf: return SynthesisMode::Hinf;
    case Mode::EnergyRegret: return SynthesisMode::EnergyRegret;
    case Mode::AdversarialX0: return SynthesisMode::AdversarialX0;
    default: return SynthesisMode::PointwiseRegret;
  }
}

SynthesisResult synthesize_mode(const ExperimentConfig& cfg, const SynthesisProblem& pb, Mode mode) {
  const auto& o = cfg.solver;
  switch (mode) {
    case Mode::H2: return synth_h2(pb.stk);
    case Mode::Hinf: return synth_hinf(pb, o);
    case Mode::EnergyRegret: return synth_energy_regret(pb, cfg.x0, cfg.omega, o);
    case Mode::PointwiseRegret: return synth_pointwise_regret(pb, cfg.x0, cfg.disturbance.P, nullptr, o);
    case Mode::ConstrainedPointwise:
      return synth_pointwise_regret(pb, cfg.x0, cfg.disturbance.P, &*cfg.constraints, o);
    case Mode::AdversarialX0: return synth_adversarial_x0(pb, o);
    case Mode::NonCausal: break;
  }
  throw std::logic_error("synthesize_mode: no controller for " + mode_name(mode));
}

// Smallest eigenvalue of the regret LMI rebuilt densely at the returned point.
double recheck(const ExperimentConfig& cfg, const SynthesisProblem& pb, Mode mode, const SynthesisResult& r) {
  Mat M;
  if (mode == Mode::EnergyRegret && r.multipliers.size() == 1)
    M = energy_lmi(pb, r.Phi, cfg.x0, cfg.omega, r.gamma_star, r.multipliers[0]);
  else if ((mode == Mode::PointwiseRegret || mode == Mode::ConstrainedPointwise) &&
           static_cast<int>(r.multipliers.size()) == pb.stk.T + 1)
    M = pointwise_lmi(pb, r.Phi, cfg.x0, cfg.disturbance.P, r.multipliers);
  else
    return NAN;
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void write_artifacts(const ExperimentConfig& cfg, const SynthesisProblem& pb, Mode mode, const SynthesisResult& r) {
  const std::string name = mode_name(mode);
  write_matrix(out_path(cfg, "Phi_" + name + ".txt").string(), r.Phi);
  if (r.controller && r.controller->has_gain()) write_matrix(out_path(cfg, "K_" + name + ".txt").string(), r.controller->gain());
  const RegretCertificate cert = regret_certificate(pb, r.Phi);
  json j;
  j["mode"] = name;
  j["gamma_star"] = r.gamma_star;
  j["lambda"] = r.multipliers;
  j["sigma_max"] = cert.sigma_max;
  j["solve_seconds"] = r.report.solve_seconds;
  j["max_psd_violation"] = r.report.max_psd_violation;
  j["solver_status"] = conic::to_string(r.report.status);
  j["iterations"] = r.report.iterations;
  j["reduced_accuracy"] = r.report.reduced_accuracy;
  j["lmi_min_eigenvalue"] = json_number(recheck(cfg, pb, mode, r));
  j["realisation"] = r.controller ? (r.controller->has_gain() ? "state_feedback" : "disturbance_feedback") : "none";
  j["config_key"] = reuse_key(cfg);
  if (!r.message.empty()) j["message"] = r.message;
  write_text(out_path(cfg, "certificate_" + name + ".json"), j.dump(2) + "\n");
}

// Loads a previous synthesis of the same config, if any.
std::optional<SynthesisResult> load_previous(const ExperimentConfig& cfg, const SynthesisProblem& pb, Mode mode) {
  const std::string name = mode_name(mode);
  const fs::path cp = out_path(cfg, "certificate_" + name + ".json");
  const fs::path pp = out_path(cfg, "Phi_" + name + ".txt");
  if (!fs::exists(cp) || !fs::exists(pp)) return std::nullopt;
  try {
    std::ifstream f(cp);
    const json j = json::parse(f);
    if (j.value("config_key", "") != reuse_key(cfg) || j.value("solver_status", "") != "optimal") return std::nullopt;
    SynthesisResult r;
    r.mode = synthesis_mode(mode);
    r.Phi = read_matrix(pp.string());
    if (r.Phi.rows() != pb.stk.Nz() || r.Phi.cols() != pb.stk.Nd()) return std::nullopt;
    r.gamma_star = j.at("gamma_star").get<double>();
    r.multipliers = j.at("lambda").get<std::vector<double>>();
    r.report.status = conic::SolveStatus::Optimal;
    r.report.objective_value = r.gamma_star;
    r.report.solve_seconds = j.value("solve_seconds", 0.0);
    r.report.max_psd_violation = j.value("max_psd_violation", 0.0);
    r.report.iterations = j.value("iterations", 0);
    r.report.reduced_accuracy = j.value("reduced_accuracy", false);
    r.controller = CausalController::recover(pb.stk, r.Phi);
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Controller obtain(const ExperimentConfig& cfg, const SynthesisProblem& pb, Mode mode, bool quiet) {
  Controller c{mode, {}, NAN};
  if (auto prev = load_previous(cfg, pb, mode)) {
    if (!quiet) std::cerr << "[" << mode_name(mode) << "] reusing " << out_path(cfg, "Phi_" + mode_name(mode) + ".txt").string() << "\n";
    c.result = std::move(*prev);
  } else {
    if (!quiet) std::cerr << "[" << mode_name(mode) << "] synthesising\n";
    c.result = synthesize_mode(cfg, pb, mode);
    write_artifacts(cfg, pb, mode, c.result);
    if (!c.result.ok()) throw SolverError(mode_name(mode) + ": " + c.result.message);
    if (!c.result.controller) throw SolverError(mode_name(mode) + ": controller recovery failed: " + c.result.message);
    if (!quiet)
      std::cerr << "[" << mode_name(mode) << "] objective " << std::setprecision(8) << c.result.gamma_star << " in "
                << std::setprecision(3) << c.result.report.solve_seconds << " s\n";
  }
  switch (mode) {
    case Mode::EnergyRegret:
    case Mode::PointwiseRegret:
    case Mode::ConstrainedPointwise: c.bound_gamma = c.result.gamma_star; break;
    default: break;
  }
  return c;
}

std::vector<Controller> obtain_all(const ExperimentConfig& cfg, const SynthesisProblem& pb, bool quiet) {
  ensure_dir(cfg);
  std::vector<Controller> out;
  for (Mode m : cfg.modes)
    if (m != Mode::NonCausal) out.push_back(obtain(cfg, pb, m, quiet));
  return out;
}

bool wants(const ExperimentConfig& cfg, Mode m) {
  return std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end();
}

// Non-causal benchmark replayed as an open-loop input.
Trajectory noncausal_rollout(const Plant& plant, const SynthesisProblem& pb, const Vec& x0, const Vec& w) {
  const Vec u = optimal_sequence(pb.stk, make_delta(x0, w));
  return rollout(plant, CausalController::open_loop(pb.stk, u), x0, w);
}

std::vector<Vec> draws(const ScenarioSpec& s, const ExperimentConfig& cfg, const SynthesisProblem& pb,
                       const SynthesisResult* own) {
  const int r = cfg.system.r, T = cfg.system.T;
  if (s.scenario.kind == ScenarioKind::WorstCaseEnergy) {
    if (own == nullptr) return {};
    return {worst_case_disturbance(pb, own->Phi, cfg.x0, cfg.omega).w};
  }
  std::vector<Vec> ws;
  for (int i = 0; i < s.count; ++i) ws.push_back(generate(s.scenario, r, T, static_cast<std::uint64_t>(i)));
  return ws;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_series(const fs::path& p, const Trajectory& tr) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  const Vec cum = cumulative_cost_series(tr);
  f << "step,stage_cost,cum_cost\n";
  for (Eigen::Index k = 0; k < cum.size(); ++k)
    f << k << ',' << csv_number(tr.stage_costs(k)) << ',' << csv_number(cum(k)) << '\n';
}

void write_states(const fs::path& p, const Trajectory& tr) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  write_trajectory_csv(f, tr);
}

}  // namespace

void run_synth(const ExperimentConfig& cfg, bool quiet) {
  const SynthesisProblem pb = SynthesisProblem::build(cfg.system, cfg.costs);
  const auto ctrls = obtain_all(cfg, pb, quiet);
  if (wants(cfg, Mode::NonCausal)) {
    const Plant plant = Plant::build(cfg.system, cfg.costs);
    json j;
    j["mode"] = "noncausal";
    if (!cfg.scenarios.empty()) {
      const auto ws = draws(cfg.scenarios.front(), cfg, pb, nullptr);
      if (!ws.empty()) {
        const Trajectory tr = noncausal_rollout(plant, pb, cfg.x0, ws.front());
        j["scenario"] = cfg.scenarios.front().name;
        j["J_star"] = tr.total_cost;
        j["J_star_quadratic_form"] = tr.benchmark;
      }
    }
    j["config_key"] = reuse_key(cfg);
    write_text(out_path(cfg, "certificate_noncausal.json"), j.dump(2) + "\n");
  }
  if (!quiet)
    for (const auto& c : ctrls)
      std::cout << std::left << std::setw(30) << mode_name(c.mode) << " objective " << fmt(c.result.gamma_star, 8)
                << "  status " << conic::to_string(c.result.report.status) << "\n";
}

void run_simulate(const ExperimentConfig& cfg, bool quiet) {
  if (cfg.scenarios.empty()) throw ConfigError("scenarios: at least one required for simulate");
  const SynthesisProblem pb = SynthesisProblem::build(cfg.system, cfg.costs);
  const Plant plant = Plant::build(cfg.system, cfg.costs);
  const auto ctrls = obtain_all(cfg, pb, quiet);
  for (const auto& sc : cfg.scenarios) {
    std::ostringstream csv;
    csv << "controller,draws,mean_cost,max_cost,mean_regret,max_regret,max_bound_ratio";
    if (cfg.constraints) csv << ",max_violation";
    csv << '\n';
    auto summarise = [&](const std::string& name, const std::vector<Trajectory>& trs, const RegretCertificate* cert) {
      double mean_c = 0, max_c = -INFINITY, mean_r = 0, max_r = -INFINITY, ratio = -INFINITY, viol = -INFINITY;
      for (const auto& t : trs) {
        mean_c += t.total_cost / trs.size();
        mean_r += t.regret / trs.size();
        max_c = std::max(max_c, t.total_cost);
        max_r = std::max(max_r, t.regret);
        if (cert != nullptr) {
          const double b = cert->sigma_max * (cfg.x0.squaredNorm() + t.w.squaredNorm());
          if (b > 0.0) ratio = std::max(ratio, t.regret / b);
        }
        if (cfg.constraints) viol = std::max(viol, check_constraints(t, *cfg.constraints));
      }
      csv << name << ',' << trs.size() << ',' << csv_number(mean_c) << ',' << csv_number(max_c) << ','
          << csv_number(mean_r) << ',' << csv_number(max_r) << ',' << (cert ? csv_number(ratio) : "");
      if (cfg.constraints) csv << ',' << csv_number(viol);
      csv << '\n';
      if (!trs.empty()) write_states(out_path(cfg, "traj_" + sc.name + "_" + name + ".csv"), trs.front());
    };
    for (const auto& c : ctrls) {
      const auto ws = draws(sc, cfg, pb, &c.result);
      const RegretCertificate cert = regret_certificate(pb, c.result.Phi);
      summarise(mode_name(c.mode), rollout_batch(plant, *c.result.controller, cfg.x0, ws), &cert);
    }
    if (wants(cfg, Mode::NonCausal) && sc.scenario.kind != ScenarioKind::WorstCaseEnergy) {
      std::vector<Trajectory> trs;
      for (const auto& w : draws(sc, cfg, pb, nullptr)) trs.push_back(noncausal_rollout(plant, pb, cfg.x0, w));
      summarise("noncausal", trs, nullptr);
    }
    write_text(out_path(cfg, "simulate_" + sc.name + ".csv"), csv.str());
    if (!quiet) std::cout << "scenario " << sc.name << "\n" << csv.str();
  }
}

void run_compare(const ExperimentConfig& cfg, bool quiet) {
  if (cfg.scenarios.empty()) throw ConfigError("scenarios: at least one required for compare");
  const ScenarioSpec& sc = cfg.scenarios.front();
  if (sc.scenario.kind == ScenarioKind::WorstCaseEnergy)
    throw ConfigError("scenarios[0].kind: compare needs a fixed disturbance");
  const SynthesisProblem pb = SynthesisProblem::build(cfg.system, cfg.costs);
  const Plant plant = Plant::build(cfg.system, cfg.costs);
  const auto ctrls = obtain_all(cfg, pb, quiet);
  const Vec w = draws(sc, cfg, pb, nullptr).front();
  const double jstar = noncausal_rollout(plant, pb, cfg.x0, w).total_cost;

  struct Row {
    std::string name;
    double cost, regret;
    std::string bound;
  };
  std::vector<Row> rows;
  const Mode order[] = {Mode::H2, Mode::Hinf, Mode::EnergyRegret, Mode::PointwiseRegret, Mode::ConstrainedPointwise,
                        Mode::AdversarialX0};
  for (Mode m : order)
    for (const auto& c : ctrls) {
      if (c.mode != m) continue;
      const Trajectory tr = rollout(plant, *c.result.controller, cfg.x0, w);
      if (std::abs((tr.total_cost - jstar) - tr.regret) > 1e-6 * std::max(1.0, tr.total_cost))
        throw SolverError("compare: regret accounting mismatch for " + mode_name(m));
      std::string bound = "n/a";
      if (std::isfinite(c.bound_gamma)) bound = fmt(c.bound_gamma, 8);
      if (m == Mode::AdversarialX0) bound = fmt(c.result.gamma_star * (cfg.x0.squaredNorm() + w.squaredNorm()), 8);
      rows.push_back({mode_name(m), tr.total_cost, tr.regret, bound});
      write_series(out_path(cfg, "cumulative_" + mode_name(m) + ".csv"), tr);
      write_states(out_path(cfg, "states_" + mode_name(m) + ".csv"), tr);
    }
  if (wants(cfg, Mode::NonCausal)) {
    const Trajectory tr = noncausal_rollout(plant, pb, cfg.x0, w);
    rows.push_back({"noncausal", tr.total_cost, 0.0, "n/a"});
    write_series(out_path(cfg, "cumulative_noncausal.csv"), tr);
    write_states(out_path(cfg, "states_noncausal.csv"), tr);
  }

  std::ostringstream csv, txt;
  csv << "controller,incurred_cost,incurred_regret,regret_bound\n";
  txt << "scenario: " << sc.name << "\n";
  txt << std::left << std::setw(30) << "controller" << std::right << std::setw(16) << "incurred cost" << std::setw(18)
      << "incurred regret" << std::setw(16) << "regret bound" << "\n";
  for (const auto& r : rows) {
    csv << r.name << ',' << csv_number(r.cost) << ',' << csv_number(r.regret) << ',' << r.bound << '\n';
    txt << std::left << std::setw(30) << r.name << std::right << std::fixed << std::setprecision(1) << std::setw(16)
        << r.cost << std::setw(18) << r.regret << std::defaultfloat << std::setw(16) << r.bound << "\n";
  }
  write_text(out_path(cfg, "summary.csv"), csv.str());
  write_text(out_path(cfg, "summary.txt"), txt.str());

  // Deviations from reference costs; baselines outside tolerance get a note.
  std::ostringstream ref, note;
  ref << "controller,incurred_cost,reference_cost,relative_deviation,within_tolerance\n";
  for (const auto& r : rows) {
    const auto it = cfg.reference_costs.find(r.name);
    if (it == cfg.reference_costs.end()) continue;
    const double dev = (r.cost - it->second) / it->second;
    const bool ok = std::abs(dev) <= cfg.reference_tolerance;
    ref << r.name << ',' << csv_number(r.cost) << ',' << csv_number(it->second) << ',' << csv_number(dev) << ','
        << (ok ? "yes" : "no") << '\n';
    if (!ok && (r.name == "h2" || r.name == "hinf")) {
      note << r.name << ": incurred cost " << fmt(r.cost, 8) << " differs from the reference " << fmt(it->second, 8)
           << " by " << fmt(100.0 * dev, 3) << "%.\n";
    }
  }
  if (!cfg.reference_costs.empty()) write_text(out_path(cfg, "reference_check.csv"), ref.str());
  if (!note.str().empty()) {
    std::string text = note.str();
    text +=
        "Baseline methodology: h2 minimises trace(Phi' C Phi) over causal achievable responses, which equals the "
        "finite-horizon LQR law; hinf minimises the induced 2-norm of Phi' C Phi over delta = [x0; w], x0 column "
        "included.  Both are system-level syntheses over the same horizon and cost as the regret controllers; the "
        "reference values may come from a different baseline construction.\n";
    write_text(out_path(cfg, "baseline_note.txt"), text);
    if (!quiet) std::cerr << "note: " << text;
  }
  if (!quiet) std::cout << txt.str();
}

void run_table(const ExperimentConfig& cfg) {
  const fs::path p = out_path(cfg, "summary.txt");
  std::ifstream f(p);
  if (!f) throw ConfigError("output: no summary table in " + cfg.output_dir + " (run compare first)");
  std::cout << f.rdbuf();
}

}  // namespace regret::cli
