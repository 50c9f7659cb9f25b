#include "pursuit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pursuit/comparison.hpp"
#include "pursuit/dde_engine.hpp"
#include "pursuit/defaults.hpp"
#include "pursuit/errors.hpp"
#include "pursuit/homogenization.hpp"
#include "pursuit/model.hpp"
#include "pursuit/scenario_io.hpp"
#include "pursuit/thresholds.hpp"

namespace pursuit::cli {

using nlohmann::ordered_json;

std::string to_string(Verb v) {
  switch (v) {
    case Verb::simulate: return "simulate";
    case Verb::threshold: return "threshold";
    case Verb::compare: return "compare";
    case Verb::homogenize: return "homogenize";
    case Verb::counterexample: return "counterexample";
    case Verb::validate: return "validate";
  }
  return "?";
}

namespace {

// Collects artifacts of one run under c.out.
class Artifacts {
 public:
  Artifacts(const Command& c, std::string prefix) : dir_(c.out), prefix_(std::move(prefix)) {}

  template <class Writer>
  void write(const std::string& name, Writer&& fn) {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    const auto path = std::filesystem::path(dir_) / (prefix_ + name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    fn(out);
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
    names_.push_back(prefix_ + name);
  }

  void json(const std::string& name, const ordered_json& j) {
    write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string dir_;
  std::string prefix_;
  std::vector<std::string> names_;
};

model::Scenario apply(model::Scenario s, const Overrides& o) {
  if (o.dt) s.dt = *o.dt;
  if (o.epsilons) s.epsilons = *o.epsilons;
  return s;
}

model::Scenario load(const std::string& path, const Overrides& o) {
  auto s = apply(io::load_scenario(path), o);
  model::require_valid(s);
  return s;
}

Region region_of(const Overrides& o) {
  const Region r = o.region ? *o.region : homog::default_region();
  if (!(r.x0 < r.x1 && r.t0 < r.t1 && r.t0 >= 0))
    throw ConfigError("--region: need x0 < x1 and 0 <= t0 < t1");
  return r;
}

ordered_json validation_json(const model::ValidationReport& rep) {
  ordered_json issues = ordered_json::array();
  for (const auto& i : rep.issues) issues.push_back({{"path", i.path}, {"message", i.message}});
  ordered_json j;
  j["ok"] = rep.ok();
  j["issues"] = std::move(issues);
  j["tau"] = rep.tau;
  j["C_F"] = rep.C_F;
  j["threshold"] = std::isfinite(rep.threshold) ? ordered_json(rep.threshold) : ordered_json(nullptr);
  j["below_threshold"] = rep.below_threshold;
  return j;
}

// ---------------------------------------------------------------------------

int do_validate(const Command& c, ordered_json& e, Artifacts& a) {
  const auto s = apply(io::load_scenario(c.scenario), c.overrides);
  const auto rep = model::validate_scenario(s);
  e["validation"] = validation_json(rep);
  if (rep.ok()) a.json("scenario.json", io::scenario_to_json(s));
  return rep.ok() ? 0 : 1;
}

int do_simulate(const Command& c, ordered_json& e, Artifacts& a) {
  const auto s = load(c.scenario, c.overrides);
  if (c.stride == 0) throw ConfigError("--stride must be >= 1");
  const auto ts = dde::integrate(s, {c.workers});
  e["scenario"] = io::scenario_to_json(s);
  e["drivers"] = {ts.first_driver(), ts.last_driver()};
  e["steps"] = ts.committed_steps();
  e["T"] = ts.committed_until();
  a.json("scenario.json", e["scenario"]);
  a.write("trajectories.csv", [&](std::ostream& o) { dde::write_csv(ts, o, c.stride); });
  return 0;
}

ordered_json rho_json(double tau, double C_F) {
  try {
    const auto rho = thresholds::construct_rho(tau, C_F);
    return thresholds::certificate_json(rho, thresholds::verify_condrho(rho));
  } catch (const InfeasibleError& ex) {
    return {{"tau", tau}, {"C_F", C_F}, {"infeasible", ex.what()}};
  }
}

int do_threshold(const Command& c, ordered_json& e, Artifacts& a) {
  double C_F = 0, tau = 0;
  bool have_tau = false;
  if (!c.scenario.empty()) {
    const auto s = load(c.scenario, c.overrides);
    C_F = model::lipschitz_data(s.velocity).C_F;
    tau = s.delay.tau();
    have_tau = true;
  }
  if (c.cf) C_F = *c.cf;
  if (c.tau) tau = *c.tau, have_tau = true;
  if (!c.cf && c.scenario.empty()) throw ConfigError("threshold: need --cf or --scenario");
  if (!(C_F > 0) || !std::isfinite(C_F)) throw ConfigError("--cf must be a positive number");
  if (have_tau && !(tau > 0)) throw ConfigError("--tau must be > 0");

  ordered_json j;
  j["C_F"] = C_F;
  j["homogenization"] = thresholds::homogenization_threshold(C_F);
  j["constant_rho"] = thresholds::constant_rho_threshold(C_F);
  if (have_tau) {
    j["tau"] = tau;
    j["below_threshold"] = tau < thresholds::homogenization_threshold(C_F);
    if (const auto iv = thresholds::constant_rho_interval(tau, C_F))
      j["constant_rho_interval"] = {iv->lo, iv->hi};
    else
      j["constant_rho_interval"] = nullptr;
    j["rho"] = rho_json(tau, C_F);
  }
  e["thresholds"] = j;
  a.json("thresholds.json", j);
  return 0;
}

// Audits v >= u with the decay bound. Without --against, v = X_{i+1} and
// u = X_i of one run; with it, v and u are the two runs driver by driver.
int do_compare(const Command& c, ordered_json& e, Artifacts& a) {
  const auto s = load(c.scenario, c.overrides);
  const auto ts = dde::integrate(s, {c.workers});
  e["scenario"] = io::scenario_to_json(s);

  const double tau = s.delay.tau();
  const double C_F = model::lipschitz_data(s.velocity).C_F;
  const double t0 = std::max(0.0, 2 * tau - s.initial.window);
  long first = ts.first_driver(), last = ts.last_driver();
  double t_end = ts.committed_until();

  std::vector<comparison::Crossing> crossings;
  FieldGrid v, u;
  if (c.against.empty()) {
    if (const auto x = comparison::order_conservation_audit(ts)) crossings.push_back(*x);
    if (!ts.periodic()) --last;
    if (last < first) throw ConfigError("compare: a single cone driver has no leader to compare with");
    if (t_end <= t0) throw ConfigError("compare: T must exceed the start time of the audit");
    u = comparison::micro_field(ts, first, last, t0 - 2 * tau, t_end);
    v = comparison::micro_field(ts, first, last, t0 - 2 * tau, t_end, 1);
  } else {
    const auto s2 = load(c.against, c.overrides);
    const auto lower = dde::integrate(s2, {c.workers});
    e["against"] = io::scenario_to_json(s2);
    first = std::max(first, lower.first_driver());
    last = std::min(last, lower.last_driver());
    if (last < first) throw ConfigError("compare: the two scenarios share no driver");
    t_end = std::min(t_end, lower.committed_until());
    if (t_end <= t0) throw ConfigError("compare: T must exceed the start time of the audit");
    if (const auto x = comparison::family_order_audit(ts, lower, first, last)) crossings.push_back(*x);
    v = comparison::micro_field(ts, first, last, t0 - 2 * tau, t_end);
    u = comparison::micro_field(lower, first, last, t0 - 2 * tau, t_end);
  }

  double delta = INFINITY;
  for (std::size_t n = 0; n < v.nt && v.t(n) <= t0 + 1e-9 * v.dt; ++n)
    for (std::size_t j = 0; j < v.nx; ++j) delta = std::min(delta, v(j, n) - u(j, n));

  const bool below = tau < thresholds::homogenization_threshold(C_F);
  thresholds::RhoFunction rho = below ? thresholds::construct_rho(tau, C_F)
                                      : thresholds::RhoFunction{thresholds::ConstantRho{2.0}, tau, C_F};
  ordered_json audit;
  audit["t0"] = t0;
  audit["T"] = t_end;
  audit["drivers"] = {first, last};
  audit["delta"] = delta;
  audit["rho"] = rho.kind_name();
  audit["below_threshold"] = below;
  bool failed = !crossings.empty();
  if (delta > 0) {
    const comparison::ComparisonWindow w{delta, t0, INFINITY, 0.0, t_end, rho};
    const auto rep = comparison::verify_conclusion(v, u, w);
    audit["report"] = comparison::report_json(rep);
    failed = failed || (rep.hypotheses_ok() && !rep.conclusion_ok);
  } else {
    audit["report"] = nullptr;
    audit["note"] = "v - u is not positive on the initial window; the hypotheses cannot hold";
  }
  audit["crossing"] = crossings.empty()
                          ? ordered_json(nullptr)
                          : ordered_json{{"i", crossings[0].i}, {"t", crossings[0].t}, {"gap", crossings[0].gap}};
  e["audit"] = audit;
  a.json("scenario.json", e["scenario"]);
  a.json("audit.json", audit);
  a.write("crossings.csv", [&](std::ostream& o) { comparison::write_crossings_csv(crossings, o); });
  return failed ? 2 : 0;
}

int do_homogenize(const Command& c, ordered_json& e, Artifacts& a) {
  const auto s = load(c.scenario, c.overrides);
  const Region r = region_of(c.overrides);
  if (!(c.dx > 0)) throw ConfigError("--dx must be > 0");
  const auto macro = homog::solve_macro(s, r, c.dx);
  const auto rec = homog::convergence_study(s, macro, r, {std::nullopt, c.workers});
  e["scenario"] = io::scenario_to_json(s);
  e["convergence"] = homog::record_json(rec);
  a.json("scenario.json", e["scenario"]);
  a.write("convergence.csv", [&](std::ostream& o) { homog::write_convergence_csv(rec, o); });
  if (c.expect) {
    e["expected"] = *c.expect;
    if (homog::to_string(rec.verdict) != *c.expect) return 2;
  }
  return 0;
}

int do_counterexample(const Command& c, ordered_json& e, Artifacts& a) {
  auto s = c.scenario.empty() ? apply(model::oscillation_scenario(model::QuadraticLaw{}, 0.4, 1.0), c.overrides)
                              : load(c.scenario, c.overrides);
  const auto* p = std::get_if<model::QuadraticLaw>(&s.velocity.law);
  const auto* h = std::get_if<model::AlternatingSineHistory>(&s.initial.family);
  if (!p || !h) throw ConfigError("counterexample: needs the quadratic law with alternating_sine data");
  const auto eps = c.overrides.epsilons ? *c.overrides.epsilons : defaults::drift_epsilons();
  const std::optional<double> dt = c.overrides.dt;

  const double expected = p->k + 0.5 * p->beta * h->A * h->A;
  const double C = 0.5 * p->beta * h->A * h->A / (4 * p->alpha) + h->A;
  std::vector<homog::DriftRow> rows;
  bool within = true;
  for (double ep : eps) {
    const double q = homog::counterexample_drift(s, ep, c.s_time, c.h, dt);
    rows.push_back({ep, c.s_time, c.h, q});
    within = within && std::abs(q - expected) <= C * ep / c.h;
  }
  const double macro = homog::macro_drift(s, c.s_time, c.h);
  ordered_json j;
  j["s"] = c.s_time;
  j["h"] = c.h;
  ordered_json qs = ordered_json::array();
  for (const auto& r : rows) qs.push_back({{"epsilon", r.epsilon}, {"quotient", r.quotient}});
  j["rows"] = std::move(qs);
  j["expected_limit"] = expected;
  j["macro_quotient"] = macro;
  j["within_bound"] = within;
  e["scenario"] = io::scenario_to_json(s);
  e["drift"] = j;
  a.json("scenario.json", e["scenario"]);
  a.write("drift.csv", [&](std::ostream& o) { homog::write_drift_csv(rows, o); });
  return within ? 0 : 2;
}

const char* error_type(const std::exception& ex) {
  if (dynamic_cast<const ValidationError*>(&ex)) return "ValidationError";
  if (dynamic_cast<const ConfigError*>(&ex)) return "ConfigError";
  if (dynamic_cast<const DomainError*>(&ex)) return "DomainError";
  if (dynamic_cast<const RangeError*>(&ex)) return "RangeError";
  if (dynamic_cast<const InfeasibleError*>(&ex)) return "InfeasibleError";
  if (dynamic_cast<const NumericError*>(&ex)) return "NumericError";
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&ex)) return "IOError";
  return "Error";
}

}  // namespace

RunResult run(const Command& c, const std::string& prefix) {
  RunResult r;
  r.entry["verb"] = to_string(c.verb);
  r.entry["status"] = "ok";
  Artifacts a(c, prefix);
  try {
    if (c.scenario.empty() && c.verb != Verb::threshold && c.verb != Verb::counterexample)
      throw ConfigError(to_string(c.verb) + ": --scenario is required");
    switch (c.verb) {
      case Verb::validate: r.exit_code = do_validate(c, r.entry, a); break;
      case Verb::simulate: r.exit_code = do_simulate(c, r.entry, a); break;
      case Verb::threshold: r.exit_code = do_threshold(c, r.entry, a); break;
      case Verb::compare: r.exit_code = do_compare(c, r.entry, a); break;
      case Verb::homogenize: r.exit_code = do_homogenize(c, r.entry, a); break;
      case Verb::counterexample: r.exit_code = do_counterexample(c, r.entry, a); break;
    }
    if (r.exit_code == 1) r.entry["status"] = "invalid";
    if (r.exit_code == 2) r.entry["status"] = "audit_failed";
  } catch (const std::exception& ex) {
    // Errors from the model (bad data, grid, domain) are input failures.
    r.exit_code = 1;
    r.entry["status"] = "error";
    r.entry["error"] = {{"type", error_type(ex)}, {"message", ex.what()}};
  }
  r.entry["artifacts"] = a.names();
  return r;
}

ordered_json emit_report(const std::vector<RunResult>& results) {
  ordered_json runs = ordered_json::array();
  for (const auto& r : results) runs.push_back(r.entry);
  return {{"runs", std::move(runs)}};
}

int combined_exit(const std::vector<RunResult>& results) {
  int code = 0;
  for (const auto& r : results) {
    if (r.exit_code == 1) return 1;
    if (r.exit_code == 2) code = 2;
  }
  return code;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed car-following experiments", "pursuit_lab"};
  app.require_subcommand(0, 0);
  app.fallthrough();

  std::string out_dir;
  unsigned workers = 1;
  app.add_option("--out", out_dir, "Artifact directory (report.json and per-verb files)");
  app.add_option("--workers", workers, "Worker threads for the modules")->check(CLI::Range(1u, 256u));

  struct Pending {
    CLI::App* sub;
    Command cmd;
    std::vector<double> eps, region;
  };
  const Verb verbs[] = {Verb::simulate, Verb::threshold,     Verb::compare,
                        Verb::homogenize, Verb::counterexample, Verb::validate};
  std::vector<Pending> pending(std::size(verbs));
  for (std::size_t k = 0; k < std::size(verbs); ++k) {
    auto& p = pending[k];
    p.cmd.verb = verbs[k];
    p.sub = app.add_subcommand(to_string(verbs[k]));
    auto* sub = p.sub;
    sub->add_option("--scenario", p.cmd.scenario, "Scenario JSON");
    sub->add_option("--dt", p.cmd.overrides.dt, "Micro time step")->check(CLI::PositiveNumber);
    sub->add_option("--eps", p.eps, "Comma-separated epsilon list")->delimiter(',');
    if (verbs[k] == Verb::homogenize)
      sub->add_option("--region", p.region, "x0,x1,t0,t1")->delimiter(',')->expected(4);
    switch (verbs[k]) {
      case Verb::threshold:
        sub->add_option("--cf", p.cmd.cf, "Lipschitz constant C_F");
        sub->add_option("--tau", p.cmd.tau, "Reaction time");
        break;
      case Verb::compare:
        sub->add_option("--against", p.cmd.against, "Lower scenario for a two-run audit");
        break;
      case Verb::homogenize:
        sub->add_option("--expect", p.cmd.expect, "Required verdict")
            ->check(CLI::IsMember({"converging", "stalled", "inconclusive"}));
        sub->add_option("--dx", p.cmd.dx, "Macro grid spacing")->check(CLI::PositiveNumber);
        break;
      case Verb::counterexample:
        sub->set_help_flag("--help", "Print this help message and exit");  // frees -h
        sub->add_option("--s", p.cmd.s_time, "Macro time")->check(CLI::PositiveNumber);
        sub->add_option("--h", p.cmd.h, "Difference step")->check(CLI::PositiveNumber);
        break;
      case Verb::simulate:
        sub->add_option("--stride", p.cmd.stride, "CSV time stride")->check(CLI::PositiveNumber);
        break;
      case Verb::validate: break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  std::vector<Command> commands;
  for (auto* sub : app.get_subcommands()) {
    for (auto& p : pending) {
      if (p.sub != sub) continue;
      auto c = p.cmd;
      c.out = out_dir;
      c.workers = workers;
      if (!p.eps.empty()) c.overrides.epsilons = p.eps;
      if (!p.region.empty()) c.overrides.region = Region{p.region[0], p.region[1], p.region[2], p.region[3]};
      commands.push_back(std::move(c));
    }
  }

  std::vector<RunResult> results;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    const std::string prefix = commands.size() > 1 ? std::to_string(k + 1) + "_" : "";
    results.push_back(run(commands[k], prefix));
    if (results.back().exit_code != 0 && results.back().entry.contains("error"))
      err << to_string(commands[k].verb) << ": " << results.back().entry["error"]["message"].get<std::string>()
          << '\n';
  }
  const auto report = emit_report(results);
  const auto text = report.dump(2);
  out << text << '\n';
  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
      std::ofstream f(std::filesystem::path(out_dir) / "report.json", std::ios::binary);
      f << text << '\n';
      if (!f) throw ConfigError("cannot write report.json");
    } catch (const std::exception& ex) {
      err << ex.what() << '\n';
      return 1;
    }
  }
  return combined_exit(results);
}

}  // namespace pursuit::cli
