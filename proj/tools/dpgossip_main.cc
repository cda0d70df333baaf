//
// Copyright 2026 The dpgossip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line front end: run experiments, verification suites and the
// closed-form calculators.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpgossip/config.h"
#include "dpgossip/engine.h"
#include "dpgossip/fusion.h"
#include "dpgossip/privacy.h"
#include "dpgossip/theory.h"
#include "dpgossip/verify.h"
#include "json.hpp"

namespace dpgossip {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int Fail(const std::string& context, const absl::Status& status) {
  std::cerr << context << ": " << status << "\n";
  return 1;
}

json Num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct RunArgs {
  std::string config;
  std::string seeds;
  std::string out;
  bool force = false;
};

int CmdRun(const RunArgs& args) {
  absl::StatusOr<ExperimentConfig> config = LoadConfigFile(args.config);
  if (!config.ok()) return Fail("invalid config", config.status());

  std::vector<uint64_t> seeds;
  if (args.seeds.empty()) {
    seeds.push_back(config->seed);
  } else {
    for (absl::string_view piece : absl::StrSplit(args.seeds, ',')) {
      uint64_t s = 0;
      if (!absl::SimpleAtoi(piece, &s)) {
        std::cerr << "--seeds: '" << piece << "' is not a seed\n";
        return 2;
      }
      seeds.push_back(s);
    }
  }

  std::string out_dir = args.out;
  if (out_dir.empty()) {
    const char* env = std::getenv("DPGOSSIP_OUT");
    out_dir = env != nullptr && *env != '\0' ? env : "runs";
  }
  const fs::path dir(out_dir);
  std::vector<fs::path> targets = {dir / "partition.json"};
  for (uint64_t s : seeds) {
    targets.push_back(dir / absl::StrCat("metrics_seed", s, ".jsonl"));
    targets.push_back(dir / absl::StrCat("summary_seed", s, ".json"));
  }
  if (!args.force) {
    for (const fs::path& p : targets) {
      if (fs::exists(p)) {
        std::cerr << "would overwrite " << p.string()
                  << " (pass --force to replace)\n";
        return 1;
      }
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "cannot create " << dir.string() << ": " << ec.message() << "\n";
    return 1;
  }

  absl::StatusOr<Experiment> experiment = PrepareExperiment(*config);
  if (!experiment.ok()) return Fail("setup failed", experiment.status());
  std::ofstream(targets[0]) << PartitionToJson(*experiment).dump(2) << "\n";
  if (!experiment->partition.empty_nodes.empty()) {
    std::cerr << "warning: " << experiment->partition.empty_nodes.size()
              << " node(s) received no samples\n";
  }

  for (size_t k = 0; k < seeds.size(); ++k) {
    std::ofstream metrics(targets[1 + 2 * k]);
    absl::StatusOr<RunSummary> summary = RunPrepared(
        *experiment, seeds[k], [&metrics](const MetricsRecord& record) {
          metrics << MetricsToJson(record).dump() << "\n";
        });
    if (!summary.ok()) {
      return Fail(absl::StrCat("run failed (seed ", seeds[k], ")"),
                  summary.status());
    }
    std::ofstream(targets[2 + 2 * k]) << SummaryToJson(*summary).dump(2) << "\n";
    for (const std::string& w : summary->warnings) {
      std::cerr << "warning (seed " << seeds[k] << "): " << w << "\n";
    }
    std::cout << "seed " << seeds[k] << ": time-avg grad norm "
              << summary->time_avg_mean_sq_grad_norm << ", final loss "
              << summary->final_train_loss << " -> "
              << targets[2 + 2 * k].string() << "\n";
  }
  return 0;
}

int CmdVerify(const std::string& suite) {
  absl::StatusOr<std::vector<CheckResult>> checks = RunVerifySuite(suite);
  if (!checks.ok()) {
    std::cerr << checks.status().message() << "; choose one of";
    for (const std::string& name : VerifySuiteNames()) std::cerr << " " << name;
    std::cerr << " all\n";
    return 2;
  }
  bool ok = true;
  for (const CheckResult& c : *checks) {
    std::cout << FormatCheck(c) << "\n";
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

struct ScheduleArgs {
  std::string form = "stepwise";
  double k = 1.0;
  double s = 0.0;
  double a1 = 1.0;
  double a2 = 1.0;
  int64_t tau = 1;
};

void AddScheduleFlags(CLI::App* cmd, ScheduleArgs& a) {
  cmd->add_option("--form", a.form, "power or stepwise")
      ->check(CLI::IsMember({"power", "stepwise"}));
  cmd->add_option("--K", a.k, "power-form scale");
  cmd->add_option("--s", a.s, "decay exponent");
  cmd->add_option("--a1", a.a1, "stepwise base scale");
  cmd->add_option("--a2", a.a2, "stepwise offset");
  cmd->add_option("--tau", a.tau, "stepwise interval");
}

absl::StatusOr<NoiseSchedule> MakeSchedule(const ScheduleArgs& a,
                                           int64_t total) {
  if (a.form == "power") return NoiseSchedule::Power(a.k, a.s, total, a.tau);
  return NoiseSchedule::Stepwise(a.a1, a.a2, a.tau, a.s, total);
}

struct TheoryArgs {
  double L = 1.0;
  double a = 0.0;
  double m = 0.0;
  double c = 1.0;
  double q = 0.0;
  double f0 = 0.0;
  double x0_norm = 0.0;
  int d = 1;
};

void AddTheoryFlags(CLI::App* cmd, TheoryArgs& t) {
  cmd->add_option("--L", t.L, "gradient Lipschitz constant");
  cmd->add_option("--a", t.a, "heterogeneity constant a");
  cmd->add_option("--m", t.m, "heterogeneity constant m");
  cmd->add_option("--C", t.c, "propagation constant C");
  cmd->add_option("--q", t.q, "propagation rate q");
  cmd->add_option("--F0", t.f0, "f(x0) - f*");
  cmd->add_option("--x0-norm", t.x0_norm, "||x0||");
  cmd->add_option("--d", t.d, "parameter dimension");
}

TheoryParams ToTheory(const TheoryArgs& t) {
  TheoryParams p;
  p.L = t.L;
  p.a = t.a;
  p.m = t.m;
  p.c = t.c;
  p.q = t.q;
  p.f0 = t.f0;
  p.x0_norm = t.x0_norm;
  p.d = t.d;
  return p;
}

json TheoryJson(const TheoryParams& p) {
  return {{"L", Num(p.L)}, {"a", Num(p.a)},   {"m", Num(p.m)},
          {"C", Num(p.c)}, {"q", Num(p.q)},   {"F0", Num(p.f0)},
          {"x0_norm", Num(p.x0_norm)}, {"d", p.d}};
}

json ScheduleJson(const ScheduleArgs& a) {
  return {{"form", a.form}, {"K", a.k},   {"s", a.s},
          {"a1", a.a1},     {"a2", a.a2}, {"tau", a.tau}};
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"Differentially private decentralized learning over push-sum "
               "gossip"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", run_args.config, "experiment config (INI)")
      ->required();
  run->add_option("--seeds", run_args.seeds, "comma-separated master seeds");
  run->add_option("--out", run_args.out,
                  "output directory (default $DPGOSSIP_OUT or ./runs)");
  run->add_flag("--force", run_args.force, "replace existing outputs");

  std::string suite;
  CLI::App* verify = app.add_subcommand("verify", "run an oracle suite");
  verify->add_option("suite", suite,
                     "noise-factor, consensus, gradients, schedules, "
                     "connectivity or all")
      ->required();

  CLI::App* calc = app.add_subcommand("calc", "closed-form calculators");
  calc->require_subcommand(1);

  // calc sigma
  double epsilon = 1.0, delta = 1e-5, ratio = 1.0, clip = 1.0, c1 = 1.0,
         c2 = 1.0;
  int64_t total = 1;
  ScheduleArgs sigma_sched;
  CLI::App* sigma = calc->add_subcommand("sigma", "calibrate the noise scale");
  sigma->add_option("--epsilon", epsilon)->required();
  sigma->add_option("--delta", delta)->required();
  sigma->add_option("--ratio", ratio, "sampling ratio")->required();
  sigma->add_option("--G", clip, "clipping threshold")->required();
  sigma->add_option("--T", total, "iterations")->required();
  sigma->add_option("--c1", c1);
  sigma->add_option("--c2", c2);
  AddScheduleFlags(sigma, sigma_sched);

  // calc tau
  double theta = 0.5, tol = 0.01;
  CLI::App* tau = calc->add_subcommand("tau", "fusion interval selection");
  tau->add_option("--theta", theta)->required();
  tau->add_option("--tol", tol);

  // calc minT
  TheoryArgs min_theory;
  int nodes = 1;
  double p = 0.0, k = 1.0;
  CLI::App* min_t = calc->add_subcommand("minT", "iteration floor");
  AddTheoryFlags(min_t, min_theory);
  min_t->add_option("--n", nodes)->required();
  min_t->add_option("--p", p)->required();
  min_t->add_option("--K", k);

  // calc bound
  TheoryArgs bound_theory;
  int64_t bound_tau = 1;
  double bound_theta = 0.0, m_noise = 0.0, rho = 0.0, upsilon = 0.0;
  CLI::App* bound = calc->add_subcommand("bound", "convergence bound terms");
  AddTheoryFlags(bound, bound_theory);
  bound->add_option("--n", nodes)->required();
  bound->add_option("--T", total)->required();
  bound->add_option("--theta", bound_theta);
  bound->add_option("--tau", bound_tau);
  bound->add_option("--M", m_noise, "noise sum M");
  bound->add_option("--rho", rho, "total staleness error");
  bound->add_option("--upsilon", upsilon, "total clipping bias");

  // calc regime
  TheoryArgs regime_theory;
  RegimeInputs regime_in;
  double a3 = 1.0;
  CLI::App* regime = calc->add_subcommand("regime", "refined bound by regime of p");
  AddTheoryFlags(regime, regime_theory);
  regime->add_option("--p", regime_in.p)->required();
  regime->add_option("--n", regime_in.n)->required();
  regime->add_option("--T", regime_in.total)->required();
  regime->add_option("--s", regime_in.s);
  regime->add_option("--a1", regime_in.a1);
  regime->add_option("--a2", regime_in.a2);
  regime->add_option("--a3", a3);
  regime->add_option("--epsilon", epsilon);
  regime->add_option("--delta", delta);
  regime->add_option("--ratio", ratio);
  regime->add_option("--G", clip);
  regime->add_option("--c2", c2);
  regime->add_option("--theta", theta);
  regime->add_option("--tau", bound_tau);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*run) return CmdRun(run_args);
  if (*verify) return CmdVerify(suite);

  json out;
  if (*sigma) {
    absl::StatusOr<NoiseSchedule> schedule = MakeSchedule(sigma_sched, total);
    if (!schedule.ok()) return Fail("calc sigma", schedule.status());
    PrivacyBudget budget;
    budget.epsilon = epsilon;
    budget.delta = delta;
    budget.sampling_ratio = ratio;
    budget.c1 = c1;
    budget.c2 = c2;
    absl::StatusOr<double> value = CalibrateSigma(budget, clip, *schedule);
    if (!value.ok()) return Fail("calc sigma", value.status());
    out = {{"inputs",
            {{"epsilon", epsilon}, {"delta", delta}, {"ratio", ratio},
             {"G", clip}, {"T", total}, {"c1", c1}, {"c2", c2},
             {"schedule", ScheduleJson(sigma_sched)}}},
           {"inverse_alpha_sq_sum", InverseAlphaSquaredSum(*schedule)},
           {"sigma", *value}};
  } else if (*tau) {
    if (!(theta >= 0.0 && theta < 1.0) || !(tol > 0.0)) {
      std::cerr << "calc tau: need theta in [0, 1) and tol > 0\n";
      return 1;
    }
    const int64_t selected = SelectTau(theta, tol);
    std::optional<int64_t> reported = ReportedTau(theta);
    out = {{"theta", theta},
           {"tol", tol},
           {"tau", selected},
           {"h", NoiseFactor(theta, selected)},
           {"reported_tau", reported ? json(*reported) : json(nullptr)}};
  } else if (*min_t) {
    const TheoryParams params = ToTheory(min_theory);
    absl::StatusOr<MinIterationsReport> report =
        MinIterations(params, nodes, p, k);
    if (!report.ok()) return Fail("calc minT", report.status());
    json terms = json::array();
    for (double v : report->terms) terms.push_back(Num(v));
    out = {{"inputs", {{"theory", TheoryJson(params)}, {"n", nodes},
                       {"p", p}, {"K", k}}},
           {"terms", terms},
           {"dominant", report->dominant},
           {"overflow", report->overflow},
           {"min_iterations",
            report->overflow ? json(nullptr) : json(report->floor)}};
  } else if (*bound) {
    const TheoryParams params = ToTheory(bound_theory);
    absl::StatusOr<BoundBreakdown> b = ConvergenceBound(
        params, nodes, total, bound_theta, bound_tau, m_noise, rho, upsilon);
    if (!b.ok()) return Fail("calc bound", b.status());
    out = {{"inputs", {{"theory", TheoryJson(params)}, {"n", nodes},
                       {"T", total}, {"theta", bound_theta},
                       {"tau", bound_tau}, {"M", m_noise}, {"rho", rho},
                       {"upsilon", upsilon}}},
           {"A1", Num(b->a1)}, {"A2", Num(b->a2)}, {"A3", Num(b->a3)},
           {"M", Num(b->m_noise)}, {"h", Num(b->h)},
           {"fixed_term", Num(b->fixed_term)},
           {"noise_term", Num(b->noise_term)},
           {"bias_term", Num(b->bias_term)}, {"total", Num(b->total)}};
  } else if (*regime) {
    regime_in.a3 = a3;
    regime_in.theory = ToTheory(regime_theory);
    regime_in.h = NoiseFactor(theta, bound_tau);
    PrivacyBudget budget;
    budget.epsilon = epsilon;
    budget.delta = delta;
    budget.sampling_ratio = ratio;
    budget.c2 = c2;
    absl::StatusOr<double> mean = BudgetNoiseMean({budget}, clip);
    if (!mean.ok()) return Fail("calc regime", mean.status());
    regime_in.budget_mean = *mean;
    absl::StatusOr<RegimeBound> r = RefinedRegimeBound(regime_in);
    if (!r.ok()) return Fail("calc regime", r.status());
    out = {{"inputs", {{"theory", TheoryJson(regime_in.theory)},
                       {"p", regime_in.p}, {"n", regime_in.n},
                       {"T", regime_in.total}, {"s", regime_in.s},
                       {"a1", regime_in.a1}, {"a2", regime_in.a2},
                       {"a3", a3}, {"epsilon", epsilon}, {"delta", delta},
                       {"ratio", ratio}, {"G", clip}, {"c2", c2},
                       {"theta", theta}, {"tau", bound_tau}}},
           {"regime", r->label},
           {"prefactor", Num(r->prefactor)},
           {"H", Num(r->h_constant)},
           {"nu", Num(r->nu)},
           {"noise_term", Num(r->noise_term)},
           {"fixed_term", Num(r->fixed_term)},
           {"total", Num(r->total)},
           {"optimal_p", OptimalP(regime_in.s)}};
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace dpgossip

int main(int argc, char** argv) { return dpgossip::Main(argc, argv); }
