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

#include "dpgossip/theory.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgossip/fusion.h"
#include "dpgossip/status_macros.h"

namespace dpgossip {
namespace {

absl::Status CheckTheory(const TheoryParams& theory) {
  for (double v : {theory.L, theory.a, theory.m, theory.c, theory.f0,
                   theory.x0_norm}) {
    if (!std::isfinite(v) || v < 0.0) {
      return absl::InvalidArgumentError(
          "theory constants must be finite and non-negative");
    }
  }
  if (theory.d < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  if (!(theory.q >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat("q = ", theory.q));
  }
  if (theory.q >= 1.0) {
    return absl::FailedPreconditionError(absl::StrCat(
        "q = ", theory.q, " >= 1: the network is not contracting"));
  }
  return absl::OkStatus();
}

double Sq(double v) { return v * v; }

}  // namespace

absl::StatusOr<MinIterationsReport> MinIterations(const TheoryParams& theory,
                                                  int n, double p, double k) {
  if (!(p > -0.5)) {
    return absl::FailedPreconditionError(
        absl::StrCat("p = ", p, " must exceed -1/2"));
  }
  if (n < 1 || !(k > 0.0) || !(theory.L > 0.0)) {
    return absl::InvalidArgumentError("need n >= 1, K > 0 and L > 0");
  }
  if (!(theory.q >= 0.0) || theory.q > 1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("q = ", theory.q, " outside [0, 1]"));
  }
  const double nn = n;
  const double l2 = Sq(theory.L);
  const double e = 2.0 / (1.0 + 2.0 * p);
  const double one_minus_q2 = 1.0 - Sq(theory.q);
  const double network =
      one_minus_q2 > 0.0
          ? 162.0 * nn * Sq(theory.c) * l2 / one_minus_q2
          : std::numeric_limits<double>::infinity();

  MinIterationsReport report;
  report.terms = {4.0 * nn * l2,
                  std::pow(network, e),
                  std::pow(nn * l2, e),
                  std::pow(nn, e),
                  std::pow(2.0 * k / (nn * theory.L), e),
                  std::pow(9.0 / std::sqrt(nn), 4.0 / (3.0 - 2.0 * p))};
  report.dominant = static_cast<int>(
      std::max_element(report.terms.begin(), report.terms.end()) -
      report.terms.begin());
  const double top = report.terms[report.dominant];
  if (!std::isfinite(top) || top >= 9.2e18) {
    report.overflow = true;
    report.floor = kIterationOverflow;
  } else {
    report.floor = static_cast<int64_t>(std::ceil(top));
  }
  return report;
}

absl::StatusOr<double> BudgetNoiseMean(const std::vector<PrivacyBudget>& budgets,
                                       double clip) {
  if (budgets.empty()) return absl::InvalidArgumentError("no budgets");
  double sum = 0.0;
  for (const PrivacyBudget& b : budgets) {
    if (!(b.epsilon > 0.0) || !(b.delta > 0.0 && b.delta < 1.0)) {
      return absl::InvalidArgumentError("budget needs epsilon > 0, delta in (0, 1)");
    }
    sum += Sq(clip * b.c2 * b.sampling_ratio) * std::log(1.0 / b.delta) /
           Sq(b.epsilon);
  }
  return sum / static_cast<double>(budgets.size());
}

absl::StatusOr<double> ComputeNoiseSumM(
    const std::vector<PrivacyBudget>& budgets, double clip,
    const NoiseSchedule& schedule, const LrSchedule& lr) {
  ASSIGN_OR_RETURN(const double budget_mean, BudgetNoiseMean(budgets, clip));
  const double n = static_cast<double>(budgets.size());
  const int64_t total = schedule.total();
  double ratio_sum = 0.0;
  for (int64_t t = 0; t < total; ++t) {
    ASSIGN_OR_RETURN(const double beta, BetaAt(schedule, lr, t));
    ratio_sum += Sq(schedule.Alpha(total - t)) / Sq(beta);
  }
  // The per-node sum equals n * budget_mean.
  return Sq(lr.eta) / Sq(n) * (n * budget_mean) * ratio_sum *
         InverseAlphaSquaredSum(schedule);
}

absl::StatusOr<BoundBreakdown> ConvergenceBound(const TheoryParams& theory,
                                                int n, int64_t total,
                                                double theta, int64_t tau,
                                                double m_noise,
                                                double rho_total,
                                                double upsilon_total) {
  RETURN_IF_ERROR(CheckTheory(theory));
  if (n < 1 || total < 1) {
    return absl::InvalidArgumentError("need n >= 1 and T >= 1");
  }
  if (!(m_noise >= 0.0) || !(rho_total >= 0.0) || !(upsilon_total >= 0.0)) {
    return absl::InvalidArgumentError("M, rho and upsilon must be >= 0");
  }
  const double c2 = Sq(theory.c);
  const double gap = Sq(1.0 - theory.q);
  BoundBreakdown out;
  out.a1 = (6.0 * c2 * theory.x0_norm + 108.0 * c2 * theory.f0 +
            18.0 * c2 * (Sq(theory.m) + 3.0 * Sq(theory.a))) /
           gap;
  out.a2 = 6.0 * c2 * (n + 9.0 * theory.L) / gap;
  out.a3 = 110.0 * c2 / gap;
  out.m_noise = m_noise;
  out.h = NoiseFactor(theta, tau);
  const double root = std::sqrt(static_cast<double>(n) * total);
  out.fixed_term = (4.0 * theory.f0 + 5.0 * theory.L * out.a1) / root;
  out.noise_term =
      4.0 * out.h * theory.d * theory.L * (5.0 * out.a2 + 1.0) * m_noise / root;
  out.bias_term =
      (4.0 + 5.0 * theory.L * out.a3) * (rho_total + upsilon_total) / root;
  out.total = out.fixed_term + out.noise_term + out.bias_term;
  return out;
}

absl::StatusOr<double> ScheduleSumConstant(double a1, double a2, double a3,
                                           double s) {
  if (!(a2 > 0.0) || !(a3 >= 1.0) || !(s >= 0.0)) {
    return absl::InvalidArgumentError(
        "schedule constants need a2 > 0, a3 >= 1, s >= 0");
  }
  const double scale = a3 * Sq(a1);
  if (std::abs(s - 0.5) < 1e-12) {
    // 1 + ln((T - 1 + a2)/a2) <= (1 + (1 + ln(1 + 1/a2)) / ln 2) ln T, T >= 2.
    return scale * (1.0 + (1.0 + std::log1p(1.0 / a2)) / std::log(2.0));
  }
  if (s < 0.5) {
    // (T - 1 + a2)^(1-2s) <= (1 + a2)^(1-2s) T^(1-2s) for T >= 1.
    return scale * (1.0 + std::pow(1.0 + a2, 1.0 - 2.0 * s) / (1.0 - 2.0 * s));
  }
  return scale * (1.0 + std::pow(a2, 1.0 - 2.0 * s) / (2.0 * s - 1.0));
}

absl::StatusOr<RegimeBound> RefinedRegimeBound(const RegimeInputs& in) {
  if (!(in.p > -0.5 && in.p < 0.5)) {
    return absl::FailedPreconditionError(
        absl::StrCat("p = ", in.p, " outside (-1/2, 1/2)"));
  }
  if (in.n < 1 || in.total < 2) {
    return absl::InvalidArgumentError("need n >= 1 and T >= 2");
  }
  if (!(in.budget_mean >= 0.0) || !(in.h > 0.0)) {
    return absl::InvalidArgumentError("need budget mean >= 0 and h > 0");
  }
  RETURN_IF_ERROR(CheckTheory(in.theory));
  ASSIGN_OR_RETURN(const double h_constant,
                   ScheduleSumConstant(in.a1, in.a2, in.a3, in.s));
  const double n = in.n;
  const double t = static_cast<double>(in.total);
  RegimeBound out;
  out.h_constant = h_constant;
  if (in.p > 0.0) {
    out.label = "sqrt(T/n)";
    out.prefactor = std::sqrt(t / n);
  } else if (in.p == 0.0) {
    out.label = "(log T)^2 / sqrt(nT)";
    out.prefactor = Sq(std::log(t)) / std::sqrt(n * t);
  } else {
    out.label = "1 / (sqrt(n) T^(1/2 + 2p))";
    out.prefactor = 1.0 / (std::sqrt(n) * std::pow(t, 0.5 + 2.0 * in.p));
  }
  const TheoryParams& th = in.theory;
  const double gap = Sq(1.0 - th.q);
  const double c2 = Sq(th.c);
  out.a2_constant = 6.0 * c2 * (n + 9.0 * th.L) / gap;
  out.nu = 16.0 * in.h * th.d * th.L * (3.0 * out.a2_constant + 1.0);
  out.noise_term = out.prefactor * out.nu * Sq(h_constant) * in.budget_mean;
  const double a1 = (6.0 * c2 * th.x0_norm + 108.0 * c2 * th.f0 +
                     18.0 * c2 * (Sq(th.m) + 3.0 * Sq(th.a))) /
                    gap;
  out.fixed_term = (4.0 * th.f0 + 5.0 * th.L * a1) / std::sqrt(n * t);
  out.total = out.fixed_term + out.noise_term;
  return out;
}

absl::StatusOr<int64_t> RegimeCrossover(RegimeInputs inputs,
                                        int64_t max_total) {
  if (max_total < 2) return absl::InvalidArgumentError("max_total must be >= 2");
  auto ordered = [&](int64_t total) -> absl::StatusOr<bool> {
    inputs.total = total;
    double prev = -std::numeric_limits<double>::infinity();
    for (double p : {-0.1, 0.0, 0.1}) {
      inputs.p = p;
      ASSIGN_OR_RETURN(RegimeBound b, RefinedRegimeBound(inputs));
      if (!(b.total > prev)) return false;
      prev = b.total;
    }
    return true;
  };
  int64_t start = max_total + 1;
  for (int64_t total = max_total; total >= 2; --total) {
    ASSIGN_OR_RETURN(const bool ok, ordered(total));
    if (!ok) break;
    start = total;
  }
  return start;
}

double OptimalP(double s) { return 0.5 - 2.0 * s; }

}  // namespace dpgossip
