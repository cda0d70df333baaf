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

#include "dpgossip/privacy.h"

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgossip/status_macros.h"

namespace dpgossip {

absl::StatusOr<NoiseSchedule> NoiseSchedule::Power(double k, double s,
                                                   int64_t total,
                                                   int64_t tau) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    return absl::InvalidArgumentError(absl::StrCat("noise K must be > 0, got ", k));
  }
  if (!std::isfinite(s)) return absl::InvalidArgumentError("noise s must be finite");
  if (total < 1) return absl::InvalidArgumentError("T must be >= 1");
  if (tau < 1) return absl::InvalidArgumentError("noise tau must be >= 1");
  NoiseSchedule schedule;
  schedule.form_ = Form::kPower;
  schedule.k_ = k;
  schedule.s_ = s;
  schedule.total_ = total;
  schedule.tau_ = tau;
  return schedule;
}

absl::StatusOr<NoiseSchedule> NoiseSchedule::Stepwise(double a1, double a2,
                                                      int64_t tau, double s,
                                                      int64_t total) {
  if (!(a1 > 0.0) || !std::isfinite(a1)) {
    return absl::InvalidArgumentError(absl::StrCat("noise a1 must be > 0, got ", a1));
  }
  if (!(a2 > 0.0) || !std::isfinite(a2)) {
    return absl::InvalidArgumentError(absl::StrCat("noise a2 must be > 0, got ", a2));
  }
  if (!std::isfinite(s)) return absl::InvalidArgumentError("noise s must be finite");
  if (tau < 1) return absl::InvalidArgumentError("noise tau must be >= 1");
  if (total < 1) return absl::InvalidArgumentError("T must be >= 1");
  NoiseSchedule schedule;
  schedule.form_ = Form::kStepwise;
  schedule.a1_ = a1;
  schedule.a2_ = a2;
  schedule.tau_ = tau;
  schedule.s_ = s;
  schedule.total_ = total;
  return schedule;
}

double NoiseSchedule::Alpha(int64_t t) const {
  switch (form_) {
    case Form::kPower: {
      const double base = static_cast<double>(t == 0 ? 1 : t);
      return std::sqrt(k_) * std::pow(base, s_);
    }
    case Form::kStepwise:
      return a1_ * std::pow(static_cast<double>(t / tau_) + a2_, s_);
  }
  return 1.0;
}

absl::StatusOr<double> NoiseSchedule::AlphaAt(int64_t t) const {
  if (t < 0 || t > total_) {
    return absl::OutOfRangeError(
        absl::StrCat("alpha index ", t, " outside [0, ", total_, "]"));
  }
  return Alpha(t);
}

absl::StatusOr<LrSchedule> LrSchedule::Scaled(double k, int n, int64_t total,
                                              double p, double xi) {
  if (!(k > 0.0) || n < 1 || total < 1 || !std::isfinite(p)) {
    return absl::InvalidArgumentError(
        "scaled learning rate needs K > 0, n >= 1, T >= 1 and finite p");
  }
  if (!(xi > 0.0 && xi < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("lr xi must be in (0, 1), got ", xi));
  }
  LrSchedule lr;
  lr.eta = k * std::sqrt(static_cast<double>(n)) /
           std::pow(static_cast<double>(total), p);
  lr.xi = xi;
  return lr;
}

absl::StatusOr<double> BetaAt(const NoiseSchedule& schedule,
                              const LrSchedule& lr, int64_t t) {
  if (t < 0 || t >= schedule.total()) {
    return absl::OutOfRangeError(
        absl::StrCat("iteration ", t, " outside [0, ", schedule.total(), ")"));
  }
  const double now = schedule.Alpha(t);
  if (static_cast<double>(t) <= lr.xi * static_cast<double>(schedule.total())) {
    return now * schedule.Alpha(schedule.total() - t);
  }
  return now * now;
}

absl::StatusOr<double> LrAt(const NoiseSchedule& schedule,
                            const LrSchedule& lr, int64_t t) {
  ASSIGN_OR_RETURN(const double beta, BetaAt(schedule, lr, t));
  return lr.eta / beta;
}

double InverseAlphaSquaredSum(const NoiseSchedule& schedule) {
  double sum = 0.0;
  for (int64_t t = 0; t < schedule.total(); ++t) {
    const double a = schedule.Alpha(t);
    sum += 1.0 / (a * a);
  }
  return sum;
}

absl::StatusOr<double> CalibrateSigma(PrivacyBudget& budget, double clip,
                                      const NoiseSchedule& schedule) {
  if (!(clip > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip threshold must be > 0, got ", clip));
  }
  if (!(budget.delta > 0.0) || !(budget.delta < 1.0)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "calibration regime violated: requires 0 < delta < 1, got delta=",
        budget.delta));
  }
  if (!(budget.sampling_ratio > 0.0) || budget.sampling_ratio > 1.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sampling ratio must lie in (0, 1], got ", budget.sampling_ratio));
  }
  if (!(budget.epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be > 0, got ", budget.epsilon));
  }
  const double ceiling = budget.c1 * budget.sampling_ratio *
                         budget.sampling_ratio *
                         static_cast<double>(schedule.total());
  if (!(budget.epsilon < ceiling)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "calibration regime violated: requires epsilon < c1 * q^2 * T, got "
        "epsilon=",
        budget.epsilon, ", c1 * q^2 * T=", ceiling));
  }
  const double sigma = clip * budget.c2 * budget.sampling_ratio *
                       std::sqrt(std::log(1.0 / budget.delta)) /
                       budget.epsilon *
                       std::sqrt(InverseAlphaSquaredSum(schedule));
  budget.sigma = sigma;
  return sigma;
}

absl::StatusOr<double> MomentsBound(double order, const PrivacyBudget& budget,
                                    const NoiseSchedule& schedule,
                                    double sensitivity) {
  if (!budget.sigma.has_value()) {
    return absl::FailedPreconditionError(
        "moments bound needs a calibrated sigma");
  }
  if (!(order >= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("moment order must be >= 1, got ", order));
  }
  if (!(sensitivity > 0.0)) {
    return absl::InvalidArgumentError("sensitivity must be > 0");
  }
  const double multiplier = *budget.sigma / sensitivity;
  if (std::isinf(multiplier)) return 0.0;
  if (!(multiplier > 0.0)) return std::numeric_limits<double>::infinity();
  const double q = budget.sampling_ratio;
  return order * (order + 1.0) * q * q / (2.0 * multiplier * multiplier) *
         InverseAlphaSquaredSum(schedule);
}

absl::StatusOr<PrivacySpent> AccountPrivacy(const PrivacyBudget& budget,
                                            const NoiseSchedule& schedule,
                                            double sensitivity,
                                            int max_order) {
  if (max_order < 1) return absl::InvalidArgumentError("max_order must be >= 1");
  PrivacySpent spent;
  spent.delta_at_epsilon = std::numeric_limits<double>::infinity();
  spent.epsilon_at_delta = std::numeric_limits<double>::infinity();
  const double log_inv_delta = std::log(1.0 / budget.delta);
  for (int order = 1; order <= max_order; ++order) {
    ASSIGN_OR_RETURN(const double moment,
                     MomentsBound(order, budget, schedule, sensitivity));
    const double delta = std::exp(moment - order * budget.epsilon);
    if (delta < spent.delta_at_epsilon) {
      spent.delta_at_epsilon = delta;
      spent.delta_order = order;
    }
    const double epsilon = (moment + log_inv_delta) / order;
    if (epsilon < spent.epsilon_at_delta) {
      spent.epsilon_at_delta = epsilon;
      spent.epsilon_order = order;
    }
  }
  spent.delta_at_epsilon = std::min(spent.delta_at_epsilon, 1.0);
  return spent;
}

std::pair<double, double> BetaSumDominance(const NoiseSchedule& schedule,
                                           const LrSchedule& lr) {
  double lhs = 0.0;
  for (int64_t t = 0; t < schedule.total(); ++t) {
    lhs += 1.0 / *BetaAt(schedule, lr, t);
  }
  return {lhs, InverseAlphaSquaredSum(schedule)};
}

}  // namespace dpgossip
