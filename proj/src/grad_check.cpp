// Copyright 2026 The evrel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evrel/grad_check.hpp"

#include <cmath>
#include <cstddef>

namespace evrel {

namespace {

bool kink_adjacent(const std::vector<double>& plus,
                   const std::vector<double>& minus, double margin) {
  for (double k : plus) {
    if (std::abs(k) < margin) return true;
  }
  for (double k : minus) {
    if (std::abs(k) < margin) return true;
  }
  if (plus.size() == minus.size()) {
    for (std::size_t i = 0; i < plus.size(); ++i) {
      if ((plus[i] > 0) != (minus[i] > 0)) return true;  // straddles a corner
    }
  }
  return false;
}

}  // namespace

double grad_check(const LossEvaluator& loss, const Eigen::VectorXd& params,
                  double epsilon, double kink_margin, GradCheckStats* stats) {
  const LossProbe base = loss(params, true);
  double max_rel_err = 0;
  GradCheckStats local;
  Eigen::VectorXd p = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    p(i) = params(i) + epsilon;
    const LossProbe plus = loss(p, false);
    p(i) = params(i) - epsilon;
    const LossProbe minus = loss(p, false);
    p(i) = params(i);
    if (kink_adjacent(plus.kink_args, minus.kink_args, kink_margin)) {
      ++local.skipped;
      continue;
    }
    ++local.checked;
    const double fd = (plus.value - minus.value) / (2 * epsilon);
    const double ad = base.grad(i);
    const double rel =
        std::abs(fd - ad) / std::max(1.0, std::abs(fd) + std::abs(ad));
    if (rel > max_rel_err) {
      max_rel_err = rel;
      local.worst_index = static_cast<int>(i);
    }
  }
  if (stats != nullptr) *stats = local;
  return max_rel_err;
}

}  // namespace evrel
