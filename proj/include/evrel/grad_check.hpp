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

#ifndef EVREL_GRAD_CHECK_HPP_
#define EVREL_GRAD_CHECK_HPP_

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace evrel {

// One evaluation of a scalar loss at given parameters.  `grad` is filled
// only when requested; `kink_args` always reports the arguments of every
// |.|/relu in the computation so the checker can avoid differentiating
// across their corners.
struct LossProbe {
  double value = 0;
  Eigen::VectorXd grad;
  std::vector<double> kink_args;
};

using LossEvaluator =
    std::function<LossProbe(const Eigen::VectorXd& params, bool want_grad)>;

struct GradCheckStats {
  int checked = 0;
  int skipped = 0;   // kink-adjacent parameters
  int worst_index = -1;
};

// Central finite differences per parameter against reverse-mode gradients.
// Returns max over parameters of |fd - ad| / max(1, |fd| + |ad|).  A
// parameter is skipped when either perturbed evaluation sits within
// `kink_margin` of a kink or the two straddle one (sign change).
double grad_check(const LossEvaluator& loss, const Eigen::VectorXd& params,
                  double epsilon = 1e-5, double kink_margin = 1e-6,
                  GradCheckStats* stats = nullptr);

}  // namespace evrel

#endif  // EVREL_GRAD_CHECK_HPP_
