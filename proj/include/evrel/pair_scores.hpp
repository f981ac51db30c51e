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

#ifndef EVREL_PAIR_SCORES_HPP_
#define EVREL_PAIR_SCORES_HPP_

#include <cmath>

#include <Eigen/Dense>

#include "evrel/relations.hpp"

namespace evrel {

// Post-softmax probabilities are nudged away from 0 so every log and
// log(1-p) stays finite.
inline constexpr double kProbFloor = 1e-12;

// Adds 2*floor to each of the four entries and renormalizes; keeps the sum
// at exactly 1 while guaranteeing every entry >= floor.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 4, 1> floor_probs(
    const Eigen::MatrixBase<Derived>& p, typename Derived::Scalar floor) {
  using S = typename Derived::Scalar;
  return (p.array() + 2 * floor).matrix() / (S(1) + 8 * floor);
}

// Probabilities of the two label heads for one ordered event pair.
template <typename Scalar>
struct PairScoresT {
  using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
  using Vec8 = Eigen::Matrix<Scalar, 8, 1>;

  Vec4 temporal = Vec4::Zero();  // BF AF EQ VG
  Vec4 subevent = Vec4::Zero();  // PC CP CR NR

  Scalar prob(RelationLabel r) const {
    return head_of(r) == Head::kTemporal ? temporal(head_index(r))
                                         : subevent(head_index(r));
  }

  const Vec4& head(Head h) const {
    return h == Head::kTemporal ? temporal : subevent;
  }

  Vec8 stacked() const {
    Vec8 out;
    out << temporal, subevent;
    return out;
  }

  bool valid(Scalar tol = Scalar(1e-9), Scalar floor = Scalar(kProbFloor)) const {
    auto head_ok = [&](const Vec4& h) {
      return h.allFinite() && std::abs(h.sum() - 1) <= tol &&
             h.minCoeff() >= floor * Scalar(0.999);
    };
    return head_ok(temporal) && head_ok(subevent);
  }

  static PairScoresT uniform() {
    PairScoresT s;
    s.temporal.setConstant(Scalar(0.25));
    s.subevent.setConstant(Scalar(0.25));
    return s;
  }

  // Softmax per head with the probability floor; the value-space twin of the
  // differentiable scorer output.
  static PairScoresT from_logits(const Vec8& logits,
                                 Scalar floor = Scalar(kProbFloor)) {
    auto soft = [](const Vec4& z) -> Vec4 {
      Vec4 e = (z.array() - z.maxCoeff()).exp();
      return e / e.sum();
    };
    PairScoresT s;
    s.temporal = floor_probs(soft(logits.template head<4>()), floor);
    s.subevent = floor_probs(soft(logits.template tail<4>()), floor);
    return s;
  }

  bool operator==(const PairScoresT& o) const {
    return (temporal.array() == o.temporal.array()).all() &&
           (subevent.array() == o.subevent.array()).all();
  }
};

using PairScores = PairScoresT<double>;

}  // namespace evrel

#endif  // EVREL_PAIR_SCORES_HPP_
