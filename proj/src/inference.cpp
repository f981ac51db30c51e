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

#include "evrel/inference.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

#include "evrel/errors.hpp"

namespace evrel {

RelationLabel greedy_decode(const PairScores& scores, Head task) {
  const auto& head = scores.head(task);
  int best = 0;
  for (int i = 1; i < kLabelsPerHead; ++i) {
    if (head(i) > head(best)) best = i;
  }
  return labels_of(task)[best];
}

RelationGraph decode_event_complex(const DecodingProblem& problem) {
  RelationGraph g(problem.n_events);
  for (int j = 1; j < problem.n_events; ++j) {
    for (int i = 0; i < j; ++i) {
      const PairScores& s = problem.at(i, j);
      const RelationLabel sub = greedy_decode(s, Head::kSubevent);
      g.set_label(i, j, sub);
      if (const auto implied = implied_temprel(sub)) {
        g.set_label(i, j, *implied);
      } else {
        g.set_label(i, j, greedy_decode(s, Head::kTemporal));
      }
    }
  }
  return g;
}

namespace {

// consistency of joint values on the three canonical pairs of a triple
// a < b < c: v1 on (a,b), v2 on (b,c), v3 on (a,c).
struct TripleCube {
  bool consistent[kNumJointLabels][kNumJointLabels][kNumJointLabels];
  // allowed middle value (b,c) given (a,b) and (a,c).
  std::uint8_t mid_mask[kNumJointLabels][kNumJointLabels];

  TripleCube() {
    for (int v1 = 0; v1 < kNumJointLabels; ++v1) {
      for (int v2 = 0; v2 < kNumJointLabels; ++v2) {
        for (int v3 = 0; v3 < kNumJointLabels; ++v3) {
          RelationGraph g(3);
          apply(g, 0, 1, kJointLabels[v1]);
          apply(g, 1, 2, kJointLabels[v2]);
          apply(g, 0, 2, kJointLabels[v3]);
          consistent[v1][v2][v3] =
              count_violations(g).violating_triples == 0;
        }
      }
    }
    for (int v1 = 0; v1 < kNumJointLabels; ++v1) {
      for (int v3 = 0; v3 < kNumJointLabels; ++v3) {
        std::uint8_t mask = 0;
        for (int v2 = 0; v2 < kNumJointLabels; ++v2) {
          if (consistent[v1][v2][v3]) mask |= std::uint8_t(1u << v2);
        }
        mid_mask[v1][v3] = mask;
      }
    }
  }

  static void apply(RelationGraph& g, int i, int j, const JointLabel& v) {
    g.set_label(i, j, v.temporal);
    g.set_label(i, j, v.subevent);
  }
};

const TripleCube& cube() {
  static const TripleCube kCube;
  return kCube;
}

constexpr std::uint8_t kFullDomain = (1u << kNumJointLabels) - 1;

struct Search {
  const DecodingProblem& prob;
  int n;
  int n_pairs;
  std::vector<std::pair<int, int>> pair_of;          // canonical index -> (i,j)
  std::vector<std::array<double, kNumJointLabels>> score;
  std::vector<std::array<int, kNumJointLabels>> value_order;
  std::vector<double> suffix_max;  // sum of unconstrained maxima from p on
  std::vector<std::uint8_t> domain;
  std::vector<int> assigned;
  std::vector<int> best_assign;
  double best = -std::numeric_limits<double>::infinity();
  double slack = 0;
  std::int64_t nodes = 0;

  explicit Search(const DecodingProblem& p)
      : prob(p), n(p.n_events), n_pairs(n * (n - 1) / 2) {
    pair_of.resize(n_pairs);
    score.resize(n_pairs);
    value_order.resize(n_pairs);
    domain.assign(n_pairs, kFullDomain);
    assigned.assign(n_pairs, -1);
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        const int p_idx = RelationGraph::pair_index(i, j);
        pair_of[p_idx] = {i, j};
        const PairScores& fwd = prob.at(i, j);
        const PairScores& rev = prob.at(j, i);
        for (int v = 0; v < kNumJointLabels; ++v) {
          const JointLabel& l = kJointLabels[v];
          score[p_idx][v] = std::log(fwd.prob(l.temporal)) +
                            std::log(fwd.prob(l.subevent)) +
                            std::log(rev.prob(inverse(l.temporal))) +
                            std::log(rev.prob(inverse(l.subevent)));
        }
        auto& ord = value_order[p_idx];
        for (int v = 0; v < kNumJointLabels; ++v) ord[v] = v;
        std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
          return score[p_idx][a] > score[p_idx][b];
        });
      }
    }
    suffix_max.assign(n_pairs + 1, 0);
    for (int p_idx = n_pairs - 1; p_idx >= 0; --p_idx) {
      suffix_max[p_idx] =
          suffix_max[p_idx + 1] + score[p_idx][value_order[p_idx][0]];
    }
  }

  double assignment_objective(const std::vector<int>& assign) const {
    double obj = 0;
    for (int p_idx = 0; p_idx < n_pairs; ++p_idx) {
      obj += score[p_idx][assign[p_idx]];
    }
    return obj;
  }

  void offer(const std::vector<int>& assign) {
    const double obj = assignment_objective(assign);
    if (obj > best) {
      best = obj;
      best_assign = assign;
    }
  }

  // Restricts the middle pair of every triple closed by assigning v at
  // p_idx = (x,y); returns false on an emptied domain.  `trail` records
  // undo state.
  bool propagate(int p_idx, int v,
                 std::vector<std::pair<int, std::uint8_t>>& trail) {
    const auto [x, y] = pair_of[p_idx];
    for (int a = x + 1; a < y; ++a) {
      const int v1 = assigned[RelationGraph::pair_index(x, a)];
      const int q = RelationGraph::pair_index(a, y);
      const std::uint8_t narrowed =
          domain[q] & cube().mid_mask[v1][v];
      if (narrowed == domain[q]) continue;
      if (narrowed == 0) return false;
      trail.emplace_back(q, domain[q]);
      domain[q] = narrowed;
    }
    return true;
  }

  void dfs(int p_idx, double current) {
    if (p_idx == n_pairs) {
      if (current > best) {
        best = current;
        best_assign = assigned;
      }
      return;
    }
    const double tail = suffix_max[p_idx + 1];
    for (int v : value_order[p_idx]) {
      if (!(domain[p_idx] & (1u << v))) continue;
      // Values are tried in descending score: once one is bound-pruned the
      // rest are too.
      if (current + score[p_idx][v] + tail <= best + slack) break;
      ++nodes;
      std::vector<std::pair<int, std::uint8_t>> trail;
      assigned[p_idx] = v;
      if (propagate(p_idx, v, trail)) {
        dfs(p_idx + 1, current + score[p_idx][v]);
      }
      assigned[p_idx] = -1;
      for (auto it = trail.rbegin(); it != trail.rend(); ++it) {
        domain[it->first] = it->second;
      }
    }
  }
};

int joint_index(const PairLabels& labels) {
  for (int v = 0; v < kNumJointLabels; ++v) {
    if (labels.temporal == kJointLabels[v].temporal &&
        labels.subevent == kJointLabels[v].subevent) {
      return v;
    }
  }
  return -1;
}

}  // namespace

GlobalDecodeResult global_decode(const DecodingProblem& problem,
                                 const GlobalDecodeOptions& options) {
  if (problem.n_events > options.max_events) {
    throw CapExceeded("decoding problem has " +
                      std::to_string(problem.n_events) +
                      " events, cap is " + std::to_string(options.max_events));
  }
  const auto t0 = std::chrono::steady_clock::now();
  Search search(problem);

  // The all-(VG, NR) assignment is consistent with itself at every triple,
  // so the search always starts with a feasible incumbent.
  const int vague_norel = joint_index(
      {RelationLabel::kVague, RelationLabel::kNoRel});
  assert(vague_norel >= 0);
  search.offer(std::vector<int>(search.n_pairs, vague_norel));

  // The greedy event complex, when it happens to be consistent, is usually a
  // much tighter incumbent.
  {
    const RelationGraph greedy = decode_event_complex(problem);
    if (count_violations(greedy).violating_triples == 0) {
      std::vector<int> assign(search.n_pairs);
      bool ok = true;
      for (int p_idx = 0; p_idx < search.n_pairs && ok; ++p_idx) {
        const auto [i, j] = search.pair_of[p_idx];
        assign[p_idx] = joint_index(greedy.labels(i, j));
        ok = assign[p_idx] >= 0;
      }
      if (ok) search.offer(assign);
    }
  }

  // Tiny negative slack so floating-point rounding in the bound can never
  // prune a branch holding the true optimum.
  search.slack = -1e-9 * (1 + std::abs(search.best));
  search.dfs(0, 0.0);

  GlobalDecodeResult out;
  out.graph = RelationGraph(problem.n_events);
  for (int p_idx = 0; p_idx < search.n_pairs; ++p_idx) {
    const auto [i, j] = search.pair_of[p_idx];
    const JointLabel& l = kJointLabels[search.best_assign[p_idx]];
    out.graph.set_label(i, j, l.temporal);
    out.graph.set_label(i, j, l.subevent);
  }
  out.stats.objective = search.assignment_objective(search.best_assign);
  out.stats.nodes_expanded = search.nodes;
  out.stats.violations = count_violations(out.graph).violating_triples;
  out.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  assert(out.stats.violations == 0);
  return out;
}

RelationGraph decode_document(const DecodingProblem& problem, bool global,
                              const GlobalDecodeOptions& options,
                              DecodeStats* stats) {
  if (!global) {
    RelationGraph g = decode_event_complex(problem);
    if (stats != nullptr) {
      *stats = DecodeStats{};
      stats->violations = count_violations(g).violating_triples;
    }
    return g;
  }
  if (problem.n_events <= options.max_events) {
    GlobalDecodeResult res = global_decode(problem, options);
    if (stats != nullptr) *stats = res.stats;
    return res.graph;
  }

  const int n = problem.n_events;
  const int cap = options.max_events;
  const int stride = std::max(1, cap / 2);

  // Pairs outside every window keep the greedy labels.
  RelationGraph out = decode_event_complex(problem);
  std::vector<double> pair_best(out.n_pairs(),
                                -std::numeric_limits<double>::infinity());
  DecodeStats agg;
  for (int start = 0;; start += stride) {
    const int end = std::min(n, start + cap);
    const int width = end - start;
    DecodingProblem window(width);
    for (int i = 0; i < width; ++i) {
      for (int j = 0; j < width; ++j) {
        if (i != j) window.at(i, j) = problem.at(start + i, start + j);
      }
    }
    GlobalDecodeResult res = global_decode(window, options);
    agg.nodes_expanded += res.stats.nodes_expanded;
    agg.wall_seconds += res.stats.wall_seconds;
    agg.objective += res.stats.objective;
    for (int j = 1; j < width; ++j) {
      for (int i = 0; i < j; ++i) {
        const int p_idx = RelationGraph::pair_index(start + i, start + j);
        if (res.stats.objective <= pair_best[p_idx]) continue;
        pair_best[p_idx] = res.stats.objective;
        const PairLabels l = res.graph.labels(i, j);
        out.set_label(start + i, start + j, *l.temporal);
        out.set_label(start + i, start + j, *l.subevent);
      }
    }
    if (end == n) break;
  }
  if (stats != nullptr) {
    agg.violations = count_violations(out).violating_triples;
    *stats = agg;
  }
  return out;
}

}  // namespace evrel
