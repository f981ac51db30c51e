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
//
// Decoding: per-pair greedy argmax, subevent-priority event-complex
// assembly, and exact consistent global decoding via branch-and-bound.

#ifndef EVREL_INFERENCE_HPP_
#define EVREL_INFERENCE_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "evrel/pair_scores.hpp"
#include "evrel/relation_graph.hpp"
#include "evrel/relations.hpp"

namespace evrel {

// Scores for every ordered pair of one document's events.
struct DecodingProblem {
  int n_events = 0;
  std::vector<PairScores> scores;  // index i * n_events + j, i != j

  explicit DecodingProblem(int n = 0)
      : n_events(n), scores(static_cast<std::size_t>(n) * n) {}

  const PairScores& at(int i, int j) const {
    return scores[static_cast<std::size_t>(i) * n_events + j];
  }
  PairScores& at(int i, int j) {
    return scores[static_cast<std::size_t>(i) * n_events + j];
  }
};

struct DecodeStats {
  double objective = 0;
  std::int64_t nodes_expanded = 0;
  double wall_seconds = 0;
  std::int64_t violations = 0;
};

// A coherent joint label for one pair: a non-NR membership label fixes the
// temporal label it implies, NR leaves every temporal label available.
struct JointLabel {
  RelationLabel temporal;
  RelationLabel subevent;
  bool operator==(const JointLabel&) const = default;
};

inline constexpr int kNumJointLabels = 7;
inline constexpr std::array<JointLabel, kNumJointLabels> kJointLabels = {{
    {RelationLabel::kBefore, RelationLabel::kParentChild},
    {RelationLabel::kBefore, RelationLabel::kNoRel},
    {RelationLabel::kAfter, RelationLabel::kChildParent},
    {RelationLabel::kAfter, RelationLabel::kNoRel},
    {RelationLabel::kEqual, RelationLabel::kCoref},
    {RelationLabel::kEqual, RelationLabel::kNoRel},
    {RelationLabel::kVague, RelationLabel::kNoRel},
}};

// Argmax within one head; ties resolved toward the lower label index.
RelationLabel greedy_decode(const PairScores& scores, Head task);

// Subevent head first: a non-NR argmax fixes both labels, otherwise the
// temporal head is decoded independently.
RelationGraph decode_event_complex(const DecodingProblem& problem);

struct GlobalDecodeOptions {
  int max_events = 12;
};

struct GlobalDecodeResult {
  RelationGraph graph;
  DecodeStats stats;
};

// Exact maximizer of the summed log scores of both orientations of every
// pair, over assignments with zero composition-table violations.  Throws
// CapExceeded beyond options.max_events.
GlobalDecodeResult global_decode(const DecodingProblem& problem,
                                 const GlobalDecodeOptions& options = {});

// Whole-document decode.  With `global` set, documents beyond the cap are
// decoded over half-overlapping windows: each in-window pair takes its label
// from the covering window with the higher objective, and pairs never
// co-windowed fall back to the greedy event-complex labels (consistency is
// then only guaranteed within windows).
RelationGraph decode_document(const DecodingProblem& problem, bool global,
                              const GlobalDecodeOptions& options = {},
                              DecodeStats* stats = nullptr);

}  // namespace evrel

#endif  // EVREL_INFERENCE_HPP_
