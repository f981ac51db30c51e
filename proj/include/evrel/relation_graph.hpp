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

#ifndef EVREL_RELATION_GRAPH_HPP_
#define EVREL_RELATION_GRAPH_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "evrel/relations.hpp"

namespace evrel {

// Labels over all unordered event pairs of one document.  Storage is
// canonical (i < j); reads and writes in the opposite direction go through
// inverse().  Events are dense indices 0..n-1 in textual order.
class RelationGraph {
 public:
  RelationGraph() = default;
  explicit RelationGraph(int n_events) : n_events_(n_events) {
    pairs_.resize(static_cast<std::size_t>(n_pairs()));
  }

  int n_events() const { return n_events_; }
  int n_pairs() const { return n_events_ * (n_events_ - 1) / 2; }

  // Canonical index of the unordered pair {i,j}, i < j.  Pairs are laid out
  // grouped by their larger event, so growing a document keeps indices.
  static int pair_index(int i, int j) { return j * (j - 1) / 2 + i; }

  PairLabels labels(int i, int j) const {
    const PairLabels& c = at(i < j ? i : j, i < j ? j : i);
    return i < j ? c : c.inverted();
  }

  std::optional<RelationLabel> label(int i, int j, Head h) const {
    return labels(i, j).slot(h);
  }

  void set_label(int i, int j, RelationLabel r) {
    if (i < j) {
      at(i, j).slot(head_of(r)) = r;
    } else {
      at(j, i).slot(head_of(r)) = inverse(r);
    }
  }

  void clear_label(int i, int j, Head h) {
    at(i < j ? i : j, i < j ? j : i).slot(h).reset();
  }

  bool fully_labeled() const {
    for (const PairLabels& p : pairs_) {
      if (!p.complete()) return false;
    }
    return true;
  }

  std::int64_t n_labeled() const {
    std::int64_t n = 0;
    for (const PairLabels& p : pairs_) {
      n += p.temporal.has_value() + p.subevent.has_value();
    }
    return n;
  }

  bool operator==(const RelationGraph&) const = default;

 private:
  PairLabels& at(int i, int j) { return pairs_[pair_index(i, j)]; }
  const PairLabels& at(int i, int j) const { return pairs_[pair_index(i, j)]; }

  int n_events_ = 0;
  std::vector<PairLabels> pairs_;
};

struct CountedViolation {
  int e1 = 0;
  int e2 = 0;
  int e3 = 0;
  TripleViolation detail;
};

struct ViolationReport {
  std::int64_t total_triples = 0;      // ordered triples with both pairs of
                                       // the antecedent chain fully labeled
  std::int64_t violating_triples = 0;  // of those, triples with >= 1 breakage
  std::vector<CountedViolation> details;

  double rate() const {
    return total_triples == 0
               ? 0.0
               : static_cast<double>(violating_triples) / total_triples;
  }
};

// Scans all ordered triples of distinct events.  A triple enters the total
// only when all three of its pairs carry both labels, so partially labeled
// graphs are never charged for what they do not claim.
ViolationReport count_violations(const RelationGraph& g);

// Fixpoint of the composition table over a copy of `g`.  Deduced labels are
// only ever written to unlabeled slots; a deduction that contradicts an
// existing or previously deduced label throws ConflictError, as does a
// forbidden label that is present.
RelationGraph transitive_closure(const RelationGraph& g);

}  // namespace evrel

#endif  // EVREL_RELATION_GRAPH_HPP_
