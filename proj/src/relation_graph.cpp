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

#include "evrel/relation_graph.hpp"

#include <string>

#include "evrel/errors.hpp"

namespace evrel {

namespace {

std::string slot_text(const std::optional<RelationLabel>& r) {
  return r ? std::string(label_code(*r)) : std::string("-");
}

}  // namespace

ViolationReport count_violations(const RelationGraph& g) {
  ViolationReport report;
  const int n = g.n_events();
  for (int e1 = 0; e1 < n; ++e1) {
    for (int e2 = 0; e2 < n; ++e2) {
      if (e2 == e1) continue;
      const PairLabels l12 = g.labels(e1, e2);
      if (!l12.complete()) continue;
      for (int e3 = 0; e3 < n; ++e3) {
        if (e3 == e1 || e3 == e2) continue;
        const PairLabels l23 = g.labels(e2, e3);
        const PairLabels l13 = g.labels(e1, e3);
        if (!l23.complete() || !l13.complete()) continue;
        ++report.total_triples;
        bool broken = false;
        check_triple(l12, l23, l13, [&](const TripleViolation& v) {
          broken = true;
          report.details.push_back(CountedViolation{e1, e2, e3, v});
        });
        report.violating_triples += broken;
      }
    }
  }
  return report;
}

namespace {

// Writes `r` into the (e1,e3) slot of its head, or throws if the slot
// already disagrees.  Returns true when the graph changed.
bool deduce(RelationGraph& g, int e1, int e3, RelationLabel r) {
  const auto have = g.label(e1, e3, head_of(r));
  if (!have) {
    g.set_label(e1, e3, r);
    return true;
  }
  if (*have != r) {
    throw ConflictError(
        e1, e3, std::string(label_code(*have)), std::string(label_code(r)),
        "deduced " + std::string(label_code(r)) + " for pair (" +
            std::to_string(e1) + "," + std::to_string(e3) + ") already labeled " +
            std::string(label_code(*have)));
  }
  return false;
}

}  // namespace

RelationGraph transitive_closure(const RelationGraph& g) {
  RelationGraph out = g;
  const int n = out.n_events();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e1 = 0; e1 < n; ++e1) {
      for (int e2 = 0; e2 < n; ++e2) {
        if (e2 == e1) continue;
        const PairLabels l12 = out.labels(e1, e2);
        if (l12.empty()) continue;
        for (int e3 = 0; e3 < n; ++e3) {
          if (e3 == e1 || e3 == e2) continue;
          const PairLabels l23 = out.labels(e2, e3);
          if (l23.empty()) continue;
          const std::optional<RelationLabel> ab[2] = {l12.temporal,
                                                      l12.subevent};
          const std::optional<RelationLabel> bc[2] = {l23.temporal,
                                                      l23.subevent};
          for (const auto& alpha : ab) {
            if (!alpha) continue;
            for (const auto& beta : bc) {
              if (!beta) continue;
              const InductionEntry& cell = induce(*alpha, *beta);
              cell.required.for_each([&](RelationLabel need) {
                changed |= deduce(out, e1, e3, need);
              });
              cell.forbidden.for_each([&](RelationLabel ban) {
                const auto have = out.label(e1, e3, head_of(ban));
                if (have && *have == ban) {
                  throw ConflictError(
                      e1, e3, std::string(label_code(*have)),
                      std::string(label_code(ban)),
                      std::string(label_code(*alpha)) + "(" +
                          std::to_string(e1) + "," + std::to_string(e2) +
                          ") and " + std::string(label_code(*beta)) + "(" +
                          std::to_string(e2) + "," + std::to_string(e3) +
                          ") rule out " + slot_text(have) + " on (" +
                          std::to_string(e1) + "," + std::to_string(e3) + ")");
                }
              });
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace evrel
