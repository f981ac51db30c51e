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

#include "evrel/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "evrel/errors.hpp"
#include "evrel/rng.hpp"

namespace evrel {

namespace {

std::vector<ConjunctionTerm> build_terms() {
  std::vector<ConjunctionTerm> terms;
  for (int a = 0; a < kNumLabels; ++a) {
    for (int b = 0; b < kNumLabels; ++b) {
      const RelationLabel alpha = label_from_index(a);
      const RelationLabel beta = label_from_index(b);
      const InductionEntry& cell = induce(alpha, beta);
      auto push = [&](RelationLabel target, bool forbidden) {
        const bool cross = !(head_of(alpha) == head_of(beta) &&
                             head_of(beta) == head_of(target));
        terms.push_back({alpha, beta, target, forbidden, cross});
      };
      cell.required.for_each([&](RelationLabel r) { push(r, false); });
      cell.forbidden.for_each([&](RelationLabel r) { push(r, true); });
    }
  }
  return terms;
}

}  // namespace

std::span<const ConjunctionTerm> conjunction_terms() {
  static const std::vector<ConjunctionTerm> kTerms = build_terms();
  return kTerms;
}

bool term_in_scope(const ConjunctionTerm& term, ConstraintScope scope) {
  switch (scope) {
    case ConstraintScope::kAll:
      return true;
    case ConstraintScope::kTaskOnly:
      return !term.cross_task;
    case ConstraintScope::kCrossOnly:
      return term.cross_task;
  }
  return false;
}

double annotation_loss(std::span<const AnnotatedScore> batch,
                       const LabelWeights& weights) {
  double loss = 0;
  for (const AnnotatedScore& a : batch) {
    if (!a.scores.valid()) {
      throw MissingScore("annotated pair carries no valid scores");
    }
    loss += -weights[a.gold] * std::log(a.scores.prob(a.gold));
  }
  return loss;
}

double symmetry_loss(const PairScores& fwd, const PairScores& rev) {
  double loss = 0;
  for (int i = 0; i < kNumLabels; ++i) {
    const RelationLabel r = label_from_index(i);
    loss += std::abs(std::log(fwd.prob(r)) - std::log(rev.prob(inverse(r))));
  }
  return loss;
}

double conjunction_term_required(double a, double b, double g, bool hinge) {
  const double t = std::log(a) + std::log(b) - std::log(g);
  return hinge ? std::max(0.0, t) : std::abs(t);
}

double conjunction_term_forbidden(double a, double b, double d, bool hinge) {
  if (d >= 1) {
    throw DomainError("forbidden-label score of 1 leaves log(1-d) undefined");
  }
  const double t = std::log(a) + std::log(b) - std::log1p(-d);
  return hinge ? std::max(0.0, t) : std::abs(t);
}

double conjunction_loss(std::span<const ScoredTriple> triples,
                        const ConjunctionOptions& options) {
  double loss = 0;
  for (const ScoredTriple& triple : triples) {
    for (const ConjunctionTerm& term : conjunction_terms()) {
      if (!term_in_scope(term, options.scope)) continue;
      const double a = triple.s12.prob(term.alpha);
      const double b = triple.s23.prob(term.beta);
      const double c = triple.s13.prob(term.target);
      loss += term.forbidden
                  ? conjunction_term_forbidden(a, b, c, options.hinge)
                  : conjunction_term_required(a, b, c, options.hinge);
    }
  }
  return loss;
}

std::vector<std::array<int, 3>> enumerate_triples(
    std::span<const int> events,
    const std::function<bool(int, int)>& has_pair, int cap,
    std::uint64_t seed) {
  std::vector<std::array<int, 3>> triples;
  for (int a : events) {
    for (int b : events) {
      if (b == a || !has_pair(a, b)) continue;
      for (int c : events) {
        if (c == a || c == b || !has_pair(b, c) || !has_pair(a, c)) continue;
        triples.push_back({a, b, c});
      }
    }
  }
  if (cap >= 0 && triples.size() > static_cast<std::size_t>(cap)) {
    Rng rng(seed);
    for (int k = 0; k < cap; ++k) {
      const auto j = k + static_cast<int>(rng.below(triples.size() - k));
      std::swap(triples[k], triples[j]);
    }
    triples.resize(cap);
  }
  return triples;
}

LossBreakdown joint_loss(const LossBatch& batch, const LabelWeights& weights,
                         double lambda_s, double lambda_c,
                         const ConjunctionOptions& options) {
  LossBreakdown out;
  out.lambda_s = lambda_s;
  out.lambda_c = lambda_c;

  std::vector<AnnotatedScore> annotated;
  for (const ScoredPair& p : batch.pairs) {
    if (!p.fwd.valid() || !p.rev.valid()) {
      throw MissingScore("pair in batch carries no valid scores");
    }
    for (Head h : {Head::kTemporal, Head::kSubevent}) {
      const auto& gold =
          h == Head::kTemporal ? p.gold_temporal : p.gold_subevent;
      if (!gold) continue;
      annotated.push_back({p.fwd, *gold});
      annotated.push_back({p.rev, inverse(*gold)});
    }
    out.l_s += symmetry_loss(p.fwd, p.rev);
  }
  out.l_a = annotation_loss(annotated, weights);

  // Triples are grounded per document over the directed scores implied by
  // the batch's canonical pairs.
  std::map<int, std::set<int>> doc_events;
  std::map<int, std::map<std::pair<int, int>, const ScoredPair*>> doc_pairs;
  for (const ScoredPair& p : batch.pairs) {
    doc_events[p.doc].insert(p.e1);
    doc_events[p.doc].insert(p.e2);
    doc_pairs[p.doc][{p.e1, p.e2}] = &p;
  }
  for (const auto& [doc, events_set] : doc_events) {
    const auto& pairs = doc_pairs[doc];
    auto find = [&](int i, int j) -> const ScoredPair* {
      auto it = pairs.find({std::min(i, j), std::max(i, j)});
      return it == pairs.end() ? nullptr : it->second;
    };
    auto directed = [&](int i, int j) -> const PairScores& {
      const ScoredPair* p = find(i, j);
      return i < j ? p->fwd : p->rev;
    };
    const std::vector<int> events(events_set.begin(), events_set.end());
    const auto triples = enumerate_triples(
        events, [&](int i, int j) { return find(i, j) != nullptr; },
        options.max_triples_per_doc,
        options.seed ^ static_cast<std::uint64_t>(doc));
    std::vector<ScoredTriple> scored;
    scored.reserve(triples.size());
    for (const auto& [a, b, c] : triples) {
      scored.push_back({directed(a, b), directed(b, c), directed(a, c)});
    }
    out.l_c += conjunction_loss(scored, options);
  }

  out.total = out.l_a + lambda_s * out.l_s + lambda_c * out.l_c;
  return out;
}

}  // namespace evrel
