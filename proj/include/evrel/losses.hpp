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
// Annotation, symmetry and conjunction losses over pair scores, plus the
// joint objective.  Two routes are provided on purpose: plain double-valued
// functions (used for evaluation and as an oracle) and tape-node builders
// (used for training); tests assert they agree.

#ifndef EVREL_LOSSES_HPP_
#define EVREL_LOSSES_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "evrel/autodiff.hpp"
#include "evrel/pair_scores.hpp"
#include "evrel/relations.hpp"

namespace evrel {

struct LabelWeights {
  std::array<double, kNumLabels> w{1, 1, 1, 1, 1, 1, 1, 1};

  double operator[](RelationLabel r) const { return w[label_index(r)]; }
  double& operator[](RelationLabel r) { return w[label_index(r)]; }

  bool valid() const {
    for (double x : w) {
      if (!(x > 0)) return false;
    }
    return true;
  }
};

struct LossBreakdown {
  double l_a = 0;
  double l_s = 0;
  double l_c = 0;
  double lambda_s = 0;
  double lambda_c = 0;
  double total = 0;
};

// Which conjunction terms participate: those whose antecedents and
// consequent live in one head (task), the remaining mixed-head ones (cross),
// or everything.
enum class ConstraintScope { kAll, kTaskOnly, kCrossOnly };

struct ConjunctionOptions {
  ConstraintScope scope = ConstraintScope::kAll;
  bool hinge = false;            // one-sided max(0, t) instead of |t|
  int max_triples_per_doc = 2000;
  std::uint64_t seed = 0;
};

// One grounded composition-table entry: alpha on (e1,e2) and beta on (e2,e3)
// require or forbid `target` on (e1,e3).
struct ConjunctionTerm {
  RelationLabel alpha;
  RelationLabel beta;
  RelationLabel target;
  bool forbidden;
  bool cross_task;  // heads of {alpha, beta, target} are not all equal
};

// All grounded terms of the composition table, in fixed row-major cell order
// (required before forbidden within a cell).
std::span<const ConjunctionTerm> conjunction_terms();

bool term_in_scope(const ConjunctionTerm& term, ConstraintScope scope);

// ---------------------------------------------------------------------------
// Value route.

struct AnnotatedScore {
  PairScores scores;
  RelationLabel gold;
};

struct ScoredTriple {
  PairScores s12;
  PairScores s23;
  PairScores s13;
};

// Both-direction scores and gold labels of one canonically oriented pair.
struct ScoredPair {
  int doc = 0;
  int e1 = 0;
  int e2 = 0;  // e1 < e2
  PairScores fwd;
  PairScores rev;
  std::optional<RelationLabel> gold_temporal;  // direction e1 -> e2
  std::optional<RelationLabel> gold_subevent;
};

struct LossBatch {
  std::vector<ScoredPair> pairs;
};

// Sum of -w_r log r over annotated cases.
double annotation_loss(std::span<const AnnotatedScore> batch,
                       const LabelWeights& weights);

// Sum over all 8 labels of |log fwd[a] - log rev[inverse(a)]|.
double symmetry_loss(const PairScores& fwd, const PairScores& rev);

// |log a + log b - log g|, or its positive part under hinge.
double conjunction_term_required(double a, double b, double g,
                                 bool hinge = false);
// |log a + log b - log(1-d)|; DomainError at d = 1.
double conjunction_term_forbidden(double a, double b, double d,
                                  bool hinge = false);

double conjunction_loss(std::span<const ScoredTriple> triples,
                        const ConjunctionOptions& options = {});

// Ordered distinct triples (a,b,c) of `events` whose three unordered pairs
// all satisfy has_pair, capped by seeded uniform sampling.
std::vector<std::array<int, 3>> enumerate_triples(
    std::span<const int> events,
    const std::function<bool(int, int)>& has_pair, int cap,
    std::uint64_t seed);

// Composes the three losses over a batch.  Annotated pairs contribute
// cross-entropy in both directions (the gold of the reverse direction is the
// inverse label); every canonical pair contributes one symmetry term; every
// scoreable ordered triple within a document contributes conjunction terms.
LossBreakdown joint_loss(const LossBatch& batch, const LabelWeights& weights,
                         double lambda_s, double lambda_c,
                         const ConjunctionOptions& options = {});

// ---------------------------------------------------------------------------
// Tape route.

// Log-probabilities (and log one-minus-probabilities) of one ordered pair.
template <typename Scalar>
struct PairNodes {
  typename Tape<Scalar>::Node logp;    // 8x1
  typename Tape<Scalar>::Node log1mp;  // 8x1
};

// logits (8x1) -> per-head floored softmax -> stacked logs.
template <typename Scalar>
PairNodes<Scalar> pair_nodes_from_logits(Tape<Scalar>& tape,
                                         typename Tape<Scalar>::Node logits,
                                         Scalar floor = Scalar(kProbFloor)) {
  using Node = typename Tape<Scalar>::Node;
  const Scalar norm = 1 / (1 + 8 * floor);
  Node heads[2];
  for (int h = 0; h < 2; ++h) {
    Node z = tape.segment(logits, 4 * h, 4);
    heads[h] = tape.scale(tape.add_scalar(tape.softmax(z), 2 * floor), norm);
  }
  Node probs = tape.concat({heads[0], heads[1]});
  PairNodes<Scalar> out;
  out.logp = tape.log(probs);
  out.log1mp = tape.log(tape.add_scalar(tape.scale(probs, -1), 1));
  return out;
}

// Same floored heads, as probabilities (for decode-time use of the tape).
template <typename Scalar>
PairNodes<Scalar> pair_nodes_from_probs(
    Tape<Scalar>& tape, const Eigen::Matrix<Scalar, 8, 1>& probs) {
  using Mat = typename Tape<Scalar>::Mat;
  typename Tape<Scalar>::Node p = tape.constant(Mat(probs));
  PairNodes<Scalar> out;
  out.logp = tape.log(p);
  out.log1mp = tape.log(tape.add_scalar(tape.scale(p, -1), 1));
  return out;
}

// -w * logp[gold], a 1x1 node.
template <typename Scalar>
typename Tape<Scalar>::Node annotation_node(Tape<Scalar>& tape,
                                            typename Tape<Scalar>::Node logp,
                                            RelationLabel gold, Scalar w) {
  return tape.scale(tape.pick(logp, label_index(gold)), -w);
}

// sum |logp_fwd - P logp_rev| with P the inverse-label permutation.
template <typename Scalar>
typename Tape<Scalar>::Node symmetry_node(
    Tape<Scalar>& tape, typename Tape<Scalar>::Node logp_fwd,
    typename Tape<Scalar>::Node logp_rev) {
  using Mat = typename Tape<Scalar>::Mat;
  Mat perm = Mat::Zero(kNumLabels, kNumLabels);
  for (int i = 0; i < kNumLabels; ++i) {
    perm(i, label_index(inverse(label_from_index(i)))) = 1;
  }
  auto mirrored = tape.matvec(tape.constant(perm), logp_rev);
  return tape.sum(tape.abs(tape.sub(logp_fwd, mirrored)));
}

// Selection matrices over the grounded term list: row k of the required
// block reads term k's alpha from logp_12, beta from logp_23 and target from
// logp_13; the forbidden block's third operand is log(1-p)_13.
template <typename Scalar>
struct ConjunctionMatrices {
  using Mat = typename Tape<Scalar>::Mat;
  Mat a_req, b_req, c_req;
  Mat a_forb, b_forb, d_forb;

  static ConjunctionMatrices build(ConstraintScope scope) {
    std::vector<const ConjunctionTerm*> req;
    std::vector<const ConjunctionTerm*> forb;
    for (const ConjunctionTerm& t : conjunction_terms()) {
      if (!term_in_scope(t, scope)) continue;
      (t.forbidden ? forb : req).push_back(&t);
    }
    ConjunctionMatrices m;
    auto fill = [](const std::vector<const ConjunctionTerm*>& terms, Mat& a,
                   Mat& b, Mat& c) {
      const auto rows = static_cast<Eigen::Index>(terms.size());
      a = Mat::Zero(rows, kNumLabels);
      b = Mat::Zero(rows, kNumLabels);
      c = Mat::Zero(rows, kNumLabels);
      for (Eigen::Index k = 0; k < rows; ++k) {
        a(k, label_index(terms[k]->alpha)) = 1;
        b(k, label_index(terms[k]->beta)) = 1;
        c(k, label_index(terms[k]->target)) = 1;
      }
    };
    fill(req, m.a_req, m.b_req, m.c_req);
    fill(forb, m.a_forb, m.b_forb, m.d_forb);
    return m;
  }
};

// Both-direction score nodes and golds of one canonically oriented pair;
// the tape twin of ScoredPair.
template <typename Scalar>
struct PairNodeCase {
  int doc = 0;
  int e1 = 0;
  int e2 = 0;  // e1 < e2
  PairNodes<Scalar> fwd;
  PairNodes<Scalar> rev;
  std::optional<RelationLabel> gold_temporal;
  std::optional<RelationLabel> gold_subevent;
};

template <typename Scalar>
struct JointLossNodes {
  typename Tape<Scalar>::Node total;
  LossBreakdown values;  // total recomposed as l_a + ls*l_s + lc*l_c exactly
};

// Tape twin of joint_loss.  Terms whose coefficient is zero are not built,
// so an annotation-only objective is structurally identical to plain
// cross-entropy; their breakdown entries read 0.
template <typename Scalar>
JointLossNodes<Scalar> joint_loss_nodes(Tape<Scalar>& tape,
                                        std::span<const PairNodeCase<Scalar>> pairs,
                                        const LabelWeights& weights,
                                        Scalar lambda_s, Scalar lambda_c,
                                        const ConjunctionOptions& options = {});

// Conjunction loss of one ordered triple.
template <typename Scalar>
typename Tape<Scalar>::Node conjunction_node(
    Tape<Scalar>& tape, const PairNodes<Scalar>& p12,
    const PairNodes<Scalar>& p23, const PairNodes<Scalar>& p13,
    const ConjunctionMatrices<Scalar>& m, bool hinge = false) {
  using Node = typename Tape<Scalar>::Node;
  auto block = [&](const auto& a, const auto& b, const auto& c,
                   Node third) -> std::optional<Node> {
    if (a.rows() == 0) return std::nullopt;
    Node t = tape.sub(tape.add(tape.matvec(tape.constant(a), p12.logp),
                               tape.matvec(tape.constant(b), p23.logp)),
                      tape.matvec(tape.constant(c), third));
    return tape.sum(hinge ? tape.relu(t) : tape.abs(t));
  };
  std::optional<Node> req = block(m.a_req, m.b_req, m.c_req, p13.logp);
  std::optional<Node> forb = block(m.a_forb, m.b_forb, m.d_forb, p13.log1mp);
  if (req && forb) return tape.add(*req, *forb);
  if (req) return *req;
  if (forb) return *forb;
  typename Tape<Scalar>::Mat zero(1, 1);
  zero(0, 0) = 0;
  return tape.constant(std::move(zero));
}

template <typename Scalar>
JointLossNodes<Scalar> joint_loss_nodes(
    Tape<Scalar>& tape, std::span<const PairNodeCase<Scalar>> pairs,
    const LabelWeights& weights, Scalar lambda_s, Scalar lambda_c,
    const ConjunctionOptions& options) {
  using Node = typename Tape<Scalar>::Node;
  auto zero = [&]() {
    typename Tape<Scalar>::Mat z(1, 1);
    z(0, 0) = 0;
    return tape.constant(std::move(z));
  };
  auto accumulate = [&](std::optional<Node>& acc, Node term) {
    acc = acc ? tape.add(*acc, term) : term;
  };

  std::optional<Node> l_a;
  std::optional<Node> l_s;
  std::optional<Node> l_c;
  for (const PairNodeCase<Scalar>& p : pairs) {
    for (Head h : {Head::kTemporal, Head::kSubevent}) {
      const auto& gold =
          h == Head::kTemporal ? p.gold_temporal : p.gold_subevent;
      if (!gold) continue;
      accumulate(l_a, annotation_node(tape, p.fwd.logp, *gold,
                                      Scalar(weights[*gold])));
      accumulate(l_a,
                 annotation_node(tape, p.rev.logp, inverse(*gold),
                                 Scalar(weights[inverse(*gold)])));
    }
    if (lambda_s != 0) {
      accumulate(l_s, symmetry_node(tape, p.fwd.logp, p.rev.logp));
    }
  }

  if (lambda_c != 0) {
    static const ConjunctionMatrices<Scalar> kAll =
        ConjunctionMatrices<Scalar>::build(ConstraintScope::kAll);
    static const ConjunctionMatrices<Scalar> kTask =
        ConjunctionMatrices<Scalar>::build(ConstraintScope::kTaskOnly);
    static const ConjunctionMatrices<Scalar> kCross =
        ConjunctionMatrices<Scalar>::build(ConstraintScope::kCrossOnly);
    const ConjunctionMatrices<Scalar>& m =
        options.scope == ConstraintScope::kAll
            ? kAll
            : (options.scope == ConstraintScope::kTaskOnly ? kTask : kCross);

    // Mirror the value route's per-document grounding so both report the
    // same sampled triples.
    std::map<int, std::set<int>> doc_events;
    std::map<int, std::map<std::pair<int, int>, const PairNodeCase<Scalar>*>>
        doc_pairs;
    for (const PairNodeCase<Scalar>& p : pairs) {
      doc_events[p.doc].insert(p.e1);
      doc_events[p.doc].insert(p.e2);
      doc_pairs[p.doc][{p.e1, p.e2}] = &p;
    }
    for (const auto& [doc, events_set] : doc_events) {
      const auto& index = doc_pairs[doc];
      auto find = [&](int i, int j) -> const PairNodeCase<Scalar>* {
        auto it = index.find({std::min(i, j), std::max(i, j)});
        return it == index.end() ? nullptr : it->second;
      };
      auto directed = [&](int i, int j) -> const PairNodes<Scalar>& {
        const PairNodeCase<Scalar>* p = find(i, j);
        return i < j ? p->fwd : p->rev;
      };
      const std::vector<int> events(events_set.begin(), events_set.end());
      const auto triples = enumerate_triples(
          events, [&](int i, int j) { return find(i, j) != nullptr; },
          options.max_triples_per_doc,
          options.seed ^ static_cast<std::uint64_t>(doc));
      for (const auto& [a, b, c] : triples) {
        accumulate(l_c,
                   conjunction_node(tape, directed(a, b), directed(b, c),
                                    directed(a, c), m, options.hinge));
      }
    }
  }

  JointLossNodes<Scalar> out;
  Node total = l_a ? *l_a : zero();
  if (l_s) total = tape.add(total, tape.scale(*l_s, lambda_s));
  if (l_c) total = tape.add(total, tape.scale(*l_c, lambda_c));
  out.total = total;
  out.values.l_a = l_a ? static_cast<double>(tape.scalar(*l_a)) : 0.0;
  out.values.l_s = l_s ? static_cast<double>(tape.scalar(*l_s)) : 0.0;
  out.values.l_c = l_c ? static_cast<double>(tape.scalar(*l_c)) : 0.0;
  out.values.lambda_s = static_cast<double>(lambda_s);
  out.values.lambda_c = static_cast<double>(lambda_c);
  out.values.total = out.values.l_a + out.values.lambda_s * out.values.l_s +
                     out.values.lambda_c * out.values.l_c;
  return out;
}

}  // namespace evrel

#endif  // EVREL_LOSSES_HPP_
