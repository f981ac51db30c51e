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
// Label algebra for event-event relations.  Every ordered event pair carries
// up to two labels, one per head: a temporal label (order of starting time)
// and a membership label (event hierarchy / coreference).  The composition
// table below tells, for labels alpha on (e1,e2) and beta on (e2,e3), which
// labels on (e1,e3) are entailed and which are ruled out.

#ifndef EVREL_RELATIONS_HPP_
#define EVREL_RELATIONS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace evrel {

// Fixed label order; used for score vectors, files and tie-breaking.
enum class RelationLabel : std::uint8_t {
  kBefore = 0,
  kAfter = 1,
  kEqual = 2,
  kVague = 3,
  kParentChild = 4,
  kChildParent = 5,
  kCoref = 6,
  kNoRel = 7,
};

inline constexpr int kNumLabels = 8;
inline constexpr int kLabelsPerHead = 4;

enum class Head : std::uint8_t { kTemporal = 0, kSubevent = 1 };

constexpr int label_index(RelationLabel r) { return static_cast<int>(r); }

constexpr RelationLabel label_from_index(int i) {
  return static_cast<RelationLabel>(i);
}

constexpr Head head_of(RelationLabel r) {
  return label_index(r) < kLabelsPerHead ? Head::kTemporal : Head::kSubevent;
}

constexpr std::array<RelationLabel, kLabelsPerHead> labels_of(Head h) {
  if (h == Head::kTemporal) {
    return {RelationLabel::kBefore, RelationLabel::kAfter,
            RelationLabel::kEqual, RelationLabel::kVague};
  }
  return {RelationLabel::kParentChild, RelationLabel::kChildParent,
          RelationLabel::kCoref, RelationLabel::kNoRel};
}

// Index of a label within its own head's score vector (0..3).
constexpr int head_index(RelationLabel r) {
  return label_index(r) % kLabelsPerHead;
}

// Label on (e2,e1) when r holds on (e1,e2).  An involution.
constexpr RelationLabel inverse(RelationLabel r) {
  switch (r) {
    case RelationLabel::kBefore:
      return RelationLabel::kAfter;
    case RelationLabel::kAfter:
      return RelationLabel::kBefore;
    case RelationLabel::kEqual:
      return RelationLabel::kEqual;
    case RelationLabel::kVague:
      return RelationLabel::kVague;
    case RelationLabel::kParentChild:
      return RelationLabel::kChildParent;
    case RelationLabel::kChildParent:
      return RelationLabel::kParentChild;
    case RelationLabel::kCoref:
      return RelationLabel::kCoref;
    case RelationLabel::kNoRel:
      return RelationLabel::kNoRel;
  }
  return r;
}

// Temporal label forced by a membership label, if any.  A parent starts
// before its children; coreferent events start together.
constexpr std::optional<RelationLabel> implied_temprel(RelationLabel s) {
  switch (s) {
    case RelationLabel::kParentChild:
      return RelationLabel::kBefore;
    case RelationLabel::kChildParent:
      return RelationLabel::kAfter;
    case RelationLabel::kCoref:
      return RelationLabel::kEqual;
    default:
      return std::nullopt;
  }
}

constexpr std::string_view label_code(RelationLabel r) {
  constexpr std::string_view kCodes[kNumLabels] = {"BF", "AF", "EQ", "VG",
                                                   "PC", "CP", "CR", "NR"};
  return kCodes[label_index(r)];
}

constexpr std::optional<RelationLabel> parse_label(std::string_view code) {
  for (int i = 0; i < kNumLabels; ++i) {
    if (code == label_code(label_from_index(i))) return label_from_index(i);
  }
  return std::nullopt;
}

// Small set of labels, one bit per label.
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr LabelSet(std::initializer_list<RelationLabel> labels) {
    for (RelationLabel r : labels) insert(r);
  }

  constexpr void insert(RelationLabel r) {
    bits_ |= static_cast<std::uint8_t>(1u << label_index(r));
  }
  constexpr bool contains(RelationLabel r) const {
    return (bits_ >> label_index(r)) & 1u;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const {
    int n = 0;
    for (int i = 0; i < kNumLabels; ++i) n += (bits_ >> i) & 1u;
    return n;
  }
  constexpr std::uint8_t bits() const { return bits_; }

  constexpr LabelSet operator&(LabelSet other) const {
    LabelSet out;
    out.bits_ = bits_ & other.bits_;
    return out;
  }
  constexpr bool operator==(const LabelSet&) const = default;

  // Labels of one head contained in the set, nullopt past the end.
  constexpr std::optional<RelationLabel> only(Head h) const {
    std::optional<RelationLabel> found;
    for (RelationLabel r : labels_of(h)) {
      if (contains(r)) {
        if (found) return std::nullopt;
        found = r;
      }
    }
    return found;
  }

  template <typename Fn>
  constexpr void for_each(Fn&& fn) const {
    for (int i = 0; i < kNumLabels; ++i) {
      if ((bits_ >> i) & 1u) fn(label_from_index(i));
    }
  }

 private:
  std::uint8_t bits_ = 0;
};

// One cell of the composition table: given alpha on (e1,e2) and beta on
// (e2,e3), `required` labels must hold on (e1,e3) and `forbidden` labels
// must not.  Either set may be empty.
struct InductionEntry {
  LabelSet required;
  LabelSet forbidden;
};

namespace detail {

using R = RelationLabel;

// Rows are alpha, columns are beta, both in the fixed label order
// BF AF EQ VG PC CP CR NR.  Entries are {required, forbidden}.
inline constexpr InductionEntry kInductionTable[kNumLabels][kNumLabels] = {
    // alpha = BF
    {
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = BF
        {{}, {}},                                        // beta = AF
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = EQ
        {{}, {R::kAfter, R::kEqual}},                    // beta = VG
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = PC
        {{}, {}},                                        // beta = CP
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = CR
        {{}, {}},                                        // beta = NR
    },
    // alpha = AF
    {
        {{}, {}},                                        // beta = BF
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = AF
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = EQ
        {{}, {R::kBefore, R::kEqual}},                   // beta = VG
        {{}, {}},                                        // beta = PC
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = CP
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = CR
        {{}, {}},                                        // beta = NR
    },
    // alpha = EQ
    {
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = BF
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = AF
        {{R::kEqual}, {}},                               // beta = EQ
        {{R::kVague}, {R::kCoref}},                      // beta = VG
        {{}, {R::kAfter}},                               // beta = PC
        {{}, {R::kBefore}},                              // beta = CP
        {{R::kEqual}, {}},                               // beta = CR
        {{}, {}},                                        // beta = NR
    },
    // alpha = VG
    {
        {{}, {R::kAfter, R::kEqual}},                    // beta = BF
        {{}, {R::kBefore, R::kEqual}},                   // beta = AF
        {{R::kVague}, {}},                               // beta = EQ
        {{}, {}},                                        // beta = VG
        {{}, {}},                                        // beta = PC
        {{}, {}},                                        // beta = CP
        {{R::kVague}, {R::kCoref}},                      // beta = CR
        {{}, {}},                                        // beta = NR
    },
    // alpha = PC
    {
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = BF
        {{}, {}},                                        // beta = AF
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = EQ
        {{}, {}},                                        // beta = VG
        {{R::kParentChild}, {R::kAfter}},                // beta = PC
        {{}, {}},                                        // beta = CP
        {{R::kParentChild}, {R::kAfter}},                // beta = CR
        {{}, {R::kChildParent, R::kCoref}},              // beta = NR
    },
    // alpha = CP
    {
        {{}, {}},                                        // beta = BF
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = AF
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = EQ
        {{}, {}},                                        // beta = VG
        {{}, {}},                                        // beta = PC
        {{R::kChildParent}, {R::kBefore}},               // beta = CP
        {{R::kChildParent}, {R::kBefore}},               // beta = CR
        {{}, {R::kParentChild, R::kCoref}},              // beta = NR
    },
    // alpha = CR
    {
        {{R::kBefore}, {R::kChildParent, R::kCoref}},    // beta = BF
        {{R::kAfter}, {R::kParentChild, R::kCoref}},     // beta = AF
        {{R::kEqual}, {}},                               // beta = EQ
        {{R::kVague}, {}},                               // beta = VG
        {{R::kParentChild}, {R::kAfter}},                // beta = PC
        {{R::kChildParent}, {R::kBefore}},               // beta = CP
        {{R::kCoref, R::kEqual}, {}},                    // beta = CR
        {{R::kNoRel}, {}},                               // beta = NR
    },
    // alpha = NR
    {
        {{}, {}},                                        // beta = BF
        {{}, {}},                                        // beta = AF
        {{}, {}},                                        // beta = EQ
        {{}, {}},                                        // beta = VG
        {{}, {R::kChildParent, R::kCoref}},              // beta = PC
        {{}, {R::kParentChild, R::kCoref}},              // beta = CP
        {{R::kNoRel}, {}},                               // beta = CR
        {{}, {}},                                        // beta = NR
    },
};

}  // namespace detail

constexpr const InductionEntry& induce(RelationLabel alpha,
                                       RelationLabel beta) {
  return detail::kInductionTable[label_index(alpha)][label_index(beta)];
}

// Labels assigned to one ordered pair, at most one per head.
struct PairLabels {
  std::optional<RelationLabel> temporal;
  std::optional<RelationLabel> subevent;

  std::optional<RelationLabel>& slot(Head h) {
    return h == Head::kTemporal ? temporal : subevent;
  }
  const std::optional<RelationLabel>& slot(Head h) const {
    return h == Head::kTemporal ? temporal : subevent;
  }
  bool complete() const { return temporal.has_value() && subevent.has_value(); }
  bool empty() const { return !temporal && !subevent; }

  PairLabels inverted() const {
    PairLabels out;
    if (temporal) out.temporal = inverse(*temporal);
    if (subevent) out.subevent = inverse(*subevent);
    return out;
  }

  bool operator==(const PairLabels&) const = default;
};

// One broken deduction for a triple (e1,e2,e3): either a required label on
// (e1,e3) is missing or contradicted, or a forbidden one is present.
struct TripleViolation {
  RelationLabel alpha;                     // label on (e1,e2)
  RelationLabel beta;                      // label on (e2,e3)
  RelationLabel target;                    // entailed or excluded on (e1,e3)
  bool forbidden = false;                  // target was excluded yet present
  std::optional<RelationLabel> actual;     // what (e1,e3) carries instead
};

// Checks every alpha/beta combination available on the two antecedent pairs
// against the labels on (e1,e3).  A required label only counts as violated
// when the corresponding head of (e1,e3) is labeled with something else;
// an unlabeled head is not a violation.
template <typename Sink>
inline void check_triple(const PairLabels& l12, const PairLabels& l23,
                         const PairLabels& l13, Sink&& sink) {
  const std::optional<RelationLabel> ab[2] = {l12.temporal, l12.subevent};
  const std::optional<RelationLabel> bc[2] = {l23.temporal, l23.subevent};
  for (const auto& alpha : ab) {
    if (!alpha) continue;
    for (const auto& beta : bc) {
      if (!beta) continue;
      const InductionEntry& cell = induce(*alpha, *beta);
      cell.required.for_each([&](RelationLabel need) {
        const auto& have = l13.slot(head_of(need));
        if (have && *have != need) {
          sink(TripleViolation{*alpha, *beta, need, false, *have});
        }
      });
      cell.forbidden.for_each([&](RelationLabel ban) {
        const auto& have = l13.slot(head_of(ban));
        if (have && *have == ban) {
          sink(TripleViolation{*alpha, *beta, ban, true, *have});
        }
      });
    }
  }
}

inline std::vector<TripleViolation> check_triple(const PairLabels& l12,
                                                 const PairLabels& l23,
                                                 const PairLabels& l13) {
  std::vector<TripleViolation> out;
  check_triple(l12, l23, l13, [&](const TripleViolation& v) {
    out.push_back(v);
  });
  return out;
}

}  // namespace evrel

#endif  // EVREL_RELATIONS_HPP_
