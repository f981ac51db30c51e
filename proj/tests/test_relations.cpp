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

#include "evrel/relations.hpp"

#include "doctest.h"

namespace evrel {
namespace {

using R = RelationLabel;

constexpr std::array<R, kNumLabels> kAllLabels = {
    R::kBefore, R::kAfter, R::kEqual, R::kVague,
    R::kParentChild, R::kChildParent, R::kCoref, R::kNoRel};

TEST_SUITE_BEGIN("relations");

TEST_CASE("labels split into two heads of four") {
  int temporal = 0;
  int subevent = 0;
  for (R r : kAllLabels) {
    (head_of(r) == Head::kTemporal ? temporal : subevent) += 1;
  }
  CHECK(temporal == 4);
  CHECK(subevent == 4);
  CHECK(label_index(R::kBefore) == 0);
  CHECK(label_index(R::kNoRel) == 7);
}

TEST_CASE("label codes round-trip") {
  for (R r : kAllLabels) {
    auto parsed = parse_label(label_code(r));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == r);
  }
  CHECK(!parse_label("XX").has_value());
  CHECK(label_code(R::kParentChild) == "PC");
}

TEST_CASE("inverse swaps reciprocal labels and fixes reflexive ones") {
  CHECK(inverse(R::kBefore) == R::kAfter);
  CHECK(inverse(R::kAfter) == R::kBefore);
  CHECK(inverse(R::kEqual) == R::kEqual);
  CHECK(inverse(R::kVague) == R::kVague);
  CHECK(inverse(R::kParentChild) == R::kChildParent);
  CHECK(inverse(R::kChildParent) == R::kParentChild);
  CHECK(inverse(R::kCoref) == R::kCoref);
  CHECK(inverse(R::kNoRel) == R::kNoRel);
}

TEST_CASE("inverse is a head-preserving involution") {
  for (R r : kAllLabels) {
    CHECK(inverse(inverse(r)) == r);
    CHECK(head_of(inverse(r)) == head_of(r));
  }
}

TEST_CASE("membership labels imply a temporal label") {
  CHECK(implied_temprel(R::kParentChild) == R::kBefore);
  CHECK(implied_temprel(R::kChildParent) == R::kAfter);
  CHECK(implied_temprel(R::kCoref) == R::kEqual);
  CHECK(!implied_temprel(R::kNoRel).has_value());
}

TEST_CASE("composition table spot checks") {
  CHECK(induce(R::kBefore, R::kParentChild).required ==
        LabelSet{R::kBefore});
  CHECK(induce(R::kBefore, R::kParentChild).forbidden ==
        LabelSet{R::kChildParent, R::kCoref});

  CHECK(induce(R::kParentChild, R::kChildParent).required == LabelSet{});
  CHECK(induce(R::kParentChild, R::kChildParent).forbidden == LabelSet{});

  CHECK(induce(R::kCoref, R::kCoref).required ==
        LabelSet{R::kCoref, R::kEqual});
  CHECK(induce(R::kCoref, R::kCoref).forbidden == LabelSet{});

  CHECK(induce(R::kVague, R::kBefore).required == LabelSet{});
  CHECK(induce(R::kVague, R::kBefore).forbidden ==
        LabelSet{R::kAfter, R::kEqual});

  CHECK(induce(R::kParentChild, R::kParentChild).required ==
        LabelSet{R::kParentChild});
  CHECK(induce(R::kParentChild, R::kParentChild).forbidden ==
        LabelSet{R::kAfter});

  CHECK(induce(R::kEqual, R::kVague).required == LabelSet{R::kVague});
  CHECK(induce(R::kEqual, R::kVague).forbidden == LabelSet{R::kCoref});

  CHECK(induce(R::kNoRel, R::kCoref).required == LabelSet{R::kNoRel});
  CHECK(induce(R::kNoRel, R::kCoref).forbidden == LabelSet{});

  CHECK(induce(R::kAfter, R::kCoref).required == LabelSet{R::kAfter});
  CHECK(induce(R::kAfter, R::kCoref).forbidden ==
        LabelSet{R::kParentChild, R::kCoref});
}

TEST_CASE("composition table term counts") {
  int required = 0;
  int forbidden = 0;
  for (R a : kAllLabels) {
    for (R b : kAllLabels) {
      required += induce(a, b).required.size();
      forbidden += induce(a, b).forbidden.size();
    }
  }
  CHECK(required == 33);
  CHECK(forbidden == 58);
}

TEST_CASE("table cells are internally consistent") {
  for (R a : kAllLabels) {
    for (R b : kAllLabels) {
      const InductionEntry& cell = induce(a, b);
      CHECK((cell.required & cell.forbidden).empty());
      // At most one required label per head.
      for (Head h : {Head::kTemporal, Head::kSubevent}) {
        int n = 0;
        cell.required.for_each([&](R r) { n += head_of(r) == h; });
        CHECK(n <= 1);
      }
    }
  }
}

// The cell for (inverse(beta), inverse(alpha)) constrains the same pair seen
// from the other side.  The two views are not equally strong everywhere, but
// they must never contradict each other.
TEST_CASE("mirrored cells never contradict") {
  for (R a : kAllLabels) {
    for (R b : kAllLabels) {
      const InductionEntry& fwd = induce(a, b);
      const InductionEntry& rev = induce(inverse(b), inverse(a));
      LabelSet rev_required_fwd_view;
      LabelSet rev_forbidden_fwd_view;
      rev.required.for_each(
          [&](R r) { rev_required_fwd_view.insert(inverse(r)); });
      rev.forbidden.for_each(
          [&](R r) { rev_forbidden_fwd_view.insert(inverse(r)); });

      CHECK((fwd.required & rev_forbidden_fwd_view).empty());
      CHECK((fwd.forbidden & rev_required_fwd_view).empty());
      // Where both sides require a label of the same head, they agree.
      for (Head h : {Head::kTemporal, Head::kSubevent}) {
        auto lhs = fwd.required.only(h);
        auto rhs = rev_required_fwd_view.only(h);
        if (lhs && rhs) CHECK(*lhs == *rhs);
      }
    }
  }
}

TEST_CASE("check_triple flags a missing required label") {
  PairLabels l12{R::kBefore, std::nullopt};
  PairLabels l23{std::nullopt, R::kParentChild};
  PairLabels ok{R::kBefore, R::kNoRel};
  CHECK(check_triple(l12, l23, ok).empty());

  PairLabels bad{R::kAfter, std::nullopt};
  auto violations = check_triple(l12, l23, bad);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].alpha == R::kBefore);
  CHECK(violations[0].beta == R::kParentChild);
  CHECK(violations[0].target == R::kBefore);
  CHECK(!violations[0].forbidden);
  CHECK(violations[0].actual == R::kAfter);
}

TEST_CASE("check_triple flags a present forbidden label") {
  PairLabels l12{R::kBefore, std::nullopt};
  PairLabels l23{R::kBefore, std::nullopt};
  PairLabels l13{R::kBefore, R::kCoref};
  auto violations = check_triple(l12, l23, l13);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].target == R::kCoref);
  CHECK(violations[0].forbidden);
}

TEST_CASE("check_triple covers all four head combinations") {
  PairLabels l12{R::kBefore, R::kParentChild};
  PairLabels l23{R::kBefore, R::kParentChild};
  PairLabels l13{R::kAfter, R::kChildParent};
  // Cells fired: (BF,BF), (BF,PC), (PC,BF) each require BF and forbid CP,CR;
  // (PC,PC) requires PC and forbids AF.  Against (AF, CP) that is three
  // missing-BF hits, three forbidden-CP hits, one missing-PC and one
  // forbidden-AF: eight violations.
  CHECK(check_triple(l12, l23, l13).size() == 8);
}

TEST_CASE("check_triple ignores unlabeled result heads") {
  PairLabels l12{R::kEqual, R::kCoref};
  PairLabels l23{R::kEqual, R::kCoref};
  PairLabels l13{};
  CHECK(check_triple(l12, l23, l13).empty());

  PairLabels vague{R::kVague, R::kNoRel};
  auto violations = check_triple(l12, l23, vague);
  // (EQ,EQ), (EQ,CR), (CR,EQ) require EQ (3 misses); (CR,CR) requires both
  // CR and EQ (2 misses).
  CHECK(violations.size() == 5);
}

TEST_SUITE_END();

}  // namespace
}  // namespace evrel
