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

#include "evrel/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <tuple>

#include "json.hpp"

#include "evrel/errors.hpp"
#include "evrel/rng.hpp"

namespace evrel {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kNumFillers> kFillerSurface = {
    "the",   "a",     "crew",  "city",   "report", "storm", "group",
    "plan",  "march", "fire",  "crowd",  "talks",  "vote",  "siege",
    "drill", "audit", "probe", "strike", "summit", "recall",
};

// One surface row per joint label, in kJointLabels order; column picks a
// synonym.  Between two adjacent triggers the connective asserts the
// directed relation of the earlier one to the later one.
constexpr std::array<std::array<std::string_view, kSynonymsPerConnective>,
                     kNumJointLabels>
    kConnectiveSurface = {{
        {"during-which", "encompassing", "spanning"},      // BF, PC
        {"before", "prior-to", "preceding"},               // BF, NR
        {"as-part-of", "within", "amid"},                  // AF, CP
        {"after", "following", "once-done"},               // AF, NR
        {"that-is", "namely", "aka"},                      // EQ, CR
        {"alongside", "in-step-with", "concurrent-with"},  // EQ, NR
        {"around", "sometime-near", "loosely-after"},      // VG, NR
    }};

int joint_index_of(const PairLabels& l) {
  for (int v = 0; v < kNumJointLabels; ++v) {
    if (l.temporal == kJointLabels[v].temporal &&
        l.subevent == kJointLabels[v].subevent) {
      return v;
    }
  }
  throw std::logic_error("generate_complex: gold pair outside the joint "
                         "label set");
}

void set_both(RelationGraph& g, int i, int j, RelationLabel temporal,
              RelationLabel subevent) {
  g.set_label(i, j, temporal);
  g.set_label(i, j, subevent);
}

// Group-level structure behind one complex: a forest plus start times, with
// coreferent events collapsed into a single group node.
struct ComplexSkeleton {
  std::vector<int> group_of;           // event -> group
  std::vector<int> parent;             // group -> parent group or -1
  std::vector<double> start;           // group -> start time
};

ComplexSkeleton sample_skeleton(const SyntheticSpec& spec, Rng& rng,
                                int n_events) {
  ComplexSkeleton s;
  s.group_of.resize(n_events);
  int n_groups = 0;
  for (int e = 0; e < n_events; ++e) {
    if (e > 0 && rng.chance(spec.coref_fraction)) {
      s.group_of[e] = static_cast<int>(rng.below(n_groups));
    } else {
      s.group_of[e] = n_groups++;
    }
  }

  s.parent.assign(n_groups, -1);
  s.start.resize(n_groups);
  std::vector<int> capacity(n_groups);
  std::vector<int> child_count(n_groups, 0);
  for (int g = 0; g < n_groups; ++g) {
    capacity[g] = rng.range(spec.min_branching, spec.max_branching);
  }
  for (int g = 0; g < n_groups; ++g) {
    if (g > 0 && rng.chance(0.6)) {
      std::vector<int> open;
      for (int h = 0; h < g; ++h) {
        if (child_count[h] < capacity[h]) open.push_back(h);
      }
      if (!open.empty()) {
        s.parent[g] = open[rng.below(open.size())];
        ++child_count[s.parent[g]];
      }
    }
    // A child event starts strictly after its parent, per the containment
    // convention the label algebra encodes.
    s.start[g] = s.parent[g] < 0 ? rng.real(0.0, 10.0)
                                 : s.start[s.parent[g]] + 0.05 + rng.real();
  }
  return s;
}

bool is_ancestor(const ComplexSkeleton& s, int a, int b) {
  for (int v = s.parent[b]; v >= 0; v = s.parent[v]) {
    if (v == a) return true;
  }
  return false;
}

RelationGraph gold_from_skeleton(const ComplexSkeleton& s, int n_events) {
  RelationGraph gold(n_events);
  for (int j = 1; j < n_events; ++j) {
    for (int i = 0; i < j; ++i) {
      const int gi = s.group_of[i];
      const int gj = s.group_of[j];
      if (gi == gj) {
        set_both(gold, i, j, RelationLabel::kEqual, RelationLabel::kCoref);
      } else if (is_ancestor(s, gi, gj)) {
        set_both(gold, i, j, RelationLabel::kBefore,
                 RelationLabel::kParentChild);
      } else if (is_ancestor(s, gj, gi)) {
        set_both(gold, i, j, RelationLabel::kAfter,
                 RelationLabel::kChildParent);
      } else {
        const RelationLabel t = s.start[gi] < s.start[gj]
                                    ? RelationLabel::kBefore
                                    : RelationLabel::kAfter;
        set_both(gold, i, j, t, RelationLabel::kNoRel);
      }
    }
  }
  return gold;
}

// Degrades a subset of the unrelated pairs to (VG, NR), keeping each
// degradation only if the graph stays violation-free.
void add_vague_noise(const SyntheticSpec& spec, Rng& rng,
                     RelationGraph& gold) {
  for (int j = 1; j < gold.n_events(); ++j) {
    for (int i = 0; i < j; ++i) {
      if (gold.label(i, j, Head::kSubevent) != RelationLabel::kNoRel) continue;
      if (!rng.chance(spec.noise_fraction)) continue;
      const RelationLabel prev = *gold.label(i, j, Head::kTemporal);
      if (prev == RelationLabel::kVague) continue;
      gold.set_label(i, j, RelationLabel::kVague);
      if (count_violations(gold).violating_triples > 0) {
        gold.set_label(i, j, prev);
      }
    }
  }
}

void render_clause(const SyntheticSpec& spec, Rng& rng, Document& doc) {
  auto push = [&doc](std::string_view t, int v, PosTag p) {
    doc.tokens.push_back(
        {std::string(t), v, static_cast<int>(p)});
  };
  const int trigger =
      kTriggerBase + static_cast<int>(rng.below(spec.vocab - kTriggerBase));
  const std::string surface = "act_" + std::to_string(trigger);
  const int noun = 2 + static_cast<int>(rng.below(kNumFillers - 2));
  if (spec.grammar == 0) {
    push(kFillerSurface[0], kFillerBase + 0, PosTag::kDet);
    push(kFillerSurface[noun], kFillerBase + noun, PosTag::kNoun);
    doc.events.push_back(static_cast<int>(doc.tokens.size()));
    push(surface, trigger, PosTag::kVerb);
  } else {
    const int noun2 = 2 + static_cast<int>(rng.below(kNumFillers - 2));
    push(kFillerSurface[noun], kFillerBase + noun, PosTag::kNoun);
    doc.events.push_back(static_cast<int>(doc.tokens.size()));
    push(surface, trigger, PosTag::kVerb);
    push(kFillerSurface[1], kFillerBase + 1, PosTag::kDet);
    push(kFillerSurface[noun2], kFillerBase + noun2, PosTag::kNoun);
  }
}

json record_to_json(const CorpusRecord& r) {
  json j;
  j["id"] = r.doc.id;
  j["split"] = r.split;
  json toks = json::array();
  for (const Document::Token& t : r.doc.tokens) {
    toks.push_back({{"t", t.surface}, {"v", t.vocab}, {"pos", t.pos}});
  }
  j["tokens"] = std::move(toks);
  j["events"] = r.doc.events;
  json rels = json::array();
  for (int b = 1; b < r.gold.n_events(); ++b) {
    for (int a = 0; a < b; ++a) {
      const PairLabels l = r.gold.labels(a, b);
      if (!l.temporal && !l.subevent) continue;
      json rel{{"i", a}, {"j", b}};
      if (l.temporal) rel["temporal"] = std::string(label_code(*l.temporal));
      if (l.subevent) rel["subevent"] = std::string(label_code(*l.subevent));
      rels.push_back(std::move(rel));
    }
  }
  j["relations"] = std::move(rels);
  return j;
}

RelationLabel parse_label_or_throw(const std::string& code, int line_no) {
  const std::optional<RelationLabel> r = parse_label(code);
  if (!r) {
    throw ParseError(line_no, "load_corpus: unknown label code '" + code +
                                  "' on line " + std::to_string(line_no));
  }
  return *r;
}

CorpusRecord record_from_json(const json& j, int line_no) {
  CorpusRecord r;
  r.doc.id = j.at("id").get<std::string>();
  r.split = j.value("split", "train");
  for (const json& t : j.at("tokens")) {
    r.doc.tokens.push_back({t.at("t").get<std::string>(),
                            t.at("v").get<int>(), t.at("pos").get<int>()});
  }
  r.doc.events = j.at("events").get<std::vector<int>>();
  r.gold = RelationGraph(static_cast<int>(r.doc.events.size()));
  for (const json& rel : j.at("relations")) {
    const int a = rel.at("i").get<int>();
    const int b = rel.at("j").get<int>();
    if (a < 0 || b <= a || b >= r.gold.n_events()) {
      throw ParseError(line_no, "load_corpus: pair (" + std::to_string(a) +
                                    "," + std::to_string(b) +
                                    ") out of range on line " +
                                    std::to_string(line_no));
    }
    if (rel.contains("temporal")) {
      r.gold.set_label(
          a, b, parse_label_or_throw(rel.at("temporal").get<std::string>(),
                                     line_no));
    }
    if (rel.contains("subevent")) {
      r.gold.set_label(
          a, b, parse_label_or_throw(rel.at("subevent").get<std::string>(),
                                     line_no));
    }
  }
  return r;
}

void validate_strict(const CorpusRecord& r) {
  const RelationGraph closed = transitive_closure(r.gold);
  const ViolationReport report = count_violations(closed);
  if (report.violating_triples > 0) {
    const CountedViolation& v = report.details.front();
    throw ConflictError(
        v.e1, v.e3,
        v.detail.actual ? std::string(label_code(*v.detail.actual)) : "-",
        std::string(label_code(v.detail.target)),
        "load_corpus: document '" + r.doc.id +
            "' violates the composition table after closure");
  }
}

}  // namespace

std::pair<RelationGraph, Document> generate_complex(const SyntheticSpec& spec,
                                                    std::uint64_t seed,
                                                    int n_events) {
  if (!spec.valid()) {
    throw std::invalid_argument("generate_complex: invalid SyntheticSpec");
  }
  if (n_events < 1) {
    throw std::invalid_argument("generate_complex: n_events must be >= 1");
  }
  Rng rng(seed);

  const ComplexSkeleton skeleton = sample_skeleton(spec, rng, n_events);
  RelationGraph gold = gold_from_skeleton(skeleton, n_events);
  add_vague_noise(spec, rng, gold);

  // Mentions appear in a random textual order; event indices are re-based
  // so that event k is the k-th trigger of the rendered text.
  std::vector<int> order(n_events);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  RelationGraph gold_text(n_events);
  for (int b = 1; b < n_events; ++b) {
    for (int a = 0; a < b; ++a) {
      const PairLabels l = gold.labels(order[a], order[b]);
      set_both(gold_text, a, b, *l.temporal, *l.subevent);
    }
  }

  Document doc;
  doc.id = "synth-" + std::to_string(seed);
  for (int k = 0; k < n_events; ++k) {
    if (k > 0) {
      const PairLabels l = gold_text.labels(k - 1, k);
      const int joint = joint_index_of(l);
      const int syn = static_cast<int>(rng.below(kSynonymsPerConnective));
      doc.tokens.push_back(
          {std::string(kConnectiveSurface[joint][syn]),
           kConnectiveBase + joint * kSynonymsPerConnective + syn,
           static_cast<int>(PosTag::kConn)});
    }
    render_clause(spec, rng, doc);
  }
  return {std::move(gold_text), std::move(doc)};
}

std::vector<CorpusRecord> generate_corpus(const SyntheticSpec& spec) {
  if (!spec.valid()) {
    throw std::invalid_argument("generate_corpus: invalid SyntheticSpec");
  }
  Rng top(spec.seed);
  std::vector<CorpusRecord> records;
  records.reserve(spec.docs);
  for (int d = 0; d < spec.docs; ++d) {
    const int n = top.range(spec.min_events, spec.max_events);
    const std::uint64_t doc_seed = top.u64();
    CorpusRecord r;
    std::tie(r.gold, r.doc) = generate_complex(spec, doc_seed, n);
    const bool single_task = top.chance(spec.single_task_fraction);
    const Head kept_head =
        top.chance(0.5) ? Head::kTemporal : Head::kSubevent;
    if (single_task || spec.annotated_fraction < 1.0) {
      RelationGraph sparse(r.gold.n_events());
      for (int j = 1; j < r.gold.n_events(); ++j) {
        for (int i = 0; i < j; ++i) {
          if (!top.chance(spec.annotated_fraction)) continue;
          for (Head h : {Head::kTemporal, Head::kSubevent}) {
            if (single_task && h != kept_head) continue;
            if (const auto l = r.gold.label(i, j, h)) {
              sparse.set_label(i, j, *l);
            }
          }
        }
      }
      r.gold = std::move(sparse);
    }
    char id[32];
    std::snprintf(id, sizeof id, "doc-%05d", d);
    r.doc.id = id;
    records.push_back(std::move(r));
  }
  return records;
}

void save_corpus(const std::vector<CorpusRecord>& records,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_corpus: cannot open " + path.string());
  }
  for (const CorpusRecord& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
  if (!out) {
    throw std::runtime_error("save_corpus: write failed for " +
                             path.string());
  }
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path,
                                      LoadMode mode) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(0, "load_corpus: cannot open " + path.string());
  }
  std::vector<CorpusRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError(line_no, "load_corpus: malformed record on line " +
                                    std::to_string(line_no));
    }
    try {
      records.push_back(record_from_json(j, line_no));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("load_corpus: ") + e.what() +
                                    " on line " + std::to_string(line_no));
    }
    if (mode == LoadMode::kStrict) validate_strict(records.back());
  }
  return records;
}

RedMapping map_red_label(const std::string& raw) {
  static const std::map<std::string, RedMapping,
                        std::less<>>
      kTable = {
          {"BEFORE", {std::nullopt, RelationLabel::kBefore}},
          {"BEFORE/CAUSES", {std::nullopt, RelationLabel::kBefore}},
          {"BEFORE/PRECONDITION", {std::nullopt, RelationLabel::kBefore}},
          {"ENDS-ON", {std::nullopt, RelationLabel::kBefore}},
          {"OVERLAP/PRECONDITION", {std::nullopt, RelationLabel::kBefore}},
          {"SIMULTANEOUS", {std::nullopt, RelationLabel::kEqual}},
          {"OVERLAP", {std::nullopt, RelationLabel::kVague}},
          {"REINITIATES", {std::nullopt, RelationLabel::kVague}},
          {"CONTAINS",
           {RelationLabel::kParentChild, RelationLabel::kBefore}},
          {"CONTAINS-SUBEVENT",
           {RelationLabel::kParentChild, RelationLabel::kBefore}},
          {"BEGINS-ON", {std::nullopt, RelationLabel::kAfter}},
      };
  const auto hit = kTable.find(raw);
  if (hit != kTable.end()) return hit->second;

  // Untabulated strings: temporal-flavored names degrade to Vague,
  // structural ones to NoRel.
  static constexpr std::string_view kTemporalHints[] = {
      "BEFORE", "AFTER", "OVERLAP", "BEGINS", "ENDS",
      "CAUSE",  "PRECONDITION", "SIMULTANEOUS", "REINITIATES", "TERMINATES",
  };
  static constexpr std::string_view kStructuralHints[] = {
      "IDENTICAL", "APPOSITIVE", "SET", "MEMBER", "PART",
      "WHOLE",     "BRIDGING",   "COREF", "REPORTING",
  };
  for (std::string_view hint : kTemporalHints) {
    if (raw.find(hint) != std::string::npos) {
      return {std::nullopt, RelationLabel::kVague};
    }
  }
  for (std::string_view hint : kStructuralHints) {
    if (raw.find(hint) != std::string::npos) {
      return {RelationLabel::kNoRel, std::nullopt};
    }
  }
  static std::set<std::string> logged;
  if (logged.insert(raw).second) {
    std::clog << "map_red_label: unknown relation '" << raw
              << "', defaulting to VG\n";
  }
  return {std::nullopt, RelationLabel::kVague};
}

std::vector<CorpusRecord> split_corpus(std::vector<CorpusRecord> records,
                                       const std::vector<double>& fractions,
                                       std::uint64_t seed) {
  if (fractions.empty() || fractions.size() > 3) {
    throw std::invalid_argument("split_corpus: need 1 to 3 fractions");
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("split_corpus: negative fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_corpus: fractions must sum to 1");
  }

  const char* names2[] = {"train", "test"};
  const char* names3[] = {"train", "dev", "test"};
  const char** names = fractions.size() == 2 ? names2 : names3;

  const int n = static_cast<int>(records.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  double cum = 0.0;
  int begin = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    cum += fractions[k];
    const int end = k + 1 == fractions.size()
                        ? n
                        : static_cast<int>(std::llround(cum * n));
    for (int idx = begin; idx < end; ++idx) {
      records[perm[idx]].split = names[k];
    }
    begin = end;
  }
  return records;
}

std::vector<CorpusRecord> convert_red(const std::filesystem::path& tsv_path) {
  std::ifstream in(tsv_path);
  if (!in) {
    throw ParseError(0, "convert_red: cannot open " + tsv_path.string());
  }

  struct RawRelation {
    int e1, e2;
    RedMapping mapping;
  };
  std::vector<std::string> doc_order;
  std::map<std::string, std::vector<RawRelation>> by_doc;
  std::map<std::string, int> max_event;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string doc_id, e1_str, e2_str, raw;
    if (!std::getline(fields, doc_id, '\t') ||
        !std::getline(fields, e1_str, '\t') ||
        !std::getline(fields, e2_str, '\t') || !std::getline(fields, raw)) {
      throw ParseError(line_no, "convert_red: expected 4 tab-separated "
                                "fields on line " +
                                    std::to_string(line_no));
    }
    int e1 = 0;
    int e2 = 0;
    try {
      e1 = std::stoi(e1_str);
      e2 = std::stoi(e2_str);
    } catch (const std::exception&) {
      throw ParseError(line_no, "convert_red: bad event index on line " +
                                    std::to_string(line_no));
    }
    if (e1 < 0 || e2 < 0 || e1 == e2) {
      throw ParseError(line_no, "convert_red: bad event pair on line " +
                                    std::to_string(line_no));
    }
    if (by_doc.find(doc_id) == by_doc.end()) doc_order.push_back(doc_id);
    by_doc[doc_id].push_back({e1, e2, map_red_label(raw)});
    max_event[doc_id] = std::max({max_event[doc_id], e1, e2});
  }

  std::vector<CorpusRecord> records;
  records.reserve(doc_order.size());
  for (const std::string& doc_id : doc_order) {
    CorpusRecord r;
    r.doc.id = doc_id;
    const int n = max_event[doc_id] + 1;
    for (int e = 0; e < n; ++e) {
      r.doc.events.push_back(e);
      r.doc.tokens.push_back({"e" + std::to_string(e), kVocabOov,
                              static_cast<int>(PosTag::kVerb)});
    }
    r.gold = RelationGraph(n);
    for (const RawRelation& rel : by_doc[doc_id]) {
      if (rel.mapping.temporal) {
        r.gold.set_label(rel.e1, rel.e2, *rel.mapping.temporal);
      }
      if (rel.mapping.subevent) {
        r.gold.set_label(rel.e1, rel.e2, *rel.mapping.subevent);
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace evrel
