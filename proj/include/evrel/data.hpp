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
// Synthetic event-complex corpora and corpus serialization.  The generator
// samples a subevent forest with optional coreference merges and a
// compatible start-time assignment, then renders each complex as a token
// sequence in which consecutive triggers are joined by a connective word
// carrying their directed relation.  Pairs of non-adjacent triggers have no
// direct lexical signal, so consistency across triples is what makes them
// learnable.

#ifndef EVREL_DATA_HPP_
#define EVREL_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evrel/inference.hpp"
#include "evrel/model.hpp"
#include "evrel/relation_graph.hpp"

namespace evrel {

// Part-of-speech inventory emitted by the generator and converters.  Values
// index the POS block of the token encoding.
enum class PosTag : int {
  kOther = 0,
  kVerb = 1,
  kNoun = 2,
  kDet = 3,
  kConn = 4,
};

inline constexpr int kNumPosTags = 5;

// Vocabulary layout.  Row 0 is the reserved OOV id; a small closed-class
// block and the connective block have fixed positions so that corpora with
// different vocab sizes agree on everything but the trigger block.
inline constexpr int kVocabOov = 0;
inline constexpr int kFillerBase = 1;
inline constexpr int kNumFillers = 20;
inline constexpr int kSynonymsPerConnective = 3;
inline constexpr int kConnectiveBase = kFillerBase + kNumFillers;
inline constexpr int kNumConnectives =
    kNumJointLabels * kSynonymsPerConnective;
inline constexpr int kTriggerBase = kConnectiveBase + kNumConnectives;

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int docs = 200;
  int min_events = 5;  // events per document, inclusive bounds
  int max_events = 9;
  int min_branching = 1;  // children capacity sampled per forest node
  int max_branching = 3;
  double coref_fraction = 0.06;  // chance an event merges into a prior group
  double noise_fraction = 0.25;  // chance an unrelated pair degrades to VG/NR
  // Fraction of documents annotated for a single task (half of them keep
  // only temporal gold, half only membership gold), mimicking corpora whose
  // sources each cover one task.
  double single_task_fraction = 0.0;
  // Chance a pair keeps its gold labels at all; below 1 the corpus is
  // annotation-sparse the way hand-labeled relation corpora are.
  double annotated_fraction = 1.0;
  int vocab = 300;
  int grammar = 0;  // clause template family, 0 or 1

  bool valid() const {
    return docs >= 0 && min_events >= 1 && max_events >= min_events &&
           min_branching >= 1 && max_branching >= min_branching &&
           coref_fraction >= 0.0 && coref_fraction <= 1.0 &&
           noise_fraction >= 0.0 && noise_fraction <= 1.0 &&
           single_task_fraction >= 0.0 && single_task_fraction <= 1.0 &&
           annotated_fraction >= 0.0 && annotated_fraction <= 1.0 &&
           vocab >= kTriggerBase + 8 && (grammar == 0 || grammar == 1);
  }
};

struct CorpusRecord {
  Document doc;
  RelationGraph gold;  // sized to doc.events.size()
  std::string split = "train";

  bool operator==(const CorpusRecord&) const = default;
};

// One event complex: a fully labeled gold graph that closes without
// conflict and its rendered document.  Deterministic in (spec, seed,
// n_events); the spec's own seed and document count are ignored here.
std::pair<RelationGraph, Document> generate_complex(const SyntheticSpec& spec,
                                                    std::uint64_t seed,
                                                    int n_events);

// spec.docs records with sequential ids, all tagged "train".
std::vector<CorpusRecord> generate_corpus(const SyntheticSpec& spec);

// One record per line.  Strict mode closes every gold graph and rejects
// conflicts and violations; lenient mode loads annotation as written.
enum class LoadMode { kStrict, kLenient };

void save_corpus(const std::vector<CorpusRecord>& records,
                 const std::filesystem::path& path);
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path,
                                      LoadMode mode = LoadMode::kStrict);

// Label pair produced by the RED mapping; either head may be absent.
struct RedMapping {
  std::optional<RelationLabel> subevent;
  std::optional<RelationLabel> temporal;

  bool operator==(const RedMapping&) const = default;
};

// Total and deterministic.  The eleven tabulated strings map exactly;
// remaining strings fall back to Vague or NoRel by relation category, and
// strings outside both keyword sets map to Vague and are logged once.
RedMapping map_red_label(const std::string& raw);

// Document-level split, deterministic per seed.  One fraction tags
// everything "train"; two tag "train"/"test"; three tag
// "train"/"dev"/"test".  Fractions must sum to 1.
std::vector<CorpusRecord> split_corpus(std::vector<CorpusRecord> records,
                                       const std::vector<double>& fractions,
                                       std::uint64_t seed);

// Tab-separated export with one relation per line: doc id, e1 index, e2
// index, raw RED label.  Only the heads the mapping provides are written;
// events are rendered as placeholder triggers.  Loads leniently by design,
// since RED annotation is not guaranteed closure-consistent.
std::vector<CorpusRecord> convert_red(const std::filesystem::path& tsv_path);

}  // namespace evrel

#endif  // EVREL_DATA_HPP_
