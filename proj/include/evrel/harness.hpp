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
// Training loop, evaluation metrics, and the ablation ladder.  Training
// runs mini-batch descent on the joint loss with batches grouped by
// document, so conjunction triples stay formable; model selection watches
// temporal micro-F1 on the dev split under greedy decoding, keeping the
// "+global inference" configuration a pure decoding change.

#ifndef EVREL_HARNESS_HPP_
#define EVREL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evrel/data.hpp"
#include "evrel/inference.hpp"
#include "evrel/losses.hpp"
#include "evrel/model.hpp"

namespace evrel {

struct OptimizerSettings {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool valid() const {
    return lr > 0 && beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 &&
           eps > 0;
  }
};

// Adaptive moment descent with bias-corrected moments and a running maximum
// of the second moment in the denominator.
class AmsGrad {
 public:
  AmsGrad(const OptimizerSettings& settings, Eigen::Index n)
      : settings_(settings),
        m_(Eigen::ArrayXd::Zero(n)),
        v_(Eigen::ArrayXd::Zero(n)),
        v_max_(Eigen::ArrayXd::Zero(n)) {}

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);
  std::int64_t steps() const { return t_; }

 private:
  OptimizerSettings settings_;
  std::int64_t t_ = 0;
  Eigen::ArrayXd m_, v_, v_max_;
};

// Which annotation heads the loss consumes; single-task ablations train one
// model per head.
enum class TaskSelection { kBoth, kTemporal, kSubevent };

struct AblationFlags {
  bool joint = true;                   // false: one head only, per `tasks`
  bool task_constraints = true;        // symmetry + within-head conjunction
  bool cross_task_constraints = true;  // mixed-head conjunction terms
  bool commonsense = false;            // feed the d_cs channel when > 0
  bool global_inference = false;       // exact decoding at evaluation time
};

struct TrainConfig {
  std::uint64_t seed = 1;
  int epochs = 30;
  int batch_pairs = 64;  // batches take whole documents up to this many pairs
  double lambda_s = 0.2;
  double lambda_c = 0.2;
  bool conjunction_hinge = false;  // one-sided conjunction terms
  double prob_floor = kProbFloor;  // floor under trained score distributions
  AblationFlags flags;
  TaskSelection tasks = TaskSelection::kBoth;
  ModelDims dims;  // vocab 0: sized from the corpus
  OptimizerSettings optimizer;
  int max_triples_per_doc = 2000;
  GlobalDecodeOptions decode;

  bool valid() const {
    return epochs >= 0 && batch_pairs > 0 && lambda_s >= 0 && lambda_c >= 0 &&
           prob_floor > 0 && prob_floor < 0.25 && max_triples_per_doc > 0 &&
           optimizer.valid() && (flags.joint || tasks != TaskSelection::kBoth);
  }
};

// Reference-scale settings; far beyond a desk-size run and kept only so the
// scaled-down defaults have a stated origin.
TrainConfig paper_scale();

struct TemporalMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct SubeventMetrics {
  double f1_pc = 0;
  double f1_cp = 0;
  double f1_micro = 0;
};

struct MetricsReport {
  TemporalMetrics temporal;
  SubeventMetrics subevent;
  double violation_rate = 0;
  std::vector<LossBreakdown> loss_curve;
};

struct TrainLog {
  std::vector<LossBreakdown> epochs;  // batch-mean loss per epoch
  std::vector<double> dev_f1;         // temporal micro-F1 per epoch
  int best_epoch = -1;                // -1: initial parameters kept
};

// Inverse class frequency over the train split (both directions of every
// labeled pair, add-one smoothed), normalized to mean 1 within each head.
LabelWeights inverse_frequency_weights(std::span<const CorpusRecord> train);

// Mini-batch AMSGrad on the joint loss over the train split.  Deterministic
// in (config, corpus); throws DivergenceError when the loss leaves the
// finite range and std::invalid_argument on an invalid config or a corpus
// without a train split.
std::pair<EncoderParams, TrainLog> train(const TrainConfig& config,
                                         std::span<const CorpusRecord> corpus);

// Micro P/R/F1 with Vague as the null class: precision counts correct
// non-VG predictions among predicted non-VG, recall among gold non-VG.
TemporalMetrics evaluate_temprel(std::span<const RelationGraph> pred,
                                 std::span<const RelationGraph> gold);

// Per-label F1 for PC and CP plus their pooled micro-F1, over pairs whose
// first event precedes the second in the text.  Gold graphs are closed
// before scoring so entailed memberships count.
SubeventMetrics evaluate_subevent(std::span<const RelationGraph> pred,
                                  std::span<const RelationGraph> gold);

// Violating ordered triples over chargeable ordered triples, pooled across
// graphs.
double violation_rate(std::span<const RelationGraph> graphs);

// Value-route scores for every ordered pair.  With `commonsense`, the d_cs
// channel carries log-distance-bucket one-hots of the trigger offsets, the
// stand-in for an external knowledge feed.
DecodingProblem score_document(const EncoderParams& params,
                               const Document& doc, bool commonsense = false);

// Greedy or exact decoding of one scored document.
RelationGraph decode_record(const EncoderParams& params, const Document& doc,
                            const AblationFlags& flags,
                            const GlobalDecodeOptions& options = {});

// Decodes the given records and scores them against their gold graphs.
// The returned loss_curve is empty; training owns that series.
MetricsReport evaluate_model(const EncoderParams& params,
                             std::span<const CorpusRecord> records,
                             const AblationFlags& flags,
                             const GlobalDecodeOptions& options = {});

struct AblationRow {
  std::string name;
  MetricsReport metrics;
};

// The ladder {single-task, joint, +task constraints, +cross-task
// constraints, +global inference} with a shared seed.  The last row reuses
// the previous row's parameters and differs only in decoding.
std::vector<AblationRow> run_ablation(const TrainConfig& base,
                                      std::span<const CorpusRecord> corpus);

// Key=value configuration.  Unknown keys and unparseable values throw
// std::invalid_argument; file syntax errors throw ParseError.
void set_config_field(TrainConfig& config, const std::string& key,
                      const std::string& value);
TrainConfig load_config_file(const std::filesystem::path& path,
                             TrainConfig base = {});

}  // namespace evrel

#endif  // EVREL_HARNESS_HPP_
