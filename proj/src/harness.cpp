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

#include "evrel/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "evrel/errors.hpp"
#include "evrel/rng.hpp"

namespace evrel {
namespace {

double f1_of(double precision, double recall) {
  return precision + recall > 0
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
}

double ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

void require_matching_docs(std::span<const RelationGraph> pred,
                           std::span<const RelationGraph> gold,
                           const char* where) {
  if (pred.size() != gold.size()) {
    throw MismatchError(std::string(where) + ": document counts differ");
  }
  for (std::size_t d = 0; d < pred.size(); ++d) {
    if (pred[d].n_events() != gold[d].n_events()) {
      throw MismatchError(std::string(where) + ": event counts differ in "
                                               "document " +
                          std::to_string(d));
    }
  }
}

int corpus_vocab(std::span<const CorpusRecord> corpus) {
  int vocab = 1;
  for (const CorpusRecord& r : corpus) {
    for (const Document::Token& t : r.doc.tokens) {
      vocab = std::max(vocab, t.vocab + 1);
    }
  }
  return vocab;
}

// Log-scaled distance bucket of two triggers, one-hot in d_cs slots.
Eigen::VectorXd distance_features(const Document& doc, int e1, int e2,
                                  int d_cs) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(d_cs);
  const int dist = std::abs(doc.events[e2] - doc.events[e1]);
  int bucket = 0;
  int top = 1;
  while (dist > top && bucket < d_cs - 1) {
    ++bucket;
    top *= 2;
  }
  f[bucket] = 1.0;
  return f;
}

struct SplitView {
  std::vector<const CorpusRecord*> train;
  std::vector<const CorpusRecord*> dev;
  std::vector<const CorpusRecord*> test;
};

SplitView view_splits(std::span<const CorpusRecord> corpus) {
  SplitView v;
  for (const CorpusRecord& r : corpus) {
    if (r.split == "train") v.train.push_back(&r);
    if (r.split == "dev") v.dev.push_back(&r);
    if (r.split == "test") v.test.push_back(&r);
  }
  return v;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "0" || value == "false" || value == "no" || value == "off") {
    return false;
  }
  throw std::invalid_argument("config: bad boolean for '" + key + "': " +
                              value);
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != value.size() || value.empty()) {
    throw std::invalid_argument("config: bad integer for '" + key + "': " +
                                value);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != value.size() || value.empty()) {
    throw std::invalid_argument("config: bad number for '" + key + "': " +
                                value);
  }
  return out;
}

}  // namespace

void AmsGrad::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("AmsGrad::step: size mismatch");
  }
  ++t_;
  const Eigen::ArrayXd g = grad.array();
  m_ = settings_.beta1 * m_ + (1.0 - settings_.beta1) * g;
  v_ = settings_.beta2 * v_ + (1.0 - settings_.beta2) * g.square();
  v_max_ = v_max_.max(v_);
  const double c1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
  theta.array() -=
      settings_.lr * (m_ / c1) / ((v_max_ / c2).sqrt() + settings_.eps);
}

TrainConfig paper_scale() {
  TrainConfig config;
  config.epochs = 80;
  config.batch_pairs = 512;
  config.dims.d_h = 768;
  config.dims.cell = CellType::kLstm;
  config.optimizer.lr = 0.001;
  return config;
}

LabelWeights inverse_frequency_weights(std::span<const CorpusRecord> train) {
  std::array<double, kNumLabels> count;
  count.fill(1.0);
  for (const CorpusRecord& r : train) {
    for (int j = 1; j < r.gold.n_events(); ++j) {
      for (int i = 0; i < j; ++i) {
        const PairLabels l = r.gold.labels(i, j);
        for (const std::optional<RelationLabel>& lab :
             {l.temporal, l.subevent}) {
          if (!lab) continue;
          count[label_index(*lab)] += 1.0;
          count[label_index(inverse(*lab))] += 1.0;
        }
      }
    }
  }
  LabelWeights weights;
  for (Head h : {Head::kTemporal, Head::kSubevent}) {
    double inv_sum = 0.0;
    for (RelationLabel r : labels_of(h)) {
      inv_sum += 1.0 / count[label_index(r)];
    }
    for (RelationLabel r : labels_of(h)) {
      weights[r] = (1.0 / count[label_index(r)]) * (kLabelsPerHead / inv_sum);
    }
  }
  return weights;
}

TemporalMetrics evaluate_temprel(std::span<const RelationGraph> pred,
                                 std::span<const RelationGraph> gold) {
  require_matching_docs(pred, gold, "evaluate_temprel");
  std::int64_t correct = 0;
  std::int64_t predicted = 0;
  std::int64_t annotated = 0;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    for (int j = 1; j < gold[d].n_events(); ++j) {
      for (int i = 0; i < j; ++i) {
        const auto g = gold[d].label(i, j, Head::kTemporal);
        if (!g) continue;
        const auto p = pred[d].label(i, j, Head::kTemporal);
        if (!p) {
          throw MismatchError("evaluate_temprel: unscored gold pair");
        }
        predicted += *p != RelationLabel::kVague;
        annotated += *g != RelationLabel::kVague;
        correct += *p == *g && *g != RelationLabel::kVague;
      }
    }
  }
  TemporalMetrics m;
  m.precision = ratio(correct, predicted);
  m.recall = ratio(correct, annotated);
  m.f1 = f1_of(m.precision, m.recall);
  return m;
}

SubeventMetrics evaluate_subevent(std::span<const RelationGraph> pred,
                                  std::span<const RelationGraph> gold) {
  require_matching_docs(pred, gold, "evaluate_subevent");
  std::int64_t tp_pc = 0, fp_pc = 0, fn_pc = 0;
  std::int64_t tp_cp = 0, fp_cp = 0, fn_cp = 0;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    const RelationGraph closed = transitive_closure(gold[d]);
    for (int j = 1; j < closed.n_events(); ++j) {
      for (int i = 0; i < j; ++i) {
        const auto g = closed.label(i, j, Head::kSubevent);
        if (!g) continue;
        const auto p = pred[d].label(i, j, Head::kSubevent);
        if (!p) {
          throw MismatchError("evaluate_subevent: unscored gold pair");
        }
        const bool gold_pc = *g == RelationLabel::kParentChild;
        const bool gold_cp = *g == RelationLabel::kChildParent;
        const bool pred_pc = *p == RelationLabel::kParentChild;
        const bool pred_cp = *p == RelationLabel::kChildParent;
        tp_pc += pred_pc && gold_pc;
        fp_pc += pred_pc && !gold_pc;
        fn_pc += gold_pc && !pred_pc;
        tp_cp += pred_cp && gold_cp;
        fp_cp += pred_cp && !gold_cp;
        fn_cp += gold_cp && !pred_cp;
      }
    }
  }
  SubeventMetrics m;
  m.f1_pc = ratio(2 * tp_pc, 2 * tp_pc + fp_pc + fn_pc);
  m.f1_cp = ratio(2 * tp_cp, 2 * tp_cp + fp_cp + fn_cp);
  m.f1_micro = ratio(2 * (tp_pc + tp_cp),
                     2 * (tp_pc + tp_cp) + fp_pc + fp_cp + fn_pc + fn_cp);
  return m;
}

double violation_rate(std::span<const RelationGraph> graphs) {
  std::int64_t violating = 0;
  std::int64_t total = 0;
  for (const RelationGraph& g : graphs) {
    const ViolationReport report = count_violations(g);
    violating += report.violating_triples;
    total += report.total_triples;
  }
  return ratio(violating, total);
}

DecodingProblem score_document(const EncoderParams& params,
                               const Document& doc, bool commonsense) {
  const std::vector<Eigen::VectorXd> events = encode_document(doc, params);
  const int n = static_cast<int>(events.size());
  DecodingProblem problem(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::optional<Eigen::VectorXd> cs;
      if (commonsense && params.dims.d_cs > 0) {
        cs = distance_features(doc, i, j, params.dims.d_cs);
      }
      problem.at(i, j) =
          score_pair(pair_features(events[i], events[j]), params, cs);
    }
  }
  return problem;
}

RelationGraph decode_record(const EncoderParams& params, const Document& doc,
                            const AblationFlags& flags,
                            const GlobalDecodeOptions& options) {
  const DecodingProblem problem =
      score_document(params, doc, flags.commonsense);
  return decode_document(problem, flags.global_inference, options);
}

MetricsReport evaluate_model(const EncoderParams& params,
                             std::span<const CorpusRecord> records,
                             const AblationFlags& flags,
                             const GlobalDecodeOptions& options) {
  std::vector<RelationGraph> pred;
  std::vector<RelationGraph> gold;
  pred.reserve(records.size());
  gold.reserve(records.size());
  for (const CorpusRecord& r : records) {
    pred.push_back(decode_record(params, r.doc, flags, options));
    gold.push_back(r.gold);
  }
  MetricsReport report;
  report.temporal = evaluate_temprel(pred, gold);
  report.subevent = evaluate_subevent(pred, gold);
  report.violation_rate = violation_rate(pred);
  return report;
}

std::pair<EncoderParams, TrainLog> train(const TrainConfig& config,
                                         std::span<const CorpusRecord> corpus) {
  if (!config.valid()) {
    throw std::invalid_argument("train: invalid config");
  }
  const SplitView splits = view_splits(corpus);
  if (splits.train.empty()) {
    throw std::invalid_argument("train: corpus has no train split");
  }

  ModelDims dims = config.dims;
  if (dims.vocab == 0) dims.vocab = corpus_vocab(corpus);

  EncoderParams params = init_params(config.seed, dims);
  Eigen::VectorXd theta = params.flatten();
  AmsGrad optimizer(config.optimizer, theta.size());

  std::vector<CorpusRecord> train_records;
  train_records.reserve(splits.train.size());
  for (const CorpusRecord* r : splits.train) train_records.push_back(*r);
  const LabelWeights weights = inverse_frequency_weights(train_records);
  const double lambda_s =
      config.flags.task_constraints ? config.lambda_s : 0.0;
  const double lambda_c =
      config.flags.task_constraints ? config.lambda_c : 0.0;
  ConjunctionOptions conjunction;
  conjunction.hinge = config.conjunction_hinge;
  conjunction.scope = config.flags.cross_task_constraints
                          ? ConstraintScope::kAll
                          : ConstraintScope::kTaskOnly;
  conjunction.max_triples_per_doc = config.max_triples_per_doc;
  conjunction.seed = config.seed;

  AblationFlags dev_flags = config.flags;
  dev_flags.global_inference = false;  // selection is a greedy-decode affair

  std::vector<RelationGraph> dev_gold;
  for (const CorpusRecord* r : splits.dev) dev_gold.push_back(r->gold);

  TrainLog log;
  Eigen::VectorXd best_theta = theta;
  double best_f1 = -1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<int> order(splits.train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng epoch_rng = Rng(config.seed).fork(static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(order);

    LossBreakdown epoch_sum;
    int batches = 0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      params.unflatten(theta);
      Taped tape;
      auto nodes = ParamNodes<double>::attach(tape, params);
      std::vector<PairNodeCase<double>> cases;

      int batch_pairs = 0;
      while (cursor < order.size() && batch_pairs < config.batch_pairs) {
        const int rec_idx = order[cursor++];
        const CorpusRecord& rec = *splits.train[rec_idx];
        const auto events = encode_document_nodes(tape, rec.doc, nodes);
        const int n = static_cast<int>(events.size());
        for (int j = 1; j < n; ++j) {
          for (int i = 0; i < j; ++i) {
            PairNodeCase<double> c;
            c.doc = rec_idx;
            c.e1 = i;
            c.e2 = j;
            std::optional<Taped::Node> cs_fwd;
            std::optional<Taped::Node> cs_rev;
            if (config.flags.commonsense && dims.d_cs > 0) {
              cs_fwd = tape.constant(
                  distance_features(rec.doc, i, j, dims.d_cs));
              cs_rev = tape.constant(
                  distance_features(rec.doc, j, i, dims.d_cs));
            }
            c.fwd = pair_nodes_from_logits(
                tape,
                pair_logits_node(tape,
                                 pair_feature_node(tape, events[i], events[j]),
                                 nodes, cs_fwd),
                config.prob_floor);
            c.rev = pair_nodes_from_logits(
                tape,
                pair_logits_node(tape,
                                 pair_feature_node(tape, events[j], events[i]),
                                 nodes, cs_rev),
                config.prob_floor);
            const PairLabels gold = rec.gold.labels(i, j);
            if (config.tasks != TaskSelection::kSubevent) {
              c.gold_temporal = gold.temporal;
            }
            if (config.tasks != TaskSelection::kTemporal) {
              c.gold_subevent = gold.subevent;
            }
            cases.push_back(std::move(c));
            ++batch_pairs;
          }
        }
      }

      const auto joint = joint_loss_nodes<double>(tape, cases, weights,
                                                  lambda_s, lambda_c,
                                                  conjunction);
      if (!std::isfinite(joint.values.total)) {
        throw DivergenceError("train: non-finite loss in epoch " +
                              std::to_string(epoch));
      }
      tape.backward(joint.total);
      Eigen::VectorXd grad(theta.size());
      Eigen::Index at = 0;
      for (Taped::Node n : nodes.ordered) {
        const auto& g = tape.grad(n);
        grad.segment(at, g.size()) =
            Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
        at += g.size();
      }
      optimizer.step(theta, grad);

      epoch_sum.l_a += joint.values.l_a;
      epoch_sum.l_s += joint.values.l_s;
      epoch_sum.l_c += joint.values.l_c;
      epoch_sum.total += joint.values.total;
      ++batches;
    }

    LossBreakdown epoch_mean;
    epoch_mean.l_a = epoch_sum.l_a / batches;
    epoch_mean.l_s = epoch_sum.l_s / batches;
    epoch_mean.l_c = epoch_sum.l_c / batches;
    epoch_mean.total = epoch_sum.total / batches;
    epoch_mean.lambda_s = lambda_s;
    epoch_mean.lambda_c = lambda_c;
    log.epochs.push_back(epoch_mean);

    if (!splits.dev.empty()) {
      params.unflatten(theta);
      std::vector<RelationGraph> dev_pred;
      dev_pred.reserve(splits.dev.size());
      for (const CorpusRecord* r : splits.dev) {
        dev_pred.push_back(
            decode_record(params, r->doc, dev_flags, config.decode));
      }
      double f1 = 0;
      const bool temporal_on =
          config.flags.joint || config.tasks != TaskSelection::kSubevent;
      const bool subevent_on =
          config.flags.joint || config.tasks != TaskSelection::kTemporal;
      if (temporal_on) f1 += evaluate_temprel(dev_pred, dev_gold).f1;
      if (subevent_on) f1 += evaluate_subevent(dev_pred, dev_gold).f1_micro;
      if (temporal_on && subevent_on) f1 /= 2;
      log.dev_f1.push_back(f1);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_theta = theta;
        log.best_epoch = epoch;
      }
    }
  }

  if (splits.dev.empty()) {
    best_theta = theta;
    log.best_epoch = config.epochs - 1;
  }
  params.unflatten(best_theta);
  return {std::move(params), std::move(log)};
}

std::vector<AblationRow> run_ablation(const TrainConfig& base,
                                      std::span<const CorpusRecord> corpus) {
  const SplitView splits = view_splits(corpus);
  if (splits.test.empty()) {
    throw std::invalid_argument("run_ablation: corpus has no test split");
  }
  std::vector<CorpusRecord> test;
  test.reserve(splits.test.size());
  for (const CorpusRecord* r : splits.test) test.push_back(*r);

  std::vector<AblationRow> rows;

  {
    TrainConfig single = base;
    single.flags = AblationFlags{};
    single.flags.joint = false;
    single.flags.task_constraints = false;
    single.flags.cross_task_constraints = false;
    single.flags.global_inference = false;
    single.flags.commonsense = base.flags.commonsense;

    single.tasks = TaskSelection::kTemporal;
    auto [temporal_params, temporal_log] = train(single, corpus);
    single.tasks = TaskSelection::kSubevent;
    auto [subevent_params, subevent_log] = train(single, corpus);

    std::vector<RelationGraph> pred;
    std::vector<RelationGraph> gold;
    for (const CorpusRecord& r : test) {
      const DecodingProblem temporal_scores =
          score_document(temporal_params, r.doc, single.flags.commonsense);
      const DecodingProblem subevent_scores =
          score_document(subevent_params, r.doc, single.flags.commonsense);
      RelationGraph g(static_cast<int>(r.doc.events.size()));
      for (int j = 1; j < g.n_events(); ++j) {
        for (int i = 0; i < j; ++i) {
          g.set_label(i, j, greedy_decode(temporal_scores.at(i, j),
                                          Head::kTemporal));
          g.set_label(i, j, greedy_decode(subevent_scores.at(i, j),
                                          Head::kSubevent));
        }
      }
      pred.push_back(std::move(g));
      gold.push_back(r.gold);
    }
    MetricsReport report;
    report.temporal = evaluate_temprel(pred, gold);
    report.subevent = evaluate_subevent(pred, gold);
    report.violation_rate = violation_rate(pred);
    report.loss_curve = temporal_log.epochs;
    rows.push_back({"single-task", std::move(report)});
  }

  AblationFlags flags;
  flags.joint = true;
  flags.task_constraints = false;
  flags.cross_task_constraints = false;
  flags.global_inference = false;
  flags.commonsense = base.flags.commonsense;

  EncoderParams last_params;
  auto run_row = [&](const std::string& name) {
    TrainConfig c = base;
    c.flags = flags;
    c.tasks = TaskSelection::kBoth;
    auto [p, log] = train(c, corpus);
    MetricsReport report = evaluate_model(p, test, flags, base.decode);
    report.loss_curve = log.epochs;
    rows.push_back({name, std::move(report)});
    last_params = std::move(p);
  };

  run_row("joint");
  flags.task_constraints = true;
  run_row("+task constraints");
  flags.cross_task_constraints = true;
  run_row("+cross-task constraints");

  flags.global_inference = true;
  MetricsReport global_report =
      evaluate_model(last_params, test, flags, base.decode);
  global_report.loss_curve = rows.back().metrics.loss_curve;
  rows.push_back({"+global inference", std::move(global_report)});
  return rows;
}

void set_config_field(TrainConfig& config, const std::string& key,
                      const std::string& value) {
  if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "epochs") {
    config.epochs = parse_int(key, value);
  } else if (key == "batch_pairs") {
    config.batch_pairs = parse_int(key, value);
  } else if (key == "lambda_s") {
    config.lambda_s = parse_double(key, value);
  } else if (key == "lambda_c") {
    config.lambda_c = parse_double(key, value);
  } else if (key == "conjunction_hinge") {
    config.conjunction_hinge = parse_bool(key, value);
  } else if (key == "prob_floor") {
    config.prob_floor = parse_double(key, value);
  } else if (key == "lr") {
    config.optimizer.lr = parse_double(key, value);
  } else if (key == "beta1") {
    config.optimizer.beta1 = parse_double(key, value);
  } else if (key == "beta2") {
    config.optimizer.beta2 = parse_double(key, value);
  } else if (key == "eps") {
    config.optimizer.eps = parse_double(key, value);
  } else if (key == "joint") {
    config.flags.joint = parse_bool(key, value);
  } else if (key == "task_constraints") {
    config.flags.task_constraints = parse_bool(key, value);
  } else if (key == "cross_task_constraints") {
    config.flags.cross_task_constraints = parse_bool(key, value);
  } else if (key == "commonsense") {
    config.flags.commonsense = parse_bool(key, value);
  } else if (key == "global_inference") {
    config.flags.global_inference = parse_bool(key, value);
  } else if (key == "tasks") {
    if (value == "both") {
      config.tasks = TaskSelection::kBoth;
    } else if (value == "temporal") {
      config.tasks = TaskSelection::kTemporal;
    } else if (value == "subevent") {
      config.tasks = TaskSelection::kSubevent;
    } else {
      throw std::invalid_argument("config: bad tasks value: " + value);
    }
  } else if (key == "vocab") {
    config.dims.vocab = parse_int(key, value);
  } else if (key == "d_tok") {
    config.dims.d_tok = parse_int(key, value);
  } else if (key == "d_pos") {
    config.dims.d_pos = parse_int(key, value);
  } else if (key == "d_h") {
    config.dims.d_h = parse_int(key, value);
  } else if (key == "d_cs") {
    config.dims.d_cs = parse_int(key, value);
  } else if (key == "cell") {
    if (value == "tanh") {
      config.dims.cell = CellType::kTanh;
    } else if (value == "lstm") {
      config.dims.cell = CellType::kLstm;
    } else {
      throw std::invalid_argument("config: bad cell value: " + value);
    }
  } else if (key == "max_triples_per_doc") {
    config.max_triples_per_doc = parse_int(key, value);
  } else if (key == "max_events") {
    config.decode.max_events = parse_int(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

TrainConfig load_config_file(const std::filesystem::path& path,
                             TrainConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(0, "config: cannot open " + path.string());
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "config: expected key=value on line " +
                                    std::to_string(line_no));
    }
    try {
      set_config_field(base, trim(stripped.substr(0, eq)),
                       trim(stripped.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no,
                       std::string(e.what()) + " (line " +
                           std::to_string(line_no) + ")");
    }
  }
  return base;
}

}  // namespace evrel
