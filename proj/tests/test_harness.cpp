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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "evrel/errors.hpp"

namespace evrel {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// Small corpus the tiny models can chew through quickly.
std::vector<CorpusRecord> tiny_corpus(int docs, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.docs = docs;
  spec.min_events = 3;
  spec.max_events = 4;
  spec.vocab = kTriggerBase + 8;
  return generate_corpus(spec);
}

TrainConfig tiny_config() {
  TrainConfig config;
  config.epochs = 2;
  config.batch_pairs = 32;
  config.dims.d_tok = 8;
  config.dims.d_pos = 6;
  config.dims.d_h = 6;
  return config;
}

RelationGraph graph_of(int n, const std::vector<RelationLabel>& labels) {
  RelationGraph g(n);
  std::size_t at = 0;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      g.set_label(i, j, labels.at(at++));
    }
  }
  return g;
}

TEST_SUITE("harness") {

TEST_CASE("amsgrad minimizes a quadratic deterministically") {
  OptimizerSettings settings;
  settings.lr = 0.05;
  Eigen::VectorXd x(1);
  x << 10.0;
  AmsGrad opt(settings, 1);
  const double x0 = x[0];
  for (int t = 0; t < 800; ++t) {
    Eigen::VectorXd grad(1);
    grad << 2.0 * (x[0] - 3.0);
    opt.step(x, grad);
    if (t == 0) {
      // Bias-corrected first step moves by almost exactly the learning rate.
      CHECK(std::abs(std::abs(x[0] - x0) - settings.lr) < 1e-6);
    }
  }
  CHECK(opt.steps() == 800);
  CHECK(std::abs(x[0] - 3.0) < 1e-2);

  Eigen::VectorXd y(1);
  y << 10.0;
  AmsGrad again(settings, 1);
  for (int t = 0; t < 800; ++t) {
    Eigen::VectorXd grad(1);
    grad << 2.0 * (y[0] - 3.0);
    again.step(y, grad);
  }
  CHECK(y[0] == x[0]);

  CHECK_THROWS_AS(opt.step(x, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("inverse frequency weights balance heads to mean one") {
  CorpusRecord r;
  r.doc.events = {0, 1};
  r.doc.tokens = {{"a", 0, 1}, {"b", 0, 1}};
  r.gold = RelationGraph(2);
  r.gold.set_label(0, 1, RelationLabel::kBefore);
  r.gold.set_label(0, 1, RelationLabel::kParentChild);
  const std::vector<CorpusRecord> train = {r};

  const LabelWeights w = inverse_frequency_weights(train);
  CHECK(w.valid());
  // Counts with add-one smoothing and both directions: BF and AF at 2,
  // EQ and VG at 1, so weights are (1/2)/(3/4) and 1/(3/4).
  CHECK(w[RelationLabel::kBefore] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w[RelationLabel::kAfter] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w[RelationLabel::kEqual] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(w[RelationLabel::kVague] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const double mean = (w[RelationLabel::kBefore] + w[RelationLabel::kAfter] +
                       w[RelationLabel::kEqual] + w[RelationLabel::kVague]) /
                      4.0;
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w[RelationLabel::kParentChild] ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w[RelationLabel::kNoRel] ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("temporal micro metrics treat vague as the null class") {
  const RelationGraph gold =
      graph_of(3, {RelationLabel::kBefore, RelationLabel::kBefore,
                   RelationLabel::kBefore});

  SUBCASE("hand-enumerated mixed predictions") {
    const RelationGraph pred =
        graph_of(3, {RelationLabel::kBefore, RelationLabel::kAfter,
                     RelationLabel::kVague});
    const TemporalMetrics m = evaluate_temprel({{pred}}, {{gold}});
    CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(0.4).epsilon(1e-12));
    const double harmonic =
        2.0 * m.precision * m.recall / (m.precision + m.recall);
    CHECK(m.f1 == harmonic);
  }

  SUBCASE("exact predictions score one") {
    const TemporalMetrics m = evaluate_temprel({{gold}}, {{gold}});
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }

  SUBCASE("all-vague predictions have zero recall") {
    const RelationGraph pred =
        graph_of(3, {RelationLabel::kVague, RelationLabel::kVague,
                     RelationLabel::kVague});
    const TemporalMetrics m = evaluate_temprel({{pred}}, {{gold}});
    CHECK(m.recall == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(m.f1 == 0.0);
  }

  SUBCASE("document reordering does not change the totals") {
    const RelationGraph other =
        graph_of(3, {RelationLabel::kAfter, RelationLabel::kVague,
                     RelationLabel::kBefore});
    const TemporalMetrics ab = evaluate_temprel({{gold, other}},
                                                {{gold, gold}});
    const TemporalMetrics ba = evaluate_temprel({{other, gold}},
                                                {{gold, gold}});
    CHECK(ab.precision == ba.precision);
    CHECK(ab.recall == ba.recall);
    CHECK(ab.f1 == ba.f1);
  }

  SUBCASE("mismatched documents are rejected") {
    CHECK_THROWS_AS(evaluate_temprel({{gold}}, {{gold, gold}}),
                    MismatchError);
    CHECK_THROWS_AS(evaluate_temprel({{RelationGraph(2)}}, {{gold}}),
                    MismatchError);
    CHECK_THROWS_AS(evaluate_temprel({{RelationGraph(3)}}, {{gold}}),
                    MismatchError);
  }
}

TEST_CASE("subevent metrics pool parent-child and child-parent decisions") {
  RelationGraph gold(3);
  gold.set_label(0, 1, RelationLabel::kParentChild);
  gold.set_label(0, 2, RelationLabel::kParentChild);
  gold.set_label(1, 2, RelationLabel::kChildParent);

  SUBCASE("hand-enumerated mixed predictions") {
    RelationGraph pred(3);
    pred.set_label(0, 1, RelationLabel::kParentChild);
    pred.set_label(0, 2, RelationLabel::kNoRel);
    pred.set_label(1, 2, RelationLabel::kChildParent);
    const SubeventMetrics m = evaluate_subevent({{pred}}, {{gold}});
    CHECK(m.f1_pc == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.f1_cp == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.f1_micro == doctest::Approx(0.8).epsilon(1e-12));
  }

  SUBCASE("exact predictions score one") {
    const SubeventMetrics m = evaluate_subevent({{gold}}, {{gold}});
    CHECK(m.f1_pc == 1.0);
    CHECK(m.f1_cp == 1.0);
    CHECK(m.f1_micro == 1.0);
  }

  SUBCASE("all-norel predictions score zero") {
    RelationGraph pred(3);
    pred.set_label(0, 1, RelationLabel::kNoRel);
    pred.set_label(0, 2, RelationLabel::kNoRel);
    pred.set_label(1, 2, RelationLabel::kNoRel);
    const SubeventMetrics m = evaluate_subevent({{pred}}, {{gold}});
    CHECK(m.f1_pc == 0.0);
    CHECK(m.f1_cp == 0.0);
    CHECK(m.f1_micro == 0.0);
  }

  SUBCASE("gold closure credits entailed memberships") {
    RelationGraph sparse(3);
    sparse.set_label(0, 1, RelationLabel::kParentChild);
    sparse.set_label(1, 2, RelationLabel::kCoref);
    RelationGraph pred(3);
    pred.set_label(0, 1, RelationLabel::kParentChild);
    pred.set_label(1, 2, RelationLabel::kCoref);
    pred.set_label(0, 2, RelationLabel::kParentChild);
    const SubeventMetrics m = evaluate_subevent({{pred}}, {{sparse}});
    CHECK(m.f1_pc == 1.0);
    CHECK(m.f1_micro == 1.0);
  }
}

TEST_CASE("violation rate pools triples across graphs") {
  RelationGraph clean(3);
  clean.set_label(0, 1, RelationLabel::kBefore);
  clean.set_label(1, 2, RelationLabel::kBefore);
  clean.set_label(0, 2, RelationLabel::kBefore);
  for (int j = 1; j < 3; ++j) {
    for (int i = 0; i < j; ++i) clean.set_label(i, j, RelationLabel::kNoRel);
  }

  RelationGraph cyclic = clean;
  cyclic.set_label(0, 2, RelationLabel::kAfter);

  CHECK(violation_rate({{clean}}) == 0.0);
  CHECK(violation_rate({{cyclic}}) > 0.0);

  const ViolationReport a = count_violations(clean);
  const ViolationReport b = count_violations(cyclic);
  const double expected =
      static_cast<double>(a.violating_triples + b.violating_triples) /
      static_cast<double>(a.total_triples + b.total_triples);
  CHECK(violation_rate({{clean, cyclic}}) ==
        doctest::Approx(expected).epsilon(1e-15));
  CHECK(violation_rate({}) == 0.0);
}

TEST_CASE("document scoring and decoding are deterministic and complete") {
  const auto corpus = tiny_corpus(3, 21);
  ModelDims dims;
  dims.vocab = kTriggerBase + 8;
  dims.d_tok = 8;
  dims.d_pos = 6;
  dims.d_h = 6;
  const EncoderParams params = init_params(7, dims);

  const Document& doc = corpus[0].doc;
  const DecodingProblem problem = score_document(params, doc);
  CHECK(problem.n_events == static_cast<int>(doc.events.size()));
  for (int i = 0; i < problem.n_events; ++i) {
    for (int j = 0; j < problem.n_events; ++j) {
      if (i == j) continue;
      CHECK(problem.at(i, j).temporal.sum() ==
            doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  AblationFlags greedy;
  greedy.global_inference = false;
  const RelationGraph g1 = decode_record(params, doc, greedy);
  const RelationGraph g2 = decode_record(params, doc, greedy);
  CHECK(g1 == g2);
  CHECK(g1.fully_labeled());

  AblationFlags global = greedy;
  global.global_inference = true;
  const RelationGraph g3 = decode_record(params, doc, global);
  CHECK(g3.fully_labeled());
  CHECK(count_violations(g3).violating_triples == 0);
}

TEST_CASE("zero-epoch training returns the initial parameters") {
  const auto corpus = tiny_corpus(4, 31);
  TrainConfig config = tiny_config();
  config.epochs = 0;
  config.dims.vocab = kTriggerBase + 8;
  const auto [params, log] = train(config, corpus);
  const EncoderParams fresh = init_params(config.seed, config.dims);
  CHECK(params.flatten() == fresh.flatten());
  CHECK(log.epochs.empty());
  CHECK(log.best_epoch == -1);
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto corpus = tiny_corpus(8, 5);
  TrainConfig config = tiny_config();
  config.epochs = 12;
  config.optimizer.lr = 0.01;

  const auto [params_a, log_a] = train(config, corpus);
  const auto [params_b, log_b] = train(config, corpus);
  CHECK(params_a.flatten() == params_b.flatten());
  REQUIRE(log_a.epochs.size() == 12);
  for (std::size_t e = 0; e < log_a.epochs.size(); ++e) {
    CHECK(log_a.epochs[e].total == log_b.epochs[e].total);
  }
  CHECK(log_a.epochs.back().total < log_a.epochs.front().total);
}

TEST_CASE("zero-coefficient constraints reduce to pure cross entropy") {
  const auto corpus = tiny_corpus(6, 13);

  TrainConfig off = tiny_config();
  off.epochs = 3;
  off.flags.task_constraints = false;
  off.flags.cross_task_constraints = false;

  TrainConfig zero = tiny_config();
  zero.epochs = 3;
  zero.lambda_s = 0.0;
  zero.lambda_c = 0.0;

  const auto [params_off, log_off] = train(off, corpus);
  const auto [params_zero, log_zero] = train(zero, corpus);
  CHECK(params_off.flatten() == params_zero.flatten());
  REQUIRE(log_off.epochs.size() == log_zero.epochs.size());
  for (std::size_t e = 0; e < log_off.epochs.size(); ++e) {
    CHECK(log_off.epochs[e].l_a == log_zero.epochs[e].l_a);
    CHECK(log_off.epochs[e].total == log_zero.epochs[e].total);
  }
}

TEST_CASE("dev split drives model selection") {
  auto corpus = split_corpus(tiny_corpus(10, 17), {0.6, 0.2, 0.2}, 3);
  TrainConfig config = tiny_config();
  config.epochs = 4;
  config.optimizer.lr = 0.01;
  const auto [params, log] = train(config, corpus);
  REQUIRE(log.dev_f1.size() == 4);
  REQUIRE(log.best_epoch >= 0);
  REQUIRE(log.best_epoch < 4);
  for (std::size_t e = 0; e < log.dev_f1.size(); ++e) {
    CHECK(log.dev_f1[log.best_epoch] >= log.dev_f1[e]);
  }
}

TEST_CASE("training rejects bad configs and divergent runs") {
  const auto corpus = tiny_corpus(3, 23);

  TrainConfig config = tiny_config();
  config.epochs = -1;
  CHECK_THROWS_AS(train(config, corpus), std::invalid_argument);

  config = tiny_config();
  config.flags.joint = false;
  CHECK_THROWS_AS(train(config, corpus), std::invalid_argument);

  config = tiny_config();
  auto untagged = corpus;
  for (CorpusRecord& r : untagged) r.split = "test";
  CHECK_THROWS_AS(train(config, untagged), std::invalid_argument);

  config = tiny_config();
  config.epochs = 3;
  config.optimizer.lr = 1e200;
  CHECK_THROWS_AS(train(config, corpus), DivergenceError);
}

TEST_CASE("ablation ladder emits one row per configuration") {
  auto corpus = split_corpus(tiny_corpus(10, 29), {0.6, 0.2, 0.2}, 11);
  TrainConfig config = tiny_config();
  config.epochs = 2;
  const auto rows = run_ablation(config, corpus);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].name == "single-task");
  CHECK(rows[1].name == "joint");
  CHECK(rows[2].name == "+task constraints");
  CHECK(rows[3].name == "+cross-task constraints");
  CHECK(rows[4].name == "+global inference");
  for (const AblationRow& row : rows) {
    CHECK(row.metrics.temporal.f1 >= 0.0);
    CHECK(row.metrics.temporal.f1 <= 1.0);
    CHECK(row.metrics.subevent.f1_micro >= 0.0);
    CHECK(row.metrics.subevent.f1_micro <= 1.0);
  }
  // The exactly decoded row shares parameters with the previous row and
  // never emits violations.
  CHECK(rows[4].metrics.violation_rate == 0.0);
  REQUIRE(rows[4].metrics.loss_curve.size() ==
          rows[3].metrics.loss_curve.size());
  for (std::size_t e = 0; e < rows[4].metrics.loss_curve.size(); ++e) {
    CHECK(rows[4].metrics.loss_curve[e].total ==
          rows[3].metrics.loss_curve[e].total);
  }

  auto no_test = corpus;
  for (CorpusRecord& r : no_test) r.split = "train";
  CHECK_THROWS_AS(run_ablation(config, no_test), std::invalid_argument);
}

TEST_CASE("config fields parse from key=value text") {
  TrainConfig config;
  set_config_field(config, "epochs", "7");
  set_config_field(config, "lambda_s", "0.5");
  set_config_field(config, "lr", "0.01");
  set_config_field(config, "task_constraints", "false");
  set_config_field(config, "tasks", "temporal");
  set_config_field(config, "cell", "lstm");
  set_config_field(config, "max_events", "9");
  set_config_field(config, "conjunction_hinge", "true");
  set_config_field(config, "prob_floor", "1e-8");
  CHECK(config.epochs == 7);
  CHECK(config.lambda_s == 0.5);
  CHECK(config.optimizer.lr == 0.01);
  CHECK_FALSE(config.flags.task_constraints);
  CHECK(config.tasks == TaskSelection::kTemporal);
  CHECK(config.dims.cell == CellType::kLstm);
  CHECK(config.decode.max_events == 9);
  CHECK(config.conjunction_hinge);
  CHECK(config.prob_floor == 1e-8);

  CHECK_THROWS_AS(set_config_field(config, "no_such_key", "1"),
                  std::invalid_argument);
  CHECK_THROWS_AS(set_config_field(config, "epochs", "seven"),
                  std::invalid_argument);
  CHECK_THROWS_AS(set_config_field(config, "joint", "maybe"),
                  std::invalid_argument);
}

TEST_CASE("config files support comments and report bad lines") {
  const auto path = temp_file("evrel_config.cfg");
  {
    std::ofstream out(path);
    out << "# desk profile\n"
        << "epochs = 5\n"
        << "\n"
        << "lambda_c = 0.3   # heavier conjunction\n"
        << "global_inference = yes\n";
  }
  const TrainConfig config = load_config_file(path);
  CHECK(config.epochs == 5);
  CHECK(config.lambda_c == 0.3);
  CHECK(config.flags.global_inference);
  std::filesystem::remove(path);

  const auto bad = temp_file("evrel_config_bad.cfg");
  {
    std::ofstream out(bad);
    out << "epochs = 5\nnot a pair\n";
  }
  try {
    load_config_file(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::filesystem::remove(bad);

  CHECK_THROWS_AS(load_config_file(temp_file("evrel_missing.cfg")),
                  ParseError);
}

TEST_CASE("reference profile pins the published scale") {
  const TrainConfig config = paper_scale();
  CHECK(config.epochs == 80);
  CHECK(config.batch_pairs == 512);
  CHECK(config.dims.d_h == 768);
  CHECK(config.dims.cell == CellType::kLstm);
  CHECK(config.optimizer.lr == 0.001);
  CHECK(config.lambda_s == 0.2);
  CHECK(config.lambda_c == 0.2);
}

}  // TEST_SUITE

}  // namespace
}  // namespace evrel
