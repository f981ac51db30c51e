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

#include "evrel/model.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

#include "evrel/errors.hpp"
#include "evrel/grad_check.hpp"
#include "evrel/losses.hpp"
#include "evrel/rng.hpp"
#include "support/loss_evaluators.hpp"

namespace evrel {
namespace {

ModelDims tiny_dims(CellType cell = CellType::kTanh) {
  ModelDims d;
  d.vocab = 5;
  d.d_tok = 3;
  d.d_pos = 2;
  d.d_h = 2;
  d.cell = cell;
  return d;
}

Document tiny_doc() {
  Document doc;
  doc.id = "t";
  doc.tokens = {{"a", 1, 0}, {"b", 2, 1}, {"c", 3, 0}, {"d", 4, 1}};
  doc.events = {1, 3};
  return doc;
}

std::filesystem::path temp_file(const std::string& stem) {
  return std::filesystem::temp_directory_path() / (stem + ".ckpt");
}

bool same(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.size() == y.size() && (x.array() == y.array()).all();
}

TEST_SUITE("model") {

TEST_CASE("derived widths follow the layer arithmetic") {
  ModelDims d;
  d.vocab = 1000;
  CHECK(d.token_width() == 50);
  CHECK(d.event_width() == 128);
  CHECK(d.feature_width() == 512);
  CHECK(d.mlp_input() == 512);
  CHECK(d.mlp_hidden() == 260);

  d.d_cs = 10;
  CHECK(d.mlp_input() == 522);
  CHECK(d.mlp_hidden() == 265);

  CHECK(d.valid());
  d.vocab = 0;
  CHECK_FALSE(d.valid());
}

TEST_CASE("parameter count matches the tensor shapes") {
  // embedding 5x3 + two cells (2x5 + 2x2 + 2) + mlp 12x16 + 12 + 8x12 + 8.
  const EncoderParams p = init_params(1, tiny_dims());
  CHECK(p.n_params() == 15 + 16 + 16 + 192 + 12 + 96 + 8);
  const EncoderParams lstm = init_params(1, tiny_dims(CellType::kLstm));
  CHECK(lstm.n_params() == p.n_params() + 2 * 3 * 16);
}

TEST_CASE("init is seed-deterministic with zero biases in bound") {
  const ModelDims dims = tiny_dims();
  const EncoderParams a = init_params(42, dims);
  const EncoderParams b = init_params(42, dims);
  const EncoderParams c = init_params(43, dims);
  CHECK(same(a.flatten(), b.flatten()));
  CHECK_FALSE(same(a.flatten(), c.flatten()));

  a.for_each_tensor([](const std::string& name, const EncoderParams::Mat& m) {
    if (m.cols() == 1 && name != "embedding") {
      CHECK(m.isZero(0));
    } else {
      CHECK(m.cwiseAbs().maxCoeff() <=
            1.0 / std::sqrt(static_cast<double>(m.cols())));
      CHECK_FALSE(m.isZero(0));
    }
  });

  CHECK_THROWS_AS(init_params(1, ModelDims{}), std::invalid_argument);
}

TEST_CASE("flatten and unflatten are mutually inverse") {
  EncoderParams p = init_params(7, tiny_dims(CellType::kLstm));
  const Eigen::VectorXd flat = p.flatten();
  Eigen::VectorXd tweaked = flat;
  tweaked(17) += 0.5;
  tweaked(flat.size() - 1) = -3.25;
  p.unflatten(tweaked);
  CHECK(same(p.flatten(), tweaked));
  p.unflatten(flat);
  CHECK(same(p.flatten(), flat));
}

TEST_CASE("encoding yields one event vector of width 2*d_h per trigger") {
  const ModelDims dims = tiny_dims();
  const EncoderParams p = init_params(5, dims);
  const Document doc = tiny_doc();
  const auto events = encode_document(doc, p);
  REQUIRE(events.size() == 2);
  for (const auto& h : events) {
    CHECK(h.size() == dims.event_width());
    CHECK(h.allFinite());
  }
  const auto again = encode_document(doc, p);
  CHECK(same(events[0], again[0]));
  CHECK(same(events[1], again[1]));
}

TEST_CASE("out-of-range vocab ids fall back to the reserved row") {
  const EncoderParams p = init_params(5, tiny_dims());
  Document doc = tiny_doc();
  doc.tokens[1].vocab = 99999;
  Document oov = doc;
  oov.tokens[1].vocab = 0;
  CHECK(same(encode_document(doc, p)[0], encode_document(oov, p)[0]));
  doc.tokens[1].vocab = -3;
  CHECK(same(encode_document(doc, p)[0], encode_document(oov, p)[0]));
}

TEST_CASE("pair features concatenate both orders of interaction") {
  Eigen::VectorXd h1(2), h2(2);
  h1 << 1, 2;
  h2 << 3, 4;
  Eigen::VectorXd want(8);
  want << 1, 2, 3, 4, 3, 8, -2, -2;
  CHECK(same(pair_features(h1, h2), want));

  Eigen::VectorXd wide(3);
  CHECK_THROWS_AS(pair_features(h1, wide), std::invalid_argument);
}

TEST_CASE("score_pair emits floored per-head distributions") {
  const ModelDims dims = tiny_dims();
  const EncoderParams p = init_params(9, dims);
  const auto events = encode_document(tiny_doc(), p);
  const PairScores s = score_pair(pair_features(events[0], events[1]), p);
  CHECK(s.valid());
  CHECK(s.temporal.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.subevent.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.temporal.minCoeff() >= kProbFloor * 0.999);

  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(score_pair(bad, p), std::invalid_argument);
}

TEST_CASE("commonsense channel widens the scorer input") {
  ModelDims dims = tiny_dims();
  dims.d_cs = 3;
  const EncoderParams p = init_params(11, dims);
  const auto events = encode_document(tiny_doc(), p);
  const Eigen::VectorXd feats = pair_features(events[0], events[1]);

  const PairScores zeros = score_pair(feats, p);
  const PairScores explicit_zeros =
      score_pair(feats, p, Eigen::VectorXd::Zero(3).eval());
  CHECK(zeros == explicit_zeros);

  Eigen::VectorXd cs(3);
  cs << 1, -1, 0.5;
  const PairScores with = score_pair(feats, p, cs);
  CHECK(with.valid());
  CHECK_FALSE(with == zeros);

  Eigen::VectorXd wrong(2);
  CHECK_THROWS_AS(score_pair(feats, p, wrong), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bitwise") {
  for (CellType cell : {CellType::kTanh, CellType::kLstm}) {
    const EncoderParams p = init_params(13, tiny_dims(cell));
    const auto path = temp_file("roundtrip");
    save_checkpoint(p, path);
    const EncoderParams q = load_checkpoint(path);
    CHECK(q.dims == p.dims);
    CHECK(same(q.flatten(), p.flatten()));
    std::filesystem::remove(path);
  }
}

TEST_CASE("checkpoint loading is strict") {
  const EncoderParams p = init_params(17, tiny_dims());
  const auto path = temp_file("strict");
  save_checkpoint(p, path);

  auto mutate = [&](auto fn) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    fn(lines);
    const auto bad = temp_file("strict-bad");
    std::ofstream out(bad);
    for (const auto& l : lines) out << l << "\n";
    return bad;
  };

  SUBCASE("bad magic") {
    const auto bad = mutate([](auto& ls) { ls[0] = "not a checkpoint"; });
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  SUBCASE("wrong tensor name") {
    const auto bad = mutate([](auto& ls) {
      for (auto& l : ls) {
        if (l.rfind("tensor w1 ", 0) == 0) l = "tensor w9 12 16";
      }
    });
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  SUBCASE("wrong shape") {
    const auto bad = mutate([](auto& ls) {
      for (auto& l : ls) {
        if (l.rfind("tensor embedding ", 0) == 0) l = "tensor embedding 4 3";
      }
    });
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  SUBCASE("truncated") {
    const auto bad = mutate([](auto& ls) { ls.resize(ls.size() / 2); });
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  SUBCASE("missing trailer") {
    const auto bad = mutate([](auto& ls) { ls.pop_back(); });
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  SUBCASE("line numbers point into the file") {
    const auto bad = mutate([](auto& ls) { ls[0] = "nope"; });
    try {
      load_checkpoint(bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("tape route reproduces the value route") {
  for (CellType cell : {CellType::kTanh, CellType::kLstm}) {
    CAPTURE(static_cast<int>(cell));
    const ModelDims dims = tiny_dims(cell);
    const EncoderParams p = init_params(23, dims);
    const Document doc = tiny_doc();
    const auto value_events = encode_document(doc, p);

    Taped tape;
    const auto nodes = ParamNodes<double>::attach(tape, p);
    const auto tape_events = encode_document_nodes(tape, doc, nodes);
    REQUIRE(tape_events.size() == value_events.size());
    for (std::size_t e = 0; e < value_events.size(); ++e) {
      const Eigen::VectorXd tv = tape.value(tape_events[e]).col(0);
      CHECK((tv - value_events[e]).cwiseAbs().maxCoeff() < 1e-12);
    }

    const PairScores want =
        score_pair(pair_features(value_events[0], value_events[1]), p);
    const auto logits = pair_logits_node(
        tape, pair_feature_node(tape, tape_events[0], tape_events[1]), nodes);
    const PairScores got = PairScores::from_logits(
        tape.value(logits).col(0));
    CHECK((got.stacked() - want.stacked()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("end-to-end model gradients pass finite differences") {
  Rng rng(29);
  const ModelDims dims = tiny_dims();
  std::vector<testsupport::ModelCase> cases;
  cases.push_back(testsupport::random_model_case(rng, dims, 5, 3, 0));
  const auto evaluator = testsupport::model_evaluator(
      dims, cases, LabelWeights{}, 0.2, 0.2);
  const EncoderParams p = init_params(31, dims);
  CHECK(grad_check(evaluator, p.flatten(), 1e-5, 1e-6) < 1e-4);
}

}  // TEST_SUITE

}  // namespace
}  // namespace evrel
