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
// Event-pair encoder and scorer: token embeddings + POS one-hots feed a
// single-layer bidirectional recurrent encoder; event representations are
// the concatenated direction states at the trigger token; ordered pairs are
// scored by an MLP with an 8-way two-headed output.  The tape route is used
// for training, the plain value route for inference; both are implemented
// and tested against each other.

#ifndef EVREL_MODEL_HPP_
#define EVREL_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evrel/autodiff.hpp"
#include "evrel/pair_scores.hpp"

namespace evrel {

enum class CellType { kTanh, kLstm };

struct ModelDims {
  int vocab = 0;   // includes the reserved OOV row 0
  int d_tok = 32;
  int d_pos = 18;
  int d_h = 64;
  int d_cs = 0;    // optional external per-pair feature channel
  CellType cell = CellType::kTanh;

  int token_width() const { return d_tok + d_pos; }
  int event_width() const { return 2 * d_h; }
  int feature_width() const { return 4 * event_width(); }
  int mlp_input() const { return feature_width() + d_cs; }
  // Hidden layer sits at the mean of input and output widths.
  int mlp_hidden() const { return (mlp_input() + kNumLabels) / 2; }

  bool valid() const {
    return vocab > 0 && d_tok > 0 && d_pos > 0 && d_h > 0 && d_cs >= 0;
  }
  bool operator==(const ModelDims&) const = default;
};

struct Document {
  struct Token {
    std::string surface;
    int vocab = 0;  // 0 is the reserved OOV id
    int pos = 0;
    bool operator==(const Token&) const = default;
  };

  std::string id;
  std::vector<Token> tokens;
  std::vector<int> events;  // token indices of triggers, ascending

  bool operator==(const Document&) const = default;
};

// One recurrent direction.  The tanh cell uses only (wx, wh, b); the lstm
// cell adds input/forget/output gates.
template <typename Scalar>
struct RecurrentCell {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat wx, wh, b;
  Mat wx_i, wh_i, b_i;
  Mat wx_f, wh_f, b_f;
  Mat wx_o, wh_o, b_o;
};

template <typename Scalar>
struct EncoderParamsT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ModelDims dims;
  Mat embedding;  // vocab x d_tok
  RecurrentCell<Scalar> fwd, bwd;
  Mat w1, b1;     // mlp_input -> hidden
  Mat w2, b2;     // hidden -> 8 logits

  // Visits every trainable tensor in a fixed order; the single source of
  // truth for flattening, checkpoints and optimizer state.
  template <typename Self, typename Fn>
  static void visit(Self& self, Fn&& fn) {
    fn("embedding", self.embedding);
    auto cell = [&](const char* prefix, auto& c) {
      std::string p(prefix);
      fn(p + ".wx", c.wx);
      fn(p + ".wh", c.wh);
      fn(p + ".b", c.b);
      if (self.dims.cell == CellType::kLstm) {
        fn(p + ".wx_i", c.wx_i);
        fn(p + ".wh_i", c.wh_i);
        fn(p + ".b_i", c.b_i);
        fn(p + ".wx_f", c.wx_f);
        fn(p + ".wh_f", c.wh_f);
        fn(p + ".b_f", c.b_f);
        fn(p + ".wx_o", c.wx_o);
        fn(p + ".wh_o", c.wh_o);
        fn(p + ".b_o", c.b_o);
      }
    };
    cell("fwd", self.fwd);
    cell("bwd", self.bwd);
    fn("w1", self.w1);
    fn("b1", self.b1);
    fn("w2", self.w2);
    fn("b2", self.b2);
  }

  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    visit(*this, fn);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    visit(*this, fn);
  }

  Eigen::Index n_params() const {
    Eigen::Index n = 0;
    for_each_tensor([&](const std::string&, const Mat& m) { n += m.size(); });
    return n;
  }

  Vec flatten() const {
    Vec out(n_params());
    Eigen::Index at = 0;
    for_each_tensor([&](const std::string&, const Mat& m) {
      out.segment(at, m.size()) = Eigen::Map<const Vec>(m.data(), m.size());
      at += m.size();
    });
    return out;
  }

  void unflatten(const Vec& flat) {
    Eigen::Index at = 0;
    for_each_tensor([&](const std::string&, Mat& m) {
      Eigen::Map<Vec>(m.data(), m.size()) = flat.segment(at, m.size());
      at += m.size();
    });
  }
};

using EncoderParams = EncoderParamsT<double>;

// Reproducible uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights with zero
// biases; fan_in is the tensor's column count.
EncoderParams init_params(std::uint64_t seed, const ModelDims& dims);

void save_checkpoint(const EncoderParams& params,
                     const std::filesystem::path& path);
EncoderParams load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Value route (inference).

// One embedding per event trigger, width 2*d_h.  Unknown or out-of-range
// vocab ids fall back to the reserved OOV row.
std::vector<Eigen::VectorXd> encode_document(const Document& doc,
                                             const EncoderParams& params);

// concat(h1, h2, h1 (.) h2, h1 - h2); throws std::invalid_argument on width
// mismatch.
Eigen::VectorXd pair_features(const Eigen::VectorXd& h1,
                              const Eigen::VectorXd& h2);

PairScores score_pair(
    const Eigen::VectorXd& features, const EncoderParams& params,
    const std::optional<Eigen::VectorXd>& commonsense = std::nullopt);

// ---------------------------------------------------------------------------
// Tape route (training).

template <typename Scalar>
struct ParamNodes {
  using Node = typename Tape<Scalar>::Node;

  std::vector<Node> ordered;  // for_each_tensor order, aligned with flatten()
  Node embedding;
  struct CellNodes {
    Node wx, wh, b;
    Node wx_i, wh_i, b_i;
    Node wx_f, wh_f, b_f;
    Node wx_o, wh_o, b_o;
  } fwd, bwd;
  Node w1, b1, w2, b2;
  ModelDims dims;

  static ParamNodes attach(Tape<Scalar>& tape,
                           const EncoderParamsT<Scalar>& params) {
    ParamNodes out;
    out.dims = params.dims;
    std::vector<std::pair<std::string, Node>> named;
    params.for_each_tensor([&](const std::string& name, const auto& m) {
      Node n = tape.input(m);
      out.ordered.push_back(n);
      named.emplace_back(name, n);
    });
    auto get = [&](const std::string& name) -> Node {
      for (const auto& [k, v] : named) {
        if (k == name) return v;
      }
      return Node{};
    };
    out.embedding = get("embedding");
    auto cell = [&](const char* p, typename ParamNodes::CellNodes& c) {
      std::string s(p);
      c.wx = get(s + ".wx");
      c.wh = get(s + ".wh");
      c.b = get(s + ".b");
      c.wx_i = get(s + ".wx_i");
      c.wh_i = get(s + ".wh_i");
      c.b_i = get(s + ".b_i");
      c.wx_f = get(s + ".wx_f");
      c.wh_f = get(s + ".wh_f");
      c.b_f = get(s + ".b_f");
      c.wx_o = get(s + ".wx_o");
      c.wh_o = get(s + ".wh_o");
      c.b_o = get(s + ".b_o");
    };
    cell("fwd", out.fwd);
    cell("bwd", out.bwd);
    out.w1 = get("w1");
    out.b1 = get("b1");
    out.w2 = get("w2");
    out.b2 = get("b2");
    return out;
  }
};

namespace detail {

template <typename Scalar>
typename Tape<Scalar>::Node cell_step(
    Tape<Scalar>& tape, const typename ParamNodes<Scalar>::CellNodes& c,
    CellType cell, typename Tape<Scalar>::Node x,
    typename Tape<Scalar>::Node h_prev,
    typename Tape<Scalar>::Node& cstate) {
  using Node = typename Tape<Scalar>::Node;
  auto affine = [&](Node wx, Node wh, Node b) {
    return tape.add(tape.add(tape.matvec(wx, x), tape.matvec(wh, h_prev)), b);
  };
  if (cell == CellType::kTanh) {
    return tape.tanh(affine(c.wx, c.wh, c.b));
  }
  Node i = tape.sigmoid(affine(c.wx_i, c.wh_i, c.b_i));
  Node f = tape.sigmoid(affine(c.wx_f, c.wh_f, c.b_f));
  Node o = tape.sigmoid(affine(c.wx_o, c.wh_o, c.b_o));
  Node g = tape.tanh(affine(c.wx, c.wh, c.b));
  cstate = tape.add(tape.mul(f, cstate), tape.mul(i, g));
  return tape.mul(o, tape.tanh(cstate));
}

}  // namespace detail

// Tape twin of encode_document.
template <typename Scalar>
std::vector<typename Tape<Scalar>::Node> encode_document_nodes(
    Tape<Scalar>& tape, const Document& doc,
    const ParamNodes<Scalar>& params) {
  using Node = typename Tape<Scalar>::Node;
  using Mat = typename Tape<Scalar>::Mat;
  const ModelDims& dims = params.dims;
  const auto n = static_cast<Eigen::Index>(doc.tokens.size());

  std::vector<Node> x(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Document::Token& tok = doc.tokens[t];
    const int v = (tok.vocab >= 0 && tok.vocab < dims.vocab) ? tok.vocab : 0;
    Mat pos = Mat::Zero(dims.d_pos, 1);
    if (tok.pos >= 0 && tok.pos < dims.d_pos) pos(tok.pos, 0) = 1;
    x[t] = tape.concat({tape.row_vec(params.embedding, v),
                        tape.constant(std::move(pos))});
  }

  Mat zero = Mat::Zero(dims.d_h, 1);
  std::vector<Node> hf(n), hb(n);
  Node h = tape.constant(zero);
  Node c = tape.constant(zero);
  for (Eigen::Index t = 0; t < n; ++t) {
    h = detail::cell_step(tape, params.fwd, dims.cell, x[t], h, c);
    hf[t] = h;
  }
  h = tape.constant(zero);
  c = tape.constant(zero);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    h = detail::cell_step(tape, params.bwd, dims.cell, x[t], h, c);
    hb[t] = h;
  }

  std::vector<Node> events;
  events.reserve(doc.events.size());
  for (int e : doc.events) {
    events.push_back(tape.concat({hf[e], hb[e]}));
  }
  return events;
}

template <typename Scalar>
typename Tape<Scalar>::Node pair_feature_node(Tape<Scalar>& tape,
                                              typename Tape<Scalar>::Node h1,
                                              typename Tape<Scalar>::Node h2) {
  return tape.concat({h1, h2, tape.mul(h1, h2), tape.sub(h1, h2)});
}

// 8 raw logits for one ordered pair.
template <typename Scalar>
typename Tape<Scalar>::Node pair_logits_node(
    Tape<Scalar>& tape, typename Tape<Scalar>::Node features,
    const ParamNodes<Scalar>& params,
    std::optional<typename Tape<Scalar>::Node> commonsense = std::nullopt) {
  using Node = typename Tape<Scalar>::Node;
  using Mat = typename Tape<Scalar>::Mat;
  Node in = features;
  if (params.dims.d_cs > 0) {
    Node cs = commonsense ? *commonsense
                          : tape.constant(Mat::Zero(params.dims.d_cs, 1));
    in = tape.concat({features, cs});
  }
  Node hidden = tape.tanh(
      tape.add(tape.matvec(params.w1, in), params.b1));
  return tape.add(tape.matvec(params.w2, hidden), params.b2);
}

}  // namespace evrel

#endif  // EVREL_MODEL_HPP_
