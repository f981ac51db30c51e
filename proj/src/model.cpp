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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "evrel/errors.hpp"
#include "evrel/rng.hpp"

namespace evrel {

namespace {

void size_tensors(EncoderParams& p) {
  using Mat = EncoderParams::Mat;
  const ModelDims& d = p.dims;
  p.embedding = Mat::Zero(d.vocab, d.d_tok);
  auto cell = [&](RecurrentCell<double>& c) {
    c.wx = Mat::Zero(d.d_h, d.token_width());
    c.wh = Mat::Zero(d.d_h, d.d_h);
    c.b = Mat::Zero(d.d_h, 1);
    if (d.cell == CellType::kLstm) {
      for (Mat* m : {&c.wx_i, &c.wx_f, &c.wx_o}) {
        *m = Mat::Zero(d.d_h, d.token_width());
      }
      for (Mat* m : {&c.wh_i, &c.wh_f, &c.wh_o}) {
        *m = Mat::Zero(d.d_h, d.d_h);
      }
      for (Mat* m : {&c.b_i, &c.b_f, &c.b_o}) {
        *m = Mat::Zero(d.d_h, 1);
      }
    }
  };
  cell(p.fwd);
  cell(p.bwd);
  p.w1 = Mat::Zero(d.mlp_hidden(), d.mlp_input());
  p.b1 = Mat::Zero(d.mlp_hidden(), 1);
  p.w2 = Mat::Zero(kNumLabels, d.mlp_hidden());
  p.b2 = Mat::Zero(kNumLabels, 1);
}

}  // namespace

EncoderParams init_params(std::uint64_t seed, const ModelDims& dims) {
  if (!dims.valid()) {
    throw std::invalid_argument("model dims must be positive");
  }
  EncoderParams p;
  p.dims = dims;
  size_tensors(p);
  Rng rng(seed);
  p.for_each_tensor([&](const std::string& name, EncoderParams::Mat& m) {
    if (m.cols() == 1 && name != "embedding") return;  // biases stay zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = rng.real(-bound, bound);
      }
    }
  });
  return p;
}

// ---------------------------------------------------------------------------
// Checkpoint IO: a line-oriented text format, exact for doubles via %.17g.

namespace {

constexpr char kMagic[] = "evrel-checkpoint 1";

std::string cell_name(CellType c) {
  return c == CellType::kLstm ? "lstm" : "tanh";
}

}  // namespace

void save_checkpoint(const EncoderParams& params,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << kMagic << "\n";
  out << "cell " << cell_name(params.dims.cell) << "\n";
  out << "vocab " << params.dims.vocab << "\n";
  out << "d_tok " << params.dims.d_tok << "\n";
  out << "d_pos " << params.dims.d_pos << "\n";
  out << "d_h " << params.dims.d_h << "\n";
  out << "d_cs " << params.dims.d_cs << "\n";
  char buf[40];
  params.for_each_tensor(
      [&](const std::string& name, const EncoderParams::Mat& m) {
        out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << buf << (c + 1 == m.cols() ? "" : " ");
          }
          out << "\n";
        }
      });
  out << "end\n";
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

EncoderParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  int lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw ParseError(lineno, "unexpected end of checkpoint");
    }
    ++lineno;
    return line;
  };

  if (next_line() != kMagic) {
    throw ParseError(lineno, "bad checkpoint header");
  }

  ModelDims dims;
  auto header = [&](const std::string& key) -> std::string {
    std::istringstream ss(next_line());
    std::string k, v;
    ss >> k >> v;
    if (k != key || v.empty()) {
      throw ParseError(lineno, "expected '" + key + " <value>'");
    }
    return v;
  };
  const std::string cell = header("cell");
  if (cell == "tanh") {
    dims.cell = CellType::kTanh;
  } else if (cell == "lstm") {
    dims.cell = CellType::kLstm;
  } else {
    throw ParseError(lineno, "unknown cell type '" + cell + "'");
  }
  dims.vocab = std::stoi(header("vocab"));
  dims.d_tok = std::stoi(header("d_tok"));
  dims.d_pos = std::stoi(header("d_pos"));
  dims.d_h = std::stoi(header("d_h"));
  dims.d_cs = std::stoi(header("d_cs"));
  if (!dims.valid()) {
    throw ParseError(lineno, "invalid dims in checkpoint header");
  }

  EncoderParams p;
  p.dims = dims;
  size_tensors(p);
  p.for_each_tensor([&](const std::string& name, EncoderParams::Mat& m) {
    std::istringstream head(next_line());
    std::string tag, got;
    Eigen::Index rows = -1, cols = -1;
    head >> tag >> got >> rows >> cols;
    if (tag != "tensor" || got != name) {
      throw ParseError(lineno, "expected tensor '" + name + "', got '" + got +
                                   "'");
    }
    if (rows != m.rows() || cols != m.cols()) {
      throw ParseError(lineno, "tensor '" + name + "' has wrong shape");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row(next_line());
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row >> m(r, c))) {
          throw ParseError(lineno, "short row in tensor '" + name + "'");
        }
      }
    }
  });
  if (next_line() != "end") {
    throw ParseError(lineno, "missing checkpoint trailer");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Value route.

namespace {

Eigen::VectorXd cell_step_value(const RecurrentCell<double>& c, CellType cell,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& h_prev,
                                Eigen::VectorXd& cstate) {
  auto affine = [&](const EncoderParams::Mat& wx, const EncoderParams::Mat& wh,
                    const EncoderParams::Mat& b) -> Eigen::VectorXd {
    return wx * x + wh * h_prev + b.col(0);
  };
  if (cell == CellType::kTanh) {
    return affine(c.wx, c.wh, c.b).array().tanh();
  }
  auto sigmoid = [](Eigen::VectorXd z) -> Eigen::VectorXd {
    return 1 / (1 + (-z.array()).exp());
  };
  const Eigen::VectorXd i = sigmoid(affine(c.wx_i, c.wh_i, c.b_i));
  const Eigen::VectorXd f = sigmoid(affine(c.wx_f, c.wh_f, c.b_f));
  const Eigen::VectorXd o = sigmoid(affine(c.wx_o, c.wh_o, c.b_o));
  const Eigen::VectorXd g = affine(c.wx, c.wh, c.b).array().tanh();
  cstate = f.cwiseProduct(cstate) + i.cwiseProduct(g);
  return o.array() * cstate.array().tanh();
}

}  // namespace

std::vector<Eigen::VectorXd> encode_document(const Document& doc,
                                             const EncoderParams& params) {
  const ModelDims& dims = params.dims;
  const auto n = static_cast<Eigen::Index>(doc.tokens.size());
  std::vector<Eigen::VectorXd> x(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Document::Token& tok = doc.tokens[t];
    const int v = (tok.vocab >= 0 && tok.vocab < dims.vocab) ? tok.vocab : 0;
    Eigen::VectorXd xt = Eigen::VectorXd::Zero(dims.token_width());
    xt.head(dims.d_tok) = params.embedding.row(v).transpose();
    if (tok.pos >= 0 && tok.pos < dims.d_pos) xt(dims.d_tok + tok.pos) = 1;
    x[t] = std::move(xt);
  }

  std::vector<Eigen::VectorXd> hf(n), hb(n);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(dims.d_h);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dims.d_h);
  for (Eigen::Index t = 0; t < n; ++t) {
    h = cell_step_value(params.fwd, dims.cell, x[t], h, c);
    hf[t] = h;
  }
  h.setZero();
  c.setZero();
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    h = cell_step_value(params.bwd, dims.cell, x[t], h, c);
    hb[t] = h;
  }

  std::vector<Eigen::VectorXd> events;
  events.reserve(doc.events.size());
  for (int e : doc.events) {
    Eigen::VectorXd he(dims.event_width());
    he << hf[e], hb[e];
    events.push_back(std::move(he));
  }
  return events;
}

Eigen::VectorXd pair_features(const Eigen::VectorXd& h1,
                              const Eigen::VectorXd& h2) {
  if (h1.size() != h2.size()) {
    throw std::invalid_argument("pair_features: embedding width mismatch");
  }
  Eigen::VectorXd out(4 * h1.size());
  out << h1, h2, h1.cwiseProduct(h2), h1 - h2;
  return out;
}

PairScores score_pair(const Eigen::VectorXd& features,
                      const EncoderParams& params,
                      const std::optional<Eigen::VectorXd>& commonsense) {
  const ModelDims& dims = params.dims;
  if (features.size() != dims.feature_width()) {
    throw std::invalid_argument("score_pair: feature width mismatch");
  }
  if (commonsense && commonsense->size() != dims.d_cs) {
    throw std::invalid_argument("score_pair: commonsense width mismatch");
  }
  Eigen::VectorXd in(dims.mlp_input());
  if (dims.d_cs > 0) {
    in.head(dims.feature_width()) = features;
    in.tail(dims.d_cs) = commonsense ? *commonsense
                                     : Eigen::VectorXd::Zero(dims.d_cs);
  } else {
    in = features;
  }
  const Eigen::VectorXd hidden =
      (params.w1 * in + params.b1.col(0)).array().tanh();
  const Eigen::Matrix<double, 8, 1> logits =
      params.w2 * hidden + params.b2.col(0);
  return PairScores::from_logits(logits);
}

}  // namespace evrel
