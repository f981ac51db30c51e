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
// Minimal reverse-mode tape over dense Eigen values.  Values are computed
// eagerly as nodes are appended; backward() walks the tape once in reverse.
// A tape is built for one forward/backward pass and then discarded.

#ifndef EVREL_AUTODIFF_HPP_
#define EVREL_AUTODIFF_HPP_

#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace evrel {

template <typename Scalar>
class Tape {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Node {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  // Leaf holding trainable or upstream data; gradients are accumulated.
  Node input(Mat value) { return append(Op::kLeaf, {}, std::move(value)); }

  // Leaf treated as fixed data.  Gradients still flow formally but callers
  // never read them.
  Node constant(Mat value) { return append(Op::kLeaf, {}, std::move(value)); }

  Node matvec(Node m, Node x) {
    assert(value(x).cols() == 1);
    assert(value(m).cols() == value(x).rows());
    return append(Op::kMatVec, {m, x}, value(m) * value(x));
  }

  Node add(Node a, Node b) {
    assert(same_shape(a, b));
    return append(Op::kAdd, {a, b}, value(a) + value(b));
  }

  Node sub(Node a, Node b) {
    assert(same_shape(a, b));
    return append(Op::kSub, {a, b}, value(a) - value(b));
  }

  Node mul(Node a, Node b) {
    assert(same_shape(a, b));
    return append(Op::kMul, {a, b}, value(a).cwiseProduct(value(b)));
  }

  Node scale(Node a, Scalar c) {
    Node n = append(Op::kScale, {a}, value(a) * c);
    nodes_[n.id].payload = c;
    return n;
  }

  Node add_scalar(Node a, Scalar c) {
    return append(Op::kAddScalar, {a}, value(a).array() + c);
  }

  Node softmax(Node x) {
    assert(value(x).cols() == 1);
    const Mat& v = value(x);
    Mat shifted = v.array() - v.maxCoeff();
    Mat e = shifted.array().exp();
    return append(Op::kSoftmax, {x}, e / e.sum());
  }

  Node log(Node x) { return append(Op::kLog, {x}, value(x).array().log()); }

  Node tanh(Node x) { return append(Op::kTanh, {x}, value(x).array().tanh()); }

  Node sigmoid(Node x) {
    return append(Op::kSigmoid, {x},
                  (1 / (1 + (-value(x).array()).exp())).matrix());
  }

  Node abs(Node x) { return append(Op::kAbs, {x}, value(x).array().abs()); }

  Node relu(Node x) {
    return append(Op::kRelu, {x}, value(x).array().max(Scalar(0)));
  }

  Node sum(Node x) {
    Mat out(1, 1);
    out(0, 0) = value(x).sum();
    return append(Op::kSum, {x}, std::move(out));
  }

  Node pick(Node x, Eigen::Index i) {
    assert(value(x).cols() == 1);
    Mat out(1, 1);
    out(0, 0) = value(x)(i, 0);
    Node n = append(Op::kPick, {x}, std::move(out));
    nodes_[n.id].i0 = i;
    return n;
  }

  // One row of a matrix, as a column vector.  Used for embedding lookup.
  Node row_vec(Node m, Eigen::Index r) {
    Node n = append(Op::kRowVec, {m}, value(m).row(r).transpose());
    nodes_[n.id].i0 = r;
    return n;
  }

  Node segment(Node x, Eigen::Index start, Eigen::Index len) {
    assert(value(x).cols() == 1);
    Node n = append(Op::kSegment, {x}, value(x).block(start, 0, len, 1));
    nodes_[n.id].i0 = start;
    return n;
  }

  Node concat(std::span<const Node> parts) {
    Eigen::Index rows = 0;
    for (Node p : parts) {
      assert(value(p).cols() == 1);
      rows += value(p).rows();
    }
    Mat out(rows, 1);
    Eigen::Index at = 0;
    for (Node p : parts) {
      out.block(at, 0, value(p).rows(), 1) = value(p);
      at += value(p).rows();
    }
    return append(Op::kConcat, parts, std::move(out));
  }

  Node concat(std::initializer_list<Node> parts) {
    return concat(std::span<const Node>(parts.begin(), parts.size()));
  }

  const Mat& value(Node n) const { return nodes_[n.id].value; }

  Scalar scalar(Node n) const {
    assert(value(n).size() == 1);
    return value(n)(0, 0);
  }

  // Accumulates d(root)/d(node) into every node, seeding d(root)/d(root)=1.
  void backward(Node root) {
    assert(value(root).size() == 1);
    for (NodeData& n : nodes_) {
      n.grad.setZero(n.value.rows(), n.value.cols());
    }
    nodes_[root.id].grad(0, 0) = 1;
    for (int id = root.id; id >= 0; --id) {
      propagate(nodes_[id]);
    }
    have_grads_ = true;
  }

  const Mat& grad(Node n) const {
    assert(have_grads_);
    return nodes_[n.id].grad;
  }

  // Inputs of every abs/relu node, flattened in tape order.  Lets
  // finite-difference checks skip parameters whose perturbation straddles a
  // non-differentiable point.
  std::vector<Scalar> kink_arguments() const {
    std::vector<Scalar> out;
    for (const NodeData& n : nodes_) {
      if (n.op != Op::kAbs && n.op != Op::kRelu) continue;
      const Mat& arg = nodes_[n.in[0]].value;
      out.insert(out.end(), arg.data(), arg.data() + arg.size());
    }
    return out;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatVec,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddScalar,
    kSoftmax,
    kLog,
    kTanh,
    kSigmoid,
    kAbs,
    kRelu,
    kSum,
    kPick,
    kRowVec,
    kSegment,
    kConcat,
  };

  struct NodeData {
    Op op;
    std::vector<int> in;
    Mat value;
    Mat grad;
    Eigen::Index i0 = 0;
    Scalar payload = 0;
  };

  bool same_shape(Node a, Node b) const {
    return value(a).rows() == value(b).rows() &&
           value(a).cols() == value(b).cols();
  }

  Node append(Op op, std::span<const Node> in, Mat value) {
    NodeData n;
    n.op = op;
    n.in.reserve(in.size());
    for (Node p : in) {
      assert(p.valid());
      n.in.push_back(p.id);
    }
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Node{static_cast<int>(nodes_.size()) - 1};
  }

  Node append(Op op, std::initializer_list<Node> in, Mat value) {
    return append(op, std::span<const Node>(in.begin(), in.size()),
                  std::move(value));
  }

  void propagate(NodeData& n) {
    if (n.op == Op::kLeaf) return;
    const Mat& g = n.grad;
    if (g.size() == 0) return;
    auto in = [&](int k) -> NodeData& { return nodes_[n.in[k]]; };
    switch (n.op) {
      case Op::kMatVec:
        in(0).grad.noalias() += g * in(1).value.transpose();
        in(1).grad.noalias() += in(0).value.transpose() * g;
        break;
      case Op::kAdd:
        in(0).grad += g;
        in(1).grad += g;
        break;
      case Op::kSub:
        in(0).grad += g;
        in(1).grad -= g;
        break;
      case Op::kMul:
        in(0).grad += g.cwiseProduct(in(1).value);
        in(1).grad += g.cwiseProduct(in(0).value);
        break;
      case Op::kScale:
        in(0).grad += g * n.payload;
        break;
      case Op::kAddScalar:
        in(0).grad += g;
        break;
      case Op::kSoftmax: {
        const Scalar dot = (g.array() * n.value.array()).sum();
        in(0).grad.array() += n.value.array() * (g.array() - dot);
        break;
      }
      case Op::kLog:
        in(0).grad.array() += g.array() / in(0).value.array();
        break;
      case Op::kTanh:
        in(0).grad.array() += g.array() * (1 - n.value.array().square());
        break;
      case Op::kSigmoid:
        in(0).grad.array() +=
            g.array() * n.value.array() * (1 - n.value.array());
        break;
      case Op::kAbs:
        in(0).grad.array() += g.array() * in(0).value.array().sign();
        break;
      case Op::kRelu:
        in(0).grad.array() +=
            g.array() *
            (in(0).value.array() > Scalar(0)).template cast<Scalar>();
        break;
      case Op::kSum:
        in(0).grad.array() += g(0, 0);
        break;
      case Op::kPick:
        in(0).grad(n.i0, 0) += g(0, 0);
        break;
      case Op::kRowVec:
        in(0).grad.row(n.i0) += g.transpose();
        break;
      case Op::kSegment:
        in(0).grad.block(n.i0, 0, g.rows(), 1) += g;
        break;
      case Op::kConcat: {
        Eigen::Index at = 0;
        for (std::size_t k = 0; k < n.in.size(); ++k) {
          const Eigen::Index rows = in(k).value.rows();
          in(k).grad += g.block(at, 0, rows, 1);
          at += rows;
        }
        break;
      }
      case Op::kLeaf:
        break;
    }
  }

  std::vector<NodeData> nodes_;
  bool have_grads_ = false;
};

using Taped = Tape<double>;

}  // namespace evrel

#endif  // EVREL_AUTODIFF_HPP_
