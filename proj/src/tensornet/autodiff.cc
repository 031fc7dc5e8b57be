// Copyright 2026 The tubepolicy Authors
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

#include "tdp/tensornet/autodiff.h"

#include <Eigen/Core>
#include <cmath>
#include <unordered_map>
#include <utility>

namespace tdp {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

thread_local bool grad_enabled = true;

ConstMapMatrix AsMatrix(const DenseArray& a) {
  return ConstMapMatrix(a.data(), a.rows(), a.cols());
}

MapMatrix AsMatrix(DenseArray& a) { return MapMatrix(a.data(), a.rows(), a.cols()); }

// Eigen selects product kernels by operand address alignment, which changes
// the rounding; products therefore run on Eigen-owned (aligned) copies so the
// result depends only on the values
RowMatrix Owned(const DenseArray& a) { return AsMatrix(a); }

// grad buffer of a node, allocated on first use
DenseArray& GradOf(ComputationNode& n) {
  if (n.grad.size() != n.value.size()) n.grad = DenseArray::ZerosLike(n.value);
  return n.grad;
}

// creates a result node; attaches parents and rule only when recording
Var MakeResult(DenseArray value, const std::string& op,
               std::vector<std::shared_ptr<ComputationNode>> parents,
               std::function<void(ComputationNode&)> backward) {
  auto node = std::make_shared<ComputationNode>();
  node->value = std::move(value);
  node->op = op;
  bool needs = false;
  if (grad_enabled) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void RequireSameSize(const Var& a, const Var& b, const char* op) {
  if (a.value().size() != b.value().size()) {
    throw TensorError(std::string(op) + ": size mismatch " +
                      a.value().ShapeString() + " vs " + b.value().ShapeString());
  }
}

}  // namespace

Var Constant(DenseArray value) {
  auto node = std::make_shared<ComputationNode>();
  node->value = std::move(value);
  node->op = "constant";
  return Var(std::move(node));
}

Var Parameter(DenseArray value) {
  auto node = std::make_shared<ComputationNode>();
  node->value = std::move(value);
  node->op = "parameter";
  node->requires_grad = true;
  return Var(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool GradEnabled() { return grad_enabled; }

double MishValue(double x) {
  // softplus computed without overflow
  const double sp = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  return x * std::tanh(sp);
}

double MishDerivative(double x) {
  const double sp = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  const double th = std::tanh(sp);
  const double sig = 1.0 / (1.0 + std::exp(-x));
  return th + x * (1.0 - th * th) * sig;
}

Var MatMul(const Var& a, const Var& w) {
  const DenseArray& av = a.value();
  const DenseArray& wv = w.value();
  if (wv.rank() != 2 || av.cols() != wv.rows()) {
    throw TensorError("MatMul: shape mismatch " + av.ShapeString() + " x " +
                      wv.ShapeString());
  }
  DenseArray out({av.rows(), wv.cols()});
  const RowMatrix product = Owned(av) * Owned(wv);
  AsMatrix(out) = product;
  auto an = a.node();
  auto wn = w.node();
  return MakeResult(std::move(out), "matmul", {an, wn},
                    [an, wn](ComputationNode& self) {
                      const RowMatrix g = Owned(self.grad);
                      if (an->requires_grad) {
                        const RowMatrix ga = g * Owned(wn->value).transpose();
                        AsMatrix(GradOf(*an)) += ga;
                      }
                      if (wn->requires_grad) {
                        const RowMatrix gw = Owned(an->value).transpose() * g;
                        AsMatrix(GradOf(*wn)) += gw;
                      }
                    });
}

Var AddRowVector(const Var& a, const Var& bias) {
  const DenseArray& av = a.value();
  const DenseArray& bv = bias.value();
  if (static_cast<int>(bv.size()) != av.cols()) {
    throw TensorError("AddRowVector: bias " + bv.ShapeString() +
                      " does not match " + av.ShapeString());
  }
  DenseArray out = av;
  AsMatrix(out).rowwise() +=
      Eigen::Map<const Eigen::RowVectorXd>(bv.data(), av.cols());
  auto an = a.node();
  auto bn = bias.node();
  return MakeResult(std::move(out), "add_row_vector", {an, bn},
                    [an, bn](ComputationNode& self) {
                      if (an->requires_grad) GradOf(*an).AddInPlace(self.grad);
                      if (bn->requires_grad) {
                        const DenseArray& g = self.grad;
                        DenseArray& gb = GradOf(*bn);
                        for (int r = 0; r < g.rows(); ++r) {
                          for (int c = 0; c < g.cols(); ++c) gb[c] += g.at(r, c);
                        }
                      }
                    });
}

Var Add(const Var& a, const Var& b) {
  RequireSameSize(a, b, "Add");
  DenseArray out = a.value();
  out.AddInPlace(b.value());
  auto an = a.node();
  auto bn = b.node();
  return MakeResult(std::move(out), "add", {an, bn},
                    [an, bn](ComputationNode& self) {
                      if (an->requires_grad) GradOf(*an).AddInPlace(self.grad);
                      if (bn->requires_grad) GradOf(*bn).AddInPlace(self.grad);
                    });
}

Var Sub(const Var& a, const Var& b) {
  RequireSameSize(a, b, "Sub");
  DenseArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  auto an = a.node();
  auto bn = b.node();
  return MakeResult(std::move(out), "sub", {an, bn},
                    [an, bn](ComputationNode& self) {
                      if (an->requires_grad) GradOf(*an).AddInPlace(self.grad);
                      if (bn->requires_grad) {
                        DenseArray& g = GradOf(*bn);
                        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
                      }
                    });
}

Var Mul(const Var& a, const Var& b) {
  RequireSameSize(a, b, "Mul");
  DenseArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  auto an = a.node();
  auto bn = b.node();
  return MakeResult(std::move(out), "mul", {an, bn},
                    [an, bn](ComputationNode& self) {
                      if (an->requires_grad) {
                        DenseArray& g = GradOf(*an);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          g[i] += self.grad[i] * bn->value[i];
                        }
                      }
                      if (bn->requires_grad) {
                        DenseArray& g = GradOf(*bn);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          g[i] += self.grad[i] * an->value[i];
                        }
                      }
                    });
}

Var Scale(const Var& a, double s) {
  DenseArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  auto an = a.node();
  return MakeResult(std::move(out), "scale", {an}, [an, s](ComputationNode& self) {
    DenseArray& g = GradOf(*an);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Var AddScalar(const Var& a, double s) {
  DenseArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s;
  auto an = a.node();
  return MakeResult(std::move(out), "add_scalar", {an},
                    [an](ComputationNode& self) { GradOf(*an).AddInPlace(self.grad); });
}

Var Square(const Var& a) {
  DenseArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  auto an = a.node();
  return MakeResult(std::move(out), "square", {an}, [an](ComputationNode& self) {
    DenseArray& g = GradOf(*an);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += 2.0 * an->value[i] * self.grad[i];
    }
  });
}

Var Mish(const Var& a) {
  DenseArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = MishValue(out[i]);
  auto an = a.node();
  return MakeResult(std::move(out), "mish", {an}, [an](ComputationNode& self) {
    DenseArray& g = GradOf(*an);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += MishDerivative(an->value[i]) * self.grad[i];
    }
  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw TensorError("ConcatCols: no inputs");
  const int rows = parts[0].value().rows();
  std::vector<int> offsets;
  int total = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != rows) {
      throw TensorError("ConcatCols: row mismatch " + p.value().ShapeString());
    }
    offsets.push_back(total);
    total += p.value().cols();
  }
  DenseArray out({rows, total});
  std::vector<std::shared_ptr<ComputationNode>> nodes;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const DenseArray& v = parts[k].value();
    const int c = v.cols();
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < c; ++j) out.at(r, offsets[k] + j) = v.at(r, j);
    }
    nodes.push_back(parts[k].node());
  }
  return MakeResult(std::move(out), "concat_cols", nodes,
                    [nodes, offsets, rows](ComputationNode& self) {
                      for (std::size_t k = 0; k < nodes.size(); ++k) {
                        if (!nodes[k]->requires_grad) continue;
                        DenseArray& g = GradOf(*nodes[k]);
                        const int c = nodes[k]->value.cols();
                        for (int r = 0; r < rows; ++r) {
                          for (int j = 0; j < c; ++j) {
                            g.at(r, j) += self.grad.at(r, offsets[k] + j);
                          }
                        }
                      }
                    });
}

Var SliceCols(const Var& a, int begin, int end) {
  const DenseArray& av = a.value();
  if (begin < 0 || end > av.cols() || begin >= end) {
    throw TensorError("SliceCols: bad range on " + av.ShapeString());
  }
  const int rows = av.rows();
  DenseArray out({rows, end - begin});
  for (int r = 0; r < rows; ++r) {
    for (int j = begin; j < end; ++j) out.at(r, j - begin) = av.at(r, j);
  }
  auto an = a.node();
  return MakeResult(std::move(out), "slice_cols", {an},
                    [an, begin, end, rows](ComputationNode& self) {
                      DenseArray& g = GradOf(*an);
                      for (int r = 0; r < rows; ++r) {
                        for (int j = begin; j < end; ++j) {
                          g.at(r, j) += self.grad.at(r, j - begin);
                        }
                      }
                    });
}

Var SliceRows(const Var& a, int begin, int end) {
  const DenseArray& av = a.value();
  if (av.rank() != 2) throw TensorError("SliceRows: rank-2 input required");
  DenseArray out = av.Rows(begin, end);
  auto an = a.node();
  const int c = av.cols();
  return MakeResult(std::move(out), "slice_rows", {an},
                    [an, begin, c](ComputationNode& self) {
                      DenseArray& g = GradOf(*an);
                      const std::size_t off = static_cast<std::size_t>(begin) * c;
                      for (std::size_t i = 0; i < self.grad.size(); ++i) {
                        g[off + i] += self.grad[i];
                      }
                    });
}

Var Sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  auto an = a.node();
  return MakeResult(DenseArray::Scalar(s), "sum", {an}, [an](ComputationNode& self) {
    DenseArray& g = GradOf(*an);
    const double gs = self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gs;
  });
}

Var SumSquares(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v * v;
  auto an = a.node();
  return MakeResult(DenseArray::Scalar(s), "sum_squares", {an},
                    [an](ComputationNode& self) {
                      DenseArray& g = GradOf(*an);
                      const double gs = self.grad[0];
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        g[i] += 2.0 * an->value[i] * gs;
                      }
                    });
}

Var MeanSquaredRowNorm(const Var& a) {
  return Scale(SumSquares(a), 1.0 / a.value().rows());
}

std::vector<DenseArray> Backward(const Var& loss, const std::vector<Var>& params) {
  if (!loss.defined() || loss.value().size() != 1) {
    throw TensorError("Backward: loss must be scalar, got " +
                      (loss.defined() ? loss.value().ShapeString() : std::string("undefined")));
  }
  // iterative depth-first topological order over nodes that need gradients
  std::vector<ComputationNode*> order;
  std::unordered_map<ComputationNode*, int> state;  // 1 in progress, 2 done
  std::vector<std::pair<ComputationNode*, std::size_t>> stack;
  if (loss.requires_grad()) stack.emplace_back(loss.node().get(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next == 0) {
      auto it = state.find(node);
      if (it != state.end() && it->second == 2) {
        stack.pop_back();
        continue;
      }
      state[node] = 1;
    }
    if (next < node->parents.size()) {
      ComputationNode* parent = node->parents[next].get();
      ++next;
      if (!parent->requires_grad) continue;
      auto it = state.find(parent);
      if (it != state.end() && it->second == 1) {
        throw TensorError("Backward: cycle detected in computation graph");
      }
      if (it == state.end()) stack.emplace_back(parent, 0);
      continue;
    }
    state[node] = 2;
    order.push_back(node);
    stack.pop_back();
  }

  for (ComputationNode* n : order) n->grad = DenseArray::ZerosLike(n->value);
  if (!order.empty()) {
    order.back()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if ((*it)->backward) (*it)->backward(**it);
    }
  }

  std::vector<DenseArray> grads;
  grads.reserve(params.size());
  for (const Var& p : params) {
    auto found = state.find(p.node().get());
    if (found == state.end()) {
      grads.push_back(DenseArray::ZerosLike(p.value()));
    } else {
      grads.push_back(p.grad());
    }
  }
  return grads;
}

}  // namespace tdp
