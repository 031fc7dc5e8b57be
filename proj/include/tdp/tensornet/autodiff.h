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

#ifndef TDP_TENSORNET_AUTODIFF_H_
#define TDP_TENSORNET_AUTODIFF_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tdp/tensornet/dense_array.h"

namespace tdp {

// one vertex of the computation graph
struct ComputationNode {
  DenseArray value;
  DenseArray grad;
  std::vector<std::shared_ptr<ComputationNode>> parents;
  // accumulates this node's grad into its parents' grads
  std::function<void(ComputationNode&)> backward;
  // local-gradient rule identifier
  std::string op;
  bool requires_grad = false;
};

// handle to a graph node
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<ComputationNode> node) : node_(std::move(node)) {}

  const DenseArray& value() const { return node_->value; }
  DenseArray& mutable_value() { return node_->value; }
  const DenseArray& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  const std::string& op() const { return node_->op; }
  const std::shared_ptr<ComputationNode>& node() const { return node_; }
  bool defined() const { return node_ != nullptr; }

 private:
  std::shared_ptr<ComputationNode> node_;
};

// leaf without gradient
Var Constant(DenseArray value);

// leaf tracked by backward
Var Parameter(DenseArray value);

// disables graph recording for its lifetime (inference)
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// differentiable primitives; rank-1 operands act as single rows
Var MatMul(const Var& a, const Var& w);            // [B,k] x [k,n]
Var AddRowVector(const Var& a, const Var& bias);    // [B,n] + [n]
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);                // elementwise
Var Scale(const Var& a, double s);
Var AddScalar(const Var& a, double s);
Var Square(const Var& a);
Var Mish(const Var& a);
Var ConcatCols(const std::vector<Var>& parts);      // along the last axis
Var SliceCols(const Var& a, int begin, int end);
Var SliceRows(const Var& a, int begin, int end);
Var Sum(const Var& a);                              // scalar
Var SumSquares(const Var& a);                       // scalar
// mean over rows of the squared row norm
Var MeanSquaredRowNorm(const Var& a);

// reverse sweep from a scalar loss; returns d loss / d p for each p in
// |params| (zeros for parameters the loss does not reach)
std::vector<DenseArray> Backward(const Var& loss, const std::vector<Var>& params);

// scalar helpers used by primitives and oracles
double MishValue(double x);
double MishDerivative(double x);

}  // namespace tdp

#endif  // TDP_TENSORNET_AUTODIFF_H_
