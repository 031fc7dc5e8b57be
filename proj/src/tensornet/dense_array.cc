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

#include "tdp/tensornet/dense_array.h"

#include <algorithm>
#include <cmath>
#include <utility>

namespace tdp {

std::size_t ShapeSize(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw TensorError("negative extent in shape");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

DenseArray::DenseArray(std::vector<int> shape, double fill)
    : shape_(std::move(shape)) {
  data_.assign(ShapeSize(shape_), fill);
}

DenseArray::DenseArray(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeSize(shape_) != data_.size()) {
    throw TensorError("data length " + std::to_string(data_.size()) +
                      " does not match shape " + ShapeString());
  }
}

DenseArray DenseArray::Scalar(double value) { return DenseArray({}, {value}); }

DenseArray DenseArray::Vector(const std::vector<double>& values) {
  return DenseArray({static_cast<int>(values.size())}, values);
}

DenseArray DenseArray::Matrix(int rows, int cols,
                              const std::vector<double>& values) {
  return DenseArray({rows, cols}, values);
}

DenseArray DenseArray::ZerosLike(const DenseArray& other) {
  return DenseArray(other.shape_, 0.0);
}

std::string DenseArray::ShapeString() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

int DenseArray::rows() const {
  if (rank() == 2) return shape_[0];
  if (rank() <= 1) return 1;
  throw TensorError("rows() requires rank <= 2, got " + ShapeString());
}

int DenseArray::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  if (rank() == 0) return 1;
  throw TensorError("cols() requires rank <= 2, got " + ShapeString());
}

double DenseArray::item() const {
  if (data_.size() != 1) {
    throw TensorError("item() on array of shape " + ShapeString());
  }
  return data_[0];
}

DenseArray DenseArray::Rows(int begin, int end) const {
  if (rank() != 2 || begin < 0 || end > shape_[0] || begin > end) {
    throw TensorError("bad row slice on " + ShapeString());
  }
  const int c = shape_[1];
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(begin) * c,
                          data_.begin() + static_cast<std::ptrdiff_t>(end) * c);
  return DenseArray({end - begin, c}, std::move(out));
}

std::vector<double> DenseArray::Row(int r) const {
  const int c = cols();
  return std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r) * c,
                             data_.begin() + static_cast<std::ptrdiff_t>(r + 1) * c);
}

void DenseArray::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void DenseArray::AddInPlace(const DenseArray& other) {
  if (other.size() != size()) {
    throw TensorError("AddInPlace size mismatch " + ShapeString() + " vs " +
                      other.ShapeString());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

void DenseArray::CheckFinite(const std::string& where) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw TensorError("non-finite value at index " + std::to_string(i) +
                        " in " + where);
    }
  }
}

}  // namespace tdp
