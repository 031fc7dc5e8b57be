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

#ifndef TDP_TENSORNET_DENSE_ARRAY_H_
#define TDP_TENSORNET_DENSE_ARRAY_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdp {

// error raised for shape or value violations inside the numerics library
class TensorError : public std::runtime_error {
 public:
  explicit TensorError(const std::string& what) : std::runtime_error(what) {}
};

// row-major float64 array with an explicit shape
class DenseArray {
 public:
  DenseArray() = default;
  explicit DenseArray(std::vector<int> shape, double fill = 0.0);
  DenseArray(std::vector<int> shape, std::vector<double> data);

  // factories
  static DenseArray Scalar(double value);
  static DenseArray Vector(const std::vector<double>& values);
  static DenseArray Matrix(int rows, int cols, const std::vector<double>& values);
  static DenseArray ZerosLike(const DenseArray& other);

  // shape
  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool SameShape(const DenseArray& other) const { return shape_ == other.shape_; }
  std::string ShapeString() const;

  // rank-1 arrays behave as a single row
  int rows() const;
  int cols() const;

  // data
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }
  double item() const;

  // row slice [begin, end) of a rank-2 array
  DenseArray Rows(int begin, int end) const;
  std::vector<double> Row(int r) const;

  // in-place helpers
  void Fill(double value);
  void AddInPlace(const DenseArray& other);

  // throws TensorError naming |where| if any entry is NaN or infinite
  void CheckFinite(const std::string& where) const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// number of elements implied by a shape
std::size_t ShapeSize(const std::vector<int>& shape);

}  // namespace tdp

#endif  // TDP_TENSORNET_DENSE_ARRAY_H_
