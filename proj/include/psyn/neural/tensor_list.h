// Copyright 2026 The psyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSYN_NEURAL_TENSOR_LIST_H_
#define PSYN_NEURAL_TENSOR_LIST_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"

namespace psyn {

// Ordered list of dense tensors. Used both for model parameters and for
// gradients, which must be shape-congruent with the parameters they belong
// to. Norms are over the flat concatenation of every entry.
class TensorList {
 public:
  TensorList() = default;
  explicit TensorList(std::vector<Eigen::MatrixXd> tensors)
      : tensors_(std::move(tensors)) {}

  static TensorList ZerosLike(const TensorList& other);

  size_t size() const { return tensors_.size(); }
  Eigen::MatrixXd& operator[](size_t i) { return tensors_[i]; }
  const Eigen::MatrixXd& operator[](size_t i) const { return tensors_[i]; }
  const std::vector<Eigen::MatrixXd>& tensors() const { return tensors_; }
  void push_back(Eigen::MatrixXd tensor) { tensors_.push_back(std::move(tensor)); }

  int64_t NumElements() const;
  double SquaredNorm() const;
  double L2Norm() const;
  bool AllFinite() const;
  bool SameShape(const TensorList& other) const;

  void SetZero();
  // this += scale * other. Shapes must match.
  void AddScaled(const TensorList& other, double scale);
  TensorList& operator+=(const TensorList& other);
  TensorList& operator*=(double scale);

  // Column-major concatenation of every tensor.
  std::vector<double> Flatten() const;
  absl::Status AssignFlat(std::span<const double> values);

  friend bool operator==(const TensorList& a, const TensorList& b);

 private:
  std::vector<Eigen::MatrixXd> tensors_;
};

using GradientSet = TensorList;
using ParameterSet = TensorList;

}  // namespace psyn

#endif  // PSYN_NEURAL_TENSOR_LIST_H_
