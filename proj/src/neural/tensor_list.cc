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

#include "psyn/neural/tensor_list.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace psyn {

TensorList TensorList::ZerosLike(const TensorList& other) {
  TensorList zeros;
  zeros.tensors_.reserve(other.size());
  for (const Eigen::MatrixXd& t : other.tensors_) {
    zeros.tensors_.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
  }
  return zeros;
}

int64_t TensorList::NumElements() const {
  int64_t n = 0;
  for (const Eigen::MatrixXd& t : tensors_) n += t.size();
  return n;
}

double TensorList::SquaredNorm() const {
  double sum = 0.0;
  for (const Eigen::MatrixXd& t : tensors_) sum += t.squaredNorm();
  return sum;
}

double TensorList::L2Norm() const { return std::sqrt(SquaredNorm()); }

bool TensorList::AllFinite() const {
  for (const Eigen::MatrixXd& t : tensors_) {
    if (!t.allFinite()) return false;
  }
  return true;
}

bool TensorList::SameShape(const TensorList& other) const {
  if (size() != other.size()) return false;
  for (size_t i = 0; i < size(); ++i) {
    if (tensors_[i].rows() != other[i].rows() ||
        tensors_[i].cols() != other[i].cols()) {
      return false;
    }
  }
  return true;
}

void TensorList::SetZero() {
  for (Eigen::MatrixXd& t : tensors_) t.setZero();
}

void TensorList::AddScaled(const TensorList& other, double scale) {
  for (size_t i = 0; i < size(); ++i) tensors_[i] += scale * other[i];
}

TensorList& TensorList::operator+=(const TensorList& other) {
  for (size_t i = 0; i < size(); ++i) tensors_[i] += other[i];
  return *this;
}

TensorList& TensorList::operator*=(double scale) {
  for (Eigen::MatrixXd& t : tensors_) t *= scale;
  return *this;
}

std::vector<double> TensorList::Flatten() const {
  std::vector<double> flat;
  flat.reserve(NumElements());
  for (const Eigen::MatrixXd& t : tensors_) {
    flat.insert(flat.end(), t.data(), t.data() + t.size());
  }
  return flat;
}

absl::Status TensorList::AssignFlat(std::span<const double> values) {
  if (static_cast<int64_t>(values.size()) != NumElements()) {
    return absl::InvalidArgumentError(
        absl::StrCat("flat size ", values.size(), " does not match ",
                     NumElements(), " parameters"));
  }
  size_t pos = 0;
  for (Eigen::MatrixXd& t : tensors_) {
    std::copy(values.begin() + pos, values.begin() + pos + t.size(), t.data());
    pos += t.size();
  }
  return absl::OkStatus();
}

bool operator==(const TensorList& a, const TensorList& b) {
  if (!a.SameShape(b)) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace psyn
