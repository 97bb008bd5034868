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

#include "psyn/models/generator.h"

#include <cstring>

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"
#include "psyn/models/ddpm.h"
#include "psyn/models/vae.h"

namespace psyn {

std::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kVae ? "vae" : "ddpm";
}

absl::StatusOr<ModelKind> ParseModelKind(std::string_view name) {
  if (name == "vae") return ModelKind::kVae;
  if (name == "ddpm") return ModelKind::kDdpm;
  return absl::InvalidArgumentError(absl::StrCat("unknown model kind '", std::string(name), "'"));
}

std::string GeneratorModel::ModelId() const {
  const std::vector<double> flat = Parameters().Flatten();
  std::string bytes(flat.size() * sizeof(double), '\0');
  if (!flat.empty()) std::memcpy(bytes.data(), flat.data(), bytes.size());
  return absl::StrCat(std::string(ModelKindName(kind())), "-", Sha256Hex(bytes).substr(0, 16));
}

absl::StatusOr<std::unique_ptr<GeneratorModel>> CreateGenerator(
    ModelKind kind, const nlohmann::json& hyperparameters,
    const EncoderState& layout, uint64_t init_seed) {
  if (kind == ModelKind::kVae) {
    PSYN_ASSIGN_OR_RETURN(VaeConfig config, VaeConfig::FromJson(hyperparameters));
    PSYN_ASSIGN_OR_RETURN(VaeModel model, VaeModel::Create(layout, config, init_seed));
    return std::make_unique<VaeModel>(std::move(model));
  }
  PSYN_ASSIGN_OR_RETURN(DdpmConfig config, DdpmConfig::FromJson(hyperparameters));
  PSYN_ASSIGN_OR_RETURN(DdpmModel model, DdpmModel::Create(layout, config, init_seed));
  return std::make_unique<DdpmModel>(std::move(model));
}

Eigen::MatrixXd AppendOneHot(const Eigen::MatrixXd& x, std::span<const int> labels,
                             int num_classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols() + num_classes);
  out.leftCols(x.cols()) = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r, x.cols() + labels[r]) = 1.0;
  return out;
}

}  // namespace psyn
