// Copyright 2026 The Cadence Authors
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

#ifndef CADENCE_MODEL_IO_HPP_
#define CADENCE_MODEL_IO_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cadence/embeddings.hpp"

namespace cadence::model_io {

// Versioned little-endian container of named double tensors. Every model
// artifact in the toolkit serializes through this format, so loaders can
// validate kind and shapes uniformly. Saving also writes a "<path>.json"
// sidecar recording kind, schema version, tensor shapes, and an FNV-1a
// checksum of the binary; loading verifies the checksum when the sidecar
// is present.
struct TensorFile {
  std::string kind;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

  bool Has(const std::string& name) const;
  // Errors when the tensor is absent.
  const Eigen::MatrixXd& Get(const std::string& name) const;
  void Add(const std::string& name, const Eigen::MatrixXd& tensor);
  void AddScalar(const std::string& name, double value);
  double GetScalar(const std::string& name) const;
};

void SaveTensorFile(const std::filesystem::path& path, const TensorFile& file);
TensorFile LoadTensorFile(const std::filesystem::path& path);
// Errors when the file's kind differs from `expected_kind`.
TensorFile LoadTensorFile(const std::filesystem::path& path,
                          const std::string& expected_kind);

void SaveUbm(const std::filesystem::path& path, const embeddings::Ubm& ubm);
embeddings::Ubm LoadUbm(const std::filesystem::path& path);

void SaveTv(const std::filesystem::path& path, const embeddings::TvModel& tv);
embeddings::TvModel LoadTv(const std::filesystem::path& path);

void SaveTdnn(const std::filesystem::path& path,
              const embeddings::TdnnModel& tdnn);
embeddings::TdnnModel LoadTdnn(const std::filesystem::path& path);

void SaveLdaBasis(const std::filesystem::path& path,
                  const embeddings::LdaBasis& basis);
embeddings::LdaBasis LoadLdaBasis(const std::filesystem::path& path);

}  // namespace cadence::model_io

#endif  // CADENCE_MODEL_IO_HPP_
