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

#include "cadence/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadence/common.hpp"

namespace cadence::model_io {

namespace {

constexpr char kMagic[4] = {'C', 'A', 'D', 'M'};
constexpr std::uint32_t kSchemaVersion = 1;

// Serialization assumes a little-endian host, which covers every platform
// this project targets. The format is defined as little-endian on disk.

template <typename T>
void AppendPod(std::string* out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out->append(buf, sizeof(T));
}

template <typename T>
T ReadPod(const std::string& data, std::size_t* offset) {
  CADENCE_CHECK_DATA(*offset + sizeof(T) <= data.size(),
                     "model file is truncated");
  T value;
  std::memcpy(&value, data.data() + *offset, sizeof(T));
  *offset += sizeof(T);
  return value;
}

std::string ReadString(const std::string& data, std::size_t* offset) {
  const auto len = ReadPod<std::uint32_t>(data, offset);
  CADENCE_CHECK_DATA(*offset + len <= data.size(), "model file is truncated");
  std::string s(data.data() + *offset, len);
  *offset += len;
  return s;
}

std::string ChecksumHex(const std::string& data) {
  const std::uint64_t h = Fnv1a64(data.data(), data.size());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string SidecarPath(const std::filesystem::path& path) {
  return path.string() + ".json";
}

}  // namespace

bool TensorFile::Has(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

const Eigen::MatrixXd& TensorFile::Get(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  ThrowData("model file is missing tensor '" + name + "'",
            ErrorCode::kManifestInvalid);
}

void TensorFile::Add(const std::string& name, const Eigen::MatrixXd& tensor) {
  tensors.emplace_back(name, tensor);
}

void TensorFile::AddScalar(const std::string& name, double value) {
  Eigen::MatrixXd t(1, 1);
  t(0, 0) = value;
  tensors.emplace_back(name, t);
}

double TensorFile::GetScalar(const std::string& name) const {
  const Eigen::MatrixXd& t = Get(name);
  CADENCE_CHECK_DATA(t.rows() == 1 && t.cols() == 1,
                     "tensor '" + name + "' is not a scalar");
  return t(0, 0);
}

void SaveTensorFile(const std::filesystem::path& path,
                    const TensorFile& file) {
  std::string data;
  data.append(kMagic, sizeof(kMagic));
  AppendPod<std::uint32_t>(&data, kSchemaVersion);
  AppendPod<std::uint32_t>(&data, static_cast<std::uint32_t>(file.kind.size()));
  data.append(file.kind);
  AppendPod<std::uint32_t>(&data,
                           static_cast<std::uint32_t>(file.tensors.size()));
  for (const auto& [name, tensor] : file.tensors) {
    AppendPod<std::uint32_t>(&data, static_cast<std::uint32_t>(name.size()));
    data.append(name);
    AppendPod<std::uint64_t>(&data, static_cast<std::uint64_t>(tensor.rows()));
    AppendPod<std::uint64_t>(&data, static_cast<std::uint64_t>(tensor.cols()));
    for (Eigen::Index i = 0; i < tensor.rows(); ++i) {
      for (Eigen::Index j = 0; j < tensor.cols(); ++j) {
        AppendPod<double>(&data, tensor(i, j));
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out.write(data.data(),
                          static_cast<std::streamsize>(data.size())))) {
    ThrowData("could not write model file: " + path.string(),
              ErrorCode::kIoFailure);
  }
  out.close();

  nlohmann::json side;
  side["kind"] = file.kind;
  side["schema_version"] = kSchemaVersion;
  side["checksum"] = ChecksumHex(data);
  side["tensors"] = nlohmann::json::array();
  for (const auto& [name, tensor] : file.tensors) {
    side["tensors"].push_back({{"name", name},
                               {"rows", tensor.rows()},
                               {"cols", tensor.cols()}});
  }
  std::ofstream sout(SidecarPath(path), std::ios::trunc);
  if (!sout || !(sout << side.dump(2) << "\n")) {
    ThrowData("could not write model sidecar: " + SidecarPath(path),
              ErrorCode::kIoFailure);
  }
}

TensorFile LoadTensorFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ThrowData("could not open model file: " + path.string(),
              ErrorCode::kIoFailure);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  std::size_t offset = 0;
  CADENCE_CHECK_DATA(data.size() >= sizeof(kMagic) &&
                         std::memcmp(data.data(), kMagic, sizeof(kMagic)) == 0,
                     "not a model file: " + path.string());
  offset = sizeof(kMagic);
  const auto version = ReadPod<std::uint32_t>(data, &offset);
  CADENCE_CHECK_DATA(version == kSchemaVersion,
                     "unsupported model schema version " +
                         std::to_string(version));

  TensorFile file;
  file.kind = ReadString(data, &offset);
  const auto count = ReadPod<std::uint32_t>(data, &offset);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::string name = ReadString(data, &offset);
    const auto rows = ReadPod<std::uint64_t>(data, &offset);
    const auto cols = ReadPod<std::uint64_t>(data, &offset);
    CADENCE_CHECK_DATA(rows <= (1ull << 30) && cols <= (1ull << 30),
                       "model tensor shape is implausible");
    CADENCE_CHECK_DATA(rows * cols * sizeof(double) <= data.size() - offset,
                       "model file is truncated");
    Eigen::MatrixXd tensor(static_cast<Eigen::Index>(rows),
                           static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < tensor.rows(); ++i) {
      for (Eigen::Index j = 0; j < tensor.cols(); ++j) {
        tensor(i, j) = ReadPod<double>(data, &offset);
      }
    }
    file.tensors.emplace_back(name, std::move(tensor));
  }

  const std::filesystem::path side_path(SidecarPath(path));
  if (std::filesystem::exists(side_path)) {
    std::ifstream sin(side_path);
    std::ostringstream sbuf;
    sbuf << sin.rdbuf();
    nlohmann::json side = nlohmann::json::parse(sbuf.str(), nullptr,
                                                /*allow_exceptions=*/false);
    CADENCE_CHECK_DATA(!side.is_discarded(),
                       "model sidecar is not valid json: " +
                           side_path.string());
    if (side.contains("checksum") &&
        side["checksum"].get<std::string>() != ChecksumHex(data)) {
      ThrowData("model file does not match its sidecar checksum: " +
                    path.string(),
                ErrorCode::kManifestInvalid);
    }
  }
  return file;
}

TensorFile LoadTensorFile(const std::filesystem::path& path,
                          const std::string& expected_kind) {
  TensorFile file = LoadTensorFile(path);
  if (file.kind != expected_kind) {
    ThrowData("model file '" + path.string() + "' has kind '" + file.kind +
                  "', expected '" + expected_kind + "'",
              ErrorCode::kManifestInvalid);
  }
  return file;
}

void SaveUbm(const std::filesystem::path& path, const embeddings::Ubm& ubm) {
  TensorFile file;
  file.kind = "ubm";
  file.Add("weights", ubm.weights);
  file.Add("means", ubm.means);
  file.Add("vars", ubm.vars);
  SaveTensorFile(path, file);
}

embeddings::Ubm LoadUbm(const std::filesystem::path& path) {
  const TensorFile file = LoadTensorFile(path, "ubm");
  embeddings::Ubm ubm;
  ubm.weights = file.Get("weights");
  ubm.means = file.Get("means");
  ubm.vars = file.Get("vars");
  CADENCE_CHECK_DATA(ubm.means.rows() == ubm.weights.size() &&
                         ubm.vars.rows() == ubm.weights.size() &&
                         ubm.vars.cols() == ubm.means.cols(),
                     "background model tensors have inconsistent shapes");
  return ubm;
}

void SaveTv(const std::filesystem::path& path, const embeddings::TvModel& tv) {
  TensorFile file;
  file.kind = "tv";
  file.Add("t", tv.t);
  file.AddScalar("n_components", tv.n_components);
  file.AddScalar("feat_dim", tv.feat_dim);
  SaveTensorFile(path, file);
}

embeddings::TvModel LoadTv(const std::filesystem::path& path) {
  const TensorFile file = LoadTensorFile(path, "tv");
  embeddings::TvModel tv;
  tv.t = file.Get("t");
  tv.n_components = static_cast<int>(file.GetScalar("n_components"));
  tv.feat_dim = static_cast<int>(file.GetScalar("feat_dim"));
  CADENCE_CHECK_DATA(
      tv.t.rows() == static_cast<Eigen::Index>(tv.n_components) * tv.feat_dim,
      "subspace tensor shape does not match its header");
  return tv;
}

void SaveTdnn(const std::filesystem::path& path,
              const embeddings::TdnnModel& tdnn) {
  TensorFile file;
  file.kind = "tdnn";
  file.AddScalar("n_layers", static_cast<double>(tdnn.layers.size()));
  for (std::size_t l = 0; l < tdnn.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    const embeddings::TdnnLayer& layer = tdnn.layers[l];
    Eigen::MatrixXd ctx(1, static_cast<Eigen::Index>(layer.context.size()));
    for (std::size_t c = 0; c < layer.context.size(); ++c) {
      ctx(0, static_cast<Eigen::Index>(c)) = layer.context[c];
    }
    file.Add(prefix + "context", ctx);
    file.Add(prefix + "weight", layer.weight);
    file.Add(prefix + "bias", layer.bias);
  }
  file.Add("dense_w", tdnn.dense_w);
  file.Add("dense_b", tdnn.dense_b);
  SaveTensorFile(path, file);
}

embeddings::TdnnModel LoadTdnn(const std::filesystem::path& path) {
  const TensorFile file = LoadTensorFile(path, "tdnn");
  embeddings::TdnnModel tdnn;
  const int n_layers = static_cast<int>(file.GetScalar("n_layers"));
  CADENCE_CHECK_DATA(n_layers >= 1, "network has no layers");
  for (int l = 0; l < n_layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    embeddings::TdnnLayer layer;
    const Eigen::MatrixXd& ctx = file.Get(prefix + "context");
    for (Eigen::Index c = 0; c < ctx.cols(); ++c) {
      layer.context.push_back(static_cast<int>(ctx(0, c)));
    }
    layer.weight = file.Get(prefix + "weight");
    layer.bias = file.Get(prefix + "bias");
    tdnn.layers.push_back(std::move(layer));
  }
  tdnn.dense_w = file.Get("dense_w");
  tdnn.dense_b = file.Get("dense_b");
  return tdnn;
}

void SaveLdaBasis(const std::filesystem::path& path,
                  const embeddings::LdaBasis& basis) {
  TensorFile file;
  file.kind = "lda_basis";
  file.Add("projection", basis.projection);
  SaveTensorFile(path, file);
}

embeddings::LdaBasis LoadLdaBasis(const std::filesystem::path& path) {
  const TensorFile file = LoadTensorFile(path, "lda_basis");
  embeddings::LdaBasis basis;
  basis.projection = file.Get("projection");
  return basis;
}

}  // namespace cadence::model_io
