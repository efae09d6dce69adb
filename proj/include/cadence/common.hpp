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

#ifndef CADENCE_COMMON_HPP_
#define CADENCE_COMMON_HPP_

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cadence {

// Error taxonomy shared by the whole library. The CLI maps kinds to exit
// codes (usage=2, data=3, numeric=4), tests match on `code`.
enum class ErrorKind { kUsage, kData, kNumeric };

enum class ErrorCode {
  kGeneric,
  kWavMalformed,
  kWavUnsupported,
  kChatSyntax,
  kManifestInvalid,
  kEmptyInput,
  kBadConfig,
  kSingularModel,
  kZeroVariance,
  kNotConverged,
  kMissingScore,
  kIoFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), kind_(kind), code_(code) {}

  ErrorKind kind() const { return kind_; }
  ErrorCode code() const { return code_; }

 private:
  ErrorKind kind_;
  ErrorCode code_;
};

[[noreturn]] inline void ThrowUsage(const std::string& msg,
                                    ErrorCode code = ErrorCode::kBadConfig) {
  throw Error(ErrorKind::kUsage, code, msg);
}
[[noreturn]] inline void ThrowData(const std::string& msg,
                                   ErrorCode code = ErrorCode::kGeneric) {
  throw Error(ErrorKind::kData, code, msg);
}
[[noreturn]] inline void ThrowNumeric(const std::string& msg,
                                      ErrorCode code = ErrorCode::kGeneric) {
  throw Error(ErrorKind::kNumeric, code, msg);
}

#define CADENCE_CHECK_DATA(cond, msg)       \
  do {                                      \
    if (!(cond)) ::cadence::ThrowData(msg); \
  } while (0)

#define CADENCE_CHECK_CONFIG(cond, msg)      \
  do {                                       \
    if (!(cond)) ::cadence::ThrowUsage(msg); \
  } while (0)

// 64-bit FNV-1a, used for model-file checksums and seed derivation.
inline std::uint64_t Fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t Fnv1a64(const std::string& s) {
  return Fnv1a64(s.data(), s.size());
}

// Shortest round-trip decimal formatting for doubles. All CSV/JSON artifact
// writers go through this so repeated runs are byte-identical.
std::string FormatDouble(double v);

// Runs fn(i) for i in [0, n). Work is split into index-contiguous chunks,
// one per worker; results must be written to pre-sized slots so the output
// is independent of scheduling. jobs <= 1 runs inline.
void ParallelFor(std::size_t n, int jobs,
                 const std::function<void(std::size_t)>& fn);

}  // namespace cadence

#endif  // CADENCE_COMMON_HPP_
