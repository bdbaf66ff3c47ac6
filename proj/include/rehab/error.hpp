/*
 * Copyright 2026 The rehabeval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REHAB_ERROR_HPP_
#define REHAB_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rehab {

enum class ErrorCode {
  kInvalidArgument,
  kIoFailure,
  // ingest
  kColumnMismatch,
  kEmptyFile,
  kLabelMissing,
  kScoreOutOfRange,
  kDuplicateKey,
  kInvalidManifest,
  // preprocess
  kInvalidCutoff,
  kSignalTooShort,
  kNoRepetitions,
  kSegmentTooShort,
  // features
  kJointNotInSelection,
  kInvalidFeatureConfig,
  // models
  kEmptyTrainingSet,
  kFeatureLabelLengthMismatch,
  kFeatureLengthMismatch,
  kSchemaVersionMismatch,
  // eval
  kTooFewUnits,
  kLengthMismatch,
  kEmptyInput,
  kMissingExternalPrediction,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a code that
// callers (the CLI in particular) map onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rehab

#endif  // REHAB_ERROR_HPP_
