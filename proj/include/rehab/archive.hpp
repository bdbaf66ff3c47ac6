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

// On-disk repetition archive: one CSV per repetition plus index.csv.
//
//   <dir>/index.csv
//     subject_id,exercise_id,repetition_index,stream,group,label_raw,label,file
//   <dir>/<stream>/<subject>_ex<e>_rep<r>.csv
//     header j<joint>_<component>..., then 104 rows

#ifndef REHAB_ARCHIVE_HPP_
#define REHAB_ARCHIVE_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rehab/mocap.hpp"

namespace rehab {

std::string repetition_file_name(const Repetition& rep);
std::string repetition_to_csv(const Repetition& rep);
JointFrames repetition_frames_from_csv(const std::filesystem::path& path, StreamKind stream);

void write_archive(const std::filesystem::path& dir, std::span<const Repetition> reps);
// Throws IO_FAILURE if the index is missing, EMPTY_INPUT if it lists nothing.
std::vector<Repetition> read_archive(const std::filesystem::path& dir);

}  // namespace rehab

#endif  // REHAB_ARCHIVE_HPP_
