// Copyright 2026 The Unilabel Authors.
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

#ifndef UNILABEL_PIPELINE_HPP
#define UNILABEL_PIPELINE_HPP

#include <ostream>
#include <string>
#include <vector>

namespace unilabel {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Runs one batch subcommand (merge, ingest, split, remap, eval, stats).
// `args` excludes the program name. Reports go to `out`, log lines and
// usage text to `err`. Returns 0 on success, 1 on data errors, 2 on usage
// errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "+70.27% (70%)"-style expansion of `merged` over `largest` classes.
struct Expansion {
  double percent = 0.0;  // unrounded
  std::string text;
};
Expansion label_space_expansion(std::size_t merged, std::size_t largest);

}  // namespace unilabel

#endif  // UNILABEL_PIPELINE_HPP
