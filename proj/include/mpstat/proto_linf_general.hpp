/*
 * Copyright 2026 The mpstat Authors.
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

#pragma once

#include <cstddef>
#include <vector>

#include "mpstat/channel.hpp"
#include "mpstat/matrix.hpp"

namespace mpstat {

struct GeneralLinfParams {
  double kappa = 4.0;
  std::size_t means = 4;
  std::size_t medians = 7;
  void validate(Index n) const;
};

struct GeneralLinfTrace {
  std::size_t sketch_rows = 0;
  std::vector<double> column_estimates;
};

// One round: Alice sends S A for a blocked l_2 sketch S on the columns of C;
// Bob forms S A B and outputs the largest per-column estimate.
EstimateReport run_linf_general(const SparseIntMatrix& a, const SparseIntMatrix& b,
                                const GeneralLinfParams& params,
                                ProtocolSession& session,
                                GeneralLinfTrace* trace = nullptr);

}  // namespace mpstat
