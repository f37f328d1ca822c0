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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpstat/hardgen.hpp"

namespace mpstat {

inline constexpr const char* kCsvVersionLine = "# mpstat-csv v1";

struct ExperimentConfig {
  std::string protocol = "lp";
  std::string family = "random-density";
  Index n = 32;            // unused by family file except in the n column
  double density = 0.1;
  Value value_max = 1;     // entries of random-density, noise of planted-max-int
  Index overlap = 0;       // planted-hh; 0 selects 3n/4
  std::vector<double> heavy{0.6};  // planted-hh-int fractions
  double p = 1.0;
  double eps = 0.25;
  double phi = 0.5;
  double kappa = 4.0;
  int trials = 10;
  std::uint64_t seed = 1;
  int boost = 1;
  // constant overrides
  double c_rho = 8.0;
  double c_gamma = 8.0;
  double c_alpha = 8.0;
  double sketch_c = 6.0;
  double c_hh = 8.0;
  bool oracle = true;
  Index oracle_cutoff = 512;
  bool timing = false;     // wall_ms stays empty otherwise, keeping reruns identical
  int threads = 1;
  std::string file_a;      // family "file"
  std::string file_b;

  void validate() const;
};

struct ProtocolInfo {
  std::string name;
  std::string summary;
  std::string guarantee;
};

const std::vector<ProtocolInfo>& protocol_catalog();
const std::vector<std::string>& family_names();

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string result;                 // scalar, "i:j", "i:j;..." or a tag
  std::optional<double> estimate;
  std::optional<double> oracle;
  std::optional<double> planted;
  std::optional<double> ratio;
  std::optional<bool> success;
  std::uint64_t bits_total = 0;
  std::uint64_t rounds = 0;
  std::optional<double> wall_ms;
};

// Builds the instance of one trial.
HardInstance make_instance(const ExperimentConfig& cfg, std::uint64_t instance_seed);

// Runs one trial end to end.
TrialRow run_trial(const ExperimentConfig& cfg, int trial);

// All trials, ordered by trial index whatever the thread count. Warnings
// (e.g. oracle skipped above the cutoff) go to `warnings` when given.
std::vector<TrialRow> run_experiment(const ExperimentConfig& cfg,
                                     std::vector<std::string>* warnings = nullptr);

void write_csv(std::ostream& out, const ExperimentConfig& cfg,
               const std::vector<TrialRow>& rows);

struct SummaryRow {
  std::string protocol;
  std::string family;
  Index n = 0;
  double p = 0.0;
  double eps = 0.0;
  double phi = 0.0;
  double kappa = 0.0;
  std::size_t trials = 0;
  std::size_t scored = 0;             // rows with a success value
  std::optional<double> success_rate;
  double median_bits = 0.0;
  double median_rounds = 0.0;
};

// Groups rows by configuration, in order of first appearance.
std::vector<SummaryRow> summarize(std::istream& csv);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace mpstat
