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

// mpstat: run protocols over instance families and summarize the CSV.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

#include "mpstat/harness.hpp"
#include "mpstat/matrix.hpp"

namespace {

using mpstat::ExperimentConfig;

void add_instance_flags(CLI::App& app, ExperimentConfig& cfg, std::string& stem) {
  app.add_option("--family", cfg.family, "instance family (see `list`)");
  app.add_option("--n", cfg.n, "matrix dimension");
  app.add_option("--density", cfg.density, "noise / entry density");
  app.add_option("--value-max", cfg.value_max, "largest random entry");
  app.add_option("--overlap", cfg.overlap, "planted-hh overlap (0: 3n/4)");
  app.add_option("--heavy", cfg.heavy, "planted-hh-int fractions of ||AB||_1");
  app.add_option("--kappa", cfg.kappa, "approximation factor");
  app.add_option("--seed", cfg.seed, "base seed");
  app.add_option("--file", stem, "read <stem>.A.txt and <stem>.B.txt (family file)");
  app.add_option("--file-a", cfg.file_a, "Alice's matrix file");
  app.add_option("--file-b", cfg.file_b, "Bob's matrix file");
}

void resolve_files(ExperimentConfig& cfg, const std::string& stem) {
  if (stem.empty()) return;
  cfg.file_a = stem + ".A.txt";
  cfg.file_b = stem + ".B.txt";
  cfg.family = "file";
}

// The n column of a file run reports the largest dimension on disk.
void record_file_dims(ExperimentConfig& cfg) {
  if (cfg.family != "file" || cfg.file_a.empty() || cfg.file_b.empty()) return;
  const auto a = mpstat::load_matrix(cfg.file_a, mpstat::kUnboundedValue);
  const auto b = mpstat::load_matrix(cfg.file_b, mpstat::kUnboundedValue);
  cfg.n = std::max({a.rows(), a.cols(), b.cols()});
}

void print_list() {
  std::cout << "protocols:\n";
  for (const auto& p : mpstat::protocol_catalog()) {
    std::cout << "  " << p.name << "\n      " << p.summary << "\n      guarantee: " << p.guarantee << '\n';
  }
  std::cout << "families:\n";
  for (const auto& f : mpstat::family_names()) std::cout << "  " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-party matrix product statistics"};
  app.require_subcommand(0, 1);
  bool list_flag = false;
  app.add_flag("--list", list_flag, "list protocols and families");

  ExperimentConfig cfg;
  std::string stem;
  std::string out_path;
  auto* run = app.add_subcommand("run", "run trials and write CSV");
  run->add_option("--protocol", cfg.protocol, "protocol name");
  add_instance_flags(*run, cfg, stem);
  run->add_option("--p", cfg.p, "norm exponent");
  run->add_option("--eps", cfg.eps, "accuracy");
  run->add_option("--phi", cfg.phi, "heavy-hitter threshold");
  run->add_option("--trials", cfg.trials, "number of trials");
  run->add_option("--boost", cfg.boost, "odd number of repetitions (lp)");
  run->add_option("--c-rho", cfg.c_rho, "row sampling constant");
  run->add_option("--c-gamma", cfg.c_gamma, "level threshold constant");
  run->add_option("--c-alpha", cfg.c_alpha, "universe sampling constant");
  run->add_option("--sketch-c", cfg.sketch_c, "sketch row constant");
  run->add_option("--c-hh", cfg.c_hh, "heavy-hitter sampling constant");
  run->add_flag("--oracle,!--no-oracle", cfg.oracle, "compute exact values up to the cutoff");
  run->add_option("--oracle-cutoff", cfg.oracle_cutoff, "largest n for the exact oracle");
  run->add_flag("--timing", cfg.timing, "fill the wall_ms column");
  run->add_option("--threads", cfg.threads, "worker threads");
  run->add_option("--out", out_path, "CSV path (default stdout)");

  std::string in_path;
  auto* summ = app.add_subcommand("summarize", "summarize a CSV");
  summ->add_option("input", in_path, "CSV path (default stdin)");
  summ->add_option("--out", out_path, "output path (default stdout)");

  auto* gen = app.add_subcommand("gen", "generate an instance with its metadata sidecar");
  add_instance_flags(*gen, cfg, stem);
  gen->add_option("--out", out_path, "output stem")->required();

  auto* list = app.add_subcommand("list", "list protocols and families");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_flag || list->parsed()) {
      print_list();
      return 0;
    }
    auto with_out = [&](auto&& body) {
      if (out_path.empty()) {
        body(std::cout);
      } else {
        std::ofstream f(out_path);
        if (!f) throw mpstat::InvalidInput("cannot open " + out_path);
        body(f);
      }
    };
    if (run->parsed()) {
      resolve_files(cfg, stem);
      record_file_dims(cfg);
      std::vector<std::string> warnings;
      const auto rows = mpstat::run_experiment(cfg, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      with_out([&](std::ostream& o) { mpstat::write_csv(o, cfg, rows); });
      return 0;
    }
    if (summ->parsed()) {
      std::vector<mpstat::SummaryRow> rows;
      if (in_path.empty() || in_path == "-") {
        rows = mpstat::summarize(std::cin);
      } else {
        std::ifstream f(in_path);
        if (!f) throw mpstat::InvalidInput("cannot open " + in_path);
        rows = mpstat::summarize(f);
      }
      with_out([&](std::ostream& o) { mpstat::write_summary(o, rows); });
      return 0;
    }
    if (gen->parsed()) {
      resolve_files(cfg, stem);
      cfg.validate();
      mpstat::HardInstance inst = mpstat::make_instance(cfg, cfg.seed);
      inst.meta.seed = cfg.seed;
      mpstat::save_instance(out_path, inst);
      std::cout << out_path << ".A.txt " << out_path << ".B.txt " << out_path << ".meta.jsonl\n";
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
