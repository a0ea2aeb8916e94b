// Copyright (c) 2026 The Engage Authors. All Rights Reserved.
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


#include <CLI11.hpp>

#include "engage/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Counseling-session engagement classifier"};
  app.require_subcommand(1);
  engage::CommonArgs common;
  std::uint64_t seed = 0;
  std::string backend;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed (overrides the config)");
    cmd->add_option("--config", common.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  };

  std::string corpus, out, features, run_dir;
  std::size_t n_hi = 75, n_lo = 75;

  auto* extract = app.add_subcommand("extract", "Extract the 42 features from a transcript directory");
  extract->add_option("corpus", corpus, "Directory of transcript .json/.csv files")->required();
  extract->add_option("--out", out, "Feature CSV to write")->required();
  extract->add_option("--backend", backend, "NLP backend")->check(CLI::IsMember({"service", "offline"}));
  extract->add_flag("--offline-fallback", common.offline_fallback,
                    "Use offline embeddings if the model service is unreachable");
  add_common(extract);

  auto* run = app.add_subcommand("run", "Preprocess, resample, evaluate and explain a feature CSV");
  run->add_option("features", features, "Feature CSV from extract")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory")->required();
  add_common(run);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled transcript corpus");
  synth->add_option("--n-hi", n_hi, "HI sessions")->capture_default_str();
  synth->add_option("--n-lo", n_lo, "LO sessions")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();
  add_common(synth);

  auto* report = app.add_subcommand("report", "Render a run directory as Markdown tables");
  report->add_option("run_dir", run_dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", out, "Markdown file (default: <run_dir>/report.md)");

  CLI11_PARSE(app, argc, argv);

  for (auto* cmd : {extract, run, synth}) {
    if (cmd->parsed() && cmd->count("--seed")) common.seed = seed;
  }
  if (!backend.empty()) common.backend = backend;
  engage::set_worker_count(threads);

  if (extract->parsed()) return engage::cmd_extract(corpus, out, common);
  if (run->parsed()) return engage::cmd_run(features, out, common);
  if (synth->parsed()) return engage::cmd_synth(n_hi, n_lo, out, common);
  return engage::cmd_report(run_dir, out);
}
