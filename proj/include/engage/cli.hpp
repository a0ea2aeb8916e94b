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


#pragma once

// Command implementations behind the engage executable. Each returns the
// process exit code: 0 success, 1 failure, 2 partial extraction.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/nlp_backends.hpp"
#include "engage/parallel.hpp"
#include "engage/pipeline.hpp"
#include "engage/protocol.hpp"
#include "engage/report.hpp"
#include "engage/synth.hpp"
#include "json.hpp"

namespace engage {

inline constexpr const char* kServiceUrlEnv = "ENGAGE_MODEL_SERVICE_URL";
inline constexpr const char* kCacheFileName = "embedding_cache.jsonl";

struct CommonArgs {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::optional<std::string> backend;  // "service" or "offline"
  bool offline_fallback = false;
};

// Config file (if any), then flags, then the service URL environment
// variable.
inline RunConfig load_config(const CommonArgs& args) {
  RunConfig c;
  if (!args.config_path.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(args.config_path));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::InvalidArgument, "config " + args.config_path + ": " + e.what());
    }
    c = run_config_from_json(doc);
  }
  if (args.seed) c.seed = *args.seed;
  if (args.backend) {
    if (*args.backend != "service" && *args.backend != "offline") {
      fail(ErrorCode::InvalidArgument, "--backend must be service or offline");
    }
    c.backend.kind = *args.backend == "service" ? BackendKind::Service : BackendKind::Offline;
  }
  if (args.offline_fallback) c.backend.offline_fallback = true;
  if (const char* url = std::getenv(kServiceUrlEnv); url && *url) c.backend.url = url;
  validate(c);
  return c;
}

struct ExtractSummary {
  std::size_t processed = 0;
  std::vector<std::string> failures;  // "file: reason"
  MissingSummary missing;
  std::size_t backend_requests = 0;
};

inline std::vector<std::filesystem::path> transcript_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".json" || ext == ".csv")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline MissingSummary summarize_missing(const std::vector<FeatureVector>& vectors) {
  MissingSummary s;
  for (const auto& fv : vectors) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      if (!fv.values[j]) {
        ++s.missing_per_feature[j];
        ++s.missing_cells;
      }
    }
  }
  s.rows = vectors.size();
  s.feature_cells = s.rows * kFeatureCount;
  s.total_cells = s.rows * (kFeatureCount + 2);
  return s;
}

inline std::string missing_csv(const MissingSummary& s) {
  std::string out = csv::format_row({"feature_id", "missing", "missing_rate"});
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const double rate = s.rows ? static_cast<double>(s.missing_per_feature[j]) / static_cast<double>(s.rows) : 0.0;
    out += csv::format_row({std::string(kFeatureRegistry[j].id), std::to_string(s.missing_per_feature[j]),
                            text::format_double(rate)});
  }
  out += csv::format_row({"all", std::to_string(s.missing_cells), text::format_double(s.missing_rate())});
  return out;
}

// Per-file failures are collected; the remaining transcripts still produce
// rows. Writes the feature CSV and <stem>_missing.csv beside it.
inline ExtractSummary extract_corpus(const std::filesystem::path& corpus, const std::filesystem::path& out_csv,
                                     const RunConfig& config) {
  const auto files = transcript_files(corpus);
  std::unique_ptr<EmbeddingCache> cache;
  std::unique_ptr<NlpBackend> backend;
  ServiceBackend* service = nullptr;
  if (config.backend.kind == BackendKind::Service) {
    const auto cache_path = config.backend.cache.empty() ? (corpus / kCacheFileName).string() : config.backend.cache;
    cache = std::make_unique<EmbeddingCache>(cache_path);
    ServiceOptions opts;
    opts.url = config.backend.url;
    opts.offline_fallback = config.backend.offline_fallback;
    opts.max_in_flight = config.backend.max_in_flight;
    auto s = std::make_unique<ServiceBackend>(opts, cache.get());
    service = s.get();
    backend = std::move(s);
  } else {
    backend = std::make_unique<OfflineBackend>();
  }
  std::vector<std::optional<FeatureVector>> vectors(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    try {
      const auto format = files[i].extension() == ".csv" ? TranscriptFormat::Csv : TranscriptFormat::Json;
      const auto t = parse_transcript(read_file(files[i]), format);
      vectors[i] = extract_features(t, *backend);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  ExtractSummary summary;
  std::vector<FeatureVector> ok;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto name = files[i].filename().string();
    if (vectors[i] && !seen.insert(vectors[i]->session_id).second) {
      errors[i] = "DuplicateSessionId: session '" + vectors[i]->session_id + "' already extracted";
      vectors[i].reset();
    }
    if (vectors[i]) {
      ok.push_back(std::move(*vectors[i]));
    } else {
      summary.failures.push_back(name + ": " + errors[i]);
    }
  }
  summary.processed = ok.size();
  summary.missing = summarize_missing(ok);
  if (service) summary.backend_requests = service->request_count();
  if (out_csv.has_parent_path()) std::filesystem::create_directories(out_csv.parent_path());
  write_file(out_csv, write_feature_csv(ok));
  auto missing_path = out_csv;
  missing_path.replace_filename(out_csv.stem().string() + "_missing.csv");
  write_file(missing_path, missing_csv(summary.missing));
  return summary;
}

inline int cmd_extract(const std::filesystem::path& corpus, const std::filesystem::path& out_csv,
                       const CommonArgs& args, std::ostream& log = std::cerr) {
  try {
    const auto config = load_config(args);
    const auto s = extract_corpus(corpus, out_csv, config);
    log << "extracted " << s.processed << " transcripts to " << out_csv.string() << "\n";
    log << "missing feature cells: " << s.missing.missing_cells << " of " << s.missing.feature_cells << " ("
        << text::format_double(s.missing.missing_rate() * 100) << "%)\n";
    if (config.backend.kind == BackendKind::Service) log << "model service requests: " << s.backend_requests << "\n";
    for (const auto& f : s.failures) log << "failed: " << f << "\n";
    return s.failures.empty() ? 0 : 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

inline RunResult run_features_file(const std::filesystem::path& features, const RunConfig& config) {
  const auto vectors = detail::stage("load", [&] { return read_feature_csv(read_file(features)); });
  MissingSummary missing;
  const Dataset raw = detail::stage("load", [&] { return build_dataset(vectors, &missing); });
  return run_protocol(raw, missing, config);
}

inline int cmd_run(const std::filesystem::path& features, const std::filesystem::path& out_dir,
                   const CommonArgs& args, std::ostream& log = std::cerr) {
  try {
    const auto config = load_config(args);
    const auto r = run_features_file(features, config);
    std::vector<NamedInput> inputs = {{features.filename().string(), read_file(features)}};
    if (!args.config_path.empty()) {
      inputs.push_back({std::filesystem::path(args.config_path).filename().string(), read_file(args.config_path)});
    }
    write_run_outputs(r, out_dir, inputs);
    log << "rows " << r.input.total() << ", after outlier removal " << r.post_outlier.total() << ", holdout "
        << r.holdout_counts.total() << ", train " << r.train_counts.total() << "\n";
    for (const auto& v : r.variants) {
      log << v.spec.name << ": " << v.data.count(Label::Hi) << "/" << v.data.count(Label::Lo) << "\n";
    }
    log << "leakage audit " << (r.audit.passed() ? "passed" : "FAILED") << "\n";
    log << "reports written to " << out_dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

inline void write_corpus(const std::vector<Transcript>& corpus, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& t : corpus) {
    write_file(out_dir / (t.session_id + ".json"), serialize_transcript(t, TranscriptFormat::Json));
  }
}

inline int cmd_synth(std::size_t n_hi, std::size_t n_lo, const std::filesystem::path& out_dir,
                     const CommonArgs& args, std::ostream& log = std::cerr) {
  try {
    const auto config = load_config(args);
    const auto corpus = synth_corpus(n_hi, n_lo, config.seed);
    write_corpus(corpus, out_dir);
    log << "wrote " << corpus.size() << " transcripts to " << out_dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_md,
                      std::ostream& log = std::cerr) {
  try {
    const auto md = render_report(run_dir);
    const auto target = out_md.empty() ? run_dir / "report.md" : out_md;
    write_file(target, md);
    log << "report written to " << target.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace engage
