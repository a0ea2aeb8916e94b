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

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/nlp_backends.hpp"

namespace engage {

// Confidence-weighted mean label; plain mean when all confidences are zero.
inline double weighted_sentiment(std::span<const SentimentScore> scores) {
  if (scores.empty()) fail(ErrorCode::EmptyList, "weighted_sentiment of no scores");
  double num = 0, den = 0, plain = 0;
  int lo = scores[0].label, hi = scores[0].label;
  for (const auto& s : scores) {
    num += s.label * s.confidence;
    den += s.confidence;
    plain += s.label;
    lo = std::min(lo, s.label);
    hi = std::max(hi, s.label);
  }
  const double mean = den > 0 ? num / den : plain / static_cast<double>(scores.size());
  // A convex combination; clamp away rounding outside the label range.
  return std::clamp(mean, static_cast<double>(lo), static_cast<double>(hi));
}

inline std::size_t sentiment_changes(std::span<const int> labels) {
  std::size_t changes = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[i - 1]) ++changes;
  }
  return changes;
}

struct SentimentFeatures {
  std::optional<double> client_sentiment;  // F11
  std::optional<double> client_changes;    // F12
};

// Scores client turns only; therapist turns between them are ignored.
inline SentimentFeatures sentiment_features(const Transcript& t, NlpBackend& backend) {
  std::vector<std::string> client_texts;
  for (const auto& turn : t.turns) {
    if (turn.speaker == Speaker::Client) client_texts.push_back(turn.text);
  }
  if (client_texts.empty()) return {};
  const auto scores = backend.sentiment_batch(client_texts);
  std::vector<int> labels;
  labels.reserve(scores.size());
  for (const auto& s : scores) labels.push_back(s.label);
  return {weighted_sentiment(scores), static_cast<double>(sentiment_changes(labels))};
}

}  // namespace engage
