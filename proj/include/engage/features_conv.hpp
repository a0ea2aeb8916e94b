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

// Conversational-dynamics features: words per turn, turn counts, timing.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/error.hpp"

namespace engage {

// Population moments; kurt is excess kurtosis.
struct MomentStats {
  double mean = 0;
  double sd = 0;
  std::optional<double> skew;
  std::optional<double> kurt;
};

inline MomentStats moment_stats(std::span<const double> xs) {
  if (xs.empty()) fail(ErrorCode::EmptyList, "moment_stats of an empty list");
  const double n = static_cast<double>(xs.size());
  double sum = 0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  MomentStats s;
  s.mean = mean;
  s.sd = std::sqrt(m2);
  if (m2 > 0) {
    if (xs.size() >= 3) s.skew = m3 / std::pow(m2, 1.5);
    if (xs.size() >= 4) s.kurt = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

struct ConvFeatures {
  std::optional<double> therapist_words_mean;     // F01
  std::optional<double> client_words_mean;        // F02
  std::optional<double> words_ratio;              // F03, client over therapist
  std::optional<double> client_turns;             // F07
  std::optional<double> therapist_turns;          // F08
  std::optional<double> turn_ratio;               // F09, client over therapist
  std::optional<double> mean_turn_duration;       // F10
  std::optional<double> therapist_words_sd;       // F13
  std::optional<double> therapist_words_skew;     // F14
  std::optional<double> therapist_words_kurt;     // F15
  std::optional<double> client_words_sd;          // F16
  std::optional<double> client_words_skew;        // F17
  std::optional<double> client_words_kurt;        // F18
};

// Expects a transcript that already went through merge_same_speaker_runs.
inline ConvFeatures conv_features(const Transcript& t) {
  std::vector<double> therapist_words, client_words, durations;
  for (const Turn& turn : t.turns) {
    const double words = static_cast<double>(word_count(turn.text));
    (turn.speaker == Speaker::Therapist ? therapist_words : client_words).push_back(words);
    if (turn.duration_s) durations.push_back(*turn.duration_s);
  }
  ConvFeatures f;
  f.client_turns = static_cast<double>(client_words.size());
  f.therapist_turns = static_cast<double>(therapist_words.size());
  if (!therapist_words.empty()) {
    const auto s = moment_stats(therapist_words);
    f.therapist_words_mean = s.mean;
    f.therapist_words_sd = s.sd;
    f.therapist_words_skew = s.skew;
    f.therapist_words_kurt = s.kurt;
  } else {
    f.therapist_turns.reset();
  }
  if (!client_words.empty()) {
    const auto s = moment_stats(client_words);
    f.client_words_mean = s.mean;
    f.client_words_sd = s.sd;
    f.client_words_skew = s.skew;
    f.client_words_kurt = s.kurt;
  } else {
    f.client_turns.reset();
  }
  if (f.client_words_mean && f.therapist_words_mean && *f.therapist_words_mean > 0) {
    f.words_ratio = *f.client_words_mean / *f.therapist_words_mean;
  }
  if (!client_words.empty() && !therapist_words.empty()) {
    f.turn_ratio = *f.client_turns / *f.therapist_turns;
  }
  if (!durations.empty()) {
    double sum = 0;
    for (double d : durations) sum += d;
    f.mean_turn_duration = sum / static_cast<double>(durations.size());
  }
  return f;
}

}  // namespace engage
