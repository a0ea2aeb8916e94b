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

// Diarized transcripts: parsing, validation, turn merging and sentence
// segmentation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/text.hpp"
#include "json.hpp"

namespace engage {

enum class Speaker { Therapist, Client };

enum class Label { Lo = 0, Hi = 1 };

inline std::string_view to_string(Speaker s) {
  return s == Speaker::Therapist ? "therapist" : "client";
}

inline std::string_view to_string(Label l) { return l == Label::Hi ? "HI" : "LO"; }

inline std::optional<Label> parse_label(std::string_view s) {
  const auto t = text::uppercase(text::trim(s));
  if (t == "HI") return Label::Hi;
  if (t == "LO") return Label::Lo;
  return std::nullopt;
}

inline Speaker parse_speaker(std::string_view raw) {
  const auto s = text::lowercase(text::trim(raw));
  if (s == "therapist" || s == "counselor") return Speaker::Therapist;
  if (s == "client" || s == "patient") return Speaker::Client;
  fail(ErrorCode::UnknownSpeaker, "unmappable speaker tag '" + std::string(raw) + "'");
}

struct Turn {
  std::size_t index = 0;
  Speaker speaker = Speaker::Therapist;
  std::string text;
  std::optional<double> start_s;
  std::optional<double> duration_s;

  bool operator==(const Turn&) const = default;
};

struct Transcript {
  std::string session_id;
  std::optional<Label> label;
  std::vector<Turn> turns;

  bool operator==(const Transcript&) const = default;
};

struct Sentence {
  std::string text;
  std::size_t turn_index = 0;
  Speaker speaker = Speaker::Therapist;
};

enum class TranscriptFormat { Json, Csv };

// Throws on any invariant violation; used by both parsers.
inline void validate(const Transcript& t) {
  if (t.session_id.empty()) fail(ErrorCode::MalformedInput, "empty session_id");
  if (t.turns.empty()) fail(ErrorCode::EmptyTranscript, "session '" + t.session_id + "' has no turns");
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    const Turn& turn = t.turns[i];
    const std::string where = "session '" + t.session_id + "' turn " + std::to_string(i);
    if (turn.index != i) fail(ErrorCode::MalformedInput, where + ": non-contiguous turn index");
    if (text::trim(turn.text).empty()) fail(ErrorCode::MalformedInput, where + ": empty text");
    if (turn.start_s && !(std::isfinite(*turn.start_s) && *turn.start_s >= 0)) {
      fail(ErrorCode::MalformedInput, where + ": start_s must be >= 0");
    }
    if (turn.duration_s && !(std::isfinite(*turn.duration_s) && *turn.duration_s >= 0)) {
      fail(ErrorCode::MalformedInput, where + ": duration_s must be >= 0");
    }
    if (turn.start_s && turn.duration_s && *turn.duration_s <= 0) {
      fail(ErrorCode::MalformedInput, where + ": timed turn needs duration_s > 0");
    }
  }
}

namespace detail {

inline std::optional<double> optional_number(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(ErrorCode::MalformedInput, std::string(key) + " must be a number or null");
  return it->get<double>();
}

inline Transcript parse_json(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedInput, e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::MalformedInput, "transcript must be a JSON object");
  Transcript t;
  auto sid = doc.find("session_id");
  if (sid == doc.end() || !sid->is_string()) fail(ErrorCode::MalformedInput, "missing string session_id");
  t.session_id = sid->get<std::string>();
  if (auto lab = doc.find("label"); lab != doc.end() && !lab->is_null()) {
    if (!lab->is_string()) fail(ErrorCode::MalformedInput, "label must be \"HI\", \"LO\" or null");
    t.label = parse_label(lab->get<std::string>());
    if (!t.label) fail(ErrorCode::MalformedInput, "label must be \"HI\", \"LO\" or null");
  }
  auto turns = doc.find("turns");
  if (turns == doc.end() || !turns->is_array()) fail(ErrorCode::MalformedInput, "missing turns array");
  for (const auto& item : *turns) {
    if (!item.is_object()) fail(ErrorCode::MalformedInput, "turn must be an object");
    auto sp = item.find("speaker");
    auto tx = item.find("text");
    if (sp == item.end() || !sp->is_string()) fail(ErrorCode::MalformedInput, "turn without speaker");
    if (tx == item.end() || !tx->is_string()) fail(ErrorCode::MalformedInput, "turn without text");
    Turn turn;
    turn.index = t.turns.size();
    turn.speaker = parse_speaker(sp->get<std::string>());
    turn.text = tx->get<std::string>();
    turn.start_s = optional_number(item, "start_s");
    turn.duration_s = optional_number(item, "duration_s");
    t.turns.push_back(std::move(turn));
  }
  return t;
}

inline Transcript parse_csv(std::string_view raw) {
  const auto rows = csv::parse(raw);
  if (rows.empty()) fail(ErrorCode::MalformedInput, "empty CSV");
  const std::vector<std::string> expected = {"session_id", "label",    "turn_index", "speaker",
                                             "text",       "start_s", "duration_s"};
  std::vector<std::size_t> col(expected.size(), SIZE_MAX);
  for (std::size_t c = 0; c < rows[0].size(); ++c) {
    auto it = std::find(expected.begin(), expected.end(), std::string(text::trim(rows[0][c])));
    if (it != expected.end()) col[static_cast<std::size_t>(it - expected.begin())] = c;
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (col[k] == SIZE_MAX) fail(ErrorCode::MalformedInput, "CSV missing column " + expected[k]);
  }
  Transcript t;
  if (rows.size() < 2) fail(ErrorCode::EmptyTranscript, "CSV transcript has no turns");
  std::vector<std::pair<long long, Turn>> indexed;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < rows[0].size()) fail(ErrorCode::MalformedInput, "short CSV row " + std::to_string(r));
    const auto& sid = row[col[0]];
    if (r == 1) {
      t.session_id = sid;
      if (!text::trim(row[col[1]]).empty()) {
        t.label = parse_label(row[col[1]]);
        if (!t.label) fail(ErrorCode::MalformedInput, "bad label '" + row[col[1]] + "'");
      }
    } else if (sid != t.session_id) {
      fail(ErrorCode::MalformedInput, "CSV mixes session ids");
    }
    const auto idx = text::parse_double(row[col[2]]);
    if (!idx || *idx < 0 || std::floor(*idx) != *idx) fail(ErrorCode::MalformedInput, "bad turn_index");
    Turn turn;
    turn.speaker = parse_speaker(row[col[3]]);
    turn.text = row[col[4]];
    auto number = [&](std::size_t k) -> std::optional<double> {
      const auto& cell = row[col[k]];
      if (text::trim(cell).empty()) return std::nullopt;
      auto v = text::parse_double(cell);
      if (!v) fail(ErrorCode::MalformedInput, "bad number '" + cell + "'");
      return v;
    };
    turn.start_s = number(5);
    turn.duration_s = number(6);
    indexed.emplace_back(static_cast<long long>(*idx), std::move(turn));
  }
  std::stable_sort(indexed.begin(), indexed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < indexed.size(); ++i) {
    if (indexed[i].first != static_cast<long long>(i)) {
      fail(ErrorCode::MalformedInput, "turn_index values must be contiguous from 0");
    }
    indexed[i].second.index = i;
    t.turns.push_back(std::move(indexed[i].second));
  }
  return t;
}

}  // namespace detail

inline Transcript parse_transcript(std::string_view raw, TranscriptFormat format) {
  Transcript t = format == TranscriptFormat::Json ? detail::parse_json(raw) : detail::parse_csv(raw);
  validate(t);
  return t;
}

inline std::string serialize_transcript(const Transcript& t, TranscriptFormat format) {
  if (format == TranscriptFormat::Json) {
    nlohmann::json doc;
    doc["session_id"] = t.session_id;
    doc["label"] = t.label ? nlohmann::json(std::string(to_string(*t.label))) : nlohmann::json(nullptr);
    doc["turns"] = nlohmann::json::array();
    for (const auto& turn : t.turns) {
      nlohmann::json item;
      item["speaker"] = std::string(to_string(turn.speaker));
      item["text"] = turn.text;
      item["start_s"] = turn.start_s ? nlohmann::json(*turn.start_s) : nlohmann::json(nullptr);
      item["duration_s"] = turn.duration_s ? nlohmann::json(*turn.duration_s) : nlohmann::json(nullptr);
      doc["turns"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
  }
  std::string out = csv::format_row(
      {"session_id", "label", "turn_index", "speaker", "text", "start_s", "duration_s"});
  for (const auto& turn : t.turns) {
    out += csv::format_row({t.session_id, t.label ? std::string(to_string(*t.label)) : "",
                            std::to_string(turn.index), std::string(to_string(turn.speaker)),
                            turn.text, turn.start_s ? text::format_double(*turn.start_s) : "",
                            turn.duration_s ? text::format_double(*turn.duration_s) : ""});
  }
  return out;
}

// Concatenates maximal consecutive same-speaker runs into single turns.
inline Transcript merge_same_speaker_runs(const Transcript& t) {
  Transcript out{t.session_id, t.label, {}};
  bool all_timed = true;
  for (const Turn& turn : t.turns) {
    if (!out.turns.empty() && out.turns.back().speaker == turn.speaker) {
      Turn& last = out.turns.back();
      last.text = std::string(text::trim(last.text)) + " " + std::string(text::trim(turn.text));
      all_timed = all_timed && turn.duration_s.has_value();
      if (all_timed && last.duration_s) {
        *last.duration_s += *turn.duration_s;
      } else {
        last.duration_s.reset();
      }
      continue;
    }
    all_timed = turn.duration_s.has_value();
    Turn copy = turn;
    copy.index = out.turns.size();
    out.turns.push_back(std::move(copy));
  }
  return out;
}

// Splits on runs of {., !, ?} followed by whitespace or end of text. The
// terminator run stays with the left fragment.
inline std::vector<std::string> split_sentence_text(std::string_view s) {
  std::vector<std::string> out;
  auto is_term = [](char c) { return c == '.' || c == '!' || c == '?'; };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_term(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_term(s[j])) ++j;
      if (j == s.size() || text::is_space(s[j])) {
        auto frag = text::trim(s.substr(start, j - start));
        if (!frag.empty()) out.emplace_back(frag);
        start = j;
      }
      i = j;
      continue;
    }
    ++i;
  }
  auto tail = text::trim(s.substr(start));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

inline std::vector<Sentence> split_sentences(const Transcript& t) {
  std::vector<Sentence> out;
  for (const Turn& turn : t.turns) {
    for (auto& s : split_sentence_text(turn.text)) {
      out.push_back(Sentence{std::move(s), turn.index, turn.speaker});
    }
  }
  return out;
}

inline std::size_t word_count(std::string_view s) {
  return text::split_whitespace(s).size();
}

}  // namespace engage
