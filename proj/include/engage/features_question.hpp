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

// Rule-based question detection: a sentence is a question when it contains
// '?' or an adjacent (question word, auxiliary verb) pair in either order.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/text.hpp"

namespace engage {

struct WordBank {
  std::set<std::string> question_words;
  std::set<std::string> auxiliary_verbs;

  static WordBank defaults() {
    return {{"what", "when", "where", "which", "who", "whom", "whose", "why", "how"},
            {"am", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did", "have",
             "has", "had", "can", "could", "shall", "should", "will", "would", "may", "might",
             "must"}};
  }
};

// One token per line; '#' starts a comment; blank lines ignored.
inline std::set<std::string> parse_word_list(std::string_view content) {
  std::set<std::string> words;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tok = text::trim(line);
    if (!tok.empty()) words.insert(text::lowercase(tok));
  }
  return words;
}

inline std::set<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read word list " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto words = parse_word_list(buf.str());
  if (words.empty()) fail(ErrorCode::MalformedInput, "word list " + path + " is empty");
  return words;
}

inline bool is_question(std::string_view sentence, const WordBank& bank) {
  if (sentence.find('?') != std::string_view::npos) return true;
  const auto tokens = text::normalized_tokens(sentence);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const auto& a = tokens[i];
    const auto& b = tokens[i + 1];
    if ((bank.question_words.count(a) && bank.auxiliary_verbs.count(b)) ||
        (bank.auxiliary_verbs.count(a) && bank.question_words.count(b))) {
      return true;
    }
  }
  return false;
}

struct QuestionFeatures {
  std::optional<double> client_per_turn;     // F04
  std::optional<double> therapist_per_turn;  // F05
  std::optional<double> client_to_therapist; // F06
};

inline QuestionFeatures question_features(const Transcript& t, const WordBank& bank) {
  double client_q = 0, therapist_q = 0, client_turns = 0, therapist_turns = 0;
  for (const auto& turn : t.turns) {
    double q = 0;
    for (const auto& s : split_sentence_text(turn.text)) q += is_question(s, bank) ? 1 : 0;
    if (turn.speaker == Speaker::Client) {
      client_q += q;
      client_turns += 1;
    } else {
      therapist_q += q;
      therapist_turns += 1;
    }
  }
  QuestionFeatures f;
  if (client_turns > 0) f.client_per_turn = client_q / client_turns;
  if (therapist_turns > 0) f.therapist_per_turn = therapist_q / therapist_turns;
  if (therapist_q > 0) f.client_to_therapist = client_q / therapist_q;
  return f;
}

}  // namespace engage
