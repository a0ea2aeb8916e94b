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

// Desk-scale synthetic corpus. HI sessions alternate speakers, stay on one
// topic, give the client long and varied turns with questions and a
// positive drift. LO sessions are therapist-led caption fragments with
// short flat-negative client replies and frequent topic switches.

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/pipeline.hpp"
#include "engage/random.hpp"

namespace engage {

namespace synth_detail {

struct Topic {
  std::array<const char*, 6> nouns;
};

inline constexpr std::array<Topic, 8> kTopics = {{
    {{"job", "boss", "deadline", "office", "career", "coworkers"}},
    {{"mother", "father", "kids", "home", "sister", "family"}},
    {{"sleep", "night", "bed", "dreams", "alarm", "mornings"}},
    {{"exercise", "diet", "doctor", "body", "energy", "walks"}},
    {{"drinking", "alcohol", "bar", "weekends", "friends", "habits"}},
    {{"bills", "budget", "debt", "savings", "rent", "spending"}},
    {{"classes", "exams", "grades", "teacher", "homework", "studies"}},
    {{"partner", "trust", "arguments", "dates", "marriage", "plans"}},
}};

// Templates take two nouns; sentences within a topic share vocabulary.
inline constexpr std::array<const char*, 6> kHiTherapist = {
    "It sounds like your %s really matters to you.",
    "Tell me more about the %s and the %s.",
    "How do you feel about the %s right now?",
    "What would change for you if the %s got easier?",
    "You mentioned the %s and the %s earlier, and that seems important.",
    "So the %s has been on your mind this week.",
};

inline constexpr std::array<const char*, 4> kHiClientEarly = {
    "Honestly my %s has been hard lately and the %s makes me worried.",
    "I have been thinking about my %s a lot.",
    "The %s and the %s are connected for me in a way I did not expect before.",
    "It is about the %s mostly.",
};

inline constexpr std::array<const char*, 4> kHiClientLate = {
    "I feel more hopeful about the %s now.",
    "Talking about the %s helps, and I think I am ready to try something with my %s.",
    "Yes, the %s is getting better.",
    "I am proud that I handled the %s and I want to keep that progress going with the %s.",
};

inline constexpr std::array<const char*, 3> kHiClientQuestion = {
    "What should I do about my %s?",
    "How can I talk to them about the %s?",
    "Do you think the %s will improve?",
};

inline constexpr std::array<const char*, 6> kLoTherapist = {
    "You need to think about your %s and your %s.",
    "Did you write down the %s like I asked?",
    "The %s is something we should cover today",
    "Many people have trouble with the %s and the %s.",
    "I want you to consider the %s this week",
    "Let us move on and look at the %s.",
};

inline constexpr std::array<const char*, 7> kLoClient = {
    "no.", "not really.", "I guess.", "nothing.", "I am tired.", "it is hard.", "whatever.",
};

inline std::string fill(const char* tmpl, const Topic& topic, Rng& rng) {
  const char* a = topic.nouns[rng.index(topic.nouns.size())];
  const char* b = topic.nouns[rng.index(topic.nouns.size())];
  std::array<char, 256> buf{};
  std::snprintf(buf.data(), buf.size(), tmpl, a, b);
  return buf.data();
}

template <std::size_t N>
const char* pick(const std::array<const char*, N>& items, Rng& rng) {
  return items[rng.index(N)];
}

inline void add_turn(Transcript& t, Speaker s, std::string text, double& clock, Rng& rng) {
  Turn turn;
  turn.index = t.turns.size();
  turn.speaker = s;
  turn.start_s = clock;
  const double words = static_cast<double>(word_count(text));
  turn.duration_s = 0.35 * words + rng.uniform(0.2, 1.0);
  clock += *turn.duration_s + rng.uniform(0.1, 0.6);
  turn.text = std::move(text);
  t.turns.push_back(std::move(turn));
}

inline Transcript hi_session(std::string id, Rng& rng) {
  Transcript t{std::move(id), Label::Hi, {}};
  const Topic& topic = kTopics[rng.index(kTopics.size())];
  const std::size_t pairs = 10 + rng.index(9);
  double clock = 0;
  for (std::size_t p = 0; p < pairs; ++p) {
    std::string th = fill(pick(kHiTherapist, rng), topic, rng);
    if (rng.uniform() < 0.5) th += " " + fill(pick(kHiTherapist, rng), topic, rng);
    add_turn(t, Speaker::Therapist, std::move(th), clock, rng);
    const bool late = p * 2 >= pairs;
    std::string cl;
    const std::size_t sentences = 1 + rng.index(3);
    for (std::size_t k = 0; k < sentences; ++k) {
      if (!cl.empty()) cl += " ";
      cl += fill(late ? pick(kHiClientLate, rng) : pick(kHiClientEarly, rng), topic, rng);
    }
    if (rng.uniform() < 0.4) cl += " " + fill(pick(kHiClientQuestion, rng), topic, rng);
    add_turn(t, Speaker::Client, std::move(cl), clock, rng);
  }
  return t;
}

// Therapist speech arrives as runs of caption fragments, so the raw turn
// list is therapist-dominated.
inline Transcript lo_session(std::string id, Rng& rng) {
  Transcript t{std::move(id), Label::Lo, {}};
  const std::size_t replies = 5 + rng.index(5);
  std::size_t topic = rng.index(kTopics.size());
  std::size_t until_switch = 2 + rng.index(2);
  double clock = 0;
  for (std::size_t r = 0; r < replies; ++r) {
    const std::size_t fragments = 2 + rng.index(3);
    for (std::size_t f = 0; f < fragments; ++f) {
      if (until_switch-- == 0) {
        topic = (topic + 1 + rng.index(kTopics.size() - 1)) % kTopics.size();
        until_switch = 2 + rng.index(2);
      }
      add_turn(t, Speaker::Therapist, fill(pick(kLoTherapist, rng), kTopics[topic], rng), clock, rng);
    }
    add_turn(t, Speaker::Client, pick(kLoClient, rng), clock, rng);
  }
  add_turn(t, Speaker::Therapist, fill(pick(kLoTherapist, rng), kTopics[topic], rng), clock, rng);
  return t;
}

}  // namespace synth_detail

// Cohort-sized feature table without transcripts: class-shifted Gaussian
// columns with a small share of missing cells.
inline std::vector<FeatureVector> synth_feature_vectors(std::size_t n_hi, std::size_t n_lo, std::uint64_t seed,
                                                        double missing_rate = 0.005, double shift = 1.0) {
  std::vector<FeatureVector> out;
  Rng rng(derive_seed(seed, "synth-features"));
  std::array<double, kFeatureCount> effect{};
  for (auto& e : effect) e = rng.uniform(-1.0, 1.0) * shift;
  for (std::size_t i = 0; i < n_hi + n_lo; ++i) {
    const bool hi = i < n_hi;
    FeatureVector fv;
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%s-%03zu", hi ? "row-hi" : "row-lo", hi ? i + 1 : i - n_hi + 1);
    fv.session_id = buf.data();
    fv.label = hi ? Label::Hi : Label::Lo;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const double v = rng.normal() + (hi ? effect[j] : 0.0);
      if (rng.uniform() >= missing_rate) fv.values[j] = 10.0 + 3.0 * v;
    }
    out.push_back(std::move(fv));
  }
  return out;
}

// Labels are written into each transcript; ids are synth-hi-NNN / synth-lo-NNN.
inline std::vector<Transcript> synth_corpus(std::size_t n_hi, std::size_t n_lo, std::uint64_t seed) {
  if (n_hi < 10 || n_lo < 10) fail(ErrorCode::InvalidArgument, "synth needs at least 10 sessions per class");
  std::vector<Transcript> out;
  auto id = [](const char* prefix, std::size_t i) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%s-%03zu", prefix, i + 1);
    return std::string(buf.data());
  };
  for (std::size_t i = 0; i < n_hi; ++i) {
    Rng rng(derive_seed(derive_seed(seed, "synth-hi"), i));
    out.push_back(synth_detail::hi_session(id("synth-hi", i), rng));
  }
  for (std::size_t i = 0; i < n_lo; ++i) {
    Rng rng(derive_seed(derive_seed(seed, "synth-lo"), i));
    out.push_back(synth_detail::lo_session(id("synth-lo", i), rng));
  }
  return out;
}

// 150 HI / 103 LO rows with 5 HI and 8 LO planted far from the bulk, so
// contamination 13/253 removes exactly those and leaves 145 / 95.
inline std::vector<FeatureVector> cohort_vectors(std::uint64_t seed) {
  auto rows = synth_feature_vectors(150, 103, seed);
  Rng rng(derive_seed(seed, "planted"));
  auto plant = [&](std::size_t i) {
    for (auto& v : rows[i].values) {
      if (v) *v += (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(60.0, 90.0);
    }
  };
  for (std::size_t i = 0; i < 5; ++i) plant(i * 30);
  for (std::size_t i = 0; i < 8; ++i) plant(150 + i * 12);
  return rows;
}

}  // namespace engage
