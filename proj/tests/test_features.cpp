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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "engage/features_conv.hpp"
#include "engage/features_question.hpp"
#include "engage/features_semantic.hpp"
#include "engage/features_sentiment.hpp"
#include "engage/random.hpp"

namespace engage {
namespace {

Transcript make(std::initializer_list<std::pair<Speaker, const char*>> turns) {
  Transcript t{"f", Label::Hi, {}};
  for (auto [sp, text] : turns) t.turns.push_back(Turn{t.turns.size(), sp, text, {}, {}});
  return t;
}

constexpr auto T = Speaker::Therapist;
constexpr auto C = Speaker::Client;

// Textbook raw-moment route, accumulated in long double.
struct Reference {
  long double mean, sd, skew, kurt;
};
Reference reference_moments(const std::vector<double>& xs) {
  long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  const long double n = xs.size();
  for (double x : xs) {
    long double v = x;
    s1 += v;
    s2 += v * v;
    s3 += v * v * v;
    s4 += v * v * v * v;
  }
  const long double m = s1 / n;
  const long double c2 = s2 / n - m * m;
  const long double c3 = s3 / n - 3 * m * s2 / n + 2 * m * m * m;
  const long double c4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m * m * m * m;
  return {m, std::sqrt(c2), c3 / std::pow(c2, 1.5L), c4 / (c2 * c2) - 3};
}

TEST(MomentStats, Examples) {
  const auto flat = moment_stats(std::vector<double>{5, 5, 5});
  EXPECT_DOUBLE_EQ(flat.mean, 5);
  EXPECT_DOUBLE_EQ(flat.sd, 0);
  EXPECT_FALSE(flat.skew);
  EXPECT_FALSE(flat.kurt);

  const auto s = moment_stats(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(1.25), 1e-15);
  EXPECT_NEAR(*s.skew, 0.0, 1e-15);
  EXPECT_NEAR(*s.kurt, 2.5625 / (1.25 * 1.25) - 3, 1e-12);
  EXPECT_NEAR(*s.kurt, -1.36, 1e-12);

  const auto sym = moment_stats(std::vector<double>{-3, -1, 0, 1, 3, 7, 9, 10, 12, 14});
  const auto mirrored = moment_stats(std::vector<double>{3, 1, 0, -1, -3, -7, -9, -10, -12, -14});
  EXPECT_NEAR(*sym.skew, -*mirrored.skew, 1e-12);
  EXPECT_NEAR(*moment_stats(std::vector<double>{1, 5, 9, 13, 17}).skew, 0.0, 1e-12);

  EXPECT_FALSE(moment_stats(std::vector<double>{1, 2}).skew);
  EXPECT_TRUE(moment_stats(std::vector<double>{1, 2, 4}).skew);
  EXPECT_FALSE(moment_stats(std::vector<double>{1, 2, 4}).kurt);
  EXPECT_THROW(moment_stats(std::vector<double>{}), Error);
}

TEST(MomentStats, MatchesRawMomentReference) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> xs(4 + rng.index(60));
    for (double& x : xs) x = rng.normal() * 3 + rng.uniform(-2, 2);
    const auto s = moment_stats(xs);
    const auto r = reference_moments(xs);
    EXPECT_NEAR(s.mean, static_cast<double>(r.mean), 1e-9);
    EXPECT_NEAR(s.sd, static_cast<double>(r.sd), 1e-9);
    EXPECT_NEAR(*s.skew, static_cast<double>(r.skew), 1e-9);
    EXPECT_NEAR(*s.kurt, static_cast<double>(r.kurt), 1e-9);
  }
}

TEST(ConvFeatures, HandCount) {
  const auto f = conv_features(make({{T, "a b c"}, {C, "d e"}, {T, "f"}}));
  EXPECT_DOUBLE_EQ(*f.therapist_words_mean, 2);
  EXPECT_DOUBLE_EQ(*f.client_words_mean, 2);
  EXPECT_DOUBLE_EQ(*f.words_ratio, 1);
  EXPECT_DOUBLE_EQ(*f.client_turns, 1);
  EXPECT_DOUBLE_EQ(*f.therapist_turns, 2);
  EXPECT_DOUBLE_EQ(*f.turn_ratio, 0.5);
  EXPECT_DOUBLE_EQ(*f.therapist_words_sd, 1);
  EXPECT_FALSE(f.therapist_words_skew);
  EXPECT_DOUBLE_EQ(*f.client_words_sd, 0);
  EXPECT_FALSE(f.mean_turn_duration);
}

TEST(ConvFeatures, NoClientTurns) {
  const auto f = conv_features(make({{T, "hello there"}}));
  EXPECT_TRUE(f.therapist_words_mean);
  EXPECT_FALSE(f.client_words_mean);
  EXPECT_FALSE(f.words_ratio);
  EXPECT_FALSE(f.client_turns);
  EXPECT_FALSE(f.turn_ratio);
  EXPECT_FALSE(f.client_words_sd);
  EXPECT_FALSE(f.client_words_skew);
  EXPECT_FALSE(f.client_words_kurt);
}

TEST(ConvFeatures, DurationMeanOverTimedTurns) {
  auto t = make({{T, "a"}, {C, "b"}, {T, "c"}});
  t.turns[0].duration_s = 2.0;
  t.turns[2].duration_s = 4.0;
  EXPECT_DOUBLE_EQ(*conv_features(t).mean_turn_duration, 3.0);
}

TEST(ConvFeatures, DuplicatingTurnsKeepsMeansDoublesCounts) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Transcript t{"d", {}, {}};
    const std::size_t n = 2 + rng.index(10);
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      for (std::size_t w = 0, k = 1 + rng.index(9); w < k; ++w) text += "w ";
      t.turns.push_back(Turn{i, i % 2 ? C : T, text, {}, {}});
    }
    Transcript doubled{"d", {}, {}};
    for (int rep = 0; rep < 2; ++rep) {
      for (const auto& turn : t.turns) {
        doubled.turns.push_back(turn);
        doubled.turns.back().index = doubled.turns.size() - 1;
      }
    }
    const auto a = conv_features(t);
    const auto b = conv_features(doubled);
    EXPECT_NEAR(*a.therapist_words_mean, *b.therapist_words_mean, 1e-12);
    EXPECT_NEAR(*a.client_words_mean, *b.client_words_mean, 1e-12);
    EXPECT_NEAR(*a.words_ratio, *b.words_ratio, 1e-12);
    EXPECT_DOUBLE_EQ(*b.client_turns, 2 * *a.client_turns);
    EXPECT_DOUBLE_EQ(*b.therapist_turns, 2 * *a.therapist_turns);
    EXPECT_EQ(*a.turn_ratio * *a.therapist_turns, *a.client_turns);
  }
}

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 1}, std::vector<double>{2, 2}), 1.0, 1e-15);
  EXPECT_NEAR(cosine(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 11.0 / (std::sqrt(5.0) * 5.0),
              1e-15);
  EXPECT_NEAR(cosine(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 0.98387, 1e-5);
  EXPECT_THROW(cosine(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 2}), Error);
}

std::vector<Embedding> random_embeddings(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<Embedding> es(n);
  for (auto& e : es) {
    e.values.resize(dim);
    for (double& x : e.values) x = rng.normal();
  }
  return es;
}

double brute_cosine(const Embedding& a, const Embedding& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

TEST(Similarities, SizesAndDegenerate) {
  Rng rng(1);
  EXPECT_EQ(all_pairs_similarities(random_embeddings(rng, 4, 3)).values.size(), 6u);
  EXPECT_EQ(adjacent_similarities(random_embeddings(rng, 5, 3)).values.size(), 4u);
  std::vector<Embedding> same(4, Embedding{{0.3, 0.4}, EmbeddingModel::Sbert});
  for (double v : all_pairs_similarities(same).values) EXPECT_NEAR(v, 1.0, 1e-15);
  std::vector<Embedding> alt;
  for (int i = 0; i < 6; ++i) alt.push_back(Embedding{i % 2 ? std::vector<double>{1, 0} : std::vector<double>{0, 1}});
  for (double v : adjacent_similarities(alt).values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(all_pairs_similarities(random_embeddings(rng, 1, 3)), Error);
  EXPECT_THROW(adjacent_similarities(random_embeddings(rng, 1, 3)), Error);
}

TEST(Similarities, MatchBruteForceOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto es = random_embeddings(rng, 2 + rng.index(12), 1 + rng.index(16));
    const auto all = all_pairs_similarities(es);
    const auto adj = adjacent_similarities(es);
    std::size_t k = 0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      for (std::size_t j = i + 1; j < es.size(); ++j) {
        EXPECT_EQ(all.values[k], brute_cosine(es[i], es[j]));
        if (j == i + 1) {
          EXPECT_EQ(adj.values[i], all.values[k]);
        }
        ++k;
      }
    }
    for (double v : all.values) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Similarities, PermutationKeepsAllPairsMean) {
  Rng rng(4);
  auto es = random_embeddings(rng, 7, 5);
  const double before = moment_stats(all_pairs_similarities(es).values).mean;
  rng.shuffle(std::span<Embedding>(es));
  EXPECT_NEAR(moment_stats(all_pairs_similarities(es).values).mean, before, 1e-12);
}

std::vector<Sentence> sentences_of(std::initializer_list<const char*> texts) {
  std::vector<Sentence> out;
  for (const char* t : texts) out.push_back(Sentence{t, out.size(), T});
  return out;
}

TEST(SemanticFeatures, Degenerate) {
  OfflineBackend backend;
  for (const auto& v : semantic_features(sentences_of({"only one"}), backend)) EXPECT_FALSE(v);
  const auto same = semantic_features(sentences_of({"same words", "same words", "same words"}), backend);
  for (std::size_t b = 0; b < 3; ++b) {
    EXPECT_NEAR(*same[b * 8 + 0], 1.0, 1e-12);
    EXPECT_NEAR(*same[b * 8 + 1], 0.0, 1e-12);
    EXPECT_FALSE(same[b * 8 + 2]);
    EXPECT_FALSE(same[b * 8 + 3]);
    EXPECT_NEAR(*same[b * 8 + 4], 1.0, 1e-12);
  }
}

TEST(SemanticFeatures, FiveSentenceFixtureMatchesPythonOracle) {
  // Values from tests/oracles/semantic_oracle.py (independent hashing and
  // scipy population moments).
  const double block[8] = {0.10583909632782743, 0.08795474192139846, 0.6203219113985589,
                           0.10667113883180068, 0.07074785685133532, 0.0733781380286619,
                           0.20364745001897266, -1.7332461739321137};
  OfflineBackend backend;
  const auto f = semantic_features(
      sentences_of({"How have you been feeling this week?", "I want to hear about work.",
                    "Work has been stressful.", "I feel tired.", "Tell me more about work."}),
      backend);
  for (std::size_t k = 0; k < 24; ++k) {
    ASSERT_TRUE(f[k]) << k;
    EXPECT_NEAR(*f[k], block[k % 8], 1e-12) << "slot " << k;
  }
}

TEST(WeightedSentiment, Examples) {
  const std::vector<SentimentScore> two = {{3, 0.9}, {1, 0.5}};
  EXPECT_NEAR(weighted_sentiment(two), 3.2 / 1.4, 1e-12);
  EXPECT_NEAR(weighted_sentiment(two), 2.2857, 1e-4);
  const std::vector<SentimentScore> one = {{2, 0.7}};
  EXPECT_DOUBLE_EQ(weighted_sentiment(one), 2);
  const std::vector<SentimentScore> zero = {{3, 0.0}, {1, 0.0}};
  EXPECT_DOUBLE_EQ(weighted_sentiment(zero), 2);
  EXPECT_THROW(weighted_sentiment(std::vector<SentimentScore>{}), Error);
}

TEST(WeightedSentiment, Properties) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SentimentScore> s(1 + rng.index(10));
    const int constant = 1 + static_cast<int>(rng.index(3));
    for (auto& x : s) x = {1 + static_cast<int>(rng.index(3)), rng.uniform()};
    const double w = weighted_sentiment(s);
    EXPECT_GE(w, 1.0);
    EXPECT_LE(w, 3.0);
    auto scaled = s;
    for (auto& x : scaled) x.confidence *= 3.7;
    EXPECT_NEAR(weighted_sentiment(scaled), w, 1e-12);
    for (auto& x : s) x.label = constant;
    EXPECT_NEAR(weighted_sentiment(s), constant, 1e-12);
  }
}

TEST(SentimentChanges, Examples) {
  EXPECT_EQ(sentiment_changes(std::vector<int>{3, 3, 1, 2}), 2u);
  EXPECT_EQ(sentiment_changes(std::vector<int>{2}), 0u);
  EXPECT_EQ(sentiment_changes(std::vector<int>{}), 0u);
  EXPECT_EQ(sentiment_changes(std::vector<int>{1, 2, 1, 2, 1}), 4u);
}

TEST(SentimentFeatures, ClientTurnsOnly) {
  OfflineBackend backend;
  const auto none = sentiment_features(make({{T, "great"}}), backend);
  EXPECT_FALSE(none.client_sentiment);
  EXPECT_FALSE(none.client_changes);

  const auto one = sentiment_features(make({{T, "awful"}, {C, "great day"}}), backend);
  EXPECT_DOUBLE_EQ(*one.client_sentiment, 3);
  EXPECT_DOUBLE_EQ(*one.client_changes, 0);

  // Lexicon by hand: (3, 1/2), (3, 2/3), (1, 2/3), (2, 0.34).
  const auto f = sentiment_features(make({{C, "I feel good today"},
                                          {T, "that is terrible news"},
                                          {C, "work is great and wonderful"},
                                          {C, "I am sad and tired"},
                                          {T, "ok"},
                                          {C, "maybe"}}),
                                    backend);
  const double num = 3 * 0.5 + 3 * (2.0 / 3) + 1 * (2.0 / 3) + 2 * 0.34;
  const double den = 0.5 + 2.0 / 3 + 2.0 / 3 + 0.34;
  EXPECT_NEAR(*f.client_sentiment, num / den, 1e-12);
  EXPECT_DOUBLE_EQ(*f.client_changes, 2);
}

TEST(IsQuestion, Rules) {
  const auto bank = WordBank::defaults();
  EXPECT_TRUE(is_question("What do you think?", bank));
  EXPECT_TRUE(is_question("where should we go", bank));
  EXPECT_TRUE(is_question("should what happen", bank));
  EXPECT_FALSE(is_question("I am fine", bank));
  EXPECT_FALSE(is_question("should I go", bank));
  EXPECT_TRUE(is_question("WHERE SHOULD WE GO", bank));
}

TEST(IsQuestion, CaseInsensitiveAndMonotone) {
  const auto bank = WordBank::defaults();
  Rng rng(12);
  const char* words[] = {"what", "is", "I", "How", "could", "go", "home", "Do", "you", "why"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (std::size_t k = 0, n = 1 + rng.index(6); k < n; ++k) s += std::string(words[rng.index(10)]) + " ";
    EXPECT_EQ(is_question(s, bank), is_question(text::uppercase(s), bank));
    EXPECT_TRUE(is_question(s + "?", bank));
  }
}

TEST(WordBankFile, ParsesCommentsAndBlankLines) {
  const auto words = parse_word_list("# header\nWhat\n\n  how  # trailing\n#only comment\nwhy\n");
  EXPECT_EQ(words, (std::set<std::string>{"what", "how", "why"}));
  const auto q = load_word_list(std::string(ENGAGE_DATA_DIR) + "/question_words.txt");
  const auto a = load_word_list(std::string(ENGAGE_DATA_DIR) + "/auxiliary_verbs.txt");
  EXPECT_EQ(q, WordBank::defaults().question_words);
  EXPECT_EQ(a, WordBank::defaults().auxiliary_verbs);
}

TEST(QuestionFeatures, HandCount) {
  const auto bank = WordBank::defaults();
  const auto f = question_features(make({{T, "How are you? What brings you here?"},
                                         {C, "Why do I feel this way?"},
                                         {T, "Tell me. Where does it hurt?"},
                                         {C, "my back"},
                                         {T, "Is it bad? ok."},
                                         {C, "can you help? maybe."},
                                         {T, "Yes."},
                                         {C, "thanks"}}),
                                    bank);
  // Client: 2 questions / 4 turns; therapist: 4 questions / 4 turns.
  EXPECT_DOUBLE_EQ(*f.client_per_turn, 0.5);
  EXPECT_DOUBLE_EQ(*f.therapist_per_turn, 1.0);
  EXPECT_DOUBLE_EQ(*f.client_to_therapist, 0.5);
}

TEST(QuestionFeatures, ZeroDenominatorsAndBigramPath) {
  const auto bank = WordBank::defaults();
  const auto f = question_features(make({{T, "tell me more"}, {C, "how could I stop"}}), bank);
  EXPECT_FALSE(f.client_to_therapist);
  EXPECT_DOUBLE_EQ(*f.therapist_per_turn, 0.0);
  EXPECT_GT(*f.client_per_turn, 0.0);
  const auto only_t = question_features(make({{T, "what is it?"}}), bank);
  EXPECT_FALSE(only_t.client_per_turn);
}

}  // namespace
}  // namespace engage
