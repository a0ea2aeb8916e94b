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

// Sentence-embedding and sentiment backends. The offline backend is a pure,
// deterministic stand-in (feature hashing + a polarity lexicon); the service
// backend speaks the model-service HTTP protocol.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "engage/error.hpp"
#include "engage/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace engage {

enum class EmbeddingModel { Sakil, PromCse, Sbert, HashingOffline };

inline std::string_view to_string(EmbeddingModel m) {
  switch (m) {
    case EmbeddingModel::Sakil: return "sakil";
    case EmbeddingModel::PromCse: return "promcse";
    case EmbeddingModel::Sbert: return "sbert";
    case EmbeddingModel::HashingOffline: return "hashing";
  }
  return "unknown";
}

struct Embedding {
  std::vector<double> values;
  EmbeddingModel model = EmbeddingModel::HashingOffline;
};

// label: 1 negative, 2 neutral, 3 positive.
struct SentimentScore {
  int label = 2;
  double confidence = 0.0;

  bool operator==(const SentimentScore&) const = default;
};

inline constexpr std::size_t kHashingDim = 256;
inline constexpr std::uint64_t kHashingSeed = 0xcbf29ce484222325ULL;  // FNV-1a 64 offset basis

// FNV-1a over the bytes, seeded with the FNV offset basis, followed by the
// SplitMix64 finalizer so that bucket and sign bits are well mixed.
inline std::uint64_t ngram_hash(std::string_view s) {
  std::uint64_t h = kHashingSeed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

struct HashingOptions {
  std::size_t dim = kHashingDim;
  // Unsigned hashing yields non-negative vectors (cosine in [0, 1]).
  bool signed_buckets = true;
};

inline Embedding hashing_embed(std::string_view sentence, const HashingOptions& opts = {}) {
  if (text::trim(sentence).empty()) fail(ErrorCode::EmptySentence, "cannot embed an empty sentence");
  const auto tokens = text::normalized_tokens(sentence);
  std::vector<double> v(opts.dim, 0.0);
  auto add = [&](std::string_view gram) {
    const std::uint64_t h = ngram_hash(gram);
    const double sign = (opts.signed_buckets && (h >> 63)) ? -1.0 : 1.0;
    v[h % opts.dim] += sign;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  // 2n-1 n-grams is odd, so at least one bucket is non-zero.
  for (double& x : v) x /= norm;
  return Embedding{std::move(v), EmbeddingModel::HashingOffline};
}

namespace lexicon {

inline const std::unordered_set<std::string>& positive_words() {
  static const std::unordered_set<std::string> words = {
      "good", "great", "wonderful", "happy", "glad", "love", "like", "better", "best",
      "excellent", "amazing", "awesome", "nice", "hope", "hopeful", "helpful", "proud",
      "excited", "confident", "calm", "relieved", "thanks", "thank", "grateful", "enjoy",
      "enjoyed", "fine", "positive", "progress", "improve", "improved", "improving", "succeed",
      "success", "strong", "support", "supportive", "comfortable", "safe", "fantastic",
      "pleased", "ready", "motivated", "optimistic", "perfect", "right", "agree", "yes",
      "sure", "absolutely", "definitely", "healthy", "care", "appreciate", "useful", "easier",
      "peaceful", "cheerful", "encouraged", "accomplished"};
  return words;
}

inline const std::unordered_set<std::string>& negative_words() {
  static const std::unordered_set<std::string> words = {
      "bad", "sad", "angry", "upset", "hate", "worse", "worst", "terrible", "awful",
      "horrible", "afraid", "scared", "anxious", "nervous", "worried", "worry", "stress",
      "stressed", "depressed", "hopeless", "tired", "exhausted", "lonely", "hurt", "pain",
      "painful", "difficult", "hard", "struggle", "struggling", "fail", "failed", "failure",
      "problem", "problems", "wrong", "annoyed", "frustrated", "frustrating", "guilty",
      "ashamed", "miserable", "unhappy", "no", "never", "nothing", "useless", "weak",
      "sick", "fear", "cry", "crying", "lost", "mad", "boring", "bored", "hopelessness",
      "overwhelmed", "confused", "pointless"};
  return words;
}

}  // namespace lexicon

inline SentimentScore lexicon_sentiment(std::string_view s) {
  if (text::trim(s).empty()) fail(ErrorCode::EmptySentence, "cannot score empty text");
  int pos = 0;
  int neg = 0;
  for (const auto& tok : text::normalized_tokens(s)) {
    if (lexicon::positive_words().count(tok)) ++pos;
    if (lexicon::negative_words().count(tok)) ++neg;
  }
  SentimentScore score;
  score.label = pos > neg ? 3 : (neg > pos ? 1 : 2);
  score.confidence = std::max(0.34, std::abs(pos - neg) / static_cast<double>(pos + neg + 1));
  return score;
}

class NlpBackend {
 public:
  virtual ~NlpBackend() = default;
  virtual std::vector<Embedding> embed_batch(EmbeddingModel model,
                                             std::span<const std::string> sentences) = 0;
  virtual std::vector<SentimentScore> sentiment_batch(std::span<const std::string> texts) = 0;
};

namespace detail {

inline void require_non_empty(std::span<const std::string> items) {
  if (items.empty()) fail(ErrorCode::EmptyList, "batch must contain at least one item");
  for (const auto& s : items) {
    if (text::trim(s).empty()) fail(ErrorCode::EmptySentence, "batch contains an empty string");
  }
}

}  // namespace detail

// Every model id is served by feature hashing.
class OfflineBackend final : public NlpBackend {
 public:
  explicit OfflineBackend(HashingOptions opts = {}) : opts_(opts) {}

  std::vector<Embedding> embed_batch(EmbeddingModel, std::span<const std::string> sentences) override {
    detail::require_non_empty(sentences);
    std::vector<Embedding> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(hashing_embed(s, opts_));
    return out;
  }

  std::vector<SentimentScore> sentiment_batch(std::span<const std::string> texts) override {
    detail::require_non_empty(texts);
    std::vector<SentimentScore> out;
    out.reserve(texts.size());
    for (const auto& s : texts) out.push_back(lexicon_sentiment(s));
    return out;
  }

 private:
  HashingOptions opts_;
};

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::Io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// Append-only JSON-lines cache keyed by (model, sha256(text)).
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      try {
        const auto rec = nlohmann::json::parse(line);
        auto values = rec.at("values").get<std::vector<double>>();
        if (values.size() != rec.at("dim").get<std::size_t>()) continue;
        entries_[key(rec.at("model").get<std::string>(), rec.at("sha256").get<std::string>())] =
            std::move(values);
      } catch (const nlohmann::json::exception&) {
        // A torn trailing record from an interrupted run is skipped.
      }
    }
  }

  std::optional<std::vector<double>> lookup(EmbeddingModel model, std::string_view sentence) const {
    return lookup_tag(std::string(to_string(model)), sentence);
  }

  void store(EmbeddingModel model, std::string_view sentence, const std::vector<double>& values) {
    store_tag(std::string(to_string(model)), sentence, values);
  }

  // Sentiment records share the file under model tag "sentiment" with
  // values [label, confidence].
  std::optional<SentimentScore> lookup_sentiment(std::string_view text) const {
    const auto v = lookup_tag(kSentimentTag, text);
    if (!v || v->size() != 2) return std::nullopt;
    return SentimentScore{static_cast<int>((*v)[0]), (*v)[1]};
  }

  void store_sentiment(std::string_view text, const SentimentScore& s) {
    store_tag(kSentimentTag, text, {static_cast<double>(s.label), s.confidence});
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  static constexpr const char* kSentimentTag = "sentiment";

  std::optional<std::vector<double>> lookup_tag(const std::string& tag, std::string_view text) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key(tag, sha256_hex(text)));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store_tag(const std::string& tag, std::string_view text, const std::vector<double>& values) {
    const std::string digest = sha256_hex(text);
    nlohmann::json rec;
    rec["model"] = tag;
    rec["sha256"] = digest;
    rec["dim"] = values.size();
    rec["values"] = values;
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.emplace(key(tag, digest), values);
    if (!inserted) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) fail(ErrorCode::Io, "cannot append to embedding cache " + path_);
    out << rec.dump() << '\n';
  }

  static std::string key(const std::string& model, const std::string& digest) {
    return model + ":" + digest;
  }

  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

struct ServiceOptions {
  std::string url = "http://127.0.0.1:8080";
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{10000};
  std::chrono::seconds timeout{60};
  std::ptrdiff_t max_in_flight = 4;
  std::size_t max_batch = 256;
  // Opt-in only: on BackendUnavailable fall back to the offline backend.
  bool offline_fallback = false;
};

class ServiceBackend final : public NlpBackend {
 public:
  explicit ServiceBackend(ServiceOptions opts, EmbeddingCache* cache = nullptr)
      : opts_(std::move(opts)), cache_(cache), in_flight_(opts_.max_in_flight) {}

  std::vector<Embedding> embed_batch(EmbeddingModel model, std::span<const std::string> sentences) override {
    detail::require_non_empty(sentences);
    if (model == EmbeddingModel::HashingOffline) return offline_.embed_batch(model, sentences);
    std::vector<std::optional<std::vector<double>>> found(sentences.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (cache_) found[i] = cache_->lookup(model, sentences[i]);
      if (!found[i]) misses.push_back(i);
    }
    try {
      const auto declared = misses.empty() ? std::nullopt : declared_dim(model);
      for (std::size_t b = 0; b < misses.size(); b += opts_.max_batch) {
        const std::size_t e = std::min(misses.size(), b + opts_.max_batch);
        nlohmann::json req;
        req["model"] = std::string(to_string(model));
        req["sentences"] = nlohmann::json::array();
        for (std::size_t k = b; k < e; ++k) req["sentences"].push_back(sentences[misses[k]]);
        const auto resp = post("/v1/embed", req);
        const auto vectors = resp.at("vectors").get<std::vector<std::vector<double>>>();
        const auto dim = resp.at("dim").get<std::size_t>();
        if (vectors.size() != e - b) {
          fail(ErrorCode::DimensionMismatch, "service returned wrong number of vectors");
        }
        if (declared && *declared != dim) {
          fail(ErrorCode::DimensionMismatch, "service dim differs from /v1/info handshake");
        }
        for (std::size_t k = b; k < e; ++k) {
          auto& v = vectors[k - b];
          if (v.size() != dim) fail(ErrorCode::DimensionMismatch, "vector length differs from dim");
          if (cache_) cache_->store(model, sentences[misses[k]], v);
          found[misses[k]] = v;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable || !opts_.offline_fallback) throw;
      std::cerr << "warning: model service unavailable, using offline embeddings\n";
      return offline_.embed_batch(model, sentences);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedInput, std::string("bad /v1/embed response: ") + e.what());
    }
    std::vector<Embedding> out;
    out.reserve(sentences.size());
    std::size_t dim = 0;
    for (auto& v : found) {
      if (dim == 0) dim = v->size();
      if (v->size() != dim) fail(ErrorCode::DimensionMismatch, "inconsistent embedding dims in batch");
      out.push_back(Embedding{std::move(*v), model});
    }
    return out;
  }

  std::vector<SentimentScore> sentiment_batch(std::span<const std::string> texts) override {
    detail::require_non_empty(texts);
    std::vector<std::optional<SentimentScore>> found(texts.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (cache_) found[i] = cache_->lookup_sentiment(texts[i]);
      if (!found[i]) misses.push_back(i);
    }
    try {
      for (std::size_t b = 0; b < misses.size(); b += opts_.max_batch) {
        const std::size_t e = std::min(misses.size(), b + opts_.max_batch);
        nlohmann::json req;
        req["texts"] = nlohmann::json::array();
        for (std::size_t k = b; k < e; ++k) req["texts"].push_back(texts[misses[k]]);
        const auto resp = post("/v1/sentiment", req);
        const auto labels = resp.at("labels").get<std::vector<int>>();
        const auto conf = resp.at("confidences").get<std::vector<double>>();
        if (labels.size() != e - b || conf.size() != e - b) {
          fail(ErrorCode::MalformedInput, "sentiment response length mismatch");
        }
        for (std::size_t k = 0; k < labels.size(); ++k) {
          if (labels[k] < 1 || labels[k] > 3 || !(conf[k] >= 0 && conf[k] <= 1)) {
            fail(ErrorCode::MalformedInput, "sentiment response out of range");
          }
          const SentimentScore score{labels[k], conf[k]};
          if (cache_) cache_->store_sentiment(texts[misses[b + k]], score);
          found[misses[b + k]] = score;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable || !opts_.offline_fallback) throw;
      std::cerr << "warning: model service unavailable, using offline sentiment\n";
      return offline_.sentiment_batch(texts);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedInput, std::string("bad /v1/sentiment response: ") + e.what());
    }
    std::vector<SentimentScore> out;
    out.reserve(found.size());
    for (const auto& f : found) out.push_back(*f);
    return out;
  }

  // GET /v1/info; expected shape {"models": {"sbert": {"checkpoint": s, "dim": n}, ...},
  // "version": s}. Cached after the first successful call.
  nlohmann::json info() {
    {
      std::lock_guard lock(info_mutex_);
      if (info_) return *info_;
    }
    auto doc = request("GET", "/v1/info", nullptr);
    std::lock_guard lock(info_mutex_);
    info_ = doc;
    return doc;
  }

  std::size_t request_count() const { return requests_.load(); }

 private:
  std::optional<std::size_t> declared_dim(EmbeddingModel model) {
    const auto doc = info();
    const auto models = doc.find("models");
    if (models == doc.end() || !models->is_object()) return std::nullopt;
    const auto entry = models->find(std::string(to_string(model)));
    if (entry == models->end()) {
      fail(ErrorCode::BackendUnavailable, "service does not host model " + std::string(to_string(model)));
    }
    if (entry->is_object() && entry->contains("dim")) return entry->at("dim").get<std::size_t>();
    return std::nullopt;
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body) {
    return request("POST", path, &body);
  }

  nlohmann::json request(const std::string& method, const std::string& path, const nlohmann::json* body) {
    std::chrono::milliseconds backoff = opts_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= opts_.max_attempts; ++attempt) {
      httplib::Result res{nullptr, httplib::Error::Unknown};
      {
        in_flight_.acquire();
        httplib::Client client(opts_.url);
        client.set_connection_timeout(opts_.timeout);
        client.set_read_timeout(opts_.timeout);
        client.set_write_timeout(opts_.timeout);
        ++requests_;
        res = method == "GET" ? client.Get(path)
                              : client.Post(path, body->dump(), "application/json");
        in_flight_.release();
      }
      if (res && res->status >= 200 && res->status < 300) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          fail(ErrorCode::MalformedInput, path + ": response is not JSON");
        }
      }
      if (res && res->status >= 400 && res->status < 500) {
        fail(ErrorCode::InvalidArgument, path + ": service rejected request with HTTP " +
                                             std::to_string(res->status) + " " + res->body);
      }
      last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
      if (attempt < opts_.max_attempts) {
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, opts_.max_backoff);
      }
    }
    fail(ErrorCode::BackendUnavailable, opts_.url + path + " unreachable after " +
                                            std::to_string(opts_.max_attempts) + " attempts (" +
                                            last_error + ")");
  }

  ServiceOptions opts_;
  EmbeddingCache* cache_;
  OfflineBackend offline_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> requests_{0};
  std::mutex info_mutex_;
  std::optional<nlohmann::json> info_;
};

}  // namespace engage
