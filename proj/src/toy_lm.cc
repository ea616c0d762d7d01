/*
 * Copyright 2026 The selqa Authors.
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

#include "selqa/toy_lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "json.hpp"

namespace selqa {
namespace {

constexpr double kMassTolerance = 1e-9;

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a64(std::string_view key) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : key) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform in [0, 1) from the top 53 bits.
double UnitUniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TokenId Argmax(const ConditionalTable::Distribution& dist) {
  TokenId best = 0;
  for (TokenId i = 1; i < static_cast<TokenId>(dist.size()); ++i) {
    if (dist[i] > dist[best]) best = i;
  }
  return best;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string_view eos)
    : tokens_(std::move(tokens)) {
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
  auto it = index_.find(std::string(eos));
  if (it == index_.end()) {
    throw ValidationError("end-of-sequence token '" + std::string(eos) +
                          "' is not in the vocabulary");
  }
  eos_ = it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) {
    throw ValidationError("unknown token '" + std::string(token) + "'");
  }
  return it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

ConditionalTable::ConditionalTable(Vocabulary vocabulary, int max_len)
    : vocabulary_(std::move(vocabulary)), max_len_(max_len) {
  if (max_len_ < 1) throw ValidationError("max_len must be at least 1");
}

void ConditionalTable::Set(std::string prompt, std::vector<TokenId> prefix,
                           Distribution distribution) {
  if (distribution.size() != vocabulary_.size()) {
    throw ValidationError("distribution size does not match vocabulary at " +
                          DescribeState(prompt, prefix));
  }
  states_[{std::move(prompt), std::move(prefix)}] = std::move(distribution);
}

bool ConditionalTable::Has(std::string_view prompt,
                           const std::vector<TokenId>& prefix) const {
  return states_.contains(std::make_pair(std::string(prompt), prefix));
}

const ConditionalTable::Distribution& ConditionalTable::At(
    std::string_view prompt, const std::vector<TokenId>& prefix) const {
  auto it = states_.find(std::make_pair(std::string(prompt), prefix));
  if (it == states_.end()) {
    throw ModelCoverageError("model does not define state " +
                             DescribeState(prompt, prefix));
  }
  return it->second;
}

std::vector<std::string> ConditionalTable::Prompts() const {
  std::vector<std::string> prompts;
  for (const auto& [key, dist] : states_) {
    if (prompts.empty() || prompts.back() != key.first) {
      prompts.push_back(key.first);
    }
  }
  return prompts;
}

std::string ConditionalTable::Detokenize(
    const std::vector<TokenId>& tokens) const {
  std::string text;
  for (const TokenId t : tokens) {
    if (t == vocabulary_.eos()) continue;
    if (!text.empty()) text.push_back(' ');
    text += vocabulary_.token(t);
  }
  return text;
}

std::string ConditionalTable::DescribeState(
    std::string_view prompt, const std::vector<TokenId>& prefix) const {
  std::string out = "(prompt=\"" + std::string(prompt) + "\", prefix=[";
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (i > 0) out += ", ";
    const TokenId t = prefix[i];
    out += (t >= 0 && static_cast<size_t>(t) < vocabulary_.size())
               ? vocabulary_.token(t)
               : "#" + std::to_string(t);
  }
  return out + "])";
}

void ConditionalTable::Validate() const {
  for (const auto& [key, dist] : states_) {
    const auto& [prompt, prefix] = key;
    double total = 0.0;
    for (const double p : dist) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ValidationError("negative or non-finite probability at " +
                              DescribeState(prompt, prefix));
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw ValidationError("distribution sums to " + std::to_string(total) +
                            " at " + DescribeState(prompt, prefix));
    }
    if (static_cast<int>(prefix.size()) >= max_len_) {
      throw ValidationError("state beyond max_len at " +
                            DescribeState(prompt, prefix));
    }
    if (std::find(prefix.begin(), prefix.end(), vocabulary_.eos()) !=
        prefix.end()) {
      throw ValidationError("state prefix contains end-of-sequence at " +
                            DescribeState(prompt, prefix));
    }
  }

  std::vector<TokenId> prefix;
  std::function<void(const std::string&)> walk = [&](const std::string& prompt) {
    const Distribution& dist = At(prompt, prefix);
    if (static_cast<int>(prefix.size()) == max_len_ - 1 &&
        dist[vocabulary_.eos()] < 1.0 - kMassTolerance) {
      throw ValidationError(
          "state at the length horizon must put all mass on end-of-sequence: " +
          DescribeState(prompt, prefix));
    }
    for (TokenId t = 0; t < static_cast<TokenId>(dist.size()); ++t) {
      if (t == vocabulary_.eos() || dist[t] <= 0.0) continue;
      if (static_cast<int>(prefix.size()) + 1 >= max_len_) continue;
      prefix.push_back(t);
      if (!Has(prompt, prefix)) {
        throw ValidationError("reachable state is undefined: " +
                              DescribeState(prompt, prefix));
      }
      walk(prompt);
      prefix.pop_back();
    }
  };
  for (const auto& prompt : Prompts()) {
    prefix.clear();
    if (!Has(prompt, prefix)) {
      throw ValidationError("prompt has no root state: " +
                            DescribeState(prompt, prefix));
    }
    walk(prompt);
  }
}

ConditionalTable ParseConditionalTable(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model fixture is not valid JSON: ") +
                          e.what());
  }
  try {
    Vocabulary vocab(doc.at("vocabulary").get<std::vector<std::string>>(),
                     doc.at("eos").get<std::string>());
    ConditionalTable table(std::move(vocab), doc.at("max_len").get<int>());
    const auto& v = table.vocabulary();
    size_t index = 0;
    for (const auto& entry : doc.at("entries")) {
      std::string prompt = entry.at("prompt").get<std::string>();
      std::vector<TokenId> prefix;
      for (const auto& tok : entry.at("prefix")) {
        prefix.push_back(v.id(tok.get<std::string>()));
      }
      ConditionalTable::Distribution dist(v.size(), 0.0);
      for (const auto& [tok, p] : entry.at("distribution").items()) {
        dist[v.id(tok)] = p.get<double>();
      }
      if (table.Has(prompt, prefix)) {
        throw ValidationError("entry " + std::to_string(index) +
                              " duplicates state " +
                              table.DescribeState(prompt, prefix));
      }
      table.Set(std::move(prompt), std::move(prefix), std::move(dist));
      ++index;
    }
    table.Validate();
    return table;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model fixture: ") + e.what());
  }
}

ConditionalTable LoadConditionalTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model fixture " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConditionalTable(buffer.str());
}

DecodedAnswer GreedyDecode(const ConditionalTable& model,
                           std::string_view prompt, int max_len) {
  if (max_len < 1) throw ValidationError("max_len must be at least 1");
  DecodedAnswer out;
  const TokenId eos = model.vocabulary().eos();
  for (int step = 0; step < max_len; ++step) {
    const auto& dist = model.At(prompt, out.tokens);
    const TokenId chosen = Argmax(dist);
    out.tokens.push_back(chosen);
    out.step_probs.push_back(dist[chosen]);
    if (chosen == eos) {
      out.answer_text = model.Detokenize(out.tokens);
      return out;
    }
  }
  throw ModelCoverageError("greedy decode reached max_len=" +
                           std::to_string(max_len) +
                           " without end-of-sequence at " +
                           model.DescribeState(prompt, out.tokens));
}

DecodedAnswer GreedyDecode(const ConditionalTable& model,
                           std::string_view prompt) {
  return GreedyDecode(model, prompt, model.max_len());
}

DecodedAnswer SampleDecode(const ConditionalTable& model,
                           std::string_view prompt, uint64_t seed,
                           double temperature) {
  if (!(temperature > 0.0)) {
    throw ValidationError("sampling temperature must be positive");
  }
  if (temperature < kGreedyTemperature) return GreedyDecode(model, prompt);

  std::mt19937_64 rng(seed);
  const TokenId eos = model.vocabulary().eos();
  const double exponent = 1.0 / temperature;
  DecodedAnswer out;
  std::vector<double> weights;
  for (int step = 0; step < model.max_len(); ++step) {
    const auto& dist = model.At(prompt, out.tokens);
    weights.assign(dist.size(), 0.0);
    double total = 0.0;
    for (size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] <= 0.0) continue;
      weights[i] = temperature == 1.0 ? dist[i] : std::pow(dist[i], exponent);
      total += weights[i];
    }
    TokenId chosen;
    if (!(total > 0.0)) {
      chosen = Argmax(dist);  // all tempered weights underflowed
    } else {
      const double target = UnitUniform(rng) * total;
      double cumulative = 0.0;
      chosen = -1;
      for (TokenId i = 0; i < static_cast<TokenId>(weights.size()); ++i) {
        if (weights[i] <= 0.0) continue;
        cumulative += weights[i];
        chosen = i;
        if (target < cumulative) break;
      }
    }
    out.tokens.push_back(chosen);
    out.step_probs.push_back(dist[chosen]);
    if (chosen == eos) {
      out.answer_text = model.Detokenize(out.tokens);
      return out;
    }
  }
  throw ModelCoverageError("sampled sequence reached max_len without "
                           "end-of-sequence at " +
                           model.DescribeState(prompt, out.tokens));
}

std::vector<AnswerProbability> EnumerateOutputs(const ConditionalTable& model,
                                                std::string_view prompt,
                                                int max_len) {
  if (max_len < 1) throw ValidationError("max_len must be at least 1");
  const TokenId eos = model.vocabulary().eos();
  std::map<std::string, double> merged;
  std::vector<TokenId> prefix;
  std::function<void(double)> walk = [&](double path_prob) {
    const auto& dist = model.At(prompt, prefix);
    for (TokenId t = 0; t < static_cast<TokenId>(dist.size()); ++t) {
      if (dist[t] <= 0.0) continue;
      const double p = path_prob * dist[t];
      prefix.push_back(t);
      if (t == eos) {
        merged[model.Detokenize(prefix)] += p;
      } else if (static_cast<int>(prefix.size()) >= max_len) {
        throw ModelCoverageError("sequence exceeds max_len=" +
                                 std::to_string(max_len) + " at " +
                                 model.DescribeState(prompt, prefix));
      } else {
        walk(p);
      }
      prefix.pop_back();
    }
  };
  walk(1.0);

  std::vector<AnswerProbability> out;
  out.reserve(merged.size());
  for (auto& [text, p] : merged) out.push_back({text, p});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.probability > b.probability;
  });
  return out;
}

std::vector<AnswerProbability> EnumerateOutputs(const ConditionalTable& model,
                                                std::string_view prompt) {
  return EnumerateOutputs(model, prompt, model.max_len());
}

uint64_t DeriveSeed(uint64_t global_seed, std::string_view key) {
  return SplitMix64(global_seed ^ Fnv1a64(key));
}

uint64_t DeriveSeed(uint64_t base_seed, uint64_t index) {
  return SplitMix64(base_seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

}  // namespace selqa
