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

// Table-driven conditional token model.
//
// A ConditionalTable maps (prompt, decoded prefix) to a distribution over a
// fixed vocabulary. It stands in for a generative reader: greedy decoding,
// tempered sampling and exhaustive enumeration all read the same table, so
// every decoding result has an exact probability that tests can check.
//
// Fixture format (JSON, one model per document):
//
//   {
//     "vocabulary": ["paris", "london", "<eos>"],
//     "eos": "<eos>",
//     "max_len": 2,
//     "entries": [
//       {"prompt": "q1", "prefix": [], "distribution": {"paris": 0.7, "london": 0.3}},
//       {"prompt": "q1", "prefix": ["paris"], "distribution": {"<eos>": 1.0}},
//       {"prompt": "q1", "prefix": ["london"], "distribution": {"<eos>": 1.0}}
//     ]
//   }
//
// Tokens missing from a distribution have probability 0. Loading validates
// every table invariant and reports the first violation with its state.

#ifndef SELQA_TOY_LM_H_
#define SELQA_TOY_LM_H_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "selqa/qa_core.h"

namespace selqa {

// A (prompt, prefix) state the table does not define, or a decode that ran
// past its length limit.
class ModelCoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using TokenId = int32_t;

class Vocabulary {
 public:
  // Throws ValidationError on duplicate tokens or when eos is not a member.
  Vocabulary(std::vector<std::string> tokens, std::string_view eos);

  size_t size() const { return tokens_.size(); }
  TokenId eos() const { return eos_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  // Throws ValidationError for unknown tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_ = 0;
};

struct DecodedAnswer {
  // Always ends with the eos token.
  std::vector<TokenId> tokens;
  // Table probability of each chosen token, eos step included.
  std::vector<double> step_probs;
  // Non-eos tokens joined by single spaces.
  std::string answer_text;
};

class ConditionalTable {
 public:
  using Distribution = std::vector<double>;  // indexed by TokenId

  ConditionalTable(Vocabulary vocabulary, int max_len);

  // Adds or replaces a state. Call Validate() once all states are in.
  void Set(std::string prompt, std::vector<TokenId> prefix,
           Distribution distribution);

  // Checks every table invariant: distributions are non-negative and sum to
  // one within 1e-9, every reachable state below max_len is defined, and the
  // state at prefix length max_len - 1 puts all mass on eos. Throws
  // ValidationError naming the offending state.
  void Validate() const;

  // Throws ModelCoverageError when the state is missing.
  const Distribution& At(std::string_view prompt,
                         const std::vector<TokenId>& prefix) const;
  bool Has(std::string_view prompt, const std::vector<TokenId>& prefix) const;

  const Vocabulary& vocabulary() const { return vocabulary_; }
  int max_len() const { return max_len_; }
  std::vector<std::string> Prompts() const;

  std::string Detokenize(const std::vector<TokenId>& tokens) const;
  std::string DescribeState(std::string_view prompt,
                            const std::vector<TokenId>& prefix) const;

 private:
  Vocabulary vocabulary_;
  int max_len_;
  std::map<std::pair<std::string, std::vector<TokenId>>, Distribution,
           std::less<>>
      states_;
};

// Parses and validates a fixture document.
ConditionalTable ParseConditionalTable(std::string_view json_text);
ConditionalTable LoadConditionalTable(const std::string& path);

// Picks the most probable token at every step, earliest vocabulary entry on
// ties, until eos. Throws ModelCoverageError when a state is undefined or
// when max_len tokens are emitted without reaching eos.
DecodedAnswer GreedyDecode(const ConditionalTable& model,
                           std::string_view prompt, int max_len);
DecodedAnswer GreedyDecode(const ConditionalTable& model,
                           std::string_view prompt);

// Temperatures below this dispatch to GreedyDecode.
inline constexpr double kGreedyTemperature = 1e-6;

// Draws each token with probability proportional to p^(1/temperature). The
// draw depends only on (model, prompt, seed, temperature); uniforms come from
// std::mt19937_64 bits, never from a library distribution. step_probs hold
// the untempered table probabilities.
DecodedAnswer SampleDecode(const ConditionalTable& model,
                           std::string_view prompt, uint64_t seed,
                           double temperature = 1.0);

struct AnswerProbability {
  std::string answer_text;
  double probability = 0.0;
};

// Every complete sequence with its exact path probability, merged by answer
// text and sorted by descending probability (ties by text).
std::vector<AnswerProbability> EnumerateOutputs(const ConditionalTable& model,
                                                std::string_view prompt,
                                                int max_len);
std::vector<AnswerProbability> EnumerateOutputs(const ConditionalTable& model,
                                                std::string_view prompt);

// Stable seed mixing: SplitMix64 over the global seed xor the FNV-1a hash of
// the key. Same inputs give the same seed on every platform.
uint64_t DeriveSeed(uint64_t global_seed, std::string_view key);
uint64_t DeriveSeed(uint64_t base_seed, uint64_t index);

}  // namespace selqa

#endif  // SELQA_TOY_LM_H_
