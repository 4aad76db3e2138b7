#pragma once

#include <cstdint>
#include <string>

namespace scnn::synth {

// Deterministic generator for a stand-in tweet corpus in the six-field quoted
// CSV layout the data module ingests. The corpus is built so the pipeline's
// full-scale properties hold: exact row counts and label balance, a cleaned
// token inventory larger than the 100k vocabulary cap, zipf-ish token
// frequencies, short skewed tweet lengths, URL/mention/hashtag/emoji noise,
// and a planted word-level sentiment signal models can actually learn.
struct SynthSpec {
  std::uint64_t seed = 7;

  std::size_t train_rows = 1'600'000;  // exactly half polarity 0, half 4
  std::size_t test_negative = 177;
  std::size_t test_neutral = 139;
  std::size_t test_positive = 182;

  std::size_t filler_vocab = 118'000;    // distinct neutral word types
  std::size_t sentiment_vocab = 3'000;   // word types per polarity pool
  double sentiment_rate = 0.65;          // chance a content slot is a sentiment word
  double flip_rate = 0.05;               // chance that word comes from the wrong pool
};

void write_train_csv(const std::string& path, const SynthSpec& spec);
void write_test_csv(const std::string& path, const SynthSpec& spec);

}  // namespace scnn::synth
