#include "scnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/prng.hpp"

namespace scnn::synth {

namespace {

// Pseudo-word for a global index: the index written in base-100 over
// consonant-vowel syllables. Distinct indices give distinct words, so the
// filler pool and the two sentiment pools never collide.
std::string word_for(std::uint64_t k) {
  static constexpr char kConsonants[] = "bcdfghjklmnpqrstvwxz";  // 20
  static constexpr char kVowels[] = "aeiou";                     // 5
  std::string syllables[8];
  int n = 0;
  do {
    const std::uint64_t d = k % 100;
    k /= 100;
    syllables[n].push_back(kConsonants[d / 5]);
    syllables[n].push_back(kVowels[d % 5]);
    ++n;
  } while (k != 0 && n < 8);
  std::string out;
  for (int i = n - 1; i >= 0; --i) out += syllables[i];
  return out;
}

// Zipf(s = 1.05) sampler over ranks [0, n) via a precomputed cdf.
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), 1.05);
      cdf_[r] = acc;
    }
    for (double& v : cdf_) v /= acc;
  }

  std::size_t draw(Prng& rng) const {
    const double u = rng.next_double();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

// Skewed tweet length: 5 + floor(Gamma(shape 2, scale 9)), clipped to 45.
// Mean sits near 22 tokens, range 5..45.
std::size_t draw_length(Prng& rng) {
  const double u1 = rng.next_double();
  const double u2 = rng.next_double();
  const double g = -9.0 * (std::log(1.0 - u1) + std::log(1.0 - u2));
  return 5 + static_cast<std::size_t>(std::min(g, 40.0));
}

class Generator {
 public:
  explicit Generator(const SynthSpec& spec, std::uint64_t stream)
      : spec_(spec), rng_(Prng::mix(spec.seed, stream)), filler_zipf_(spec.filler_vocab),
        pool_zipf_(spec.sentiment_vocab) {}

  // polarity: 0 negative, 2 neutral, 4 positive.
  std::string tweet_text(int polarity) {
    const std::size_t len = draw_length(rng_);
    std::string text = token(polarity, /*first=*/true);
    for (std::size_t i = 1; i < len; ++i) {
      text.push_back(' ');
      text += token(polarity, /*first=*/false);
    }
    return text;
  }

  Prng& rng() { return rng_; }

 private:
  std::string filler_word() { return word_for(filler_zipf_.draw(rng_)); }

  std::string sentiment_word(bool positive) {
    const std::uint64_t base =
        spec_.filler_vocab + (positive ? 0 : spec_.sentiment_vocab);
    return word_for(base + pool_zipf_.draw(rng_));
  }

  std::string content_token(int polarity) {
    if (polarity != 2 && rng_.next_double() < spec_.sentiment_rate) {
      bool positive = polarity == 4;
      if (rng_.next_double() < spec_.flip_rate) positive = !positive;
      return sentiment_word(positive);
    }
    return filler_word();
  }

  // Wraps a content token in the kinds of junk the cleaner must strip. The
  // first token of a tweet stays plain so no row cleans down to nothing.
  std::string token(int polarity, bool first) {
    std::string w = content_token(polarity);
    if (first) return w;
    const double roll = rng_.next_double();
    if (roll < 0.06) return "@" + w;  // mention: dropped by the cleaner
    if (roll < 0.10) return "http://t.co/" + w;
    if (roll < 0.13) return "www." + w + ".com";
    if (roll < 0.19) return "#" + w;
    if (roll < 0.25) return w + "!!!";
    if (roll < 0.29) return w + ",";
    if (roll < 0.33) {
      for (char& c : w) c = static_cast<char>(c - 32 * (c >= 'a' && c <= 'z'));
      return w;  // shouting; the cleaner lowercases
    }
    if (roll < 0.36) return w + "\xf0\x9f\x98\x8a";  // smiley bytes
    return w;
  }

  const SynthSpec& spec_;
  Prng rng_;
  ZipfSampler filler_zipf_;
  ZipfSampler pool_zipf_;
};

void write_rows(const std::string& path, const std::vector<int>& polarities, Generator& gen,
                std::uint64_t id_base) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("synth: cannot open '" + path + "' for writing");
  std::string buf;
  buf.reserve(1 << 20);
  for (std::size_t i = 0; i < polarities.size(); ++i) {
    const int polarity = polarities[i];
    buf.push_back('"');
    buf += std::to_string(polarity);
    buf += "\",\"";
    buf += std::to_string(id_base + i);
    buf += "\",\"Mon Jun 01 12:00:00 PDT 2009\",\"NO_QUERY\",\"user";
    buf += std::to_string(id_base + i);
    buf += "\",\"";
    buf += gen.tweet_text(polarity);
    buf += "\"\n";
    if (buf.size() > (1 << 20) - 4096) {
      os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  os.flush();
  if (!os) throw IoError("synth: write to '" + path + "' failed");
}

}  // namespace

void write_train_csv(const std::string& path, const SynthSpec& spec) {
  if (spec.train_rows % 2 != 0) throw ArgumentError("synth: train_rows must be even");
  Generator gen(spec, /*stream=*/11);
  std::vector<int> polarities(spec.train_rows);
  for (std::size_t i = 0; i < spec.train_rows; ++i) polarities[i] = i < spec.train_rows / 2 ? 0 : 4;
  gen.rng().shuffle(polarities);
  write_rows(path, polarities, gen, 1'000'000);
}

void write_test_csv(const std::string& path, const SynthSpec& spec) {
  Generator gen(spec, /*stream=*/12);
  std::vector<int> polarities;
  polarities.insert(polarities.end(), spec.test_negative, 0);
  polarities.insert(polarities.end(), spec.test_neutral, 2);
  polarities.insert(polarities.end(), spec.test_positive, 4);
  gen.rng().shuffle(polarities);
  write_rows(path, polarities, gen, 1);
}

}  // namespace scnn::synth
