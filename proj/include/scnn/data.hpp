#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scnn::data {

inline constexpr std::int32_t kPad = 0;
inline constexpr std::int32_t kUnk = 1;

// One tweet after label mapping: 0 = negative, 1 = positive.
struct RawTweet {
  int label = 0;
  std::string text;
};

struct ParseStats {
  std::size_t rows = 0;             // well-formed data rows
  std::size_t malformed = 0;        // skipped lines
  std::size_t dropped_neutral = 0;  // polarity-2 rows (test split only, in practice)
};

// Streaming reader for the six-field quoted-CSV tweet format
// ("polarity","id","date","query","user","text"); "" inside a field is an
// escaped quote. Malformed lines (bad quoting, wrong field count, polarity
// outside {0,2,4}) are skipped and counted; if they exceed
// max_malformed_frac of all lines, throws IoError. Empty lines are ignored.
ParseStats parse_sentiment140(
    const std::string& path,
    const std::function<void(int polarity, std::string_view text)>& sink,
    double max_malformed_frac = 0.001);

// Materializing variant: polarity 0 -> label 0, 4 -> label 1, 2 dropped.
std::vector<RawTweet> load_sentiment140(const std::string& path, ParseStats* stats = nullptr);

// Lowercases, drops URL chunks (http://, https://, www.) and @mentions,
// strips leading '#', keeps only [a-z0-9'] and spaces, collapses whitespace.
std::string clean_text(std::string_view raw);

// Splits a cleaned string on spaces.
std::vector<std::string> tokenize(std::string_view cleaned);

// Frequency-capped token index. Ids 0 and 1 are reserved for <pad>/<unk>;
// real tokens follow, ordered by (count desc, token asc).
class Vocabulary {
 public:
  Vocabulary();

  // max_size caps the total size including the two reserved ids.
  static Vocabulary build(const std::unordered_map<std::string, std::uint64_t>& counts,
                          std::size_t max_size);

  std::int32_t id(std::string_view token) const;  // kUnk when absent
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }

  void save(const std::string& path) const;  // "token\tid" lines
  static Vocabulary load(const std::string& path);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t, Hash, std::equal_to<>> index_;
};

// Token ids for one document: truncated to max_len, then padded with kPad up
// to exactly max_len.
std::vector<std::int32_t> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                 std::size_t max_len);

// Encoded corpus. Sequences are stored unpadded (already truncated); padding
// happens on read so a full-scale corpus stays compact in memory and on disk.
class Dataset {
 public:
  void add(std::span<const std::int32_t> ids, int label);

  std::size_t size() const { return labels_.size(); }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const std::int32_t> ids(std::size_t i) const;
  // Copies sequence i into out (out.size() is the padded length); the tail
  // beyond the stored sequence is kPad. Sequences longer than out are
  // truncated.
  void ids_padded(std::size_t i, std::span<std::int32_t> out) const;

  void save(const std::string& path) const;
  static Dataset load(const std::string& path);

 private:
  std::vector<std::int32_t> pool_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint8_t> labels_;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
};

// Deterministic shuffled split: indices 0..n-1 are shuffled with the seed's
// dedicated stream, the first floor(n * train_frac) become train.
Split split_train_dev(std::size_t n, double train_frac, std::uint64_t seed);

// Pre-truncation token-length distribution plus label balance.
struct LengthStats {
  static constexpr std::size_t kHistMax = 280;

  std::vector<std::uint64_t> hist = std::vector<std::uint64_t>(kHistMax + 2, 0);  // last = overflow
  std::uint64_t count = 0;
  std::uint64_t empty = 0;
  std::uint64_t total_tokens = 0;
  std::uint64_t max_len = 0;
  std::array<std::uint64_t, 2> label_counts{0, 0};

  void add(std::size_t token_count, int label);
  double mean_len() const;
  void write_csv(const std::string& path) const;  // "length,count" rows
};

}  // namespace scnn::data
