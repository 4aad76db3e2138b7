#include "scnn/data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "scnn/bytes.hpp"
#include "scnn/error.hpp"
#include "scnn/prng.hpp"

namespace scnn::data {

namespace {

// One CSV line -> six unquoted fields. Returns false on any quoting or
// field-count violation.
bool parse_csv_line(std::string_view line, std::array<std::string, 6>& fields) {
  std::size_t pos = 0;
  for (int f = 0; f < 6; ++f) {
    if (pos >= line.size() || line[pos] != '"') return false;
    ++pos;
    std::string& out = fields[f];
    out.clear();
    for (;;) {
      if (pos >= line.size()) return false;  // unterminated field
      const char c = line[pos];
      if (c == '"') {
        if (pos + 1 < line.size() && line[pos + 1] == '"') {
          out.push_back('"');
          pos += 2;
        } else {
          ++pos;
          break;
        }
      } else {
        out.push_back(c);
        ++pos;
      }
    }
    if (f < 5) {
      if (pos >= line.size() || line[pos] != ',') return false;
      ++pos;
    } else if (pos != line.size()) {
      return false;  // junk after the last field
    }
  }
  return true;
}

int parse_polarity(const std::string& field) {
  if (field == "0") return 0;
  if (field == "2") return 2;
  if (field == "4") return 4;
  return -1;
}

}  // namespace

ParseStats parse_sentiment140(
    const std::string& path,
    const std::function<void(int polarity, std::string_view text)>& sink,
    double max_malformed_frac) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  ParseStats stats;
  std::string line;
  std::array<std::string, 6> fields;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int polarity = -1;
    if (parse_csv_line(line, fields)) polarity = parse_polarity(fields[0]);
    if (polarity < 0) {
      ++stats.malformed;
      continue;
    }
    ++stats.rows;
    sink(polarity, fields[5]);
  }
  const std::size_t total = stats.rows + stats.malformed;
  if (total == 0) throw IoError("'" + path + "' contains no data rows");
  if (static_cast<double>(stats.malformed) > max_malformed_frac * static_cast<double>(total)) {
    std::ostringstream msg;
    msg << "'" << path << "': " << stats.malformed << " of " << total
        << " lines are malformed (limit " << max_malformed_frac * 100.0 << "%)";
    throw IoError(msg.str());
  }
  return stats;
}

std::vector<RawTweet> load_sentiment140(const std::string& path, ParseStats* stats) {
  std::vector<RawTweet> out;
  std::size_t neutral = 0;
  ParseStats st = parse_sentiment140(path, [&](int polarity, std::string_view text) {
    if (polarity == 2) {
      ++neutral;
      return;
    }
    out.push_back(RawTweet{polarity == 4 ? 1 : 0, std::string(text)});
  });
  st.dropped_neutral = neutral;
  if (stats != nullptr) *stats = st;
  return out;
}

std::string clean_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::string chunk;
  auto flush_chunk = [&out, &chunk] {
    if (chunk.empty()) return;
    const bool is_noise = chunk.starts_with("http://") || chunk.starts_with("https://") ||
                          chunk.starts_with("www.") || chunk[0] == '@';
    if (!is_noise) {
      std::size_t begin = 0;
      while (begin < chunk.size() && chunk[begin] == '#') ++begin;
      std::size_t emitted = 0;
      for (std::size_t k = begin; k < chunk.size(); ++k) {
        const char c = chunk[k];
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'') {
          if (emitted == 0 && !out.empty()) out.push_back(' ');
          out.push_back(c);
          ++emitted;
        }
      }
    }
    chunk.clear();
  };
  for (const char rc : raw) {
    const unsigned char c = static_cast<unsigned char>(rc);
    if (std::isspace(c)) {
      flush_chunk();
    } else {
      chunk.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : rc);
    }
  }
  flush_chunk();
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < cleaned.size()) {
    std::size_t end = cleaned.find(' ', start);
    if (end == std::string_view::npos) end = cleaned.size();
    if (end > start) tokens.emplace_back(cleaned.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

// ---- Vocabulary ----

Vocabulary::Vocabulary() {
  tokens_ = {"<pad>", "<unk>"};
  index_.emplace("<pad>", kPad);
  index_.emplace("<unk>", kUnk);
}

Vocabulary Vocabulary::build(const std::unordered_map<std::string, std::uint64_t>& counts,
                             std::size_t max_size) {
  if (max_size < 2) {
    throw ArgumentError("vocabulary: max_size must cover the two reserved ids");
  }
  std::vector<std::pair<std::string_view, std::uint64_t>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [token, count] : counts) ranked.emplace_back(token, count);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  const std::size_t keep = std::min(ranked.size(), max_size - 2);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto id = static_cast<std::int32_t>(vocab.tokens_.size());
    vocab.tokens_.emplace_back(ranked[i].first);
    vocab.index_.emplace(vocab.tokens_.back(), id);
  }
  return vocab;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ArgumentError("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("vocabulary: cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < tokens_.size(); ++i) os << tokens_[i] << '\t' << i << '\n';
  os.flush();
  if (!os) throw IoError("vocabulary: write to '" + path + "' failed");
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("vocabulary: cannot open '" + path + "'");
  Vocabulary vocab;
  std::string line;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw IoError("vocabulary: '" + path + "' line " + std::to_string(expected + 1) +
                    " has no tab separator");
    }
    const std::string token = line.substr(0, tab);
    std::size_t id = 0;
    try {
      id = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw IoError("vocabulary: '" + path + "' has a non-numeric id on line " +
                    std::to_string(expected + 1));
    }
    if (id != expected) {
      throw IoError("vocabulary: '" + path + "' ids are not dense (expected " +
                    std::to_string(expected) + ", found " + std::to_string(id) + ")");
    }
    if (expected == 0 && token != "<pad>") throw IoError("vocabulary: id 0 must be <pad>");
    if (expected == 1 && token != "<unk>") throw IoError("vocabulary: id 1 must be <unk>");
    if (expected >= 2) {
      vocab.tokens_.push_back(token);
      vocab.index_.emplace(vocab.tokens_.back(), static_cast<std::int32_t>(expected));
    }
    ++expected;
  }
  if (expected < 2) throw IoError("vocabulary: '" + path + "' is missing the reserved ids");
  return vocab;
}

std::vector<std::int32_t> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                 std::size_t max_len) {
  std::vector<std::int32_t> ids(max_len, kPad);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.id(tokens[i]);
  return ids;
}

// ---- Dataset ----

void Dataset::add(std::span<const std::int32_t> ids, int label) {
  if (label != 0 && label != 1) {
    throw ArgumentError("dataset: label must be 0 or 1, got " + std::to_string(label));
  }
  pool_.insert(pool_.end(), ids.begin(), ids.end());
  offsets_.push_back(pool_.size());
  labels_.push_back(static_cast<std::uint8_t>(label));
}

std::span<const std::int32_t> Dataset::ids(std::size_t i) const {
  const std::size_t begin = offsets_[i];
  return {pool_.data() + begin, offsets_[i + 1] - begin};
}

void Dataset::ids_padded(std::size_t i, std::span<std::int32_t> out) const {
  const auto seq = ids(i);
  const std::size_t n = std::min(seq.size(), out.size());
  std::copy_n(seq.data(), n, out.data());
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), kPad);
}

namespace {
constexpr char kDatasetMagic[4] = {'S', 'C', 'D', '1'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr const char* kDsWho = "dataset";
}  // namespace

void Dataset::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("dataset: cannot open '" + path + "' for writing");
  os.write(kDatasetMagic, 4);
  bytes::put_u32(os, kDatasetVersion);
  bytes::put_u64(os, labels_.size());
  bytes::put_u64(os, pool_.size());
  os.write(reinterpret_cast<const char*>(labels_.data()),
           static_cast<std::streamsize>(labels_.size()));
  for (const std::uint64_t o : offsets_) bytes::put_u64(os, o);
  for (const std::int32_t v : pool_) bytes::put_i32(os, v);
  os.flush();
  if (!os) throw IoError("dataset: write to '" + path + "' failed");
}

Dataset Dataset::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("dataset: cannot open '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kDatasetMagic, 4) != 0) {
    throw IoError("dataset: '" + path + "' is not an encoded dataset");
  }
  if (bytes::get_u32(is, kDsWho) != kDatasetVersion) {
    throw IoError("dataset: unsupported version in '" + path + "'");
  }
  const std::uint64_t n = bytes::get_u64(is, kDsWho);
  const std::uint64_t pool_size = bytes::get_u64(is, kDsWho);

  Dataset ds;
  ds.labels_.resize(n);
  if (n > 0 && !is.read(reinterpret_cast<char*>(ds.labels_.data()),
                        static_cast<std::streamsize>(n))) {
    throw IoError("dataset: truncated file");
  }
  for (const std::uint8_t l : ds.labels_) {
    if (l > 1) throw IoError("dataset: corrupt label value");
  }

  // Offsets and ids arrive as one block each; decode little-endian in place.
  std::vector<char> block((n + 1) * 8);
  if (!is.read(block.data(), static_cast<std::streamsize>(block.size()))) {
    throw IoError("dataset: truncated file");
  }
  ds.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(block[i * 8 + b])) << (8 * b);
    }
    ds.offsets_[i] = v;
  }
  if (ds.offsets_[0] != 0 || ds.offsets_[n] != pool_size ||
      !std::is_sorted(ds.offsets_.begin(), ds.offsets_.end())) {
    throw IoError("dataset: corrupt offset table");
  }

  block.resize(pool_size * 4);
  if (pool_size > 0 && !is.read(block.data(), static_cast<std::streamsize>(block.size()))) {
    throw IoError("dataset: truncated file");
  }
  ds.pool_.assign(pool_size, 0);
  for (std::size_t i = 0; i < pool_size; ++i) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(block[i * 4 + b])) << (8 * b);
    }
    ds.pool_[i] = static_cast<std::int32_t>(v);
  }
  char extra;
  if (is.read(&extra, 1)) throw IoError("dataset: trailing bytes");
  return ds;
}

Split split_train_dev(std::size_t n, double train_frac, std::uint64_t seed) {
  if (train_frac < 0.0 || train_frac > 1.0) {
    throw ArgumentError("split: train_frac must lie in [0, 1]");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Prng rng(Prng::mix(seed, streams::kTrainDevSplit));
  rng.shuffle(idx);
  const std::size_t cut = static_cast<std::size_t>(static_cast<double>(n) * train_frac);
  Split split;
  split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
  split.dev.assign(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  return split;
}

// ---- LengthStats ----

void LengthStats::add(std::size_t token_count, int label) {
  if (label != 0 && label != 1) {
    throw ArgumentError("stats: label must be 0 or 1, got " + std::to_string(label));
  }
  ++count;
  total_tokens += token_count;
  if (token_count == 0) ++empty;
  max_len = std::max<std::uint64_t>(max_len, token_count);
  hist[std::min(token_count, kHistMax + 1)] += 1;
  label_counts[static_cast<std::size_t>(label)] += 1;
}

double LengthStats::mean_len() const {
  return count == 0 ? 0.0 : static_cast<double>(total_tokens) / static_cast<double>(count);
}

void LengthStats::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("stats: cannot open '" + path + "' for writing");
  os << "length,count\n";
  for (std::size_t len = 0; len <= kHistMax; ++len) os << len << ',' << hist[len] << '\n';
  os << "overflow," << hist[kHistMax + 1] << '\n';
  os.flush();
  if (!os) throw IoError("stats: write to '" + path + "' failed");
}

}  // namespace scnn::data
