#include "scnn/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "scnn/data.hpp"
#include "scnn/error.hpp"
#include "scnn/kernels.hpp"
#include "scnn/model.hpp"
#include "scnn/pgm.hpp"
#include "scnn/train.hpp"

namespace scnn::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checksum: cannot open '" + path + "'");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    const std::streamsize n = is.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!is) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string default_data_dir() {
  const char* env = std::getenv("SCNN_DATA_DIR");
  return env != nullptr && env[0] != '\0' ? env : "data";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string resolve_data_dir(const std::string& flag) {
  return flag.empty() ? default_data_dir() : flag;
}

void write_manifest(const fs::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("manifest: cannot open '" + path.string() + "' for writing");
  for (const auto& [key, value] : entries) os << key << '=' << value << '\n';
  os.flush();
  if (!os) throw IoError("manifest: write to '" + path.string() + "' failed");
}

// Exit-code contract: declared outputs must exist and be non-empty.
int validate_outputs(const fs::path& dir, const std::vector<std::string>& names) {
  int rc = 0;
  for (const auto& name : names) {
    const fs::path p = dir / name;
    std::error_code ec;
    const auto size = fs::file_size(p, ec);
    if (ec || size == 0) {
      std::cerr << "error: declared output '" << p.string() << "' is missing or empty\n";
      rc = 1;
    }
  }
  return rc;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

int run_prepare(const PrepareOptions& opt) {
  const auto t0 = Clock::now();
  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);

  std::vector<std::pair<std::uint8_t, std::string>> docs;  // (label, cleaned text)
  std::size_t neutral = 0;
  data::ParseStats st = data::parse_sentiment140(
      opt.train_csv,
      [&](int polarity, std::string_view text) {
        if (polarity == 2) {
          ++neutral;
          return;
        }
        docs.emplace_back(polarity == 4 ? 1 : 0, data::clean_text(text));
      },
      opt.max_malformed_frac);
  st.dropped_neutral = neutral;

  std::unordered_map<std::string, std::uint64_t> counts;
  data::LengthStats stats;
  for (const auto& [label, cleaned] : docs) {
    auto tokens = data::tokenize(cleaned);
    stats.add(tokens.size(), label);
    for (auto& tok : tokens) ++counts[std::move(tok)];
  }

  const data::Vocabulary vocab = data::Vocabulary::build(counts, opt.vocab_size);
  vocab.save((out_dir / "vocab.tsv").string());

  data::Dataset ds;
  std::size_t empty_skipped = 0;
  std::vector<std::int32_t> ids;
  for (const auto& [label, cleaned] : docs) {
    const auto tokens = data::tokenize(cleaned);
    if (tokens.empty()) {
      ++empty_skipped;  // nothing left after cleaning; useless as a training row
      continue;
    }
    ids.clear();
    const std::size_t n = std::min(tokens.size(), opt.seq_len);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(vocab.id(tokens[i]));
    ds.add(ids, label);
  }
  ds.save((out_dir / "train.bin").string());
  stats.write_csv((out_dir / "length_hist.csv").string());

  write_manifest(out_dir / "prepare_manifest.txt",
                 {{"command", "prepare"},
                  {"input", opt.train_csv},
                  {"rows", std::to_string(st.rows)},
                  {"malformed", std::to_string(st.malformed)},
                  {"dropped_neutral", std::to_string(st.dropped_neutral)},
                  {"empty_skipped", std::to_string(empty_skipped)},
                  {"examples", std::to_string(ds.size())},
                  {"label0", std::to_string(stats.label_counts[0])},
                  {"label1", std::to_string(stats.label_counts[1])},
                  {"mean_tokens", fmt(stats.mean_len())},
                  {"max_tokens", std::to_string(stats.max_len)},
                  {"vocab_size", std::to_string(vocab.size())},
                  {"seq_len", std::to_string(opt.seq_len)},
                  {"vocab_fnv1a", hex64(fnv1a_file((out_dir / "vocab.tsv").string()))},
                  {"dataset_fnv1a", hex64(fnv1a_file((out_dir / "train.bin").string()))},
                  {"length_hist_fnv1a", hex64(fnv1a_file((out_dir / "length_hist.csv").string()))},
                  {"outputs", "vocab.tsv;train.bin;length_hist.csv"}});

  std::cout << "prepared " << ds.size() << " examples (" << stats.label_counts[1]
            << " positive / " << stats.label_counts[0] << " negative), vocabulary "
            << vocab.size() << " entries\n"
            << "rows=" << st.rows << " malformed=" << st.malformed
            << " dropped_neutral=" << st.dropped_neutral << " empty_skipped=" << empty_skipped
            << "\n"
            << "wrote " << (out_dir / "vocab.tsv").string() << ", "
            << (out_dir / "train.bin").string() << ", "
            << (out_dir / "length_hist.csv").string() << " in " << std::fixed
            << std::setprecision(1) << seconds_since(t0) << "s\n";
  return validate_outputs(out_dir,
                          {"vocab.tsv", "train.bin", "length_hist.csv", "prepare_manifest.txt"});
}

int run_train(const TrainOptions& opt) {
  const std::string data_dir = resolve_data_dir(opt.data_dir);
  const fs::path vocab_path = fs::path(data_dir) / "vocab.tsv";
  const fs::path data_path = fs::path(data_dir) / "train.bin";
  const data::Vocabulary vocab = data::Vocabulary::load(vocab_path.string());
  const data::Dataset ds = data::Dataset::load(data_path.string());

  const ModelVariant variant = variant_from_name(opt.model);
  ModelConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.seq_len = opt.seq_len;
  cfg.relu_after_filters = opt.relu_after_filters;

  const data::Split split = data::split_train_dev(ds.size(), opt.train_frac, opt.seed);

  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);
  write_manifest(out_dir / "run_manifest.txt",
                 {{"command", "train"},
                  {"model", opt.model},
                  {"seed", std::to_string(opt.seed)},
                  {"epochs", std::to_string(opt.epochs)},
                  {"batch_size", std::to_string(opt.batch_size)},
                  {"learning_rate", fmt(opt.learning_rate)},
                  {"optimizer", opt.optimizer},
                  {"subset", std::to_string(opt.subset)},
                  {"seq_len", std::to_string(opt.seq_len)},
                  {"relu_after_filters", opt.relu_after_filters ? "1" : "0"},
                  {"train_frac", fmt(opt.train_frac)},
                  {"vocab_size", std::to_string(vocab.size())},
                  {"train_examples", std::to_string(split.train.size())},
                  {"dev_examples", std::to_string(split.dev.size())},
                  {"vocab_file", vocab_path.string()},
                  {"vocab_fnv1a", hex64(fnv1a_file(vocab_path.string()))},
                  {"dataset", data_path.string()},
                  {"dataset_fnv1a", hex64(fnv1a_file(data_path.string()))},
                  {"outputs", "curve.csv;metrics.csv;checkpoint.bin;timings.txt"}});

  Model model(variant, cfg, opt.seed);
  train::TrainConfig tcfg;
  tcfg.batch_size = opt.batch_size;
  tcfg.learning_rate = opt.learning_rate;
  tcfg.epochs = opt.epochs;
  tcfg.seed = opt.seed;
  tcfg.optimizer = train::optimizer_from_name(opt.optimizer);
  tcfg.subset = opt.subset;

  const auto t0 = Clock::now();
  const train::TrainResult result = train::run(model, ds, split.train, split.dev, tcfg);
  const double train_seconds = seconds_since(t0);

  {
    std::ofstream os(out_dir / "curve.csv", std::ios::trunc);
    if (!os) throw IoError("train: cannot write curve.csv");
    os << "samples_seen,loss,accuracy\n";
    for (const auto& p : result.curve) {
      os << p.samples_seen << ',' << fmt(p.loss) << ',' << fmt(p.accuracy) << '\n';
    }
  }
  {
    std::ofstream os(out_dir / "metrics.csv", std::ios::trunc);
    if (!os) throw IoError("train: cannot write metrics.csv");
    os << "epoch,train_loss,dev_loss,dev_accuracy\n";
    for (const auto& em : result.epochs) {
      os << em.epoch << ',' << fmt(em.train_loss) << ',' << fmt(em.dev_loss) << ','
         << fmt(em.dev_accuracy) << '\n';
    }
  }
  model.save_checkpoint((out_dir / "checkpoint.bin").string());
  {
    std::ofstream os(out_dir / "timings.txt", std::ios::trunc);
    os << "train_seconds=" << std::fixed << std::setprecision(3) << train_seconds << '\n';
  }

  for (const auto& em : result.epochs) {
    std::cout << "epoch " << em.epoch << ": train_loss=" << std::setprecision(6) << em.train_loss
              << " dev_loss=" << em.dev_loss << " dev_accuracy=" << em.dev_accuracy << '\n';
  }
  std::cout << "best epoch " << result.best_epoch << " (dev accuracy "
            << result.best_dev_accuracy << "), " << result.curve.size()
            << " curve points, trained in " << std::fixed << std::setprecision(1)
            << train_seconds << "s\n";
  return validate_outputs(
      out_dir, {"run_manifest.txt", "curve.csv", "metrics.csv", "checkpoint.bin", "timings.txt"});
}

int run_eval(const EvalOptions& opt) {
  const Model model = Model::load_checkpoint(opt.checkpoint);
  const std::string data_dir = resolve_data_dir(opt.data_dir);
  const data::Vocabulary vocab =
      data::Vocabulary::load((fs::path(data_dir) / "vocab.tsv").string());
  if (vocab.size() != model.config().vocab_size) {
    throw ConfigError("eval: vocabulary has " + std::to_string(vocab.size()) +
                      " entries but the checkpoint was trained with " +
                      std::to_string(model.config().vocab_size));
  }

  data::ParseStats st;
  const auto tweets = data::load_sentiment140(opt.test_csv, &st);
  if (tweets.empty()) throw IoError("eval: no usable rows in '" + opt.test_csv + "'");

  data::Dataset ds;
  std::size_t negatives = 0;
  for (const auto& tweet : tweets) {
    const auto ids = data::encode(data::tokenize(data::clean_text(tweet.text)), vocab,
                                  model.config().seq_len);
    ds.add(ids, tweet.label);
    negatives += tweet.label == 0 ? 1 : 0;
  }
  const train::EvalResult r = train::evaluate(model, ds);

  std::cout << "test examples: " << r.count << " (" << negatives << " negative, "
            << r.count - negatives << " positive; dropped " << st.dropped_neutral
            << " neutral)\n"
            << "accuracy: " << std::setprecision(6) << r.accuracy << '\n'
            << "mean loss: " << r.mean_loss << '\n';

  std::ofstream os(opt.out_csv, std::ios::trunc);
  if (!os) throw IoError("eval: cannot write '" + opt.out_csv + "'");
  os << "count,negative,positive,accuracy,mean_loss\n"
     << r.count << ',' << negatives << ',' << r.count - negatives << ',' << fmt(r.accuracy)
     << ',' << fmt(r.mean_loss) << '\n';
  os.flush();
  if (!os) throw IoError("eval: write to '" + opt.out_csv + "' failed");
  return validate_outputs(fs::path(opt.out_csv).parent_path(),
                          {fs::path(opt.out_csv).filename().string()});
}

int run_params(const ParamsOptions& opt) {
  std::vector<ModelVariant> variants;
  if (opt.model == "all") {
    variants = {ModelVariant::kScnn, ModelVariant::kMlp, ModelVariant::kCnn,
                ModelVariant::kBilstm};
  } else {
    variants = {variant_from_name(opt.model)};
  }

  std::vector<std::tuple<std::string, std::size_t, std::size_t>> rows;
  for (const ModelVariant v : variants) {
    const Model model(v, ModelConfig{}, /*seed=*/0);
    rows.emplace_back(std::string(variant_name(v)), model.param_count(false),
                      model.param_count(true));
  }

  std::cout << std::left << std::setw(8) << "model" << std::right << std::setw(14)
            << "trunk_params" << std::setw(16) << "total_params" << '\n';
  for (const auto& [name, trunk, total] : rows) {
    std::cout << std::left << std::setw(8) << name << std::right << std::setw(14) << trunk
              << std::setw(16) << total << '\n';
  }

  if (!opt.out_csv.empty()) {
    std::ofstream os(opt.out_csv, std::ios::trunc);
    if (!os) throw IoError("params: cannot write '" + opt.out_csv + "'");
    os << "model,trunk_params,total_params\n";
    for (const auto& [name, trunk, total] : rows) {
      os << name << ',' << trunk << ',' << total << '\n';
    }
    os.flush();
    if (!os) throw IoError("params: write to '" + opt.out_csv + "' failed");
    return validate_outputs(fs::path(opt.out_csv).parent_path(),
                            {fs::path(opt.out_csv).filename().string()});
  }
  return 0;
}

int run_swarm_viz(const SwarmVizOptions& opt) {
  const Model model = Model::load_checkpoint(opt.checkpoint);
  if (model.variant() != ModelVariant::kScnn) {
    throw ArgumentError("swarm-viz: checkpoint holds a " + std::string(variant_name(model.variant())) +
                        " model; swarm features exist only for scnn");
  }
  const std::string data_dir = resolve_data_dir(opt.data_dir);
  const data::Vocabulary vocab =
      data::Vocabulary::load((fs::path(data_dir) / "vocab.tsv").string());
  if (vocab.size() != model.config().vocab_size) {
    throw ConfigError("swarm-viz: vocabulary/checkpoint size mismatch");
  }

  std::ifstream is(opt.sentences_file);
  if (!is) throw IoError("swarm-viz: cannot open '" + opt.sentences_file + "'");
  std::vector<std::string> sentences;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) sentences.push_back(line);
  }
  if (sentences.empty()) {
    throw ArgumentError("swarm-viz: '" + opt.sentences_file + "' has no sentences");
  }

  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);

  std::vector<Tensor> features;
  for (const auto& sentence : sentences) {
    const auto ids = data::encode(data::tokenize(data::clean_text(sentence)), vocab,
                                  model.config().seq_len);
    features.push_back(model.swarm_features(ids));
  }
  const std::size_t m = features.front().size();

  std::vector<std::string> outputs = {"features.csv", "cosines.csv"};
  {
    std::ofstream os(out_dir / "features.csv", std::ios::trunc);
    if (!os) throw IoError("swarm-viz: cannot write features.csv");
    os << "sentence";
    for (std::size_t j = 0; j < m; ++j) os << ",f" << j;
    os << '\n';
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      os << csv_quote(sentences[i]);
      for (std::size_t j = 0; j < m; ++j) os << ',' << fmt(features[i][j]);
      os << '\n';
    }
  }

  double min_abs_cos = 1.0;
  bool any_pair = false;
  {
    std::ofstream os(out_dir / "cosines.csv", std::ios::trunc);
    if (!os) throw IoError("swarm-viz: cannot write cosines.csv");
    os << "i,j,cosine\n";
    for (std::size_t i = 0; i < features.size(); ++i) {
      for (std::size_t j = 0; j < features.size(); ++j) {
        const double na = kernels::dot(features[i].values(), features[i].values());
        const double nb = kernels::dot(features[j].values(), features[j].values());
        double cos = 0.0;
        if (na > 0.0 && nb > 0.0) {
          cos = kernels::dot(features[i].values(), features[j].values()) /
                (std::sqrt(na) * std::sqrt(nb));
        }
        os << i << ',' << j << ',' << fmt(cos) << '\n';
        if (i < j && na > 0.0 && nb > 0.0) {
          min_abs_cos = std::min(min_abs_cos, std::abs(cos));
          any_pair = true;
        }
      }
    }
  }

  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string name = "sentence_" + std::to_string(i) + ".pgm";
    pgm::write((out_dir / name).string(), features[i].values(), 1, m);
    outputs.push_back(name);
  }

  std::cout << "wrote swarm features for " << sentences.size() << " sentences to "
            << out_dir.string() << '\n';
  if (any_pair) {
    std::cout << "min pairwise |cosine| over nonzero tensors: " << std::setprecision(12)
              << min_abs_cos << '\n';
  }
  return validate_outputs(out_dir, outputs);
}

}  // namespace scnn::cli
