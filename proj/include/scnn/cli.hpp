#pragma once

#include <cstdint>
#include <string>

namespace scnn::cli {

// FNV-1a (64-bit) over a whole file; used for the manifest checksums.
std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t v);

// --data-dir default: $SCNN_DATA_DIR when set, else "data".
std::string default_data_dir();

struct PrepareOptions {
  std::string train_csv;
  std::string out_dir;
  std::size_t vocab_size = 100000;
  std::size_t seq_len = 140;
  double max_malformed_frac = 0.001;
};

struct TrainOptions {
  std::string model = "scnn";
  std::string data_dir;
  std::string out_dir;
  std::uint64_t seed = 42;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::string optimizer = "adam";
  std::size_t subset = 0;  // 0 = full training split
  std::size_t seq_len = 140;
  bool relu_after_filters = false;
  double train_frac = 0.9;
};

struct EvalOptions {
  std::string checkpoint;
  std::string test_csv;
  std::string data_dir;
  std::string out_csv = "eval_metrics.csv";
};

struct ParamsOptions {
  std::string model = "all";  // scnn | mlp | cnn | bilstm | all
  std::string out_csv;        // empty = stdout only
};

struct SwarmVizOptions {
  std::string checkpoint;
  std::string sentences_file;
  std::string out_dir;
  std::string data_dir;
};

// Each command returns the process exit code: 0 only when every declared
// output file was written and validated. Invalid inputs raise the library's
// error types; the binary turns those into message + nonzero exit.
int run_prepare(const PrepareOptions& opt);
int run_train(const TrainOptions& opt);
int run_eval(const EvalOptions& opt);
int run_params(const ParamsOptions& opt);
int run_swarm_viz(const SwarmVizOptions& opt);

}  // namespace scnn::cli
