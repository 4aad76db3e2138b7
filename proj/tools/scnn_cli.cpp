#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "scnn/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"swarm-filter text classification toolkit"};
  app.require_subcommand(1);

  scnn::cli::PrepareOptions prep;
  auto* prepare =
      app.add_subcommand("prepare", "Parse and clean a tweet CSV, build the vocabulary, encode");
  prepare->add_option("--train-csv", prep.train_csv, "raw training CSV")->required();
  prepare->add_option("--out-dir", prep.out_dir, "directory for prepared files")->required();
  prepare->add_option("--vocab-size", prep.vocab_size, "vocabulary cap incl. <pad>/<unk>");
  prepare->add_option("--seq-len", prep.seq_len, "token window length");
  prepare->add_option("--max-malformed", prep.max_malformed_frac,
                      "abort when more than this fraction of lines is malformed");

  scnn::cli::TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train a model on prepared data");
  train->add_option("--model", tr.model, "scnn | mlp | cnn | bilstm")
      ->check(CLI::IsMember({"scnn", "mlp", "cnn", "bilstm"}));
  train->add_option("--data-dir", tr.data_dir,
                    "prepared data directory (default $SCNN_DATA_DIR or ./data)");
  train->add_option("--out-dir", tr.out_dir, "directory for run outputs")->required();
  train->add_option("--seed", tr.seed);
  train->add_option("--epochs", tr.epochs);
  train->add_option("--batch-size", tr.batch_size);
  train->add_option("--learning-rate", tr.learning_rate);
  train->add_option("--optimizer", tr.optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  train->add_option("--subset", tr.subset, "train on only the first N shuffled samples");
  train->add_option("--seq-len", tr.seq_len);
  train->add_flag("--relu-after-filters", tr.relu_after_filters,
                  "insert relu after each swarm filter (scnn)");
  train->add_option("--train-frac", tr.train_frac, "train/dev split fraction");

  scnn::cli::EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a raw test CSV");
  eval->add_option("--checkpoint", ev.checkpoint)->required();
  eval->add_option("--test-csv", ev.test_csv)->required();
  eval->add_option("--data-dir", ev.data_dir,
                   "directory holding vocab.tsv (default $SCNN_DATA_DIR or ./data)");
  eval->add_option("--out-csv", ev.out_csv, "metrics CSV path");

  scnn::cli::ParamsOptions pa;
  auto* params = app.add_subcommand("params", "Print trainable-parameter counts per model");
  params->add_option("--model", pa.model)
      ->check(CLI::IsMember({"scnn", "mlp", "cnn", "bilstm", "all"}));
  params->add_option("--out-csv", pa.out_csv, "also write the table as CSV");

  scnn::cli::SwarmVizOptions viz;
  auto* swarm_viz = app.add_subcommand(
      "swarm-viz", "Dump last-swarm-filter outputs, pairwise cosines and heatmaps");
  swarm_viz->add_option("--checkpoint", viz.checkpoint)->required();
  swarm_viz->add_option("--sentences-file", viz.sentences_file, "one sentence per line")
      ->required();
  swarm_viz->add_option("--out-dir", viz.out_dir)->required();
  swarm_viz->add_option("--data-dir", viz.data_dir,
                        "directory holding vocab.tsv (default $SCNN_DATA_DIR or ./data)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) return scnn::cli::run_prepare(prep);
    if (train->parsed()) return scnn::cli::run_train(tr);
    if (eval->parsed()) return scnn::cli::run_eval(ev);
    if (params->parsed()) return scnn::cli::run_params(pa);
    if (swarm_viz->parsed()) return scnn::cli::run_swarm_viz(viz);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
