#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "scnn/synth.hpp"

// Generates a deterministic stand-in corpus in the ingest CSV format, for
// exercising the pipeline at full scale when the real corpus is unavailable.
int main(int argc, char** argv) {
  CLI::App app{"synthetic tweet-corpus generator"};

  scnn::synth::SynthSpec spec;
  std::string out_train, out_test;
  app.add_option("--out-train", out_train, "write the training CSV here");
  app.add_option("--out-test", out_test, "write the hand-label-style test CSV here");
  app.add_option("--seed", spec.seed);
  app.add_option("--train-rows", spec.train_rows, "row count (half negative, half positive)");
  app.add_option("--filler-vocab", spec.filler_vocab, "distinct neutral word types");
  app.add_option("--sentiment-vocab", spec.sentiment_vocab, "word types per polarity pool");
  app.add_option("--sentiment-rate", spec.sentiment_rate);
  app.add_option("--flip-rate", spec.flip_rate);

  CLI11_PARSE(app, argc, argv);
  if (out_train.empty() && out_test.empty()) {
    std::cerr << "error: nothing to do (pass --out-train and/or --out-test)\n";
    return 1;
  }

  try {
    if (!out_train.empty()) {
      scnn::synth::write_train_csv(out_train, spec);
      std::cout << "wrote " << spec.train_rows << " rows to " << out_train << '\n';
    }
    if (!out_test.empty()) {
      scnn::synth::write_test_csv(out_test, spec);
      std::cout << "wrote " << spec.test_negative + spec.test_neutral + spec.test_positive
                << " rows to " << out_test << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
