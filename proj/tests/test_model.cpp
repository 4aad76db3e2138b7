#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "scnn/error.hpp"
#include "scnn/kernels.hpp"
#include "scnn/model.hpp"
#include "scnn/prng.hpp"
#include "scnn/tensor.hpp"
#include "support/util.hpp"

using namespace scnn;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.vocab_size = 40;
  cfg.embed_dim = 4;
  cfg.seq_len = 6;
  cfg.scnn_filter_dims = {5, 3};
  cfg.mlp_hidden = 3;
  cfg.cnn_channels = 2;
  cfg.cnn_kernel_h = 3;
  cfg.cnn_kernel_w = 4;
  cfg.cnn_pool = 2;
  cfg.lstm_layers = 2;
  cfg.lstm_hidden = 3;
  return cfg;
}

std::vector<std::int32_t> random_ids(const ModelConfig& cfg, Prng& rng) {
  std::vector<std::int32_t> ids(cfg.seq_len);
  for (auto& id : ids) id = static_cast<std::int32_t>(rng.next_below(cfg.vocab_size));
  return ids;
}

double cosine(const Tensor& a, const Tensor& b) {
  const double na = std::sqrt(kernels::dot(a.values(), a.values()));
  const double nb = std::sqrt(kernels::dot(b.values(), b.values()));
  return kernels::dot(a.values(), b.values()) / (na * nb);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("trunk parameter counts at full scale") {
  const ModelConfig cfg;  // full-scale defaults
  // one model at a time: each carries an 80MB embedding table
  {
    Model m(ModelVariant::kScnn, cfg, 0);
    CHECK(m.param_count(false) == 332);
    CHECK(m.param_count(true) == 10000332);
  }
  {
    Model m(ModelVariant::kMlp, cfg, 0);
    CHECK(m.param_count(false) == 28008);
    CHECK(m.param_count(true) == 10028008);
  }
  {
    Model m(ModelVariant::kCnn, cfg, 0);
    CHECK(m.param_count(false) == 200142);
    CHECK(m.param_count(true) == 10200142);
  }
  {
    Model m(ModelVariant::kBilstm, cfg, 0);
    CHECK(m.param_count(false) == 631298);
    CHECK(m.param_count(true) == 10631298);
  }
}

TEST_CASE("variant names round-trip") {
  for (const ModelVariant v :
       {ModelVariant::kScnn, ModelVariant::kMlp, ModelVariant::kCnn, ModelVariant::kBilstm}) {
    CHECK(variant_from_name(variant_name(v)) == v);
  }
  CHECK(variant_name(ModelVariant::kScnn) == "scnn");
  CHECK_THROWS_AS(variant_from_name("transformer"), ArgumentError);
}

TEST_CASE("construction is seed-deterministic") {
  const ModelConfig cfg = tiny_config();
  Model a(ModelVariant::kScnn, cfg, 42);
  Model b(ModelVariant::kScnn, cfg, 42);
  Model c(ModelVariant::kScnn, cfg, 43);

  auto pa = a.named_params(), pb = b.named_params(), pc = c.named_params();
  REQUIRE(pa.size() == pb.size());
  bool all_equal_ab = true, all_equal_ac = true;
  for (std::size_t p = 0; p < pa.size(); ++p) {
    CHECK(pa[p].name == pb[p].name);
    for (std::size_t i = 0; i < pa[p].tensor->size(); ++i) {
      if ((*pa[p].tensor)[i] != (*pb[p].tensor)[i]) all_equal_ab = false;
      if ((*pa[p].tensor)[i] != (*pc[p].tensor)[i]) all_equal_ac = false;
    }
  }
  CHECK(all_equal_ab);
  CHECK_FALSE(all_equal_ac);
}

TEST_CASE("zero parameters predict class 0 everywhere") {
  const ModelConfig cfg = tiny_config();
  for (const ModelVariant v :
       {ModelVariant::kScnn, ModelVariant::kMlp, ModelVariant::kCnn, ModelVariant::kBilstm}) {
    Model m(v, cfg, 1);
    for (auto& p : m.named_params()) p.tensor->fill(0.0);
    Prng rng(8);
    for (int i = 0; i < 20; ++i) {
      const auto ids = random_ids(cfg, rng);
      Tensor logits = m.predict_logits(ids);
      for (const double z : logits.values()) CHECK(z == 0.0);
      CHECK(m.predict_class(ids) == 0);  // argmax tie -> lowest index
    }
  }
}

TEST_CASE("closed-form logits match the layered forward") {
  const ModelConfig cfg = tiny_config();
  Model m(ModelVariant::kScnn, cfg, 21);
  Prng rng(22);
  for (int i = 0; i < 200; ++i) {
    const auto ids = random_ids(cfg, rng);
    Tensor layered = m.predict_logits(ids);
    Tensor closed = m.closed_form_logits(ids);
    REQUIRE(layered.size() == closed.size());
    for (std::size_t jdx = 0; jdx < layered.size(); ++jdx) {
      CHECK(std::abs(layered[jdx] - closed[jdx]) <= 1e-9);
    }
  }
}

TEST_CASE("swarm features are collinear with the filter weights") {
  const ModelConfig cfg = tiny_config();
  Model m(ModelVariant::kScnn, cfg, 33);
  const Tensor* s2 = nullptr;
  for (auto& p : m.named_params()) {
    // filters expose their weight vector as ".s"; the last filter wins
    if (p.name.size() > 2 && p.name.substr(p.name.size() - 2) == ".s") s2 = p.tensor;
  }
  REQUIRE(s2 != nullptr);
  REQUIRE(s2->size() == cfg.scnn_filter_dims.back());

  Prng rng(34);
  for (int i = 0; i < 100; ++i) {
    const auto ids = random_ids(cfg, rng);
    Tensor f = m.swarm_features(ids);
    REQUIRE(f.size() == s2->size());
    CHECK(std::abs(std::abs(cosine(f, *s2)) - 1.0) <= 1e-9);
  }
}

TEST_CASE("logits are invariant to token order") {
  const ModelConfig cfg = tiny_config();
  Model m(ModelVariant::kScnn, cfg, 44);
  Prng rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    auto ids = random_ids(cfg, rng);
    Tensor base = m.predict_logits(ids);
    auto shuffled = ids;
    rng.shuffle(shuffled);
    Tensor perm = m.predict_logits(shuffled);
    for (std::size_t jdx = 0; jdx < base.size(); ++jdx) {
      CHECK(std::abs(base[jdx] - perm[jdx]) <= 1e-9);
    }
  }
}

TEST_CASE("embedding scale passes straight through to the logits") {
  // With the dense bias at zero the whole scnn trunk is linear in the
  // embedding values: scaling the table scales the logits.
  const ModelConfig cfg = tiny_config();
  Model m(ModelVariant::kScnn, cfg, 55);
  for (auto& p : m.named_params()) {
    if (p.is_bias) p.tensor->fill(0.0);
  }
  Prng rng(56);
  const auto ids = random_ids(cfg, rng);
  Tensor base = m.predict_logits(ids);
  for (double& v : m.embedding().table().values()) v *= 3.0;
  Tensor scaled = m.predict_logits(ids);
  for (std::size_t jdx = 0; jdx < base.size(); ++jdx) {
    CHECK(scaled[jdx] == doctest::Approx(3.0 * base[jdx]).epsilon(1e-9));
  }
}

TEST_CASE("forward validates the id count") {
  Model m(ModelVariant::kScnn, tiny_config(), 1);
  std::vector<std::int32_t> too_short(3, 0);
  ModelTrace trace;
  CHECK_THROWS_AS(m.forward(too_short, trace), ArgumentError);
}

TEST_CASE("feature taps are scnn-only, closed form needs the pure trunk") {
  ModelConfig cfg = tiny_config();
  Model mlp(ModelVariant::kMlp, cfg, 1);
  std::vector<std::int32_t> ids(cfg.seq_len, 2);
  CHECK_THROWS_AS(mlp.swarm_features(ids), ArgumentError);
  CHECK_THROWS_AS(mlp.closed_form_logits(ids), ArgumentError);

  cfg.relu_after_filters = true;
  Model relu_scnn(ModelVariant::kScnn, cfg, 1);
  CHECK_NOTHROW(relu_scnn.swarm_features(ids));
  CHECK_THROWS_AS(relu_scnn.closed_form_logits(ids), ArgumentError);
}

TEST_CASE("config validation") {
  ModelConfig cfg = tiny_config();
  cfg.vocab_size = 0;
  CHECK_THROWS_AS(Model(ModelVariant::kScnn, cfg, 1), ConfigError);

  cfg = tiny_config();
  cfg.embed_dim = 0;
  CHECK_THROWS_AS(Model(ModelVariant::kScnn, cfg, 1), ConfigError);

  cfg = tiny_config();
  cfg.num_classes = 1;
  CHECK_THROWS_AS(Model(ModelVariant::kScnn, cfg, 1), ConfigError);

  cfg = tiny_config();
  cfg.scnn_filter_dims = {};
  CHECK_THROWS_AS(Model(ModelVariant::kScnn, cfg, 1), ConfigError);

  // shape-chain validation: kernel taller than the embedded sequence
  cfg = tiny_config();
  cfg.cnn_kernel_h = 100;
  cfg.cnn_kernel_w = 100;
  CHECK_THROWS_AS(Model(ModelVariant::kCnn, cfg, 1), ConfigError);
}

TEST_CASE("checkpoint round-trips bit-identically") {
  testsupport::TempDir tmp("scnn-ckpt");
  const ModelConfig cfg = tiny_config();

  for (const ModelVariant v :
       {ModelVariant::kScnn, ModelVariant::kMlp, ModelVariant::kCnn, ModelVariant::kBilstm}) {
    Model m(v, cfg, 77);
    const std::string p1 = tmp.file(std::string(variant_name(v)) + "-1.bin");
    const std::string p2 = tmp.file(std::string(variant_name(v)) + "-2.bin");
    m.save_checkpoint(p1);

    Model loaded = Model::load_checkpoint(p1);
    CHECK(loaded.variant() == v);
    CHECK(loaded.seed() == 77);
    CHECK(loaded.config().vocab_size == cfg.vocab_size);
    CHECK(loaded.config().seq_len == cfg.seq_len);

    Prng rng(78);
    for (int i = 0; i < 10; ++i) {
      const auto ids = random_ids(cfg, rng);
      Tensor a = m.predict_logits(ids);
      Tensor b = loaded.predict_logits(ids);
      for (std::size_t jdx = 0; jdx < a.size(); ++jdx) CHECK(a[jdx] == b[jdx]);
    }

    loaded.save_checkpoint(p2);
    CHECK(testsupport::same_bytes(p1, p2));
  }
}

TEST_CASE("checkpoint loader rejects bad files") {
  testsupport::TempDir tmp("scnn-ckpt-bad");
  Model m(ModelVariant::kScnn, tiny_config(), 5);
  const std::string good = tmp.file("good.bin");
  m.save_checkpoint(good);

  // truncation at several depths
  const std::string whole = testsupport::slurp(good);
  for (const std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{16},
                                 whole.size() / 2, whole.size() - 1}) {
    const std::string cut = tmp.file("cut.bin");
    testsupport::spit(cut, whole.substr(0, keep));
    CHECK_THROWS_AS(Model::load_checkpoint(cut), IoError);
  }

  // trailing garbage
  const std::string padded = tmp.file("padded.bin");
  testsupport::spit(padded, whole + "x");
  CHECK_THROWS_AS(Model::load_checkpoint(padded), IoError);

  // wrong magic
  std::string magic = whole;
  magic[0] = 'X';
  const std::string badmagic = tmp.file("badmagic.bin");
  testsupport::spit(badmagic, magic);
  CHECK_THROWS_AS(Model::load_checkpoint(badmagic), IoError);

  CHECK_THROWS_AS(Model::load_checkpoint(tmp.file("missing.bin")), IoError);
}

}  // TEST_SUITE
