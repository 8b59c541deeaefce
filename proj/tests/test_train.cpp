#include <doctest.h>

#include <cmath>
#include <cstring>

#include "statefuzz/corpus.hpp"
#include "statefuzz/train.hpp"

using namespace statefuzz;

namespace {

RnnConfig toy_lm_config(std::size_t vocab, std::size_t e = 16) {
    RnnConfig cfg;
    cfg.cell_kind = CellKind::lstm;
    cfg.num_layers = 1;
    cfg.state_size = e;
    cfg.vocab_size = vocab;
    cfg.embedding_dim = 8;
    cfg.input_dim = 8;
    cfg.output_head = OutputHead::softmax_per_step;
    return cfg;
}

TextCorpus toy_corpus() {
    std::string text;
    for (int i = 0; i < 60; ++i) text += "abababababababababababababababab\n";
    return corpus_from_text(text);
}

}  // namespace

TEST_CASE("training with learning rate zero leaves parameters bit-exact") {
    TextCorpus corpus = toy_corpus();
    RnnConfig cfg = toy_lm_config(corpus.vocab_size());
    Rng init(1);
    ModelParams params = ModelParams::init(cfg, init, 0.1);
    ModelParams before = params;

    TrainHyperparams hp;
    hp.epochs = 1;
    hp.learning_rate = 0.0;
    hp.seq_len = 8;
    hp.batch_size = 4;
    hp.seed = 1;
    train_lm(cfg, params, corpus.stream(Split::train), corpus.stream(Split::valid), hp);

    for (auto& [name, tensor] : before.tensors) {
        const Tensor& after = params.at(name);
        for (std::size_t i = 0; i < tensor.numel(); ++i) {
            const double x = tensor[i], y = after[i];
            std::uint64_t a, b;
            std::memcpy(&a, &x, 8);
            std::memcpy(&b, &y, 8);
            CHECK(a == b);
        }
    }
}

TEST_CASE("a period-2 toy corpus trains to perplexity below 2") {
    TextCorpus corpus = toy_corpus();
    RnnConfig cfg = toy_lm_config(corpus.vocab_size());
    Rng init(1);
    ModelParams params = ModelParams::init(cfg, init, 0.1);

    TrainHyperparams hp;
    hp.epochs = 20;
    hp.learning_rate = 1.0;
    hp.decay_after = 10;
    hp.seq_len = 8;
    hp.batch_size = 8;
    hp.seed = 1;
    TrainReport report =
        train_lm(cfg, params, corpus.stream(Split::train), corpus.stream(Split::valid), hp);
    CHECK(report.final_valid_perplexity() < 2.0);

    // loss decreases monotonically over the first three epochs
    REQUIRE(report.epochs.size() >= 3);
    CHECK(report.epochs[1].train_perplexity < report.epochs[0].train_perplexity);
    CHECK(report.epochs[2].train_perplexity < report.epochs[1].train_perplexity);
}

TEST_CASE("training is deterministic given config and seed") {
    TextCorpus corpus = toy_corpus();
    RnnConfig cfg = toy_lm_config(corpus.vocab_size());
    TrainHyperparams hp;
    hp.epochs = 2;
    hp.seq_len = 8;
    hp.batch_size = 4;
    hp.seed = 7;

    Rng i1(2), i2(2);
    ModelParams p1 = ModelParams::init(cfg, i1, 0.1);
    ModelParams p2 = ModelParams::init(cfg, i2, 0.1);
    train_lm(cfg, p1, corpus.stream(Split::train), corpus.stream(Split::valid), hp);
    train_lm(cfg, p2, corpus.stream(Split::train), corpus.stream(Split::valid), hp);
    for (auto& [name, tensor] : p1.tensors) {
        const Tensor& other = p2.at(name);
        for (std::size_t i = 0; i < tensor.numel(); ++i) CHECK(tensor[i] == other[i]);
    }
}

TEST_CASE("divergence raises a training error naming the epoch") {
    TextCorpus corpus = toy_corpus();
    RnnConfig cfg = toy_lm_config(corpus.vocab_size());
    Rng init(1);
    ModelParams params = ModelParams::init(cfg, init, 0.1);

    TrainHyperparams hp;
    hp.epochs = 4;
    hp.learning_rate = 1e200;  // guaranteed blow-up
    hp.clip_norm = 0.0;        // disable clipping
    hp.seq_len = 8;
    hp.batch_size = 8;
    hp.seed = 1;
    CHECK_THROWS_WITH_AS(
        train_lm(cfg, params, corpus.stream(Split::train), corpus.stream(Split::valid), hp),
        doctest::Contains("epoch"), TrainingError);
}

TEST_CASE("classifier training reaches high accuracy on separable data") {
    // three classes with distinct constant rows plus small deterministic jitter
    const std::size_t n = 90, t = 4, d = 3, k = 3;
    Rng rng(5);
    SeqDataset train;
    train.num_classes = k;
    train.values = Tensor({n, t, d});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % k;
        train.labels.push_back(label);
        for (std::size_t j = 0; j < t * d; ++j)
            train.values[i * t * d + j] =
                static_cast<double>(label) / (k - 1) + rng.uniform(-0.05, 0.05);
    }

    RnnConfig cfg;
    cfg.cell_kind = CellKind::lstm;
    cfg.num_layers = 1;
    cfg.state_size = 8;
    cfg.input_dim = d;
    cfg.num_classes = k;
    cfg.output_head = OutputHead::softmax_final;

    Rng init(1);
    ModelParams params = ModelParams::init(cfg, init, 0.1);
    TrainHyperparams hp;
    hp.epochs = 30;
    hp.batch_size = 16;
    hp.learning_rate = 1.0;
    hp.decay_after = 20;
    hp.seed = 1;
    ClassifierReport report = train_classifier(cfg, params, train, train, hp);
    CHECK(report.final_accuracy() >= 0.9);
}
