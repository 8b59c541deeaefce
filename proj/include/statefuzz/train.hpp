#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "statefuzz/corpus.hpp"
#include "statefuzz/model.hpp"
#include "statefuzz/objectives.hpp"

namespace statefuzz {

// Plain SGD with gradient-norm clipping and stepwise learning-rate decay.
struct TrainHyperparams {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    std::size_t seq_len = 32;
    double learning_rate = 1.0;
    double lr_decay = 0.5;
    std::size_t decay_after = 6;  // epochs at full rate before decay kicks in
    double clip_norm = 5.0;
    double init_scale = 0.1;
    std::uint64_t seed = 1;

    double rate_for_epoch(std::size_t epoch) const {
        double rate = learning_rate;
        for (std::size_t e = decay_after; e <= epoch; ++e) rate *= lr_decay;
        return rate;
    }
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_perplexity = 0.0;
    double valid_perplexity = 0.0;
    double learning_rate = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;

    double final_valid_perplexity() const {
        return epochs.empty() ? 0.0 : epochs.back().valid_perplexity;
    }
};

namespace detail {

// Clip the global gradient norm and take one SGD step.
inline void sgd_step(ModelParams& params, RnnGraph& g, double lr, double clip_norm) {
    double norm_sq = 0.0;
    for (auto& [name, node] : g.param_nodes) {
        const Tensor& grad = g.tape.grad(node);
        for (double v : grad.vec()) norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;
    for (auto& [name, node] : g.param_nodes) {
        Tensor& p = params.at(name);
        const Tensor& grad = g.tape.grad(node);
        for (std::size_t i = 0; i < p.numel(); ++i) p[i] -= lr * scale * grad[i];
    }
}

inline void check_finite_loss(double loss, std::size_t epoch) {
    if (!std::isfinite(loss))
        throw TrainingError("training diverged (non-finite loss) at epoch " +
                            std::to_string(epoch));
}

}  // namespace detail

// Mean per-token NLL of a token stream under the model, evaluated in
// fixed-size windows.
inline double lm_mean_nll(const RnnConfig& cfg, const ModelParams& params,
                          const std::vector<std::size_t>& stream, std::size_t seq_len,
                          std::size_t batch_size) {
    if (stream.size() < 2) throw InputError("stream too short to evaluate");
    std::vector<std::vector<std::size_t>> window_batch;
    double total_nll = 0.0;
    double total_tokens = 0.0;
    auto flush = [&]() {
        if (window_batch.empty()) return;
        Batch b = Batch::next_token_batch(window_batch);
        GraphOptions opt;
        opt.want_loss = true;
        RnnGraph g = build_graph(cfg, params, b, opt);
        total_nll += g.tape.value(g.loss)[0] * g.token_count;
        total_tokens += g.token_count;
        window_batch.clear();
    };
    const std::size_t n_windows = (stream.size() - 1) / seq_len;
    for (std::size_t w = 0; w < n_windows; ++w) {
        window_batch.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(w * seq_len),
                                  stream.begin() + static_cast<std::ptrdiff_t>(w * seq_len + seq_len + 1));
        if (window_batch.size() == batch_size) flush();
    }
    // tail shorter than a full window
    if (n_windows == 0) {
        window_batch.emplace_back(stream.begin(), stream.end());
    }
    flush();
    return total_nll / total_tokens;
}

inline double lm_perplexity(const RnnConfig& cfg, const ModelParams& params,
                            const std::vector<std::size_t>& stream, std::size_t seq_len = 32,
                            std::size_t batch_size = 32) {
    return std::exp(lm_mean_nll(cfg, params, stream, seq_len, batch_size));
}

// Next-token training over a token stream. Windows of seq_len+1 tokens are
// shuffled each epoch with a seeded generator; per-epoch train and valid
// perplexity are recorded.
inline TrainReport train_lm(const RnnConfig& cfg, ModelParams& params,
                            const std::vector<std::size_t>& train_stream,
                            const std::vector<std::size_t>& valid_stream,
                            const TrainHyperparams& hp) {
    cfg.validate();
    if (cfg.output_head != OutputHead::softmax_per_step)
        throw ConfigError("language-model training needs a per-step head");
    if (train_stream.size() < hp.seq_len + 1) throw InputError("training stream too short");

    const std::size_t n_windows = (train_stream.size() - 1) / hp.seq_len;
    std::vector<std::size_t> order(n_windows);
    std::iota(order.begin(), order.end(), 0);

    TrainReport report;
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        const double lr = hp.rate_for_epoch(epoch);
        Rng shuffle_rng = Rng::derive(hp.seed, 0x5u, epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

        double total_nll = 0.0, total_tokens = 0.0;
        std::vector<std::vector<std::size_t>> window_batch;
        auto train_flush = [&]() {
            if (window_batch.empty()) return;
            Batch b = Batch::next_token_batch(window_batch);
            GraphOptions opt;
            opt.want_loss = true;
            RnnGraph g = build_graph(cfg, params, b, opt);
            const double loss = g.tape.value(g.loss)[0];
            detail::check_finite_loss(loss, epoch);
            total_nll += loss * g.token_count;
            total_tokens += g.token_count;
            g.tape.backward(g.loss);
            detail::sgd_step(params, g, lr, hp.clip_norm);
            window_batch.clear();
        };
        for (std::size_t w : order) {
            const std::size_t start = w * hp.seq_len;
            window_batch.emplace_back(
                train_stream.begin() + static_cast<std::ptrdiff_t>(start),
                train_stream.begin() + static_cast<std::ptrdiff_t>(start + hp.seq_len + 1));
            if (window_batch.size() == hp.batch_size) train_flush();
        }
        train_flush();

        EpochStats stats;
        stats.epoch = epoch;
        stats.learning_rate = lr;
        stats.train_perplexity = std::exp(total_nll / total_tokens);
        stats.valid_perplexity =
            valid_stream.size() > 1
                ? lm_perplexity(cfg, params, valid_stream, hp.seq_len, hp.batch_size)
                : 0.0;
        report.epochs.push_back(stats);
    }
    return report;
}

struct ClassifierEpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double eval_accuracy = 0.0;
    double learning_rate = 0.0;
};

struct ClassifierReport {
    std::vector<ClassifierEpochStats> epochs;

    double final_accuracy() const { return epochs.empty() ? 0.0 : epochs.back().eval_accuracy; }
};

inline std::size_t predict_label(const RnnConfig& cfg, const ModelParams& params,
                                 const Tensor& sequence) {
    Batch b = Batch::from_continuous(sequence);
    ForwardResult r = forward(cfg, params, b, /*capture=*/false);
    const std::size_t k = r.logits.extent(1);
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (r.logits[j] > r.logits[best]) best = j;
    return best;
}

inline double classifier_accuracy(const RnnConfig& cfg, const ModelParams& params,
                                  const SeqDataset& ds, std::size_t batch_size = 64) {
    std::size_t correct = 0;
    const std::size_t t = ds.values.extent(1), d = ds.values.extent(2);
    for (std::size_t i0 = 0; i0 < ds.size(); i0 += batch_size) {
        const std::size_t n = std::min(batch_size, ds.size() - i0);
        Tensor chunk({n, t, d});
        for (std::size_t j = 0; j < n * t * d; ++j) chunk[j] = ds.values[i0 * t * d + j];
        Batch b = Batch::from_continuous(chunk);
        ForwardResult r = forward(cfg, params, b, /*capture=*/false);
        const std::size_t k = r.logits.extent(1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < k; ++j)
                if (r.logits[i * k + j] > r.logits[i * k + best]) best = j;
            if (best == ds.labels[i0 + i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

inline ClassifierReport train_classifier(const RnnConfig& cfg, ModelParams& params,
                                         const SeqDataset& train_set, const SeqDataset& eval_set,
                                         const TrainHyperparams& hp) {
    cfg.validate();
    if (cfg.output_head != OutputHead::softmax_final)
        throw ConfigError("classifier training needs a final softmax head");
    const std::size_t t = train_set.values.extent(1), d = train_set.values.extent(2);

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    ClassifierReport report;
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        const double lr = hp.rate_for_epoch(epoch);
        Rng shuffle_rng = Rng::derive(hp.seed, 0x6u, epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

        double total_loss = 0.0, total_items = 0.0;
        for (std::size_t i0 = 0; i0 < order.size(); i0 += hp.batch_size) {
            const std::size_t n = std::min(hp.batch_size, order.size() - i0);
            Tensor chunk({n, t, d});
            std::vector<std::size_t> labels(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t src = order[i0 + i];
                for (std::size_t j = 0; j < t * d; ++j)
                    chunk[i * t * d + j] = train_set.values[src * t * d + j];
                labels[i] = train_set.labels[src];
            }
            Batch b = Batch::from_continuous(chunk);
            b.with_labels(labels);
            GraphOptions opt;
            opt.want_loss = true;
            RnnGraph g = build_graph(cfg, params, b, opt);
            const double loss = g.tape.value(g.loss)[0];
            detail::check_finite_loss(loss, epoch);
            total_loss += loss * static_cast<double>(n);
            total_items += static_cast<double>(n);
            g.tape.backward(g.loss);
            detail::sgd_step(params, g, lr, hp.clip_norm);
        }

        ClassifierEpochStats stats;
        stats.epoch = epoch;
        stats.learning_rate = lr;
        stats.train_loss = total_loss / total_items;
        stats.eval_accuracy = classifier_accuracy(cfg, params, eval_set);
        report.epochs.push_back(stats);
    }
    return report;
}

}  // namespace statefuzz
