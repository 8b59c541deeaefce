#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "statefuzz/corpus.hpp"
#include "statefuzz/train.hpp"

namespace statefuzz {

// Retraining experiment: train one fresh model on the original corpus and
// one on the corpus augmented with adversarial sequences, with identical
// seeds and epochs, repeated and averaged. Deltas are reported per epoch
// plus the final test-perplexity change.
struct RetrainConfig {
    TrainHyperparams hyperparams;
    std::size_t repetitions = 5;  // averaged; reps use seeds seed, seed+1, ...
};

struct RetrainRow {
    std::size_t epoch = 0;
    double train_original = 0.0;
    double train_augmented = 0.0;
    double train_increment_pct = 0.0;  // (aug - orig) / orig * 100
    double valid_original = 0.0;
    double valid_augmented = 0.0;
    double valid_decrement_pct = 0.0;  // (orig - aug) / orig * 100
};

struct RetrainReport {
    std::vector<RetrainRow> rows;
    double test_original = 0.0;
    double test_augmented = 0.0;
    double test_decrement_pct = 0.0;
};

inline RetrainReport retrain_experiment(const RnnConfig& cfg, const TextCorpus& corpus,
                                        const std::vector<std::string>& adversarial_lines,
                                        const RetrainConfig& rcfg) {
    if (rcfg.repetitions < 1) throw ConfigError("retrain repetitions must be >= 1");
    const std::vector<std::size_t> train_stream = corpus.stream(Split::train);
    const std::vector<std::size_t> valid_stream = corpus.stream(Split::valid);
    const std::vector<std::size_t> test_stream = corpus.stream(Split::test);

    // augmented stream: original training tokens plus the adversarial
    // sequences, each terminated by the newline token
    std::vector<std::size_t> aug_stream = train_stream;
    for (const std::string& line : adversarial_lines) {
        std::vector<std::size_t> ids;
        try {
            ids = corpus.encode(line);
        } catch (const InputError& e) {
            throw InputError(std::string("adversarial line outside corpus vocabulary: ") +
                             e.what());
        }
        aug_stream.insert(aug_stream.end(), ids.begin(), ids.end());
        aug_stream.push_back(corpus.id_of('\n'));
    }

    const std::size_t epochs = rcfg.hyperparams.epochs;
    RetrainReport report;
    report.rows.resize(epochs);
    for (std::size_t e = 0; e < epochs; ++e) report.rows[e].epoch = e;

    for (std::size_t rep = 0; rep < rcfg.repetitions; ++rep) {
        TrainHyperparams hp = rcfg.hyperparams;
        hp.seed = rcfg.hyperparams.seed + rep;

        Rng init_orig(hp.seed);
        ModelParams params_orig = ModelParams::init(cfg, init_orig, hp.init_scale);
        TrainReport orig = train_lm(cfg, params_orig, train_stream, valid_stream, hp);

        Rng init_aug(hp.seed);
        ModelParams params_aug = ModelParams::init(cfg, init_aug, hp.init_scale);
        TrainReport aug = train_lm(cfg, params_aug, aug_stream, valid_stream, hp);

        for (std::size_t e = 0; e < epochs; ++e) {
            report.rows[e].train_original += orig.epochs[e].train_perplexity;
            report.rows[e].train_augmented += aug.epochs[e].train_perplexity;
            report.rows[e].valid_original += orig.epochs[e].valid_perplexity;
            report.rows[e].valid_augmented += aug.epochs[e].valid_perplexity;
        }
        if (test_stream.size() > 1) {
            report.test_original +=
                lm_perplexity(cfg, params_orig, test_stream, hp.seq_len, hp.batch_size);
            report.test_augmented +=
                lm_perplexity(cfg, params_aug, test_stream, hp.seq_len, hp.batch_size);
        }
    }

    const double reps = static_cast<double>(rcfg.repetitions);
    for (auto& row : report.rows) {
        row.train_original /= reps;
        row.train_augmented /= reps;
        row.valid_original /= reps;
        row.valid_augmented /= reps;
        if (row.train_original != 0.0)
            row.train_increment_pct =
                (row.train_augmented - row.train_original) / row.train_original * 100.0;
        if (row.valid_original != 0.0)
            row.valid_decrement_pct =
                (row.valid_original - row.valid_augmented) / row.valid_original * 100.0;
    }
    report.test_original /= reps;
    report.test_augmented /= reps;
    if (report.test_original != 0.0)
        report.test_decrement_pct =
            (report.test_original - report.test_augmented) / report.test_original * 100.0;
    return report;
}

inline nlohmann::json retrain_to_json(const RetrainReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (auto& r : report.rows) {
        rows.push_back({{"epoch", r.epoch},
                        {"train_original", r.train_original},
                        {"train_augmented", r.train_augmented},
                        {"train_increment_pct", r.train_increment_pct},
                        {"valid_original", r.valid_original},
                        {"valid_augmented", r.valid_augmented},
                        {"valid_decrement_pct", r.valid_decrement_pct}});
    }
    return {{"epochs", rows},
            {"test_original", report.test_original},
            {"test_augmented", report.test_augmented},
            {"test_decrement_pct", report.test_decrement_pct}};
}

inline std::string retrain_table(const RetrainReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(7) << "epoch" << std::right << std::setw(12) << "train orig"
        << std::setw(12) << "train aug" << std::setw(12) << "incr %" << std::setw(12)
        << "valid orig" << std::setw(12) << "valid aug" << std::setw(12) << "decr %" << "\n";
    out << std::string(79, '-') << "\n" << std::fixed << std::setprecision(3);
    for (auto& r : report.rows)
        out << std::left << std::setw(7) << r.epoch << std::right << std::setw(12)
            << r.train_original << std::setw(12) << r.train_augmented << std::setw(12)
            << r.train_increment_pct << std::setw(12) << r.valid_original << std::setw(12)
            << r.valid_augmented << std::setw(12) << r.valid_decrement_pct << "\n";
    out << "test perplexity: original " << report.test_original << ", augmented "
        << report.test_augmented << ", decrement " << report.test_decrement_pct << "%\n";
    return out.str();
}

}  // namespace statefuzz
