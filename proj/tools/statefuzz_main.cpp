// Command-line front end: train desk-scale models, run adversarial-testing
// campaigns, compare methodologies, rerun the retraining experiment and
// export perturbation vectors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "statefuzz/statefuzz.hpp"

namespace fs = std::filesystem;
using namespace statefuzz;

namespace {

std::string output_dir_override(std::string configured) {
    if (const char* env = std::getenv("STATEFUZZ_OUTPUT_DIR"); env && *env) return env;
    return configured;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

KeyValues config_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
    KeyValues kv = path.empty() ? KeyValues{} : load_key_values(path);
    for (const std::string& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set wants key=value, got " + s);
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return kv;
}

int cmd_train(const std::string& task, const std::string& corpus_path,
              const std::string& train_set, const std::string& test_set,
              const std::string& out_path, RnnConfig cfg, TrainHyperparams hp,
              std::size_t steps) {
    Checkpoint ckpt;
    if (task == "char_lm") {
        if (corpus_path.empty()) throw ConfigError("char_lm training needs --corpus");
        TextCorpus corpus = ingest_text_corpus(corpus_path);
        cfg.vocab_size = corpus.vocab_size();
        cfg.input_dim = cfg.embedding_dim;
        cfg.output_head = OutputHead::softmax_per_step;
        cfg.num_classes = 0;
        cfg.validate();

        Rng init(hp.seed);
        ModelParams params = ModelParams::init(cfg, init, hp.init_scale);
        TrainReport report =
            train_lm(cfg, params, corpus.stream(Split::train), corpus.stream(Split::valid), hp);
        for (auto& e : report.epochs)
            std::cout << "epoch " << e.epoch << "  lr " << e.learning_rate << "  train ppl "
                      << e.train_perplexity << "  valid ppl " << e.valid_perplexity << "\n";
        const auto test_stream = corpus.stream(Split::test);
        if (test_stream.size() > 1)
            std::cout << "test ppl "
                      << lm_perplexity(cfg, params, test_stream, hp.seq_len, hp.batch_size)
                      << "\n";

        ckpt.config = cfg;
        ckpt.params = std::move(params);
        ckpt.meta["vocab"] = corpus.vocab;
        ckpt.meta["task_kind"] = "char_lm";
    } else if (task == "seq_classifier") {
        if (train_set.empty()) throw ConfigError("seq_classifier training needs --train-set");
        cfg.vocab_size = 0;
        cfg.embedding_dim = 0;
        cfg.output_head = OutputHead::softmax_final;
        cfg.validate();
        SeqDataset train = ingest_sequence_dataset(train_set, steps, cfg.input_dim,
                                                   cfg.num_classes);
        SeqDataset eval = test_set.empty() ? train
                                           : ingest_sequence_dataset(test_set, steps,
                                                                     cfg.input_dim,
                                                                     cfg.num_classes);
        Rng init(hp.seed);
        ModelParams params = ModelParams::init(cfg, init, hp.init_scale);
        ClassifierReport report = train_classifier(cfg, params, train, eval, hp);
        for (auto& e : report.epochs)
            std::cout << "epoch " << e.epoch << "  lr " << e.learning_rate << "  train loss "
                      << e.train_loss << "  eval accuracy " << e.eval_accuracy << "\n";

        ckpt.config = cfg;
        ckpt.params = std::move(params);
        ckpt.meta["task_kind"] = "seq_classifier";
        ckpt.meta["steps"] = std::to_string(steps);
    } else {
        throw ConfigError("unknown task: " + task);
    }
    save_checkpoint(ckpt, out_path);
    std::cout << "checkpoint written to " << out_path << "\n";
    return 0;
}

int cmd_campaign(const KeyValues& kv, bool compare, bool export_pert) {
    CampaignConfig config = campaign_config_from(kv);
    config.output_dir = output_dir_override(config.output_dir);
    if (export_pert) config.export_perturbations = true;
    ensure_dir(config.output_dir);

    CampaignReport report;
    if (compare) {
        auto it = kv.find("methodologies");
        if (it == kv.end()) throw ConfigError("compare needs methodologies=<list>");
        report = compare_campaign(config, methodologies_from(it->second, config));
    } else {
        report = run_campaign(config);
    }
    std::cout << summary_table(report);
    if (!config.output_dir.empty())
        std::cout << "reports written to " << config.output_dir << "\n";
    return 0;
}

int cmd_retrain(const std::string& model_path, const std::string& corpus_path,
                const std::string& adversarial_path, std::size_t epochs, std::size_t reps,
                TrainHyperparams hp, const std::string& out_dir) {
    Checkpoint ckpt = load_checkpoint(model_path);
    if (ckpt.meta.find("vocab") == ckpt.meta.end())
        throw ConfigError("retraining needs a char_lm checkpoint");
    TextCorpus corpus = ingest_text_corpus(corpus_path);
    if (corpus.vocab != ckpt.meta.at("vocab"))
        throw ConfigError("corpus vocabulary does not match the checkpoint");

    std::vector<std::string> adv_lines;
    if (!adversarial_path.empty()) {
        std::ifstream in(adversarial_path);
        if (!in) throw IngestError("cannot open adversarial set: " + adversarial_path);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) adv_lines.push_back(line);
    }

    RetrainConfig rcfg;
    rcfg.hyperparams = hp;
    rcfg.hyperparams.epochs = epochs;
    rcfg.repetitions = reps;
    RetrainReport report = retrain_experiment(ckpt.config, corpus, adv_lines, rcfg);
    std::cout << retrain_table(report);

    const std::string dir = output_dir_override(out_dir);
    if (!dir.empty()) {
        ensure_dir(dir);
        std::ofstream js(dir + "/retrain.json", std::ios::trunc);
        js << retrain_to_json(report).dump(2) << "\n";
        std::ofstream txt(dir + "/retrain.txt", std::ios::trunc);
        txt << retrain_table(report);
        std::cout << "retrain report written to " << dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial testing toolkit for recurrent networks"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a desk-scale model");
    std::string task = "char_lm", corpus_path, train_set, test_set, out_path = "model.ckpt";
    RnnConfig cfg;
    cfg.cell_kind = CellKind::lstm;
    cfg.num_layers = 2;
    cfg.state_size = 64;
    cfg.embedding_dim = 32;
    cfg.input_dim = 8;
    cfg.num_classes = 10;
    TrainHyperparams hp;
    std::size_t steps = 8;
    std::string cell = "lstm";
    train->add_option("--task", task, "char_lm | seq_classifier");
    train->add_option("--corpus", corpus_path, "text corpus (char_lm)");
    train->add_option("--train-set", train_set, "training CSV (seq_classifier)");
    train->add_option("--test-set", test_set, "evaluation CSV (seq_classifier)");
    train->add_option("--out", out_path, "checkpoint output path");
    train->add_option("--cell", cell, "vanilla | gru | lstm");
    train->add_option("--layers", cfg.num_layers);
    train->add_option("--state-size", cfg.state_size);
    train->add_option("--embedding-dim", cfg.embedding_dim);
    train->add_option("--input-dim", cfg.input_dim, "per-step input width (seq_classifier)");
    train->add_option("--classes", cfg.num_classes);
    train->add_option("--steps", steps, "sequence length (seq_classifier)");
    train->add_option("--epochs", hp.epochs);
    train->add_option("--batch-size", hp.batch_size);
    train->add_option("--seq-len", hp.seq_len);
    train->add_option("--lr", hp.learning_rate);
    train->add_option("--lr-decay", hp.lr_decay);
    train->add_option("--decay-after", hp.decay_after);
    train->add_option("--clip", hp.clip_norm);
    train->add_option("--init-scale", hp.init_scale);
    train->add_option("--seed", hp.seed);

    // campaign-style commands share --config/--set
    std::string config_path;
    std::vector<std::string> sets;
    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        cmd->add_option("--set", sets, "override config keys, key=value");
    };
    auto* campaign = app.add_subcommand("test-campaign", "run one testing campaign");
    add_config_opts(campaign);
    auto* compare = app.add_subcommand("compare", "run several methodologies on one test set");
    add_config_opts(compare);
    auto* export_pert =
        app.add_subcommand("export-perturbations", "run and export perturbation vectors");
    add_config_opts(export_pert);

    // retrain
    auto* retrain = app.add_subcommand("retrain", "before/after retraining experiment");
    std::string model_path, adversarial_path, retrain_out;
    std::size_t retrain_epochs = 12, retrain_reps = 5;
    TrainHyperparams retrain_hp;
    retrain->add_option("--model", model_path, "char_lm checkpoint (shape + vocabulary)")
        ->required();
    retrain->add_option("--corpus", corpus_path, "original training corpus")->required();
    retrain->add_option("--adversarial", adversarial_path,
                        "adversarial sequences, one per line (empty = null augmentation)");
    retrain->add_option("--epochs", retrain_epochs);
    retrain->add_option("--reps", retrain_reps, "repetitions to average");
    retrain->add_option("--seed", retrain_hp.seed);
    retrain->add_option("--batch-size", retrain_hp.batch_size);
    retrain->add_option("--seq-len", retrain_hp.seq_len);
    retrain->add_option("--lr", retrain_hp.learning_rate);
    retrain->add_option("--lr-decay", retrain_hp.lr_decay);
    retrain->add_option("--decay-after", retrain_hp.decay_after);
    retrain->add_option("--out", retrain_out, "report directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            cfg.cell_kind = cell_kind_from(cell);
            return cmd_train(task, corpus_path, train_set, test_set, out_path, cfg, hp, steps);
        }
        if (campaign->parsed()) return cmd_campaign(config_with_overrides(config_path, sets),
                                                    false, false);
        if (compare->parsed()) return cmd_campaign(config_with_overrides(config_path, sets),
                                                   true, false);
        if (export_pert->parsed()) return cmd_campaign(config_with_overrides(config_path, sets),
                                                       true, true);
        if (retrain->parsed())
            return cmd_retrain(model_path, corpus_path, adversarial_path, retrain_epochs,
                               retrain_reps, retrain_hp, retrain_out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
