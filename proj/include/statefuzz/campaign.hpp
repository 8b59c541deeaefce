#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "statefuzz/checkpoint.hpp"
#include "statefuzz/corpus.hpp"
#include "statefuzz/metrics.hpp"
#include "statefuzz/model.hpp"
#include "statefuzz/objectives.hpp"
#include "statefuzz/report.hpp"
#include "statefuzz/synthesis.hpp"
#include "statefuzz/train.hpp"

namespace statefuzz {

enum class TaskKind { char_lm, seq_classifier };

inline std::string to_string(TaskKind t) {
    return t == TaskKind::char_lm ? "char_lm" : "seq_classifier";
}

inline TaskKind task_kind_from(const std::string& s) {
    if (s == "char_lm") return TaskKind::char_lm;
    if (s == "seq_classifier") return TaskKind::seq_classifier;
    throw ConfigError("unknown task kind: " + s);
}

struct CampaignConfig {
    std::string model_path;
    TaskKind task_kind = TaskKind::char_lm;
    ObjectiveSpec objective;
    SynthesisConfig synthesis;
    std::string test_set_path;
    Split test_split = Split::all;  // char_lm: which 8:1:1 split of the file to test
    std::size_t num_runs = 3;
    std::uint64_t seed = 1;
    std::string output_dir;
    bool export_perturbations = false;
    std::size_t max_inputs = 0;  // 0 = whole set
};

// One named objective inside a comparison campaign.
struct Methodology {
    std::string name;
    ObjectiveSpec spec;
};

inline std::string methodology_name(const ObjectiveSpec& spec) {
    std::string name = to_string(spec.kind);
    if (spec.coverage_metric) name += "_" + to_string(spec.coverage_metric->metric);
    return name;
}

namespace detail {

enum : std::uint64_t { kSaltSteps = 11, kSaltMutation = 23 };

// Test inputs shared by every methodology and run of a campaign.
struct TestInputs {
    TaskKind task = TaskKind::char_lm;
    std::vector<std::string> lines;  // char_lm
    SeqDataset dataset;              // seq_classifier

    std::size_t size() const {
        return task == TaskKind::char_lm ? lines.size() : dataset.size();
    }
};

inline TestInputs load_test_inputs(const CampaignConfig& config, const Checkpoint& ckpt) {
    TestInputs inputs;
    inputs.task = config.task_kind;
    if (config.task_kind == TaskKind::char_lm) {
        TextCorpus corpus = ingest_text_corpus(config.test_set_path);
        inputs.lines = corpus.split_lines(config.test_split);
        if (config.max_inputs > 0 && inputs.lines.size() > config.max_inputs)
            inputs.lines.resize(config.max_inputs);
    } else {
        auto steps_it = ckpt.meta.find("steps");
        if (steps_it == ckpt.meta.end())
            throw ConfigError("classifier checkpoint lacks the steps metadata");
        const std::size_t steps = std::stoull(steps_it->second);
        inputs.dataset = ingest_sequence_dataset(config.test_set_path, steps,
                                                 ckpt.config.input_dim, ckpt.config.num_classes);
        if (config.max_inputs > 0 && inputs.dataset.size() > config.max_inputs) {
            inputs.dataset.labels.resize(config.max_inputs);
            const std::size_t w = inputs.dataset.values.extent(1) * inputs.dataset.values.extent(2);
            std::vector<double> vals(inputs.dataset.values.vec().begin(),
                                     inputs.dataset.values.vec().begin() +
                                         static_cast<std::ptrdiff_t>(config.max_inputs * w));
            inputs.dataset.values = Tensor({config.max_inputs, inputs.dataset.values.extent(1),
                                            inputs.dataset.values.extent(2)},
                                           std::move(vals));
        }
    }
    return inputs;  // an empty split is fine: the campaign reports zero counts
}

// Coverage metrics applicable to a model: HS_C and NC always, CS_C for
// LSTM models. The guidance metric keeps its configured edges/threshold.
inline std::vector<CoverageConfig> applicable_coverage(const RnnConfig& model,
                                                       const ObjectiveSpec& spec) {
    std::vector<CoverageConfig> configs;
    auto pick = [&](CoverageMetric m) {
        if (spec.coverage_metric && spec.coverage_metric->metric == m) return *spec.coverage_metric;
        CoverageConfig c;
        c.metric = m;
        return c;
    };
    configs.push_back(pick(CoverageMetric::HS_C));
    if (model.cell_kind == CellKind::lstm) configs.push_back(pick(CoverageMetric::CS_C));
    configs.push_back(pick(CoverageMetric::NC));
    return configs;
}

inline CoverageSummary summarize(const CoverageTracker& tracker) {
    CoverageSummary s;
    s.metric = to_string(tracker.config().metric);
    s.ratio = tracker.ratio();
    s.covered = tracker.covered_count();
    s.total = tracker.total_count();
    s.positions = tracker.position_count();
    if (tracker.config().metric == CoverageMetric::CS_C) s.section_ratios = tracker.section_ratios();
    return s;
}

// Perplexity of one sequence from per-step logits (T, 1, V) and aligned
// next-token targets.
inline double sequence_perplexity(const Tensor& logits, const std::vector<std::size_t>& targets,
                                  std::size_t length) {
    const std::size_t v = logits.extent(2);
    std::vector<double> logp;
    logp.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
        auto row = log_softmax_row(logits.data() + t * v, v);
        logp.push_back(row[targets[t]]);
    }
    return perplexity(logp);
}

inline std::size_t argmax_row(const Tensor& logits) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.numel(); ++j)
        if (logits[j] > logits[best]) best = j;
    return best;
}

// Random single-token substitution at the same selected steps the
// gradient-based methods use.
inline AdversarialCandidate random_token_mutation(const std::vector<std::size_t>& tokens,
                                                  const std::vector<std::size_t>& t_list,
                                                  const EmbeddingTable& embs, Rng& rng) {
    AdversarialCandidate out;
    out.tokens = tokens;
    out.perturbation.assign(tokens.size() * embs.dim(), 0.0);
    double l2_sq = 0.0;
    for (std::size_t t : t_list) {
        const std::size_t orig = tokens[t];
        std::size_t pick = rng.below(embs.vocab_size() - 1);
        if (pick >= orig) ++pick;
        out.tokens[t] = pick;
        out.changed_positions.push_back(t);
        out.outcome = Outcome::generated_not_reduced;
        for (std::size_t j = 0; j < embs.dim(); ++j) {
            const double delta = embs.vectors.at(pick, j) - embs.vectors.at(orig, j);
            out.perturbation[t * embs.dim() + j] = delta;
            l2_sq += delta * delta;
        }
    }
    out.perturbation_l2 = std::sqrt(l2_sq);
    return out;
}

// Gaussian noise scaled to the full L2 budget; the random baseline for
// continuous inputs.
inline AdversarialCandidate gaussian_noise_mutation(const Tensor& x, const SynthesisConfig& cfg,
                                                    Rng& rng) {
    Tensor noise(x.shape());
    for (auto& v : noise.vec()) v = rng.gaussian(1.0);
    const double norm = noise.l2_norm();
    AdversarialCandidate out;
    if (norm == 0.0) {
        out.values = x;
        return out;
    }
    for (auto& v : noise.vec()) v *= cfg.epsilon / norm;
    return perturb_continuous(x, noise, cfg);
}

struct RunContext {
    const Checkpoint* ckpt = nullptr;
    const TestInputs* inputs = nullptr;
    const SynthesisConfig* synthesis = nullptr;
    std::uint64_t seed = 0;
    bool keep_perturbations = false;
};

inline EmbeddingTable embedding_table(const Checkpoint& ckpt) {
    EmbeddingTable embs;
    embs.vectors = ckpt.params.at("embedding");
    embs.validate();
    return embs;
}

inline RunResult run_methodology_once(const RunContext& ctx, const Methodology& method,
                                      std::size_t run) {
    const Checkpoint& ckpt = *ctx.ckpt;
    const RnnConfig& cfg = ckpt.config;
    const ObjectiveSpec& spec = method.spec;
    spec.validate(cfg);

    const bool char_lm = ctx.inputs->task == TaskKind::char_lm;
    TextCorpus vocab_codec;
    EmbeddingTable embs;
    if (char_lm) {
        auto it = ckpt.meta.find("vocab");
        if (it == ckpt.meta.end()) throw ConfigError("checkpoint lacks vocabulary metadata");
        vocab_codec.vocab = it->second;
        vocab_codec.char_to_id.fill(-1);
        for (std::size_t i = 0; i < vocab_codec.vocab.size(); ++i)
            vocab_codec.char_to_id[static_cast<unsigned char>(vocab_codec.vocab[i])] =
                static_cast<int>(i);
        embs = embedding_table(ckpt);
    }

    std::vector<CoverageConfig> cov_configs = applicable_coverage(cfg, spec);
    std::vector<CoverageTracker> original_cov, adversarial_cov;
    for (auto& c : cov_configs) {
        original_cov.emplace_back(c);
        adversarial_cov.emplace_back(c);
    }
    std::optional<CoverageTracker> guidance;
    if (spec.needs_coverage()) guidance.emplace(*spec.coverage_metric);

    RunResult result;
    result.run = run;

    double sum_orig = 0.0, sum_adv = 0.0, sum_l2 = 0.0, sum_ms = 0.0;
    std::size_t counted = 0;
    std::vector<Outcome> outcomes;

    const std::size_t n = ctx.inputs->size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        InputRecord rec;
        rec.index = idx;
        const auto started = std::chrono::steady_clock::now();
        try {
            Rng step_rng = Rng::derive(ctx.seed, run * 1000003 + idx, kSaltSteps);
            Rng mut_rng = Rng::derive(ctx.seed, run * 1000003 + idx, kSaltMutation);

            AdversarialCandidate candidate;
            if (char_lm) {
                const std::string& line = ctx.inputs->lines[idx];
                std::vector<std::size_t> tokens = vocab_codec.encode(line);
                if (tokens.size() < 3) throw InputError("input too short to test");
                Batch batch = Batch::next_token_batch({tokens});
                GraphOptions opt;
                opt.want_loss = spec.needs_loss();
                RnnGraph graph = build_graph(cfg, ckpt.params, batch, opt);
                rec.original_metric =
                    sequence_perplexity(assemble_logits(graph), batch.step_targets, batch.lengths[0]);

                StateTrace trace = capture_trace(graph);
                for (auto& tr : original_cov) tr.update(trace);
                if (guidance) guidance->update(trace);

                std::vector<std::size_t> t_list =
                    select_steps(batch.lengths[0], spec.step_policy, step_rng);

                if (spec.gradient_based()) {
                    ObjectiveContext octx;
                    octx.tracker = guidance ? &*guidance : nullptr;
                    octx.forced_steps = t_list;
                    BuiltObjective obj = build_objective(graph, spec, octx);
                    graph.tape.backward(obj.node);
                    rec.objective_total = obj.value.total;
                    rec.objective_obj1 = obj.value.obj1;
                    rec.objective_obj2 = obj.value.obj2;
                    Tensor grad3 = graph.input_gradient();  // (1, T, in)
                    Tensor grad = grad3.reshaped({batch.steps, cfg.input_dim});
                    candidate = gen_adv_discrete_multi(tokens, t_list, grad, embs, *ctx.synthesis);
                } else {
                    candidate = random_token_mutation(tokens, t_list, embs, mut_rng);
                }

                Batch adv_batch = Batch::next_token_batch({candidate.tokens});
                ForwardResult adv = forward(cfg, ckpt.params, adv_batch, /*capture=*/true);
                rec.adversarial_metric =
                    sequence_perplexity(adv.logits, adv_batch.step_targets, adv_batch.lengths[0]);
                for (auto& tr : adversarial_cov) tr.update(adv.trace);
                if (guidance) guidance->update(adv.trace);

                rec.outcome = classify_outcome(candidate.generated(), rec.original_metric,
                                               rec.adversarial_metric,
                                               MetricDirection::higher_is_worse);
                rec.original_text = line;
                rec.adversarial_text = vocab_codec.decode(candidate.tokens);
            } else {
                Tensor seq = ctx.inputs->dataset.sequence(idx);
                const std::size_t label = ctx.inputs->dataset.labels[idx];
                Batch batch = Batch::from_continuous(seq);
                if (spec.needs_loss()) batch.with_labels({label});
                GraphOptions opt;
                opt.want_loss = spec.needs_loss();
                RnnGraph graph = build_graph(cfg, ckpt.params, batch, opt);
                rec.original_metric =
                    static_cast<double>(argmax_row(graph.tape.value(graph.final_logits)));

                StateTrace trace = capture_trace(graph);
                for (auto& tr : original_cov) tr.update(trace);
                if (guidance) guidance->update(trace);

                std::vector<std::size_t> t_list =
                    select_steps(batch.lengths[0], spec.step_policy, step_rng);

                if (spec.gradient_based()) {
                    ObjectiveContext octx;
                    octx.tracker = guidance ? &*guidance : nullptr;
                    octx.forced_steps = t_list;
                    BuiltObjective obj = build_objective(graph, spec, octx);
                    graph.tape.backward(obj.node);
                    rec.objective_total = obj.value.total;
                    rec.objective_obj1 = obj.value.obj1;
                    rec.objective_obj2 = obj.value.obj2;
                    Tensor grad = graph.input_gradient();  // (1, T, in) == seq shape
                    candidate = spec.kind == ObjectiveKind::fgsm_loss
                                    ? perturb_continuous_fgsm(seq, grad.reshaped(seq.shape()),
                                                              *ctx.synthesis)
                                    : perturb_continuous(seq, grad.reshaped(seq.shape()),
                                                         *ctx.synthesis);
                } else {
                    candidate = gaussian_noise_mutation(seq, *ctx.synthesis, mut_rng);
                }

                Batch adv_batch = Batch::from_continuous(
                    candidate.generated() ? candidate.values : seq);
                ForwardResult adv = forward(cfg, ckpt.params, adv_batch, /*capture=*/true);
                rec.adversarial_metric = static_cast<double>(argmax_row(adv.logits));
                for (auto& tr : adversarial_cov) tr.update(adv.trace);
                if (guidance) guidance->update(adv.trace);

                rec.outcome = classify_outcome(candidate.generated(), rec.original_metric,
                                               rec.adversarial_metric,
                                               MetricDirection::label_change);
            }

            rec.changed_positions = candidate.changed_positions;
            rec.scale_used = candidate.scale_used;
            rec.perturbation_l2 = candidate.perturbation_l2;
            rec.coverage_positions =
                guidance ? guidance->position_count() : adversarial_cov.front().position_count();
            if (ctx.keep_perturbations && candidate.generated())
                rec.perturbation = candidate.perturbation;
        } catch (const std::exception& e) {
            rec.error = true;
            rec.error_message = e.what();
        }
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();

        if (rec.error) {
            ++result.error_count;
        } else {
            outcomes.push_back(rec.outcome);
            sum_orig += rec.original_metric;
            sum_adv += rec.adversarial_metric;
            sum_l2 += rec.perturbation_l2;
            ++counted;
        }
        sum_ms += rec.elapsed_ms;
        result.records.push_back(std::move(rec));
    }

    result.rates = aggregate_rates(outcomes);
    if (counted > 0) {
        result.mean_original_metric = sum_orig / static_cast<double>(counted);
        result.mean_adversarial_metric = sum_adv / static_cast<double>(counted);
        result.mean_perturbation_l2 = sum_l2 / static_cast<double>(counted);
    }
    if (!result.records.empty())
        result.mean_elapsed_ms = sum_ms / static_cast<double>(result.records.size());
    for (auto& tr : original_cov) result.original_coverage.push_back(summarize(tr));
    for (auto& tr : adversarial_cov) result.adversarial_coverage.push_back(summarize(tr));
    return result;
}

}  // namespace detail

// Run one or more methodologies over the same test set with the same
// per-(run, input) step selections, three runs by default.
inline CampaignReport compare_campaign(const CampaignConfig& config,
                                       const std::vector<Methodology>& methods) {
    if (config.num_runs < 1) throw ConfigError("num_runs must be >= 1");
    Checkpoint ckpt = load_checkpoint(config.model_path);
    detail::TestInputs inputs = detail::load_test_inputs(config, ckpt);

    detail::RunContext ctx;
    ctx.ckpt = &ckpt;
    ctx.inputs = &inputs;
    ctx.synthesis = &config.synthesis;
    ctx.seed = config.seed;
    ctx.keep_perturbations = config.export_perturbations;

    CampaignReport report;
    report.task_kind = to_string(config.task_kind);
    report.metric_name = config.task_kind == TaskKind::char_lm ? "perplexity" : "label";
    report.test_set_size = inputs.size();
    report.seed = config.seed;

    for (const Methodology& method : methods) {
        MethodologyResult mres;
        mres.name = method.name;
        for (std::size_t run = 0; run < config.num_runs; ++run)
            mres.runs.push_back(detail::run_methodology_once(ctx, method, run));
        report.methodologies.push_back(std::move(mres));
    }

    if (!config.output_dir.empty())
        write_report_files(report, config.output_dir, config.export_perturbations);
    return report;
}

inline CampaignReport run_campaign(const CampaignConfig& config) {
    return compare_campaign(config, {{methodology_name(config.objective), config.objective}});
}

}  // namespace statefuzz
