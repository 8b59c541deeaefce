#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "statefuzz/tensor.hpp"

namespace statefuzz {

// Trained embedding rows for the vocabulary; the search space for discrete
// adversarial synthesis.
struct EmbeddingTable {
    Tensor vectors;                  // (V, D)
    std::vector<std::string> names;  // token spellings, length V

    std::size_t vocab_size() const { return vectors.rank() == 2 ? vectors.extent(0) : 0; }
    std::size_t dim() const { return vectors.rank() == 2 ? vectors.extent(1) : 0; }

    void validate() const {
        if (vocab_size() < 2) throw ConfigError("embedding table needs at least two tokens");
        if (!names.empty() && names.size() != vocab_size())
            throw ConfigError("embedding table name count mismatch");
        for (std::size_t i = 0; i < vocab_size(); ++i)
            for (std::size_t j = i + 1; j < vocab_size(); ++j) {
                bool same = true;
                for (std::size_t d = 0; d < dim() && same; ++d)
                    same = vectors.at(i, d) == vectors.at(j, d);
                if (same) throw ConfigError("embedding table has identical rows");
            }
    }

    double distance2(const std::vector<double>& point, std::size_t row) const {
        double s = 0.0;
        for (std::size_t d = 0; d < dim(); ++d) {
            const double diff = point[d] - vectors.at(row, d);
            s += diff * diff;
        }
        return s;
    }

    // Nearest row by L2 distance; ties resolved to the lowest index.
    std::size_t nearest(const std::vector<double>& point) const {
        std::size_t best = 0;
        double best_d = distance2(point, 0);
        for (std::size_t i = 1; i < vocab_size(); ++i) {
            const double d = distance2(point, i);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }
};

struct SynthesisConfig {
    std::size_t max_scale = 10;  // gradient scaling bound for discrete search
    double epsilon = 0.04;       // L2 budget for continuous perturbations

    void validate() const {
        if (max_scale < 1) throw ConfigError("max_scale must be >= 1");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    }
};

enum class Outcome { performance_reduced, generated_not_reduced, not_generated };

inline std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::performance_reduced: return "performance_reduced";
        case Outcome::generated_not_reduced: return "generated_not_reduced";
        case Outcome::not_generated: return "not_generated";
    }
    return "?";
}

// One synthesis result. For discrete inputs `tokens` holds the mutated
// sequence; for continuous inputs `values` holds the perturbed tensor.
// perturbation is the applied delta over the (embedded) input, flattened,
// for export to external dimensionality-reduction tooling.
struct AdversarialCandidate {
    std::vector<std::size_t> tokens;
    Tensor values;
    std::vector<std::size_t> changed_positions;
    std::vector<double> perturbation;
    double perturbation_l2 = 0.0;
    std::size_t scale_used = 0;  // 0 = none recorded
    Outcome outcome = Outcome::not_generated;

    bool generated() const { return outcome != Outcome::not_generated; }
};

// Scaled-gradient nearest-embedding search at one time step: walk the
// gradient direction with integer scales until the nearest vocabulary
// embedding changes, then substitute it.
inline AdversarialCandidate gen_adv_discrete(const std::vector<std::size_t>& x, std::size_t t,
                                             const Tensor& grad, const EmbeddingTable& embs,
                                             const SynthesisConfig& cfg) {
    cfg.validate();
    if (t >= x.size()) throw InputError("step index outside the input");
    if (grad.rank() != 2 || t >= grad.extent(0) || grad.extent(1) != embs.dim())
        throw InputError("gradient shape does not match input and embedding dim");

    AdversarialCandidate out;
    out.tokens = x;
    out.perturbation.assign(x.size() * embs.dim(), 0.0);

    const std::size_t d = embs.dim();
    std::vector<double> g(d);
    double gnorm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        g[j] = grad.at(t, j);
        gnorm2 += g[j] * g[j];
    }
    if (gnorm2 == 0.0) return out;  // no scale can move the embedding

    const std::size_t orig = x[t];
    std::vector<double> point(d);
    for (std::size_t scale = 1; scale <= cfg.max_scale; ++scale) {
        for (std::size_t j = 0; j < d; ++j)
            point[j] = embs.vectors.at(orig, j) + g[j] * static_cast<double>(scale);
        const std::size_t nearest = embs.nearest(point);
        if (nearest != orig) {
            out.tokens[t] = nearest;
            out.changed_positions.push_back(t);
            out.scale_used = scale;
            out.outcome = Outcome::generated_not_reduced;
            double l2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double delta = embs.vectors.at(nearest, j) - embs.vectors.at(orig, j);
                out.perturbation[t * d + j] = delta;
                l2 += delta * delta;
            }
            out.perturbation_l2 = std::sqrt(l2);
            return out;
        }
    }
    return out;  // exhausted MAX_SCALE; nearest never moved
}

// Multi-step discrete synthesis: the single-step search runs independently
// per selected step against the original input's gradient; generation
// succeeds if any step mutates.
inline AdversarialCandidate gen_adv_discrete_multi(const std::vector<std::size_t>& x,
                                                   const std::vector<std::size_t>& t_list,
                                                   const Tensor& grad, const EmbeddingTable& embs,
                                                   const SynthesisConfig& cfg) {
    AdversarialCandidate out;
    out.tokens = x;
    out.perturbation.assign(x.size() * embs.dim(), 0.0);
    double l2_sq = 0.0;
    for (std::size_t t : t_list) {
        AdversarialCandidate one = gen_adv_discrete(x, t, grad, embs, cfg);
        if (!one.generated()) continue;
        out.tokens[t] = one.tokens[t];
        out.changed_positions.push_back(t);
        out.scale_used = std::max(out.scale_used, one.scale_used);
        out.outcome = Outcome::generated_not_reduced;
        for (std::size_t j = 0; j < embs.dim(); ++j) {
            const double delta = one.perturbation[t * embs.dim() + j];
            out.perturbation[t * embs.dim() + j] = delta;
            l2_sq += delta * delta;
        }
    }
    out.perturbation_l2 = std::sqrt(l2_sq);
    return out;
}

// Continuous perturbation: apply the raw gradient direction, capped to the
// L2 budget. x and grad must have identical shapes.
inline AdversarialCandidate perturb_continuous(const Tensor& x, const Tensor& grad,
                                               const SynthesisConfig& cfg) {
    cfg.validate();
    if (!x.same_shape(grad)) throw InputError("input/gradient shape mismatch");
    if (!grad.all_finite()) throw InputError("non-finite gradient");

    AdversarialCandidate out;
    out.values = x;
    const double gnorm = grad.l2_norm();
    if (gnorm == 0.0) return out;

    const double step = std::min(1.0, cfg.epsilon / gnorm);  // |delta| = min(eps, |grad|)
    out.perturbation.resize(x.numel());
    double l2_sq = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double delta = step * grad[i];
        out.values[i] = x[i] + delta;
        out.perturbation[i] = delta;
        l2_sq += delta * delta;
    }
    out.perturbation_l2 = std::sqrt(l2_sq);
    out.outcome = Outcome::generated_not_reduced;
    return out;
}

// Sign-of-gradient perturbation scaled to the full L2 budget; the FGSM
// baseline's continuous synthesis. Raw-direction synthesis above stays the
// default for everything else.
inline AdversarialCandidate perturb_continuous_fgsm(const Tensor& x, const Tensor& grad,
                                                    const SynthesisConfig& cfg) {
    cfg.validate();
    if (!x.same_shape(grad)) throw InputError("input/gradient shape mismatch");
    Tensor sign(grad.shape());
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < grad.numel(); ++i) {
        sign[i] = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
        if (sign[i] != 0.0) ++nonzero;
    }
    if (nonzero == 0) {
        AdversarialCandidate out;
        out.values = x;
        return out;
    }
    const double scale = cfg.epsilon / std::sqrt(static_cast<double>(nonzero));
    for (auto& v : sign.vec()) v *= scale;
    return perturb_continuous(x, sign, cfg);
}

// Direction a task's performance metric moves when the model gets worse.
enum class MetricDirection { higher_is_worse, lower_is_worse, label_change };

// Final outcome of one candidate given the model's metric on the original
// and mutated inputs. Strictly-worse comparisons only; ties stay
// generated_not_reduced.
inline Outcome classify_outcome(bool generated, double original_metric, double adversarial_metric,
                                MetricDirection dir) {
    if (!generated) return Outcome::not_generated;
    bool reduced = false;
    switch (dir) {
        case MetricDirection::higher_is_worse: reduced = adversarial_metric > original_metric; break;
        case MetricDirection::lower_is_worse: reduced = adversarial_metric < original_metric; break;
        case MetricDirection::label_change: reduced = adversarial_metric != original_metric; break;
    }
    return reduced ? Outcome::performance_reduced : Outcome::generated_not_reduced;
}

}  // namespace statefuzz
