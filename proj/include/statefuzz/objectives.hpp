#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "statefuzz/coverage.hpp"
#include "statefuzz/model.hpp"
#include "statefuzz/rng.hpp"

namespace statefuzz {

enum class ObjectiveKind {
    rnn_test_adversary,  // state-inconsistency search alone
    coverage_only,       // coverage guidance alone
    rnn_test_joint,      // inconsistency + coverage guidance
    fgsm_loss,           // model loss, the FGSM-style baseline
    dlfuzz_joint,        // model loss + coverage guidance, the DLFuzz-style baseline
    random_baseline,     // no objective; random mutation
};

inline std::string to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::rnn_test_adversary: return "rnn_test_adversary";
        case ObjectiveKind::coverage_only: return "coverage_only";
        case ObjectiveKind::rnn_test_joint: return "rnn_test_joint";
        case ObjectiveKind::fgsm_loss: return "fgsm_loss";
        case ObjectiveKind::dlfuzz_joint: return "dlfuzz_joint";
        case ObjectiveKind::random_baseline: return "random_baseline";
    }
    return "?";
}

inline ObjectiveKind objective_kind_from(const std::string& s) {
    if (s == "rnn_test_adversary") return ObjectiveKind::rnn_test_adversary;
    if (s == "coverage_only") return ObjectiveKind::coverage_only;
    if (s == "rnn_test_joint") return ObjectiveKind::rnn_test_joint;
    if (s == "fgsm_loss") return ObjectiveKind::fgsm_loss;
    if (s == "dlfuzz_joint") return ObjectiveKind::dlfuzz_joint;
    if (s == "random_baseline") return ObjectiveKind::random_baseline;
    throw ConfigError("unknown objective kind: " + s);
}

// How many time steps the per-input mutation touches. One random step is
// the default; k steps for long inputs.
struct StepPolicy {
    std::size_t k = 1;
};

// Declarative description of the scalar maximized by gradient ascent.
// Targets are selected once per input, before the single gradient
// computation.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::rnn_test_joint;
    std::optional<CoverageConfig> coverage_metric;
    std::size_t m = 10;       // guidance target count
    double lambda_cov = 1.0;  // weight on the coverage term
    StepPolicy step_policy;

    bool needs_coverage() const {
        return kind == ObjectiveKind::coverage_only || kind == ObjectiveKind::rnn_test_joint ||
               kind == ObjectiveKind::dlfuzz_joint;
    }

    bool needs_loss() const {
        return kind == ObjectiveKind::fgsm_loss || kind == ObjectiveKind::dlfuzz_joint;
    }

    bool gradient_based() const { return kind != ObjectiveKind::random_baseline; }

    void validate(const RnnConfig& model) const {
        if (needs_coverage()) {
            if (!coverage_metric) throw ConfigError(to_string(kind) + " requires a coverage metric");
            coverage_metric->validate();
            if (coverage_metric->metric == CoverageMetric::CS_C &&
                model.cell_kind != CellKind::lstm)
                throw ConfigError("cell-state coverage requires an LSTM model");
        }
        if (step_policy.k == 0) throw ConfigError("step policy must select at least one step");
    }
};

// Value decomposition of one built objective.
struct ObjectiveValue {
    double total = 0.0;
    double obj1 = 0.0;  // adversary (or loss) part
    double obj2 = 0.0;  // coverage part
    std::vector<StateRef> selected_targets;
    std::vector<std::size_t> chosen_steps;
};

// Uniformly sampled distinct steps in [1, step_length); step 0 is never
// eligible because the inconsistency term needs h_{t-1}.
inline std::vector<std::size_t> select_steps(std::size_t step_length, const StepPolicy& policy,
                                             Rng& rng) {
    if (step_length < 2) throw InputError("input too short to select a mutation step");
    const std::size_t want = std::min(policy.k, step_length - 1);
    std::set<std::size_t> chosen;
    while (chosen.size() < want)
        chosen.insert(1 + static_cast<std::size_t>(rng.below(step_length - 1)));
    return {chosen.begin(), chosen.end()};
}

// Reference evaluation of the inconsistency term on a plain trace:
//   sum over t in t_list, l, b, e of H[t-1] + C[t] - H[t]
// with the cell term omitted for models without cell states.
inline double adversary_objective(const StateTrace& trace, const std::vector<std::size_t>& t_list) {
    double total = 0.0;
    const std::size_t L = trace.layers(), B = trace.batch(), E = trace.state_size();
    for (std::size_t t : t_list) {
        if (t == 0) throw InputError("adversary objective needs t >= 1");
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t b = 0; b < B; ++b) {
                if (!trace.valid(t, b)) throw InputError("selected step beyond sequence length");
                for (std::size_t e = 0; e < E; ++e) {
                    total += trace.hidden.at4(t - 1, l, b, e) - trace.hidden.at4(t, l, b, e);
                    if (trace.has_cell()) total += trace.cell.at4(t, l, b, e);
                }
            }
    }
    return total;
}

// Reference evaluation of the guidance term: sum of the selected states.
inline double coverage_objective(const StateTrace& trace, const std::vector<StateRef>& targets) {
    double total = 0.0;
    for (const StateRef& r : targets) total += state_value(trace, r);
    return total;
}

struct BuiltObjective {
    NodeId node = 0;
    ObjectiveValue value;
};

// Everything selection needs besides the graph itself. steps may be forced
// by the caller so that all methodologies in a comparison mutate the same
// positions.
struct ObjectiveContext {
    const CoverageTracker* tracker = nullptr;
    Rng* rng = nullptr;
    std::vector<std::size_t> forced_steps;
};

namespace detail {

inline NodeId adversary_node(RnnGraph& g, const std::vector<std::size_t>& t_list) {
    Tape& tape = g.tape;
    const bool lstm = g.cfg.cell_kind == CellKind::lstm;
    NodeId total = 0;
    bool first = true;
    for (std::size_t t : t_list) {
        if (t == 0 || t >= g.steps) throw InputError("selected step out of range");
        for (std::size_t l = 0; l < g.cfg.num_layers; ++l) {
            NodeId term = tape.sub(tape.sum_all(g.h[t - 1][l]), tape.sum_all(g.h[t][l]));
            if (lstm) term = tape.add(term, tape.sum_all(g.c[t][l]));
            total = first ? term : tape.add(total, term);
            first = false;
        }
    }
    return total;
}

inline NodeId coverage_node(RnnGraph& g, const std::vector<StateRef>& targets) {
    Tape& tape = g.tape;
    if (targets.empty()) return tape.leaf(Tensor::scalar(0.0));
    // group targets by state node, one weighted_sum per (t, l, side)
    struct Group {
        std::size_t t, l;
        StateSide side;
        Tensor mask;
    };
    std::vector<Group> groups;
    for (const StateRef& r : targets) {
        Group* found = nullptr;
        for (auto& grp : groups)
            if (grp.t == r.t && grp.l == r.l && grp.side == r.side) found = &grp;
        if (!found) {
            groups.push_back({r.t, r.l, r.side, Tensor({g.batch, g.cfg.state_size})});
            found = &groups.back();
        }
        found->mask.at(r.b, r.e) += 1.0;
    }
    NodeId total = 0;
    bool first = true;
    for (auto& grp : groups) {
        NodeId node = tape.weighted_sum(g.state_node(grp.t, grp.l, grp.side), std::move(grp.mask));
        total = first ? node : tape.add(total, node);
        first = false;
    }
    return total;
}

}  // namespace detail

// Build the requested objective as a differentiable scalar on the graph's
// tape and record its value decomposition.
inline BuiltObjective build_objective(RnnGraph& g, const ObjectiveSpec& spec,
                                      const ObjectiveContext& ctx) {
    spec.validate(g.cfg);
    if (spec.kind == ObjectiveKind::random_baseline)
        throw ConfigError("random baseline has no optimization objective");
    Tape& tape = g.tape;
    BuiltObjective out;

    // steps: forced for comparison parity, else drawn here, once per input.
    // Every kind records them; discrete synthesis mutates these positions.
    std::size_t min_len = g.lengths.empty() ? 0 : *std::min_element(g.lengths.begin(), g.lengths.end());
    if (!ctx.forced_steps.empty()) {
        out.value.chosen_steps = ctx.forced_steps;
    } else if (ctx.rng != nullptr) {
        out.value.chosen_steps = select_steps(min_len, spec.step_policy, *ctx.rng);
    }

    const bool wants_adversary =
        spec.kind == ObjectiveKind::rnn_test_adversary || spec.kind == ObjectiveKind::rnn_test_joint;
    if (wants_adversary && out.value.chosen_steps.empty())
        throw ConfigError("adversary objective needs selected steps (rng or forced)");

    // coverage targets, selected once per input from the current trace
    NodeId obj2_node = 0;
    bool has_obj2 = false;
    if (spec.needs_coverage()) {
        CoverageTracker empty_tracker(*spec.coverage_metric);
        const CoverageTracker* tracker = ctx.tracker ? ctx.tracker : &empty_tracker;
        if (tracker->config().metric != spec.coverage_metric->metric)
            throw ConfigError("tracker metric does not match objective coverage metric");
        StateTrace trace = capture_trace(g);
        out.value.selected_targets = select_targets(trace, *tracker, spec.m);
        obj2_node = detail::coverage_node(g, out.value.selected_targets);
        has_obj2 = true;
    }

    NodeId obj1_node = 0;
    bool has_obj1 = false;
    if (wants_adversary) {
        obj1_node = detail::adversary_node(g, out.value.chosen_steps);
        has_obj1 = true;
    } else if (spec.needs_loss()) {
        if (!g.has_loss) throw ConfigError("objective needs the model loss but none was built");
        obj1_node = g.loss;
        has_obj1 = true;
    }

    NodeId total;
    if (has_obj1 && has_obj2) {
        total = tape.add(obj1_node, tape.affine(obj2_node, spec.lambda_cov, 0.0));
    } else if (has_obj1) {
        total = obj1_node;
    } else {
        total = obj2_node;
    }

    out.node = total;
    out.value.total = tape.value(total)[0];
    out.value.obj1 = has_obj1 ? tape.value(obj1_node)[0] : 0.0;
    out.value.obj2 = has_obj2 ? tape.value(obj2_node)[0] : 0.0;
    return out;
}

// Gradient of the objective with respect to the embedded input, shape
// (B, T, input_dim). For discrete models this is the gradient at the
// embedding vectors, not the token ids.
inline std::pair<Tensor, ObjectiveValue> gradient_wrt_input(const RnnConfig& cfg,
                                                            const ModelParams& params,
                                                            const Batch& batch,
                                                            const ObjectiveSpec& spec,
                                                            const ObjectiveContext& ctx) {
    GraphOptions opt;
    opt.want_loss = spec.needs_loss();
    RnnGraph g = build_graph(cfg, params, batch, opt);
    BuiltObjective obj = build_objective(g, spec, ctx);
    g.tape.backward(obj.node);
    return {g.input_gradient(), obj.value};
}

}  // namespace statefuzz
