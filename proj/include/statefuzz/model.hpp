#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "statefuzz/cells.hpp"
#include "statefuzz/config.hpp"
#include "statefuzz/tape.hpp"
#include "statefuzz/trace.hpp"

namespace statefuzz {

// One batch of model inputs, padded to a common step count. Token ids and
// per-step targets are stored t-major: element (t, b) lives at t*B + b.
struct Batch {
    std::size_t batch = 0;  // B
    std::size_t steps = 0;  // T (padded)
    std::vector<std::size_t> lengths;
    bool discrete = false;
    std::vector<std::size_t> tokens;  // discrete inputs, t-major, padding id 0
    Tensor values;                    // continuous inputs, (B, T, in)
    bool has_targets = false;
    std::vector<std::size_t> step_targets;  // per-step heads, t-major
    std::vector<std::size_t> labels;        // final heads, size B

    static Batch from_tokens(const std::vector<std::vector<std::size_t>>& seqs) {
        Batch b;
        b.discrete = true;
        b.batch = seqs.size();
        for (auto& s : seqs) b.steps = std::max(b.steps, s.size());
        b.lengths.reserve(seqs.size());
        for (auto& s : seqs) b.lengths.push_back(s.size());
        b.tokens.assign(b.steps * b.batch, 0);
        for (std::size_t i = 0; i < seqs.size(); ++i)
            for (std::size_t t = 0; t < seqs[i].size(); ++t) b.tokens[t * b.batch + i] = seqs[i][t];
        return b;
    }

    // Language-model batch: inputs are seq[0..n-1), targets seq[1..n).
    static Batch next_token_batch(const std::vector<std::vector<std::size_t>>& seqs) {
        std::vector<std::vector<std::size_t>> inputs(seqs.size());
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            if (seqs[i].size() < 2) throw InputError("sequence too short for next-token targets");
            inputs[i].assign(seqs[i].begin(), seqs[i].end() - 1);
        }
        Batch b = from_tokens(inputs);
        b.has_targets = true;
        b.step_targets.assign(b.steps * b.batch, 0);
        for (std::size_t i = 0; i < seqs.size(); ++i)
            for (std::size_t t = 0; t + 1 < seqs[i].size(); ++t)
                b.step_targets[t * b.batch + i] = seqs[i][t + 1];
        return b;
    }

    static Batch from_continuous(const Tensor& values) {
        if (values.rank() != 3) throw InputError("continuous batch must be (B, T, in)");
        Batch b;
        b.discrete = false;
        b.batch = values.extent(0);
        b.steps = values.extent(1);
        b.values = values;
        b.lengths.assign(b.batch, b.steps);
        return b;
    }

    Batch& with_labels(std::vector<std::size_t> y) {
        if (y.size() != batch) throw InputError("label count != batch size");
        labels = std::move(y);
        has_targets = true;
        return *this;
    }

    Batch& with_step_targets(std::vector<std::size_t> t_major) {
        if (t_major.size() != steps * batch) throw InputError("target count != steps * batch");
        step_targets = std::move(t_major);
        has_targets = true;
        return *this;
    }

    std::size_t token_at(std::size_t t, std::size_t b) const { return tokens[t * batch + b]; }
};

// Graph handles of one forward pass: per-(t, l) state nodes, the embedded
// input node the adversarial gradient is taken at, and the optional loss.
struct RnnGraph {
    Tape tape;
    RnnConfig cfg;
    std::size_t batch = 0;
    std::size_t steps = 0;
    std::vector<std::size_t> lengths;

    NodeId input = 0;  // (T*B, input_dim): leaf (continuous) or gather (discrete)
    std::vector<std::vector<NodeId>> h;  // [t][l]
    std::vector<std::vector<NodeId>> c;  // [t][l], LSTM only
    std::vector<NodeId> step_logits;     // per-step head
    NodeId final_logits = 0;
    NodeId loss = 0;
    bool has_loss = false;
    double token_count = 0;  // positions contributing to the loss
    std::map<std::string, NodeId> param_nodes;

    NodeId state_node(std::size_t t, std::size_t l, StateSide side) const {
        return side == StateSide::hidden ? h[t][l] : c[t][l];
    }

    // Gradient of the last backward pass w.r.t. the embedded input,
    // reshaped to (B, T, input_dim).
    Tensor input_gradient() const {
        const Tensor& g = tape.grad(input);
        const std::size_t in = cfg.input_dim;
        Tensor out({batch, steps, in});
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t j = 0; j < in; ++j)
                    out[(b * steps + t) * in + j] = g[(t * batch + b) * in + j];
        return out;
    }

    // Embedded input value at (b, t) as a row vector of length input_dim.
    std::vector<double> embedded_row(std::size_t t, std::size_t b) const {
        const Tensor& v = tape.value(input);
        const std::size_t in = cfg.input_dim;
        std::vector<double> row(in);
        for (std::size_t j = 0; j < in; ++j) row[j] = v[(t * batch + b) * in + j];
        return row;
    }
};

// Continuous input flattened t-major into a (T*B, in) matrix.
inline Tensor flatten_continuous(const Batch& batch, std::size_t input_dim) {
    Tensor x({batch.steps * batch.batch, input_dim});
    for (std::size_t b = 0; b < batch.batch; ++b)
        for (std::size_t t = 0; t < batch.steps; ++t)
            for (std::size_t j = 0; j < input_dim; ++j)
                x[(t * batch.batch + b) * input_dim + j] =
                    batch.values[(b * batch.steps + t) * input_dim + j];
    return x;
}

struct GraphOptions {
    bool want_loss = false;
};

// Build the full unrolled graph for one batch. All state, logits and loss
// nodes live on graph.tape; nothing is computed twice, so a traced pass is
// bit-identical to an untraced one by construction.
inline RnnGraph build_graph(const RnnConfig& cfg, const ModelParams& params, const Batch& batch,
                            const GraphOptions& opt = {}) {
    cfg.validate();
    params.check_shapes(cfg);
    if (batch.discrete != cfg.discrete())
        throw ConfigError("batch input kind does not match model config");
    if (opt.want_loss && !batch.has_targets) throw ConfigError("loss requested without targets");

    RnnGraph g;
    g.cfg = cfg;
    g.batch = batch.batch;
    g.steps = batch.steps;
    g.lengths = batch.lengths;
    Tape& tape = g.tape;

    for (std::size_t b = 0; b < batch.batch; ++b)
        if (batch.lengths[b] > batch.steps) throw InputError("step length exceeds batch steps");

    // parameter leaves
    for (auto& [name, tensor] : params.tensors) g.param_nodes[name] = tape.leaf(tensor);

    // embedded input
    if (cfg.discrete()) {
        for (std::size_t id : batch.tokens)
            if (id >= cfg.vocab_size) throw InputError("token id out of vocabulary");
        g.input = tape.gather_rows(g.param_nodes.at("embedding"), batch.tokens);
    } else {
        g.input = tape.leaf(flatten_continuous(batch, cfg.input_dim));
    }

    std::vector<LayerNodes> layers(cfg.num_layers);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        LayerNodes n;
        const std::string p = "layer" + std::to_string(l) + ".";
        if (cfg.cell_kind == CellKind::gru) {
            n.Wz = g.param_nodes.at(p + "Wz");
            n.Wr = g.param_nodes.at(p + "Wr");
            n.Wn = g.param_nodes.at(p + "Wn");
            n.bz = g.param_nodes.at(p + "bz");
            n.br = g.param_nodes.at(p + "br");
            n.bn = g.param_nodes.at(p + "bn");
        } else {
            n.W = g.param_nodes.at(p + "W");
            n.b = g.param_nodes.at(p + "b");
        }
        layers[l] = n;
    }

    const bool lstm = cfg.cell_kind == CellKind::lstm;
    std::vector<NodeId> h_prev(cfg.num_layers), c_prev(cfg.num_layers);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        h_prev[l] = tape.leaf(Tensor({batch.batch, cfg.state_size}));
        if (lstm) c_prev[l] = tape.leaf(Tensor({batch.batch, cfg.state_size}));
    }

    g.h.assign(batch.steps, std::vector<NodeId>(cfg.num_layers, 0));
    if (lstm) g.c.assign(batch.steps, std::vector<NodeId>(cfg.num_layers, 0));

    NodeId out_w = g.param_nodes.at("output.W");
    NodeId out_b = g.param_nodes.at("output.b");

    std::vector<NodeId> loss_terms;
    for (std::size_t t = 0; t < batch.steps; ++t) {
        NodeId x = tape.slice_rows(g.input, t * batch.batch, (t + 1) * batch.batch);
        for (std::size_t l = 0; l < cfg.num_layers; ++l) {
            CellOut out;
            switch (cfg.cell_kind) {
                case CellKind::lstm:
                    out = lstm_cell_step(tape, layers[l], x, h_prev[l], c_prev[l]);
                    c_prev[l] = out.c;
                    g.c[t][l] = out.c;
                    break;
                case CellKind::gru: out = gru_cell_step(tape, layers[l], x, h_prev[l]); break;
                case CellKind::vanilla:
                    out = vanilla_cell_step(tape, layers[l], x, h_prev[l]);
                    break;
            }
            h_prev[l] = out.h;
            g.h[t][l] = out.h;
            x = out.h;
        }
        if (cfg.output_head == OutputHead::softmax_per_step) {
            NodeId logits = tape.add_rowvec(tape.matmul(g.h[t][cfg.num_layers - 1], out_w), out_b);
            g.step_logits.push_back(logits);
            if (opt.want_loss) {
                std::vector<std::size_t> targets(batch.batch);
                std::vector<double> mask(batch.batch);
                for (std::size_t b = 0; b < batch.batch; ++b) {
                    targets[b] = batch.step_targets[t * batch.batch + b];
                    mask[b] = t < batch.lengths[b] ? 1.0 : 0.0;
                    g.token_count += mask[b];
                }
                loss_terms.push_back(tape.softmax_xent(logits, targets, mask));
            }
        }
    }

    if (cfg.output_head == OutputHead::softmax_final) {
        for (std::size_t b = 0; b < batch.batch; ++b)
            if (batch.lengths[b] != batch.steps)
                throw ConfigError("final-head models require uniform sequence lengths");
        g.final_logits =
            tape.add_rowvec(tape.matmul(g.h[batch.steps - 1][cfg.num_layers - 1], out_w), out_b);
        if (opt.want_loss) {
            std::vector<double> mask(batch.batch, 1.0);
            g.token_count = static_cast<double>(batch.batch);
            loss_terms.push_back(tape.softmax_xent(g.final_logits, batch.labels, mask));
        }
    }

    if (opt.want_loss) {
        if (g.token_count == 0) throw InputError("no target positions in batch");
        NodeId total = loss_terms[0];
        for (std::size_t i = 1; i < loss_terms.size(); ++i) total = tape.add(total, loss_terms[i]);
        g.loss = tape.affine(total, 1.0 / g.token_count, 0.0);  // mean NLL per position
        g.has_loss = true;
    }
    return g;
}

inline StateTrace capture_trace(const RnnGraph& g) {
    StateTrace trace;
    const std::size_t T = g.steps, L = g.cfg.num_layers, B = g.batch, E = g.cfg.state_size;
    trace.hidden = Tensor({T, L, B, E});
    const bool lstm = g.cfg.cell_kind == CellKind::lstm;
    if (lstm) trace.cell = Tensor({T, L, B, E});
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t l = 0; l < L; ++l) {
            const Tensor& hv = g.tape.value(g.h[t][l]);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t e = 0; e < E; ++e) trace.hidden.at4(t, l, b, e) = hv.at(b, e);
            if (lstm) {
                const Tensor& cv = g.tape.value(g.c[t][l]);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t e = 0; e < E; ++e) trace.cell.at4(t, l, b, e) = cv.at(b, e);
            }
        }
    trace.step_lengths = g.lengths;
    return trace;
}

inline Tensor assemble_logits(const RnnGraph& g) {
    if (g.cfg.output_head == OutputHead::softmax_final) return g.tape.value(g.final_logits);
    const std::size_t T = g.steps, B = g.batch, V = g.cfg.output_dim();
    Tensor logits({T, B, V});
    for (std::size_t t = 0; t < T; ++t) {
        const Tensor& lv = g.tape.value(g.step_logits[t]);
        for (std::size_t i = 0; i < B * V; ++i) logits[t * B * V + i] = lv[i];
    }
    return logits;
}

// Batched forward pass with optional full state capture.
inline ForwardResult forward(const RnnConfig& cfg, const ModelParams& params, const Batch& batch,
                             bool capture = true) {
    GraphOptions opt;
    opt.want_loss = batch.has_targets;
    RnnGraph g = build_graph(cfg, params, batch, opt);
    ForwardResult result;
    result.logits = assemble_logits(g);
    if (!result.logits.all_finite()) throw TrainingError("non-finite logits in forward pass");
    if (capture) result.trace = capture_trace(g);
    result.trace.step_lengths = batch.lengths;
    if (g.has_loss) {
        result.loss = g.tape.value(g.loss)[0];
        result.has_loss = true;
    }
    return result;
}

// Stable per-row log-softmax of a logits row; used by metrics, never on
// the gradient path.
inline std::vector<double> log_softmax_row(const double* row, std::size_t v) {
    double mx = row[0];
    for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) z += std::exp(row[j] - mx);
    const double logz = std::log(z) + mx;
    std::vector<double> out(v);
    for (std::size_t j = 0; j < v; ++j) out[j] = row[j] - logz;
    return out;
}

}  // namespace statefuzz
