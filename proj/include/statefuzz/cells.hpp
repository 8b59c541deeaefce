#pragma once

#include <cstddef>

#include "statefuzz/config.hpp"
#include "statefuzz/tape.hpp"

namespace statefuzz {

// Tape node ids for one layer's parameters. lstm/vanilla use the fused
// W/b pair; gru uses the three per-gate pairs.
struct LayerNodes {
    NodeId W = 0, b = 0;
    NodeId Wz = 0, Wr = 0, Wn = 0, bz = 0, br = 0, bn = 0;
};

struct CellOut {
    NodeId h = 0;
    NodeId c = 0;  // valid for LSTM only
};

// One LSTM step:
//   z = [x, h_prev]
//   i,f,n,o = slices of z*W + b   (i,f,o sigmoid; n tanh)
//   c = f (.) c_prev + i (.) n
//   h = o (.) tanh(c)
inline CellOut lstm_cell_step(Tape& tape, const LayerNodes& p, NodeId x, NodeId h_prev,
                              NodeId c_prev) {
    const std::size_t e = tape.value(h_prev).shape()[1];
    NodeId z = tape.concat_cols(x, h_prev);
    NodeId gates = tape.add_rowvec(tape.matmul(z, p.W), p.b);
    NodeId gi = tape.sigmoid(tape.slice_cols(gates, kGateI * e, (kGateI + 1) * e));
    NodeId gf = tape.sigmoid(tape.slice_cols(gates, kGateF * e, (kGateF + 1) * e));
    NodeId gn = tape.tanh(tape.slice_cols(gates, kGateN * e, (kGateN + 1) * e));
    NodeId go = tape.sigmoid(tape.slice_cols(gates, kGateO * e, (kGateO + 1) * e));
    NodeId c = tape.add(tape.mul(gf, c_prev), tape.mul(gi, gn));
    NodeId h = tape.mul(go, tape.tanh(c));
    return {h, c};
}

// One GRU step:
//   z = sigmoid([x, h_prev]*Wz + bz)        update gate
//   r = sigmoid([x, h_prev]*Wr + br)        reset gate
//   n = tanh([x, r (.) h_prev]*Wn + bn)     candidate
//   h = z (.) h_prev + (1 - z) (.) n
inline CellOut gru_cell_step(Tape& tape, const LayerNodes& p, NodeId x, NodeId h_prev) {
    NodeId zin = tape.concat_cols(x, h_prev);
    NodeId gz = tape.sigmoid(tape.add_rowvec(tape.matmul(zin, p.Wz), p.bz));
    NodeId gr = tape.sigmoid(tape.add_rowvec(tape.matmul(zin, p.Wr), p.br));
    NodeId nin = tape.concat_cols(x, tape.mul(gr, h_prev));
    NodeId gn = tape.tanh(tape.add_rowvec(tape.matmul(nin, p.Wn), p.bn));
    NodeId h = tape.add(tape.mul(gz, h_prev), tape.mul(tape.affine(gz, -1.0, 1.0), gn));
    return {h, 0};
}

// One plain-RNN step: h = tanh([x, h_prev]*W + b).
inline CellOut vanilla_cell_step(Tape& tape, const LayerNodes& p, NodeId x, NodeId h_prev) {
    NodeId z = tape.concat_cols(x, h_prev);
    NodeId h = tape.tanh(tape.add_rowvec(tape.matmul(z, p.W), p.b));
    return {h, 0};
}

// ---- plain-tensor wrappers ----
// Same numeric path as the tape versions (they run one on a scratch tape);
// convenient for direct unit-level checks against scalar oracles.

struct LayerParams {
    const ModelParams* params;
    std::string prefix;  // e.g. "layer0."

    const Tensor& get(const char* name) const { return params->at(prefix + name); }
};

inline LayerNodes load_layer(Tape& tape, const RnnConfig& cfg, const ModelParams& params,
                             std::size_t layer) {
    const std::string p = "layer" + std::to_string(layer) + ".";
    LayerNodes n;
    switch (cfg.cell_kind) {
        case CellKind::lstm:
        case CellKind::vanilla:
            n.W = tape.leaf(params.at(p + "W"));
            n.b = tape.leaf(params.at(p + "b"));
            break;
        case CellKind::gru:
            n.Wz = tape.leaf(params.at(p + "Wz"));
            n.Wr = tape.leaf(params.at(p + "Wr"));
            n.Wn = tape.leaf(params.at(p + "Wn"));
            n.bz = tape.leaf(params.at(p + "bz"));
            n.br = tape.leaf(params.at(p + "br"));
            n.bn = tape.leaf(params.at(p + "bn"));
            break;
    }
    return n;
}

inline std::pair<Tensor, Tensor> lstm_cell_step(const RnnConfig& cfg, const ModelParams& params,
                                                std::size_t layer, const Tensor& x_t,
                                                const Tensor& h_prev, const Tensor& c_prev) {
    if (x_t.shape()[0] != h_prev.shape()[0] || h_prev.shape() != c_prev.shape() ||
        h_prev.shape()[1] != cfg.state_size ||
        x_t.shape()[1] != cfg.layer_input_dim(layer))
        throw ConfigError("lstm_cell_step shape mismatch");
    Tape tape;
    LayerNodes p = load_layer(tape, cfg, params, layer);
    CellOut out = lstm_cell_step(tape, p, tape.leaf(x_t), tape.leaf(h_prev), tape.leaf(c_prev));
    return {tape.value(out.h), tape.value(out.c)};
}

inline Tensor gru_cell_step(const RnnConfig& cfg, const ModelParams& params, std::size_t layer,
                            const Tensor& x_t, const Tensor& h_prev) {
    if (x_t.shape()[0] != h_prev.shape()[0] || h_prev.shape()[1] != cfg.state_size ||
        x_t.shape()[1] != cfg.layer_input_dim(layer))
        throw ConfigError("gru_cell_step shape mismatch");
    Tape tape;
    LayerNodes p = load_layer(tape, cfg, params, layer);
    CellOut out = gru_cell_step(tape, p, tape.leaf(x_t), tape.leaf(h_prev));
    return tape.value(out.h);
}

inline Tensor vanilla_cell_step(const RnnConfig& cfg, const ModelParams& params, std::size_t layer,
                                const Tensor& x_t, const Tensor& h_prev) {
    if (x_t.shape()[0] != h_prev.shape()[0] || h_prev.shape()[1] != cfg.state_size ||
        x_t.shape()[1] != cfg.layer_input_dim(layer))
        throw ConfigError("vanilla_cell_step shape mismatch");
    Tape tape;
    LayerNodes p = load_layer(tape, cfg, params, layer);
    CellOut out = vanilla_cell_step(tape, p, tape.leaf(x_t), tape.leaf(h_prev));
    return tape.value(out.h);
}

}  // namespace statefuzz
