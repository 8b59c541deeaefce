#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "statefuzz/rng.hpp"
#include "statefuzz/tensor.hpp"

namespace statefuzz {

enum class CellKind { vanilla, gru, lstm };
enum class OutputHead { softmax_per_step, softmax_final };

inline std::string to_string(CellKind k) {
    switch (k) {
        case CellKind::vanilla: return "vanilla";
        case CellKind::gru: return "gru";
        case CellKind::lstm: return "lstm";
    }
    return "?";
}

inline CellKind cell_kind_from(const std::string& s) {
    if (s == "vanilla") return CellKind::vanilla;
    if (s == "gru") return CellKind::gru;
    if (s == "lstm") return CellKind::lstm;
    throw ConfigError("unknown cell kind: " + s);
}

inline std::string to_string(OutputHead h) {
    return h == OutputHead::softmax_per_step ? "softmax-per-step" : "softmax-final";
}

inline OutputHead output_head_from(const std::string& s) {
    if (s == "softmax-per-step") return OutputHead::softmax_per_step;
    if (s == "softmax-final") return OutputHead::softmax_final;
    throw ConfigError("unknown output head: " + s);
}

// Static description of a recurrent model. vocab_size == 0 means a
// continuous-input model (no embedding table).
struct RnnConfig {
    CellKind cell_kind = CellKind::lstm;
    std::size_t num_layers = 1;
    std::size_t state_size = 8;    // E
    std::size_t input_dim = 8;     // embedding_dim for discrete models
    std::size_t vocab_size = 0;    // V; 0 when inputs are continuous
    std::size_t embedding_dim = 0; // 0 when inputs are continuous
    std::size_t num_classes = 0;   // output width for softmax-final heads
    OutputHead output_head = OutputHead::softmax_per_step;

    bool discrete() const { return vocab_size > 0; }

    // Width of the softmax output: V for discrete per-step heads, else
    // num_classes.
    std::size_t output_dim() const {
        if (output_head == OutputHead::softmax_per_step && vocab_size > 0) return vocab_size;
        return num_classes;
    }

    void validate() const {
        if (num_layers == 0 || state_size == 0 || input_dim == 0)
            throw ConfigError("num_layers, state_size and input_dim must be positive");
        if (vocab_size > 0) {
            if (embedding_dim == 0) throw ConfigError("discrete model needs embedding_dim");
            if (input_dim != embedding_dim)
                throw ConfigError("input_dim must equal embedding_dim for discrete models");
        }
        if (output_dim() == 0) throw ConfigError("output head has zero width");
    }

    std::size_t layer_input_dim(std::size_t layer) const {
        return layer == 0 ? input_dim : state_size;
    }
};

// Named parameter tensors. Names are layer-qualified and fixed by the
// config, e.g. "layer0.W", "layer1.bz", "embedding", "output.W".
struct ModelParams {
    std::map<std::string, Tensor> tensors;

    Tensor& at(const std::string& name) {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw ConfigError("missing parameter: " + name);
        return it->second;
    }
    const Tensor& at(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw ConfigError("missing parameter: " + name);
        return it->second;
    }

    // Declared (name, shape) pairs for a config, in a fixed order.
    static std::vector<std::pair<std::string, std::vector<std::size_t>>> declared(
        const RnnConfig& cfg) {
        std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
        if (cfg.discrete())
            out.push_back({"embedding", {cfg.vocab_size, cfg.embedding_dim}});
        for (std::size_t l = 0; l < cfg.num_layers; ++l) {
            const std::size_t in = cfg.layer_input_dim(l) + cfg.state_size;
            const std::string p = "layer" + std::to_string(l) + ".";
            switch (cfg.cell_kind) {
                case CellKind::lstm:
                    out.push_back({p + "W", {in, 4 * cfg.state_size}});
                    out.push_back({p + "b", {4 * cfg.state_size}});
                    break;
                case CellKind::gru:
                    out.push_back({p + "Wz", {in, cfg.state_size}});
                    out.push_back({p + "Wr", {in, cfg.state_size}});
                    out.push_back({p + "Wn", {in, cfg.state_size}});
                    out.push_back({p + "bz", {cfg.state_size}});
                    out.push_back({p + "br", {cfg.state_size}});
                    out.push_back({p + "bn", {cfg.state_size}});
                    break;
                case CellKind::vanilla:
                    out.push_back({p + "W", {in, cfg.state_size}});
                    out.push_back({p + "b", {cfg.state_size}});
                    break;
            }
        }
        out.push_back({"output.W", {cfg.state_size, cfg.output_dim()}});
        out.push_back({"output.b", {cfg.output_dim()}});
        return out;
    }

    static ModelParams zeros(const RnnConfig& cfg) {
        ModelParams p;
        for (auto& [name, shape] : declared(cfg)) p.tensors.emplace(name, Tensor::zeros(shape));
        return p;
    }

    // uniform(-scale, scale) init from a seeded generator; the classic
    // small-LSTM recipe.
    static ModelParams init(const RnnConfig& cfg, Rng& rng, double scale = 0.1) {
        ModelParams p;
        for (auto& [name, shape] : declared(cfg))
            p.tensors.emplace(name, rng.uniform_tensor(shape, -scale, scale));
        return p;
    }

    void check_shapes(const RnnConfig& cfg) const {
        auto decl = declared(cfg);
        if (decl.size() != tensors.size()) throw ConfigError("parameter set size mismatch");
        for (auto& [name, shape] : decl) {
            const Tensor& t = at(name);
            if (t.shape() != shape)
                throw ConfigError("parameter " + name + " has shape " +
                                  Tensor::shape_str(t.shape()) + ", expected " +
                                  Tensor::shape_str(shape));
        }
    }
};

// LSTM gate order inside the fused (in+E, 4E) weight matrix.
// Columns [0,E) input gate i, [E,2E) forget gate f, [2E,3E) candidate n,
// [3E,4E) output gate o.
enum LstmGate : std::size_t { kGateI = 0, kGateF = 1, kGateN = 2, kGateO = 3 };

}  // namespace statefuzz
