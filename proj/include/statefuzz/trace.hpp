#pragma once

#include <cstddef>
#include <vector>

#include "statefuzz/tensor.hpp"

namespace statefuzz {

// All hidden states (and cell states for LSTM models) of one forward pass,
// shape (T, L, B, E). Positions at or beyond step_lengths[b] are padding
// and excluded from coverage denominators and objectives.
struct StateTrace {
    Tensor hidden;                         // (T, L, B, E)
    Tensor cell;                           // (T, L, B, E); empty unless LSTM
    std::vector<std::size_t> step_lengths; // per batch item, <= T

    std::size_t steps() const { return hidden.rank() == 4 ? hidden.extent(0) : 0; }
    std::size_t layers() const { return hidden.rank() == 4 ? hidden.extent(1) : 0; }
    std::size_t batch() const { return hidden.rank() == 4 ? hidden.extent(2) : 0; }
    std::size_t state_size() const { return hidden.rank() == 4 ? hidden.extent(3) : 0; }

    bool has_cell() const { return !cell.empty(); }
    bool valid(std::size_t t, std::size_t b) const { return t < step_lengths[b]; }

    std::size_t valid_state_count() const {
        std::size_t n = 0;
        for (std::size_t len : step_lengths) n += len;
        return n * layers() * state_size();
    }
};

// Which side of the trace a state reference points into.
enum class StateSide { hidden, cell };

// One (t, l, b, e) position in a trace.
struct StateRef {
    std::size_t t = 0;
    std::size_t l = 0;
    std::size_t b = 0;
    std::size_t e = 0;
    StateSide side = StateSide::hidden;

    friend bool operator==(const StateRef& a, const StateRef& b) {
        return a.t == b.t && a.l == b.l && a.b == b.b && a.e == b.e && a.side == b.side;
    }
};

inline double state_value(const StateTrace& trace, const StateRef& r) {
    const Tensor& src = r.side == StateSide::hidden ? trace.hidden : trace.cell;
    return src.at4(r.t, r.l, r.b, r.e);
}

// Output of one forward pass. logits is (T, B, V) for per-step heads and
// (B, K) for final heads.
struct ForwardResult {
    Tensor logits;
    StateTrace trace;  // empty tensors when capture was off
    double loss = 0.0;
    bool has_loss = false;
};

}  // namespace statefuzz
