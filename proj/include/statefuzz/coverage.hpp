#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "statefuzz/trace.hpp"

namespace statefuzz {

enum class CoverageMetric { HS_C, CS_C, NC };

inline std::string to_string(CoverageMetric m) {
    switch (m) {
        case CoverageMetric::HS_C: return "HS_C";
        case CoverageMetric::CS_C: return "CS_C";
        case CoverageMetric::NC: return "NC";
    }
    return "?";
}

inline CoverageMetric coverage_metric_from(const std::string& s) {
    if (s == "HS_C") return CoverageMetric::HS_C;
    if (s == "CS_C") return CoverageMetric::CS_C;
    if (s == "NC") return CoverageMetric::NC;
    throw ConfigError("unknown coverage metric: " + s);
}

struct CoverageConfig {
    CoverageMetric metric = CoverageMetric::HS_C;
    std::size_t num_sections = 5;       // CS_C
    std::vector<double> section_edges;  // CS_C; defaults to equal width over [-1, 1]
    double nc_threshold = 0.5;          // NC

    static std::vector<double> equal_edges(std::size_t sections) {
        std::vector<double> edges(sections + 1);
        for (std::size_t i = 0; i <= sections; ++i)
            edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(sections);
        edges.front() = -1.0;
        edges.back() = 1.0;
        return edges;
    }

    std::vector<double> edges() const {
        return section_edges.empty() ? equal_edges(num_sections) : section_edges;
    }

    void validate() const {
        if (metric == CoverageMetric::CS_C) {
            if (num_sections == 0) throw ConfigError("num_sections must be positive");
            auto e = edges();
            if (e.size() != num_sections + 1)
                throw ConfigError("section_edges must have num_sections + 1 entries");
            if (e.front() != -1.0 || e.back() != 1.0)
                throw ConfigError("section edges must span exactly [-1, 1]");
            for (std::size_t i = 1; i < e.size(); ++i)
                if (!(e[i - 1] < e[i])) throw ConfigError("section edges must be ascending");
        }
    }
};

// Section of a tanh activation under half-open intervals [v_{i-1}, v_i),
// with the last section closed so +1 is covered.
inline std::size_t section_of(double activation, const std::vector<double>& edges) {
    const std::size_t sections = edges.size() - 1;
    for (std::size_t i = 1; i < sections; ++i)
        if (activation < edges[i]) return i - 1;
    return sections - 1;
}

// Cumulative covered/total accounting across a test run, plus the set of
// covered structural positions (t, l, e) with the batch dimension folded
// out, which is what guidance selects against.
//
// covered_count/total_count follow the metric definitions verbatim and
// include batch multiplicity:
//   HS_C  covered = states equal to the maximum of their vector
//   CS_C  covered = states landing in a boundary (first or last) section;
//         per-section counts carry the full partition
//   NC    covered = states above nc_threshold
class CoverageTracker {
  public:
    CoverageTracker() = default;
    explicit CoverageTracker(CoverageConfig config) : config_(std::move(config)) {
        config_.validate();
        section_counts_.assign(
            config_.metric == CoverageMetric::CS_C ? config_.num_sections : 0, 0);
    }

    const CoverageConfig& config() const { return config_; }
    std::uint64_t covered_count() const { return covered_; }
    std::uint64_t total_count() const { return total_; }
    const std::vector<std::uint64_t>& section_counts() const { return section_counts_; }
    std::size_t position_count() const { return positions_.size(); }

    double ratio() const { return total_ == 0 ? 0.0 : static_cast<double>(covered_) / total_; }

    std::vector<double> section_ratios() const {
        std::vector<double> out(section_counts_.size(), 0.0);
        if (total_ == 0) return out;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<double>(section_counts_[i]) / static_cast<double>(total_);
        return out;
    }

    bool position_covered(std::size_t t, std::size_t l, std::size_t e) const {
        return positions_.count(key(t, l, e)) != 0;
    }

    void update(const StateTrace& trace) {
        switch (config_.metric) {
            case CoverageMetric::HS_C: hs_update(trace); break;
            case CoverageMetric::CS_C: cs_update(trace); break;
            case CoverageMetric::NC: nc_update(trace); break;
        }
    }

    // Hidden state covered iff it equals the maximum of its vector; ties
    // all count.
    void hs_update(const StateTrace& trace) {
        const std::size_t E = trace.state_size();
        for_each_vector(trace, trace.hidden, [&](std::size_t t, std::size_t l, [[maybe_unused]] std::size_t b,
                                                 const double* vec) {
            double mx = vec[0];
            for (std::size_t e = 1; e < E; ++e) mx = std::max(mx, vec[e]);
            for (std::size_t e = 0; e < E; ++e) {
                ++total_;
                if (vec[e] == mx) {
                    ++covered_;
                    positions_.insert(key(t, l, e));
                }
            }
        });
    }

    // Cell state lands in the section containing tanh(e); the position map
    // records states that reached a boundary section.
    void cs_update(const StateTrace& trace) {
        if (!trace.has_cell())
            throw ConfigError("cell-state coverage requires an LSTM trace");
        const std::size_t E = trace.state_size();
        const auto edges = config_.edges();
        const std::size_t last = config_.num_sections - 1;
        for_each_vector(trace, trace.cell, [&](std::size_t t, std::size_t l, [[maybe_unused]] std::size_t b,
                                               const double* vec) {
            for (std::size_t e = 0; e < E; ++e) {
                ++total_;
                const std::size_t sec = section_of(std::tanh(vec[e]), edges);
                ++section_counts_[sec];
                if (sec == 0 || sec == last) {
                    ++covered_;
                    positions_.insert(key(t, l, e));
                }
            }
        });
    }

    // DeepTest-style neuron coverage: hidden state covered iff its value
    // exceeds the threshold.
    void nc_update(const StateTrace& trace) {
        const std::size_t E = trace.state_size();
        for_each_vector(trace, trace.hidden, [&](std::size_t t, std::size_t l, [[maybe_unused]] std::size_t b,
                                                 const double* vec) {
            for (std::size_t e = 0; e < E; ++e) {
                ++total_;
                if (vec[e] > config_.nc_threshold) {
                    ++covered_;
                    positions_.insert(key(t, l, e));
                }
            }
        });
    }

    // Merge another tracker of the same config; used when concurrent
    // campaigns each own a tracker.
    void merge(const CoverageTracker& other) {
        covered_ += other.covered_;
        total_ += other.total_;
        for (std::size_t i = 0; i < section_counts_.size(); ++i)
            section_counts_[i] += other.section_counts_[i];
        positions_.insert(other.positions_.begin(), other.positions_.end());
    }

  private:
    template <typename F>
    static void for_each_vector(const StateTrace& trace, const Tensor& src, F&& fn) {
        const std::size_t T = trace.steps(), L = trace.layers(), B = trace.batch(),
                          E = trace.state_size();
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t b = 0; b < B; ++b) {
                    if (!trace.valid(t, b)) continue;
                    fn(t, l, b, src.data() + ((t * L + l) * B + b) * E);
                }
    }

    static std::uint64_t key(std::size_t t, std::size_t l, std::size_t e) {
        return (static_cast<std::uint64_t>(t) << 40) | (static_cast<std::uint64_t>(l) << 32) |
               static_cast<std::uint64_t>(e);
    }

    CoverageConfig config_;
    std::uint64_t covered_ = 0;
    std::uint64_t total_ = 0;
    std::vector<std::uint64_t> section_counts_;
    std::set<std::uint64_t> positions_;
};

// Guidance target selection: among states whose structural position is not
// yet covered, pick the m with values nearest to becoming covered.
//   HS_C  smallest max(h) - e, gap > 0
//   CS_C  tanh value nearest an uncovered boundary section's interior edge
//   NC    smallest nc_threshold - value, gap > 0
// Deterministic: ties broken by ascending (t, l, b, e).
inline std::vector<StateRef> select_targets(const StateTrace& trace,
                                            const CoverageTracker& tracker, std::size_t m) {
    const CoverageConfig& cfg = tracker.config();
    struct Candidate {
        double gap;
        StateRef ref;
    };
    std::vector<Candidate> candidates;
    const std::size_t T = trace.steps(), L = trace.layers(), B = trace.batch(),
                      E = trace.state_size();
    const bool cs = cfg.metric == CoverageMetric::CS_C;
    if (cs && !trace.has_cell()) throw ConfigError("cell-state guidance requires an LSTM trace");
    const Tensor& src = cs ? trace.cell : trace.hidden;
    const auto edges = cfg.edges();

    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t b = 0; b < B; ++b) {
                if (!trace.valid(t, b)) continue;
                const double* vec = src.data() + ((t * L + l) * B + b) * E;
                double mx = vec[0];
                if (cfg.metric == CoverageMetric::HS_C)
                    for (std::size_t e = 1; e < E; ++e) mx = std::max(mx, vec[e]);
                for (std::size_t e = 0; e < E; ++e) {
                    if (tracker.position_covered(t, l, e)) continue;
                    double gap = 0.0;
                    switch (cfg.metric) {
                        case CoverageMetric::HS_C: gap = mx - vec[e]; break;
                        case CoverageMetric::NC: gap = cfg.nc_threshold - vec[e]; break;
                        case CoverageMetric::CS_C: {
                            // distance to the nearest edge through which the
                            // state can enter a boundary section; states
                            // already inside one are covered by this trace
                            const double a = std::tanh(vec[e]);
                            const std::size_t sec = section_of(a, edges);
                            if (sec == 0 || sec == cfg.num_sections - 1) continue;
                            gap = std::min(std::abs(a - edges[1]),
                                           std::abs(edges[edges.size() - 2] - a));
                            break;
                        }
                    }
                    if (gap <= 0.0) continue;
                    StateRef ref{t, l, b, e, cs ? StateSide::cell : StateSide::hidden};
                    candidates.push_back({gap, ref});
                }
            }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.gap != b.gap) return a.gap < b.gap;
        if (a.ref.t != b.ref.t) return a.ref.t < b.ref.t;
        if (a.ref.l != b.ref.l) return a.ref.l < b.ref.l;
        if (a.ref.b != b.ref.b) return a.ref.b < b.ref.b;
        return a.ref.e < b.ref.e;
    });
    if (candidates.size() > m) candidates.resize(m);
    std::vector<StateRef> out;
    out.reserve(candidates.size());
    for (auto& c : candidates) out.push_back(c.ref);
    return out;
}

}  // namespace statefuzz
