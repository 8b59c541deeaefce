#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "statefuzz/synthesis.hpp"
#include "statefuzz/tensor.hpp"

namespace statefuzz {

// exp of mean negative log-likelihood per token.
inline double perplexity(const std::vector<double>& log_probs) {
    if (log_probs.empty()) throw MetricError("perplexity of an empty sequence");
    double nll = 0.0;
    for (double lp : log_probs) {
        if (!std::isfinite(lp)) throw MetricError("non-finite log probability");
        nll -= lp;
    }
    return std::exp(nll / static_cast<double>(log_probs.size()));
}

// Levenshtein distance with unit costs.
template <typename Token>
std::size_t edit_distance(const std::vector<Token>& a, const std::vector<Token>& b) {
    const std::size_t m = a.size(), n = b.size();
    std::vector<std::size_t> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

// Word-level edit distance normalized by reference length.
template <typename Token>
double wer(const std::vector<Token>& reference, const std::vector<Token>& hypothesis) {
    if (reference.empty()) throw MetricError("WER needs a non-empty reference");
    return static_cast<double>(edit_distance(reference, hypothesis)) /
           static_cast<double>(reference.size());
}

// Sentence BLEU: geometric mean of clipped n-gram precisions for n = 1..4
// with add-one smoothing on zero counts, times the brevity penalty
// exp(min(0, 1 - |ref|/|hyp|)).
template <typename Token>
double bleu(const std::vector<Token>& reference, const std::vector<Token>& hypothesis) {
    if (reference.empty()) throw MetricError("BLEU needs a non-empty reference");
    if (hypothesis.empty()) return 0.0;

    double log_prec = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        std::map<std::vector<Token>, std::size_t> ref_counts;
        if (reference.size() >= n)
            for (std::size_t i = 0; i + n <= reference.size(); ++i)
                ++ref_counts[{reference.begin() + i, reference.begin() + i + n}];
        std::map<std::vector<Token>, std::size_t> hyp_counts;
        std::size_t total = hypothesis.size() >= n ? hypothesis.size() - n + 1 : 0;
        for (std::size_t i = 0; i + n <= hypothesis.size(); ++i)
            ++hyp_counts[{hypothesis.begin() + i, hypothesis.begin() + i + n}];
        std::size_t matched = 0;
        for (auto& [gram, count] : hyp_counts) {
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matched += std::min(count, it->second);
        }
        double p;
        if (matched == 0)
            p = 1.0 / static_cast<double>(total + 1);  // add-one smoothing
        else
            p = static_cast<double>(matched) / static_cast<double>(total);
        log_prec += std::log(p);
    }
    const double bp = std::exp(std::min(
        0.0, 1.0 - static_cast<double>(reference.size()) / static_cast<double>(hypothesis.size())));
    return bp * std::exp(log_prec / 4.0);
}

struct Rates {
    double generation_rate = 0.0;  // generated / total
    double success_rate = 0.0;     // performance_reduced / generated
    double adversary_rate = 0.0;   // performance_reduced / total
    std::size_t total = 0;
    std::size_t generated = 0;
    std::size_t reduced = 0;
};

inline Rates aggregate_rates(const std::vector<Outcome>& outcomes) {
    Rates r;
    r.total = outcomes.size();
    for (Outcome o : outcomes) {
        if (o != Outcome::not_generated) ++r.generated;
        if (o == Outcome::performance_reduced) ++r.reduced;
    }
    if (r.total > 0) {
        r.generation_rate = static_cast<double>(r.generated) / static_cast<double>(r.total);
        r.adversary_rate = static_cast<double>(r.reduced) / static_cast<double>(r.total);
    }
    if (r.generated > 0)
        r.success_rate = static_cast<double>(r.reduced) / static_cast<double>(r.generated);
    return r;
}

inline Rates aggregate_rates(const std::vector<AdversarialCandidate>& candidates) {
    std::vector<Outcome> outcomes;
    outcomes.reserve(candidates.size());
    for (auto& c : candidates) outcomes.push_back(c.outcome);
    return aggregate_rates(outcomes);
}

}  // namespace statefuzz
