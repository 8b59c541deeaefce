#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "statefuzz/campaign.hpp"

namespace statefuzz {

// Flat key=value configuration. Keys mirror the config struct fields
// verbatim; '#' starts a comment. Unknown keys are rejected so typos fail
// loudly.
using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

inline KeyValues load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    return parse_key_values(in);
}

namespace detail {

struct KeyReader {
    const KeyValues* kv;
    mutable std::map<std::string, bool> consumed;

    bool has(const std::string& key) const { return kv->count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv->find(key);
        consumed[key] = true;
        return it == kv->end() ? fallback : it->second;
    }

    std::size_t uint(const std::string& key, std::size_t fallback) const {
        auto it = kv->find(key);
        consumed[key] = true;
        if (it == kv->end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("key " + key + " wants an unsigned integer, got " + it->second);
        }
    }

    double real(const std::string& key, double fallback) const {
        auto it = kv->find(key);
        consumed[key] = true;
        if (it == kv->end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ConfigError("key " + key + " wants a number, got " + it->second);
        }
    }

    bool flag(const std::string& key, bool fallback) const {
        auto it = kv->find(key);
        consumed[key] = true;
        if (it == kv->end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("key " + key + " wants true/false, got " + it->second);
    }

    void reject_unknown() const {
        for (auto& [key, value] : *kv)
            if (!consumed.count(key)) throw ConfigError("unknown config key: " + key);
    }
};

}  // namespace detail

inline CoverageConfig coverage_config_from(const detail::KeyReader& r,
                                           const std::string& prefix = "coverage.") {
    CoverageConfig c;
    c.metric = coverage_metric_from(r.str(prefix + "metric", "HS_C"));
    c.num_sections = r.uint(prefix + "num_sections", 5);
    c.nc_threshold = r.real(prefix + "nc_threshold", 0.5);
    const std::string edges = r.str(prefix + "section_edges", "");
    if (!edges.empty()) {
        std::istringstream es(edges);
        std::string tok;
        while (std::getline(es, tok, ',')) c.section_edges.push_back(std::stod(tok));
    }
    c.validate();
    return c;
}

inline ObjectiveSpec objective_spec_from(const detail::KeyReader& r) {
    ObjectiveSpec spec;
    spec.kind = objective_kind_from(r.str("objective.kind", "rnn_test_joint"));
    spec.m = r.uint("objective.m", 10);
    spec.lambda_cov = r.real("objective.lambda_cov", 1.0);
    const std::string policy = r.str("objective.step_policy", "single_random_step");
    if (policy == "single_random_step") {
        spec.step_policy.k = 1;
    } else if (policy.rfind("k_random_steps:", 0) == 0) {
        spec.step_policy.k = std::stoull(policy.substr(15));
    } else {
        throw ConfigError("unknown step policy: " + policy);
    }
    const bool metric_given = r.has("coverage.metric");
    if (spec.needs_coverage() || metric_given)
        spec.coverage_metric = coverage_config_from(r);
    else
        coverage_config_from(r);  // consume defaults so reject_unknown stays quiet
    return spec;
}

inline CampaignConfig campaign_config_from(const KeyValues& kv) {
    detail::KeyReader r{&kv, {}};
    CampaignConfig c;
    c.model_path = r.str("model", "");
    c.task_kind = task_kind_from(r.str("task_kind", "char_lm"));
    c.objective = objective_spec_from(r);
    c.synthesis.max_scale = r.uint("synthesis.max_scale", 10);
    c.synthesis.epsilon = r.real("synthesis.epsilon", 0.04);
    c.test_set_path = r.str("test_set", "");
    c.test_split = split_from(r.str("test_split", "all"));
    c.num_runs = r.uint("num_runs", 3);
    c.seed = r.uint("seed", 1);
    c.output_dir = r.str("output_dir", "");
    c.export_perturbations = r.flag("export_perturbations", false);
    c.max_inputs = r.uint("max_inputs", 0);
    r.str("methodologies", "");  // consumed by compare
    r.reject_unknown();
    c.synthesis.validate();
    if (c.model_path.empty()) throw ConfigError("config needs model=<checkpoint path>");
    if (c.test_set_path.empty()) throw ConfigError("config needs test_set=<path>");
    return c;
}

// "rnn_test_joint:HS_C,fgsm_loss,random_baseline" -> named methodologies.
// The coverage qualifier overrides the metric; other guidance knobs come
// from the base objective config.
inline std::vector<Methodology> methodologies_from(const std::string& list,
                                                   const CampaignConfig& base) {
    std::vector<Methodology> out;
    std::istringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        ObjectiveSpec spec = base.objective;
        const auto colon = item.find(':');
        std::string kind = item.substr(0, colon);
        spec.kind = objective_kind_from(kind);
        if (colon != std::string::npos) {
            CoverageConfig c = spec.coverage_metric ? *spec.coverage_metric : CoverageConfig{};
            c.metric = coverage_metric_from(item.substr(colon + 1));
            if (c.metric != CoverageMetric::CS_C) c.section_edges.clear();
            spec.coverage_metric = c;
        } else if (!spec.needs_coverage()) {
            spec.coverage_metric.reset();
        }
        out.push_back({methodology_name(spec), spec});
    }
    if (out.empty()) throw ConfigError("methodologies list is empty");
    return out;
}

}  // namespace statefuzz
