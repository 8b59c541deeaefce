#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "statefuzz/coverage.hpp"
#include "statefuzz/metrics.hpp"
#include "statefuzz/synthesis.hpp"

namespace statefuzz {

using json = nlohmann::json;

// One per-input record. Every test input yields exactly one record, either
// an outcome or an error marker.
struct InputRecord {
    std::size_t index = 0;
    bool error = false;
    std::string error_message;
    double original_metric = 0.0;
    double adversarial_metric = 0.0;
    Outcome outcome = Outcome::not_generated;
    std::vector<std::size_t> changed_positions;
    std::size_t scale_used = 0;
    double perturbation_l2 = 0.0;
    double elapsed_ms = 0.0;
    double objective_total = 0.0;
    double objective_obj1 = 0.0;
    double objective_obj2 = 0.0;
    std::size_t coverage_positions = 0;  // guidance position-map size after this input
    std::string original_text;           // char_lm tasks
    std::string adversarial_text;
    std::vector<double> perturbation;  // retained only when exporting
};

struct CoverageSummary {
    std::string metric;
    double ratio = 0.0;
    std::vector<double> section_ratios;
    std::uint64_t covered = 0;
    std::uint64_t total = 0;
    std::size_t positions = 0;
};

// One run of one methodology over the test set.
struct RunResult {
    std::size_t run = 0;
    std::vector<InputRecord> records;
    Rates rates;
    double mean_original_metric = 0.0;
    double mean_adversarial_metric = 0.0;
    double mean_perturbation_l2 = 0.0;
    double mean_elapsed_ms = 0.0;
    std::size_t error_count = 0;
    std::vector<CoverageSummary> original_coverage;
    std::vector<CoverageSummary> adversarial_coverage;
};

struct MethodologyResult {
    std::string name;
    std::vector<RunResult> runs;

    // Arithmetic means across runs.
    double mean_adversarial_metric() const {
        double s = 0.0;
        for (auto& r : runs) s += r.mean_adversarial_metric;
        return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
    }
    double mean_original_metric() const {
        double s = 0.0;
        for (auto& r : runs) s += r.mean_original_metric;
        return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
    }
    double mean_generation_rate() const {
        double s = 0.0;
        for (auto& r : runs) s += r.rates.generation_rate;
        return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
    }
    double mean_success_rate() const {
        double s = 0.0;
        for (auto& r : runs) s += r.rates.success_rate;
        return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
    }
    double mean_adversary_rate() const {
        double s = 0.0;
        for (auto& r : runs) s += r.rates.adversary_rate;
        return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
    }
    double mean_perturbation_l2() const {
        double s = 0.0;
        for (auto& r : runs) s += r.mean_perturbation_l2;
        return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
    }
};

struct CampaignReport {
    std::string task_kind;
    std::string metric_name;  // "perplexity" or "label"
    std::size_t test_set_size = 0;
    std::uint64_t seed = 0;
    std::vector<MethodologyResult> methodologies;
};

namespace detail {

inline json record_to_json(const InputRecord& r, bool with_perturbation) {
    json j;
    j["index"] = r.index;
    if (r.error) {
        j["error"] = r.error_message;
        return j;
    }
    j["original_metric"] = r.original_metric;
    j["adversarial_metric"] = r.adversarial_metric;
    j["outcome"] = to_string(r.outcome);
    j["changed_positions"] = r.changed_positions;
    j["scale_used"] = r.scale_used;
    j["perturbation_l2"] = r.perturbation_l2;
    j["elapsed_ms"] = r.elapsed_ms;
    j["objective"] = {{"total", r.objective_total},
                      {"obj1", r.objective_obj1},
                      {"obj2", r.objective_obj2}};
    j["coverage_positions"] = r.coverage_positions;
    if (!r.original_text.empty()) {
        j["original_text"] = r.original_text;
        j["adversarial_text"] = r.adversarial_text;
    }
    if (with_perturbation) j["perturbation"] = r.perturbation;
    return j;
}

inline json coverage_to_json(const CoverageSummary& c) {
    json j;
    j["metric"] = c.metric;
    j["ratio"] = c.ratio;
    j["covered"] = c.covered;
    j["total"] = c.total;
    j["positions"] = c.positions;
    if (!c.section_ratios.empty()) j["section_ratios"] = c.section_ratios;
    return j;
}

inline json run_to_json(const RunResult& r) {
    json j;
    j["run"] = r.run;
    j["inputs"] = r.records.size();
    j["errors"] = r.error_count;
    j["generation_rate"] = r.rates.generation_rate;
    j["success_rate"] = r.rates.success_rate;
    j["adversary_rate"] = r.rates.adversary_rate;
    j["mean_original_metric"] = r.mean_original_metric;
    j["mean_adversarial_metric"] = r.mean_adversarial_metric;
    j["mean_perturbation_l2"] = r.mean_perturbation_l2;
    j["mean_elapsed_ms"] = r.mean_elapsed_ms;
    json oc = json::array(), ac = json::array();
    for (auto& c : r.original_coverage) oc.push_back(coverage_to_json(c));
    for (auto& c : r.adversarial_coverage) ac.push_back(coverage_to_json(c));
    j["original_coverage"] = oc;
    j["adversarial_coverage"] = ac;
    return j;
}

}  // namespace detail

inline json summary_to_json(const CampaignReport& report) {
    json j;
    j["task_kind"] = report.task_kind;
    j["metric"] = report.metric_name;
    j["test_set_size"] = report.test_set_size;
    j["seed"] = report.seed;
    json methods = json::array();
    for (auto& m : report.methodologies) {
        json mj;
        mj["name"] = m.name;
        json runs = json::array();
        for (auto& r : m.runs) runs.push_back(detail::run_to_json(r));
        mj["runs"] = runs;
        mj["mean_original_metric"] = m.mean_original_metric();
        mj["mean_adversarial_metric"] = m.mean_adversarial_metric();
        mj["mean_generation_rate"] = m.mean_generation_rate();
        mj["mean_success_rate"] = m.mean_success_rate();
        mj["mean_adversary_rate"] = m.mean_adversary_rate();
        mj["mean_perturbation_l2"] = m.mean_perturbation_l2();
        methods.push_back(mj);
    }
    j["methodologies"] = methods;
    return j;
}

inline std::string summary_table(const CampaignReport& report) {
    std::ostringstream out;
    out << "task: " << report.task_kind << "  metric: " << report.metric_name
        << "  inputs: " << report.test_set_size << "\n";
    out << std::left << std::setw(28) << "methodology" << std::right << std::setw(12)
        << "orig" << std::setw(12) << "adv" << std::setw(10) << "gen" << std::setw(10)
        << "succ" << std::setw(10) << "advr" << std::setw(12) << "L2" << "\n";
    out << std::string(94, '-') << "\n";
    out << std::fixed;
    for (auto& m : report.methodologies) {
        out << std::left << std::setw(28) << m.name << std::right << std::setprecision(4)
            << std::setw(12) << m.mean_original_metric() << std::setw(12)
            << m.mean_adversarial_metric() << std::setprecision(3) << std::setw(10)
            << m.mean_generation_rate() << std::setw(10) << m.mean_success_rate()
            << std::setw(10) << m.mean_adversary_rate() << std::setprecision(4)
            << std::setw(12) << m.mean_perturbation_l2() << "\n";
    }
    return out.str();
}

// Write records (one JSON object per line), the summary JSON and the
// human-readable table under dir.
inline void write_report_files(const CampaignReport& report, const std::string& dir,
                               bool with_perturbations = false) {
    for (auto& m : report.methodologies) {
        for (auto& r : m.runs) {
            const std::string stem = dir + "/" + m.name + "_run" + std::to_string(r.run);
            std::ofstream records(stem + ".jsonl", std::ios::trunc);
            if (!records) throw ConfigError("cannot write report records in " + dir);
            std::ofstream adv_lines(stem + "_adversarial.txt", std::ios::trunc);
            for (auto& rec : r.records) {
                records << detail::record_to_json(rec, false).dump() << "\n";
                // mutated text sequences, ready for retraining augmentation
                if (!rec.error && rec.outcome != Outcome::not_generated &&
                    !rec.adversarial_text.empty())
                    adv_lines << rec.adversarial_text << "\n";
            }
        }
    }
    std::ofstream summary(dir + "/summary.json", std::ios::trunc);
    if (!summary) throw ConfigError("cannot write summary in " + dir);
    summary << summary_to_json(report).dump(2) << "\n";
    std::ofstream table(dir + "/summary.txt", std::ios::trunc);
    table << summary_table(report);

    if (with_perturbations) {
        std::ofstream pert(dir + "/perturbations.jsonl", std::ios::trunc);
        for (auto& m : report.methodologies)
            for (auto& r : m.runs)
                for (auto& rec : r.records) {
                    if (rec.error || rec.perturbation.empty()) continue;
                    json j;
                    j["objective"] = m.name;
                    j["run"] = r.run;
                    j["index"] = rec.index;
                    j["l2"] = rec.perturbation_l2;
                    j["vector"] = rec.perturbation;
                    pert << j.dump() << "\n";
                }
    }
}

}  // namespace statefuzz
