#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procex/explainer.hpp"
#include "procex/features.hpp"
#include "procex/predictor.hpp"
#include "procex/process_model.hpp"
#include "procex/simulation.hpp"

namespace procex {

/// Fraction of samples the process can realize. Throws `EmptySamples`.
double conformance_rate(const ProcessDefinition& def, const FeatureSchema& schema,
                        const std::vector<FeatureVector>& samples);

/// |top-k(a) ∩ top-k(b)| / k under the attribution order (|weight| desc, name asc).
double top_k_overlap(const Explanation& a, const Explanation& b, std::size_t k);

/// 1-based position of `feature` in the attribution order.
std::size_t rank_of(const Explanation& e, std::string_view feature);

struct ExperimentConfig {
    std::size_t n_instances = 20;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    /// Instance selection; unset fields do not filter.
    std::optional<Label> label = Label::Negative;
    std::optional<std::string> required_activity = std::string("skilled_agent_review");
    ExplainConfig explain;  // mode, seed and collapse_derived are set per run
    bool include_collapsed = true;
    std::string vanilla_focus = "skilled_agent_review";
    std::string causal_focus = "credit_score";
    std::size_t overlap_k = 2;
};

struct RunRecord {
    std::string instance_id;
    std::uint64_t seed = 0;
    Explanation vanilla;
    Explanation process_aware;
    std::optional<Explanation> collapsed;
    double vanilla_conformance = 0.0;
    double process_aware_conformance = 0.0;
};

struct FeatureSummary {
    double mean_abs_weight = 0.0;
    double mean_rank = 0.0;
    std::size_t rank = 0;  // by mean_abs_weight within the mode
};

struct ExperimentAggregates {
    std::size_t n_instances = 0;
    std::size_t n_runs = 0;
    std::optional<double> vanilla_focus_top1;       // fraction of runs
    std::optional<double> causal_focus_top2;        // process-aware, fraction of runs
    std::optional<double> causal_focus_top1_collapsed;
    double mean_top_k_overlap = 0.0;
    std::map<std::string, double> mean_fidelity;      // by mode label
    std::map<std::string, double> mean_conformance;   // vanilla / process_aware
    std::map<std::string, std::map<std::string, FeatureSummary>> features;  // mode -> feature
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<RunRecord> records;
    ExperimentAggregates aggregates;
};

/// Mode labels used in aggregates and figure data.
inline constexpr const char* kVanillaLabel = "vanilla";
inline constexpr const char* kProcessAwareLabel = "process_aware";
inline constexpr const char* kCollapsedLabel = "process_aware_collapsed";

std::vector<const Trace*> select_instances(const EventLog& log, const ExperimentConfig& config);

ExperimentAggregates compute_aggregates(const std::vector<RunRecord>& records, const ExperimentConfig& config,
                                        const FeatureSchema& schema);

/// Every selected instance is explained under every seed in both modes.
ExperimentReport run_comparison(const ProcessDefinition& def, const OutcomePredictor& model, const EventLog& log,
                                const ExperimentConfig& config);

std::string report_to_json(const ExperimentReport& report);
std::string aggregates_to_json(const ExperimentAggregates& aggregates);

/// CSV with columns feature, mode, mean_abs_weight, rank.
std::string figure_data_csv(const ExperimentReport& report);

}  // namespace procex
