#include "procex/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace procex {

using ordered_json = nlohmann::ordered_json;

double conformance_rate(const ProcessDefinition& def, const FeatureSchema& schema,
                        const std::vector<FeatureVector>& samples) {
    if (samples.empty()) throw Error(ErrorKind::EmptySamples, "no samples to check");
    std::size_t ok = 0;
    for (const auto& s : samples)
        if (is_conformant(def, attributes_of(schema, s), indicators_of(schema, s))) ++ok;
    return static_cast<double>(ok) / static_cast<double>(samples.size());
}

double top_k_overlap(const Explanation& a, const Explanation& b, std::size_t k) {
    std::set<std::string> fa, fb;
    for (const auto& x : a.attributions) fa.insert(x.feature);
    for (const auto& x : b.attributions) fb.insert(x.feature);
    if (fa != fb) throw Error(ErrorKind::SchemaMismatch, "explanations cover different features");
    if (k < 1 || k > fa.size())
        throw Error(ErrorKind::InvalidArgument, "k must lie in [1, " + std::to_string(fa.size()) + "]");
    std::vector<std::string> ta = top_features(a, k), tb = top_features(b, k);
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    std::vector<std::string> common;
    std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(k);
}

std::size_t rank_of(const Explanation& e, std::string_view feature) {
    for (std::size_t i = 0; i < e.attributions.size(); ++i)
        if (e.attributions[i].feature == feature) return i + 1;
    throw Error(ErrorKind::UnknownFeature, std::string(feature));
}

std::vector<const Trace*> select_instances(const EventLog& log, const ExperimentConfig& config) {
    std::vector<const Trace*> out;
    for (const auto& t : log.traces) {
        if (out.size() == config.n_instances) break;
        if (config.label && t.label != *config.label) continue;
        if (config.required_activity &&
            std::find(t.activities.begin(), t.activities.end(), *config.required_activity) == t.activities.end())
            continue;
        out.push_back(&t);
    }
    return out;
}

ExperimentAggregates compute_aggregates(const std::vector<RunRecord>& records, const ExperimentConfig& config,
                                        const FeatureSchema& schema) {
    ExperimentAggregates agg;
    agg.n_runs = records.size();
    std::set<std::string> instances;
    for (const auto& r : records) instances.insert(r.instance_id);
    agg.n_instances = instances.size();
    if (records.empty()) return agg;
    const double n = static_cast<double>(records.size());

    auto has_feature = [&](const std::string& name) {
        return std::any_of(schema.features.begin(), schema.features.end(),
                           [&](const Feature& f) { return f.name == name; });
    };
    auto fraction = [&](auto&& predicate) {
        return static_cast<double>(std::count_if(records.begin(), records.end(), predicate)) / n;
    };
    if (has_feature(config.vanilla_focus))
        agg.vanilla_focus_top1 = fraction([&](const RunRecord& r) { return rank_of(r.vanilla, config.vanilla_focus) == 1; });
    if (has_feature(config.causal_focus)) {
        agg.causal_focus_top2 =
            fraction([&](const RunRecord& r) { return rank_of(r.process_aware, config.causal_focus) <= 2; });
        if (records.front().collapsed)
            agg.causal_focus_top1_collapsed =
                fraction([&](const RunRecord& r) { return rank_of(*r.collapsed, config.causal_focus) == 1; });
    }

    const std::size_t k = std::min(config.overlap_k, schema.arity());
    double overlap = 0.0;
    for (const auto& r : records) overlap += top_k_overlap(r.vanilla, r.process_aware, k);
    agg.mean_top_k_overlap = overlap / n;

    auto accumulate_mode = [&](const std::string& mode, auto&& pick) {
        double fidelity = 0.0;
        auto& features = agg.features[mode];
        for (const auto& r : records) {
            const Explanation& e = pick(r);
            fidelity += e.fidelity_r2;
            for (std::size_t i = 0; i < e.attributions.size(); ++i) {
                FeatureSummary& s = features[e.attributions[i].feature];
                s.mean_abs_weight += std::fabs(e.attributions[i].weight) / n;
                s.mean_rank += static_cast<double>(i + 1) / n;
            }
        }
        agg.mean_fidelity[mode] = fidelity / n;
        std::vector<std::pair<std::string, double>> order;
        for (const auto& [name, s] : features) order.emplace_back(name, s.mean_abs_weight);
        std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        for (std::size_t i = 0; i < order.size(); ++i) features[order[i].first].rank = i + 1;
    };
    accumulate_mode(kVanillaLabel, [](const RunRecord& r) -> const Explanation& { return r.vanilla; });
    accumulate_mode(kProcessAwareLabel, [](const RunRecord& r) -> const Explanation& { return r.process_aware; });
    if (records.front().collapsed)
        accumulate_mode(kCollapsedLabel, [](const RunRecord& r) -> const Explanation& { return *r.collapsed; });

    double vc = 0.0, pc = 0.0;
    for (const auto& r : records) {
        vc += r.vanilla_conformance;
        pc += r.process_aware_conformance;
    }
    agg.mean_conformance[kVanillaLabel] = vc / n;
    agg.mean_conformance[kProcessAwareLabel] = pc / n;
    return agg;
}

ExperimentReport run_comparison(const ProcessDefinition& def, const OutcomePredictor& model, const EventLog& log,
                                const ExperimentConfig& config) {
    const FeatureSchema& schema = model.schema();
    std::vector<const Trace*> instances = select_instances(log, config);
    if (instances.empty()) throw Error(ErrorKind::NoMatchingInstances, "no trace matches the instance selection");
    if (config.seeds.empty()) throw Error(ErrorKind::InvalidArgument, "at least one seed is required");

    ExperimentReport report;
    report.config = config;
    for (const Trace* trace : instances) {
        FeatureVector instance = encode_trace(schema, *trace);
        for (std::uint64_t seed : config.seeds) {
            RunRecord record;
            record.instance_id = trace->case_id;
            record.seed = seed;

            ExplainConfig cfg = config.explain;
            cfg.seed = seed;
            cfg.collapse_derived = false;
            cfg.mode = SamplingMode::Vanilla;
            ExplainResult vanilla = explain_detailed(model, def, instance, cfg, trace->case_id);
            record.vanilla = std::move(vanilla.explanation);
            record.vanilla_conformance = conformance_rate(def, schema, vanilla.perturbations.samples);

            cfg.mode = SamplingMode::ProcessAware;
            ExplainResult aware = explain_detailed(model, def, instance, cfg, trace->case_id);
            record.process_aware = std::move(aware.explanation);
            record.process_aware_conformance = conformance_rate(def, schema, aware.perturbations.samples);

            if (config.include_collapsed) {
                cfg.collapse_derived = true;
                record.collapsed = explain(model, def, instance, cfg, trace->case_id);
            }
            report.records.push_back(std::move(record));
        }
    }
    report.aggregates = compute_aggregates(report.records, config, schema);
    return report;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json aggregates_json(const ExperimentAggregates& agg) {
    ordered_json j;
    j["n_instances"] = agg.n_instances;
    j["n_runs"] = agg.n_runs;
    j["vanilla_focus_top1"] = optional_number(agg.vanilla_focus_top1);
    j["causal_focus_top2"] = optional_number(agg.causal_focus_top2);
    j["causal_focus_top1_collapsed"] = optional_number(agg.causal_focus_top1_collapsed);
    j["mean_top_k_overlap"] = agg.mean_top_k_overlap;
    j["mean_fidelity_r2"] = agg.mean_fidelity;
    j["mean_conformance"] = agg.mean_conformance;
    ordered_json features = ordered_json::object();
    for (const auto& [mode, per_feature] : agg.features) {
        ordered_json m = ordered_json::object();
        for (const auto& [name, s] : per_feature)
            m[name] = {{"mean_abs_weight", s.mean_abs_weight}, {"mean_rank", s.mean_rank}, {"rank", s.rank}};
        features[mode] = std::move(m);
    }
    j["features"] = std::move(features);
    return j;
}

}  // namespace

std::string aggregates_to_json(const ExperimentAggregates& aggregates) {
    return aggregates_json(aggregates).dump(2) + "\n";
}

std::string report_to_json(const ExperimentReport& report) {
    const ExperimentConfig& c = report.config;
    ordered_json j;
    ordered_json config;
    config["n_instances"] = c.n_instances;
    config["seeds"] = c.seeds;
    config["label"] = c.label ? ordered_json(std::string(to_string(*c.label))) : ordered_json(nullptr);
    config["required_activity"] = c.required_activity ? ordered_json(*c.required_activity) : ordered_json(nullptr);
    config["n_samples"] = c.explain.n_samples;
    config["spread"] = c.explain.spread;
    config["flip_p"] = c.explain.flip_p;
    config["kernel_width"] = c.explain.kernel_width ? ordered_json(*c.explain.kernel_width) : ordered_json(nullptr);
    config["ridge_lambda"] = c.explain.ridge_lambda;
    config["strategy"] = std::string(to_string(c.explain.strategy));
    config["include_collapsed"] = c.include_collapsed;
    config["vanilla_focus"] = c.vanilla_focus;
    config["causal_focus"] = c.causal_focus;
    config["overlap_k"] = c.overlap_k;
    j["config"] = std::move(config);
    j["aggregates"] = aggregates_json(report.aggregates);
    ordered_json records = ordered_json::array();
    for (const auto& r : report.records) {
        ordered_json rj;
        rj["instance_id"] = r.instance_id;
        rj["seed"] = r.seed;
        rj["vanilla_conformance"] = r.vanilla_conformance;
        rj["process_aware_conformance"] = r.process_aware_conformance;
        rj["vanilla"] = ordered_json::parse(explanation_to_json(r.vanilla));
        rj["process_aware"] = ordered_json::parse(explanation_to_json(r.process_aware));
        if (r.collapsed) rj["process_aware_collapsed"] = ordered_json::parse(explanation_to_json(*r.collapsed));
        records.push_back(std::move(rj));
    }
    j["records"] = std::move(records);
    return j.dump(2) + "\n";
}

std::string figure_data_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "feature,mode,mean_abs_weight,rank\n";
    for (const char* mode : {kVanillaLabel, kProcessAwareLabel, kCollapsedLabel}) {
        auto it = report.aggregates.features.find(mode);
        if (it == report.aggregates.features.end()) continue;
        std::vector<std::pair<std::string, FeatureSummary>> rows(it->second.begin(), it->second.end());
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second.rank < b.second.rank; });
        for (const auto& [name, s] : rows)
            out << name << ',' << mode << ',' << ordered_json(s.mean_abs_weight).dump() << ',' << s.rank << '\n';
    }
    return out.str();
}

}  // namespace procex
