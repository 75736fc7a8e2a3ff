#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "procex/process_model.hpp"
#include "procex/rng.hpp"

namespace procex {

struct AttributeDistribution {
    enum class Kind { Uniform, TruncatedNormal };

    Kind kind = Kind::Uniform;
    double mean = 0.0;  // truncated normal only
    double stddev = 1.0;  // truncated normal only

    bool operator==(const AttributeDistribution&) const = default;
};

struct SimulationConfig {
    /// Attributes not listed here are sampled uniformly over their bounds.
    std::map<std::string, AttributeDistribution> distributions;
    double label_noise = 0.0;
    std::uint64_t n_cases = 0;
    std::uint64_t seed = 0;

    bool operator==(const SimulationConfig&) const = default;
};

struct Trace {
    std::string case_id;
    AttributeAssignment attrs;
    std::vector<std::string> activities;
    Label label = Label::Positive;

    bool operator==(const Trace&) const = default;
};

struct Provenance {
    enum class Kind { Simulated, Imported };

    Kind kind = Kind::Simulated;
    SimulationConfig config;  // simulated
    std::string source;       // imported
};

struct EventLog {
    std::string process_name;
    std::vector<Trace> traces;
    Provenance provenance;
    std::vector<std::string> warnings;
};

/// One executed path: visited activities in order and the end node's label.
struct Path {
    std::vector<std::string> activities;
    Label end_label = Label::Positive;
};

/// Walks the process once: xor gateways take the first true `when`, choice
/// gateways consume one uniform draw each.
Path walk_process(const ProcessDefinition& def, const AttributeAssignment& attrs, Rng& rng);

/// `walk_process`, then one extra draw to flip the label when `label_noise > 0`.
Trace execute_case(const ProcessDefinition& def, const AttributeAssignment& attrs, Rng& rng,
                   double label_noise = 0.0, std::string case_id = {});

/// Draws every declared attribute, in lexicographic name order.
AttributeAssignment sample_attributes(const ProcessDefinition& def, const SimulationConfig& config,
                                      Rng& rng);

/// "c000001"-style identifier for a 0-based ordinal.
std::string case_id_for(std::uint64_t ordinal);

/// Case `i` draws from `Rng(config.seed, i)`; output is in ordinal order.
EventLog generate_log(const ProcessDefinition& def, const SimulationConfig& config);

IndicatorVector indicators_of(const ProcessDefinition& def, const std::vector<std::string>& activities);

bool is_conformant(const ProcessDefinition& def, const AttributeAssignment& attrs,
                   const IndicatorVector& indicators);

struct CsvImportOptions {
    std::string case_column = "case_id";
    std::string activity_column = "activity";
    std::string label_column = "label";
    std::vector<std::string> attribute_columns;
    std::string positive_value = "POSITIVE";
    std::string negative_value = "NEGATIVE";
    std::string process_name = "imported";
};

/// One row per event, grouped by case. Attributes come from each case's first
/// event; the label from the case's first non-empty label cell.
EventLog import_log_csv(std::istream& in, const CsvImportOptions& options,
                        const std::string& source = "<stream>");
EventLog import_log_csv(const std::string& path, const CsvImportOptions& options);

void write_jsonl(const EventLog& log, std::ostream& out);
std::string to_jsonl(const EventLog& log);
EventLog read_jsonl(std::istream& in, const std::string& process_name);
EventLog read_jsonl_file(const std::string& path, const std::string& process_name);

}  // namespace procex
