#pragma once

#include <span>
#include <string>
#include <vector>

#include "procex/process_model.hpp"
#include "procex/simulation.hpp"

namespace procex {

enum class FeatureKind { Numeric, Binary };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    double lower = 0.0;  // numeric only
    double upper = 1.0;  // numeric only

    bool operator==(const Feature&) const = default;
};

/// Attribute features first, then activity indicators; each block sorted by name.
struct FeatureSchema {
    std::string process_name;
    std::vector<Feature> features;
    std::size_t n_attributes = 0;
    std::string hash;

    std::size_t arity() const { return features.size(); }
    std::size_t index_of(std::string_view name) const;  // throws UnknownFeature
    bool is_indicator(std::size_t i) const { return i >= n_attributes; }

    bool operator==(const FeatureSchema&) const = default;
};

using FeatureVector = std::vector<double>;

/// 64-bit FNV-1a over the ordered (name, kind) list, as 16 hex digits.
std::string schema_hash(const std::vector<Feature>& features);

FeatureSchema build_schema(const ProcessDefinition& def);

FeatureVector encode_trace(const FeatureSchema& schema, const Trace& trace);

/// Splits a vector into its attribute assignment and indicator block.
AttributeAssignment attributes_of(const FeatureSchema& schema, std::span<const double> v);
IndicatorVector indicators_of(const FeatureSchema& schema, std::span<const double> v);

/// Per-feature standardization fitted on a training log. Population std.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    /// Divisor used for feature `i`: the std, or 1 when the column is constant.
    double scale(std::size_t i) const;

    FeatureVector apply(std::span<const double> raw) const;
    FeatureVector invert(std::span<const double> standardized) const;

    bool operator==(const Scaler&) const = default;
};

inline constexpr double kConstantFeatureStd = 1e-12;

Scaler fit_scaler(const std::vector<FeatureVector>& rows);
Scaler fit_scaler(const FeatureSchema& schema, const EventLog& log);

}  // namespace procex
