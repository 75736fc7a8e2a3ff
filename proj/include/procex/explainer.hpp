#pragma once

// LIME-style local explanations. Vanilla sampling perturbs every feature
// independently; process-aware sampling only produces feature vectors the
// process definition can actually realize.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procex/features.hpp"
#include "procex/predictor.hpp"
#include "procex/process_model.hpp"
#include "procex/rng.hpp"

namespace procex {

enum class SamplingMode { Vanilla, ProcessAware };
enum class ConstraintStrategy { Propagate, Reject };

std::string_view to_string(SamplingMode mode);
std::string_view to_string(ConstraintStrategy strategy);

struct ExplainConfig {
    SamplingMode mode = SamplingMode::Vanilla;
    ConstraintStrategy strategy = ConstraintStrategy::Propagate;
    std::size_t n_samples = 5000;  // including the instance itself
    double spread = 1.0;
    double flip_p = 0.5;
    std::optional<double> kernel_width;  // default 0.75·sqrt(arity)
    double ridge_lambda = 1.0;
    std::uint64_t seed = 42;
    /// Process-aware only: drop indicator columns from the surrogate design.
    bool collapse_derived = false;
};

struct PerturbationSet {
    FeatureVector instance;
    std::vector<FeatureVector> samples;  // samples[0] is the instance
    std::vector<double> predictions;
    std::vector<double> kernel_weights;
    SamplingMode mode = SamplingMode::Vanilla;
    ConstraintStrategy strategy = ConstraintStrategy::Propagate;
};

struct Attribution {
    std::string feature;
    double weight = 0.0;      // standardized units
    double raw_weight = 0.0;  // per raw feature unit
};

struct Explanation {
    std::string instance_id;
    double prediction = 0.0;
    std::vector<Attribution> attributions;  // by |weight| desc, then name
    double intercept = 0.0;
    double fidelity_r2 = 0.0;
    ExplainConfig config;
    double kernel_width = 0.0;
};

struct SurrogateFit {
    std::vector<double> coefficients;
    double intercept = 0.0;
    double fidelity_r2 = 0.0;
};

double default_kernel_width(std::size_t arity);

/// `n` vectors, the first being `instance`. Numeric features are drawn from
/// Normal(value, spread·std) and clamped to the declared bounds; indicators
/// flip independently with probability `flip_p`.
std::vector<FeatureVector> sample_vanilla(const FeatureVector& instance, const FeatureSchema& schema,
                                          const Scaler& scaler, std::size_t n, double spread, double flip_p,
                                          Rng& rng);

/// Conformant neighbours of `instance`. Propagate perturbs attributes and
/// re-executes the process to set indicators; reject filters vanilla draws
/// through the conformance check, giving up after 100·n attempts.
std::vector<FeatureVector> sample_process_aware(const FeatureVector& instance, const ProcessDefinition& def,
                                                const FeatureSchema& schema, const Scaler& scaler, std::size_t n,
                                                double spread, ConstraintStrategy strategy, Rng& rng,
                                                double flip_p = 0.5);

/// exp(-d²/width²), d the Euclidean distance in standardized space.
std::vector<double> kernel_weights(const FeatureVector& instance, const std::vector<FeatureVector>& samples,
                                   const Scaler& scaler, double width);

/// Weighted ridge with unpenalized intercept over the given design rows.
SurrogateFit fit_surrogate(const std::vector<FeatureVector>& design, std::span<const double> targets,
                           std::span<const double> weights, double lambda);

struct ExplainResult {
    Explanation explanation;
    PerturbationSet perturbations;
};

ExplainResult explain_detailed(const OutcomePredictor& model, const ProcessDefinition& def,
                               const FeatureVector& instance, const ExplainConfig& config,
                               std::string instance_id = {});

Explanation explain(const OutcomePredictor& model, const ProcessDefinition& def, const FeatureVector& instance,
                    const ExplainConfig& config, std::string instance_id = {});

/// Instance for a hypothetical case: indicators come from one execution of the
/// process on `attrs`, choice gateways drawn from stream 1 of `seed`.
FeatureVector synthesize_instance(const ProcessDefinition& def, const FeatureSchema& schema,
                                  const AttributeAssignment& attrs, std::uint64_t seed);

/// Feature names in attribution order, truncated to `k` when given.
std::vector<std::string> top_features(const Explanation& e, std::optional<std::size_t> k = std::nullopt);

std::string explanation_to_json(const Explanation& e, std::optional<std::size_t> top_k = std::nullopt);

}  // namespace procex
