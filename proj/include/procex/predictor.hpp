#pragma once

// Binary outcome classifier over encoded traces. The class of interest is
// NEGATIVE (rejection), encoded as 1.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "procex/features.hpp"
#include "procex/simulation.hpp"

namespace procex {

/// Black box interrogated by the explainers. Inputs are raw (unstandardized)
/// vectors aligned to `schema()`; output is P(NEGATIVE). The scaler holds the
/// training statistics that define the explainers' distance and units.
class OutcomePredictor {
public:
    virtual ~OutcomePredictor() = default;
    virtual const FeatureSchema& schema() const = 0;
    virtual const Scaler& feature_scaler() const = 0;
    virtual double predict_proba(std::span<const double> raw) const = 0;
};

struct Hyperparams {
    double learning_rate = 0.1;
    double l2 = 1e-3;
    int epochs = 2000;
    double tol = 1e-6;
    std::uint64_t seed = 42;

    bool operator==(const Hyperparams&) const = default;
};

struct TrainMeta {
    std::size_t n_cases = 0;
    std::size_t n_negative = 0;
    int epochs_run = 0;
    double final_loss = 0.0;
    double final_max_gradient = 0.0;
    bool converged = false;
    /// Objective before each update; kept in memory only.
    std::vector<double> loss_history;
};

class LogisticModel : public OutcomePredictor {
public:
    FeatureSchema feature_schema;
    Scaler scaler;
    std::vector<double> weights;  // standardized units
    double bias = 0.0;
    Hyperparams hyperparams;
    TrainMeta train_meta;

    const FeatureSchema& schema() const override { return feature_schema; }
    const Scaler& feature_scaler() const override { return scaler; }
    double predict_proba(std::span<const double> raw) const override;
    double logit(std::span<const double> raw) const;
};

struct Objective {
    double loss = 0.0;
    std::vector<double> grad_weights;
    double grad_bias = 0.0;
};

/// Mean logistic loss plus (l2 / 2)·‖w‖² (bias unpenalized) and its gradient,
/// over already-standardized rows. `targets` are 0/1.
Objective logistic_objective(std::span<const double> weights, double bias,
                             const std::vector<FeatureVector>& rows,
                             std::span<const double> targets, double l2);

double sigmoid(double z);

/// Full-batch gradient descent from zero weights on standardized features.
/// Stops after `epochs` updates or once max |gradient| < tol.
LogisticModel train(const EventLog& log, const FeatureSchema& schema, const Hyperparams& hp = {});

struct Metrics {
    std::size_t n = 0;
    double accuracy = 0.0;
    std::size_t true_positive = 0;  // NEGATIVE predicted NEGATIVE
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;
    double auc = 0.5;
};

/// Threshold 0.5; AUC is the Mann-Whitney rank statistic with tied ranks averaged.
Metrics evaluate_scores(std::span<const double> scores, const std::vector<bool>& is_negative);
Metrics evaluate(const OutcomePredictor& model, const EventLog& log);

/// Shuffled split; the test part holds round(n · test_fraction) traces.
std::pair<EventLog, EventLog> split_log(const EventLog& log, double test_fraction, std::uint64_t seed);

std::string model_to_json(const LogisticModel& model);

/// Refuses a model whose schema hash differs from the process's schema.
LogisticModel model_from_json(std::string_view text, const ProcessDefinition& def);

void save_model(const LogisticModel& model, const std::string& path);
LogisticModel load_model(const std::string& path, const ProcessDefinition& def);

}  // namespace procex
