#include "procex/explainer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "json.hpp"
#include "procex/simulation.hpp"

namespace procex {

namespace {

FeatureVector perturb(const FeatureVector& instance, const FeatureSchema& schema, const Scaler& scaler,
                      double spread, double flip_p, Rng& rng) {
    FeatureVector v = instance;
    for (std::size_t i = 0; i < schema.arity(); ++i) {
        const Feature& f = schema.features[i];
        if (f.kind == FeatureKind::Numeric) {
            double x = instance[i] + spread * scaler.scale(i) * rng.normal();
            v[i] = std::clamp(x, f.lower, f.upper);
        } else if (rng.bernoulli(flip_p)) {
            v[i] = instance[i] != 0.0 ? 0.0 : 1.0;
        }
    }
    return v;
}

bool conformant(const ProcessDefinition& def, const FeatureSchema& schema, const FeatureVector& v) {
    return is_conformant(def, attributes_of(schema, v), indicators_of(schema, v));
}

void sort_attributions(std::vector<Attribution>& attributions) {
    std::sort(attributions.begin(), attributions.end(), [](const Attribution& a, const Attribution& b) {
        double ma = std::fabs(a.weight), mb = std::fabs(b.weight);
        if (ma != mb) return ma > mb;
        return a.feature < b.feature;
    });
}

}  // namespace

std::string_view to_string(SamplingMode mode) {
    return mode == SamplingMode::Vanilla ? "vanilla" : "process_aware";
}

std::string_view to_string(ConstraintStrategy strategy) {
    return strategy == ConstraintStrategy::Propagate ? "propagate" : "reject";
}

double default_kernel_width(std::size_t arity) { return 0.75 * std::sqrt(static_cast<double>(arity)); }

std::vector<FeatureVector> sample_vanilla(const FeatureVector& instance, const FeatureSchema& schema,
                                          const Scaler& scaler, std::size_t n, double spread, double flip_p,
                                          Rng& rng) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample count must be at least 1");
    if (instance.size() != schema.arity()) throw Error(ErrorKind::SchemaMismatch, "instance arity");
    std::vector<FeatureVector> out;
    out.reserve(n);
    out.push_back(instance);
    while (out.size() < n) out.push_back(perturb(instance, schema, scaler, spread, flip_p, rng));
    return out;
}

std::vector<FeatureVector> sample_process_aware(const FeatureVector& instance, const ProcessDefinition& def,
                                                const FeatureSchema& schema, const Scaler& scaler, std::size_t n,
                                                double spread, ConstraintStrategy strategy, Rng& rng,
                                                double flip_p) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample count must be at least 1");
    if (instance.size() != schema.arity()) throw Error(ErrorKind::SchemaMismatch, "instance arity");
    if (build_schema(def).hash != schema.hash)
        throw Error(ErrorKind::SchemaMismatch, "process definition does not match the feature schema");
    if (!conformant(def, schema, instance))
        throw Error(ErrorKind::NonConformantInstance, "the instance itself cannot occur under the process");

    std::vector<FeatureVector> out;
    out.reserve(n);
    out.push_back(instance);
    if (strategy == ConstraintStrategy::Propagate) {
        while (out.size() < n) {
            FeatureVector v = perturb(instance, schema, scaler, spread, 0.0, rng);
            Path path = walk_process(def, attributes_of(schema, v), rng);
            for (std::size_t i = schema.n_attributes; i < schema.arity(); ++i) v[i] = 0.0;
            for (const auto& act : path.activities) v[schema.index_of(act)] = 1.0;
            out.push_back(std::move(v));
        }
        return out;
    }
    const std::size_t budget = 100 * n;
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (attempts++ == budget)
            throw Error(ErrorKind::RejectionBudgetExhausted,
                        "kept " + std::to_string(out.size()) + " of " + std::to_string(n) + " after " +
                            std::to_string(budget) + " draws");
        FeatureVector v = perturb(instance, schema, scaler, spread, flip_p, rng);
        if (conformant(def, schema, v)) out.push_back(std::move(v));
    }
    return out;
}

std::vector<double> kernel_weights(const FeatureVector& instance, const std::vector<FeatureVector>& samples,
                                   const Scaler& scaler, double width) {
    if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "kernel width must be positive");
    FeatureVector origin = scaler.apply(instance);
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        FeatureVector z = scaler.apply(s);
        double d2 = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) d2 += (z[j] - origin[j]) * (z[j] - origin[j]);
        out.push_back(std::exp(-d2 / (width * width)));
    }
    return out;
}

SurrogateFit fit_surrogate(const std::vector<FeatureVector>& design, std::span<const double> targets,
                           std::span<const double> weights, double lambda) {
    if (design.size() != targets.size() || design.size() != weights.size())
        throw Error(ErrorKind::InvalidArgument, "design, targets and weights differ in length");
    if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ridge lambda must be non-negative");
    const std::size_t d = design.empty() ? 0 : design.front().size();
    const auto positive = static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
    if (positive < d + 1)
        throw Error(ErrorKind::InsufficientSamples, std::to_string(positive) + " positively weighted samples for " +
                                                        std::to_string(d) + " features");

    double total = 0.0;
    Eigen::VectorXd x_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    double y_mean = 0.0;
    for (std::size_t i = 0; i < design.size(); ++i) {
        total += weights[i];
        y_mean += weights[i] * targets[i];
        for (std::size_t j = 0; j < d; ++j) x_mean[static_cast<Eigen::Index>(j)] += weights[i] * design[i][j];
    }
    x_mean /= total;
    y_mean /= total;

    // Centering absorbs the intercept, leaving it out of the penalty.
    const auto dim = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd xc(dim);
    for (std::size_t i = 0; i < design.size(); ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) xc[j] = design[i][static_cast<std::size_t>(j)] - x_mean[j];
        gram.selfadjointView<Eigen::Lower>().rankUpdate(xc, weights[i]);
        rhs += weights[i] * (targets[i] - y_mean) * xc;
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += lambda;

    Eigen::VectorXd beta;
    if (lambda == 0.0) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        const Eigen::VectorXd pivots = ldlt.vectorD();
        const double largest = pivots.cwiseAbs().maxCoeff();
        if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * std::max(largest, 1e-300))
            throw Error(ErrorKind::SingularSystem, "rank-deficient design with lambda = 0");
        beta = ldlt.solve(rhs);
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "normal equations not positive definite");
        beta = llt.solve(rhs);
    }

    SurrogateFit fit;
    fit.coefficients.assign(beta.data(), beta.data() + beta.size());
    fit.intercept = y_mean - beta.dot(x_mean);

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < design.size(); ++i) {
        double pred = fit.intercept;
        for (std::size_t j = 0; j < d; ++j) pred += fit.coefficients[j] * design[i][j];
        ss_res += weights[i] * (targets[i] - pred) * (targets[i] - pred);
        ss_tot += weights[i] * (targets[i] - y_mean) * (targets[i] - y_mean);
    }
    // A target without variance has nothing to explain.
    fit.fidelity_r2 = ss_tot <= 1e-24 * total * (1.0 + y_mean * y_mean) ? 0.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

ExplainResult explain_detailed(const OutcomePredictor& model, const ProcessDefinition& def,
                               const FeatureVector& instance, const ExplainConfig& config,
                               std::string instance_id) {
    const FeatureSchema& schema = model.schema();
    if (build_schema(def).hash != schema.hash)
        throw Error(ErrorKind::SchemaMismatch, "model schema does not match the process definition");
    if (config.collapse_derived && config.mode != SamplingMode::ProcessAware)
        throw Error(ErrorKind::InvalidArgument, "collapse_derived applies to process-aware mode only");
    const Scaler& scaler = model.feature_scaler();

    ExplainResult result;
    PerturbationSet& set = result.perturbations;
    set.instance = instance;
    set.mode = config.mode;
    set.strategy = config.strategy;
    Rng rng(config.seed, 0);
    set.samples = config.mode == SamplingMode::Vanilla
                      ? sample_vanilla(instance, schema, scaler, config.n_samples, config.spread, config.flip_p, rng)
                      : sample_process_aware(instance, def, schema, scaler, config.n_samples, config.spread,
                                             config.strategy, rng, config.flip_p);
    set.predictions.resize(set.samples.size());
    for (std::size_t i = 0; i < set.samples.size(); ++i) set.predictions[i] = model.predict_proba(set.samples[i]);
    const double width = config.kernel_width.value_or(default_kernel_width(schema.arity()));
    set.kernel_weights = kernel_weights(instance, set.samples, scaler, width);

    std::vector<std::size_t> columns;
    for (std::size_t j = 0; j < schema.arity(); ++j)
        if (!(config.collapse_derived && schema.is_indicator(j))) columns.push_back(j);
    std::vector<FeatureVector> design;
    design.reserve(set.samples.size());
    for (const auto& s : set.samples) {
        FeatureVector z = scaler.apply(s);
        FeatureVector row;
        row.reserve(columns.size());
        for (std::size_t j : columns) row.push_back(z[j]);
        design.push_back(std::move(row));
    }
    SurrogateFit fit = fit_surrogate(design, set.predictions, set.kernel_weights, config.ridge_lambda);

    Explanation& e = result.explanation;
    e.instance_id = std::move(instance_id);
    e.prediction = set.predictions.front();
    e.intercept = fit.intercept;
    e.fidelity_r2 = fit.fidelity_r2;
    e.config = config;
    e.kernel_width = width;
    for (std::size_t j = 0; j < schema.arity(); ++j) e.attributions.push_back({schema.features[j].name, 0.0, 0.0});
    for (std::size_t c = 0; c < columns.size(); ++c) {
        Attribution& a = e.attributions[columns[c]];
        a.weight = fit.coefficients[c];
        a.raw_weight = fit.coefficients[c] / scaler.scale(columns[c]);
    }
    sort_attributions(e.attributions);
    return result;
}

Explanation explain(const OutcomePredictor& model, const ProcessDefinition& def, const FeatureVector& instance,
                    const ExplainConfig& config, std::string instance_id) {
    return explain_detailed(model, def, instance, config, std::move(instance_id)).explanation;
}

FeatureVector synthesize_instance(const ProcessDefinition& def, const FeatureSchema& schema,
                                  const AttributeAssignment& attrs, std::uint64_t seed) {
    for (const auto& name : def.attribute_names())
        if (!attrs.count(name)) throw Error(ErrorKind::MissingAttribute, name);
    Rng rng(seed, 1);
    Trace trace = execute_case(def, attrs, rng);
    return encode_trace(schema, trace);
}

std::vector<std::string> top_features(const Explanation& e, std::optional<std::size_t> k) {
    std::size_t count = std::min(k.value_or(e.attributions.size()), e.attributions.size());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(e.attributions[i].feature);
    return out;
}

std::string explanation_to_json(const Explanation& e, std::optional<std::size_t> top_k) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(e.config.mode));
    j["instance_id"] = e.instance_id;
    j["prediction"] = e.prediction;
    nlohmann::ordered_json attributions = nlohmann::ordered_json::array();
    std::size_t count = std::min(top_k.value_or(e.attributions.size()), e.attributions.size());
    for (std::size_t i = 0; i < count; ++i) {
        const Attribution& a = e.attributions[i];
        attributions.push_back({{"feature", a.feature}, {"weight", a.weight}, {"raw_weight", a.raw_weight}});
    }
    j["attributions"] = std::move(attributions);
    j["intercept"] = e.intercept;
    j["fidelity_r2"] = e.fidelity_r2;
    const ExplainConfig& c = e.config;
    j["config"] = {{"strategy", std::string(to_string(c.strategy))},
                   {"n_samples", c.n_samples},
                   {"spread", c.spread},
                   {"flip_p", c.flip_p},
                   {"kernel_width", e.kernel_width},
                   {"ridge_lambda", c.ridge_lambda},
                   {"seed", c.seed},
                   {"collapse_derived", c.collapse_derived}};
    return j.dump(2) + "\n";
}

}  // namespace procex
