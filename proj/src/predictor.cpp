#include "procex/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace procex {

using ordered_json = nlohmann::ordered_json;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double LogisticModel::logit(std::span<const double> raw) const {
    if (raw.size() != weights.size())
        throw Error(ErrorKind::SchemaMismatch, "expected " + std::to_string(weights.size()) + " features, got " +
                                                   std::to_string(raw.size()));
    double z = bias;
    for (std::size_t j = 0; j < raw.size(); ++j) z += weights[j] * (raw[j] - scaler.mean[j]) / scaler.scale(j);
    return z;
}

double LogisticModel::predict_proba(std::span<const double> raw) const { return sigmoid(logit(raw)); }

Objective logistic_objective(std::span<const double> weights, double bias, const std::vector<FeatureVector>& rows,
                             std::span<const double> targets, double l2) {
    Objective obj;
    obj.grad_weights.assign(weights.size(), 0.0);
    const double n = static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * rows[i][j];
        // log(1 + e^z) - y·z, stable for large |z|
        obj.loss += std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))) - targets[i] * z;
        double residual = sigmoid(z) - targets[i];
        for (std::size_t j = 0; j < weights.size(); ++j) obj.grad_weights[j] += residual * rows[i][j];
        obj.grad_bias += residual;
    }
    obj.loss /= n;
    obj.grad_bias /= n;
    double penalty = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        obj.grad_weights[j] = obj.grad_weights[j] / n + l2 * weights[j];
        penalty += weights[j] * weights[j];
    }
    obj.loss += 0.5 * l2 * penalty;
    return obj;
}

LogisticModel train(const EventLog& log, const FeatureSchema& schema, const Hyperparams& hp) {
    if (log.traces.empty()) throw Error(ErrorKind::EmptyLog, "training log has no traces");
    if (!(hp.learning_rate > 0.0) || !(hp.l2 >= 0.0) || hp.epochs < 0 || !(hp.tol >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "hyperparameters out of range");

    std::vector<FeatureVector> raw;
    std::vector<double> targets;
    raw.reserve(log.traces.size());
    for (const auto& t : log.traces) {
        raw.push_back(encode_trace(schema, t));
        targets.push_back(t.label == Label::Negative ? 1.0 : 0.0);
    }
    const auto n_negative = static_cast<std::size_t>(std::count(targets.begin(), targets.end(), 1.0));
    if (n_negative == 0 || n_negative == targets.size())
        throw Error(ErrorKind::SingleClassLog, "training log holds a single outcome label");

    LogisticModel model;
    model.feature_schema = schema;
    model.scaler = fit_scaler(raw);
    model.hyperparams = hp;
    model.weights.assign(schema.arity(), 0.0);

    std::vector<FeatureVector> rows;
    rows.reserve(raw.size());
    for (const auto& r : raw) rows.push_back(model.scaler.apply(r));

    TrainMeta& meta = model.train_meta;
    meta.n_cases = rows.size();
    meta.n_negative = n_negative;
    for (int epoch = 0;; ++epoch) {
        Objective obj = logistic_objective(model.weights, model.bias, rows, targets, hp.l2);
        if (!std::isfinite(obj.loss)) throw Error(ErrorKind::Diverged, "loss became non-finite at epoch " +
                                                                           std::to_string(epoch));
        double max_grad = std::fabs(obj.grad_bias);
        for (double g : obj.grad_weights) max_grad = std::max(max_grad, std::fabs(g));
        meta.final_loss = obj.loss;
        meta.final_max_gradient = max_grad;
        meta.epochs_run = epoch;
        if (max_grad < hp.tol) {
            meta.converged = true;
            break;
        }
        if (epoch == hp.epochs) break;
        meta.loss_history.push_back(obj.loss);
        for (std::size_t j = 0; j < model.weights.size(); ++j)
            model.weights[j] -= hp.learning_rate * obj.grad_weights[j];
        model.bias -= hp.learning_rate * obj.grad_bias;
    }
    return model;
}

Metrics evaluate_scores(std::span<const double> scores, const std::vector<bool>& is_negative) {
    if (scores.empty()) throw Error(ErrorKind::EmptyLog, "nothing to evaluate");
    Metrics m;
    m.n = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] >= 0.5;
        if (predicted && is_negative[i]) ++m.true_positive;
        else if (predicted) ++m.false_positive;
        else if (is_negative[i]) ++m.false_negative;
        else ++m.true_negative;
    }
    m.accuracy = static_cast<double>(m.true_positive + m.true_negative) / static_cast<double>(m.n);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double average = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = average;
        i = j + 1;
    }
    const double n_pos = static_cast<double>(m.true_positive + m.false_negative);
    const double n_neg = static_cast<double>(m.n) - n_pos;
    if (n_pos > 0 && n_neg > 0) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < rank.size(); ++i)
            if (is_negative[i]) rank_sum += rank[i];
        m.auc = (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
    }
    return m;
}

Metrics evaluate(const OutcomePredictor& model, const EventLog& log) {
    if (log.traces.empty()) throw Error(ErrorKind::EmptyLog, "evaluation log has no traces");
    std::vector<double> scores;
    std::vector<bool> is_negative;
    for (const auto& t : log.traces) {
        scores.push_back(model.predict_proba(encode_trace(model.schema(), t)));
        is_negative.push_back(t.label == Label::Negative);
    }
    return evaluate_scores(scores, is_negative);
}

std::pair<EventLog, EventLog> split_log(const EventLog& log, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw Error(ErrorKind::InvalidArgument, "test fraction must lie in [0, 1)");
    std::vector<std::size_t> order(log.traces.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed, 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(order.size()) * test_fraction));

    EventLog train_part, test_part;
    for (EventLog* part : {&train_part, &test_part}) {
        part->process_name = log.process_name;
        part->provenance = log.provenance;
    }
    for (std::size_t k = 0; k < order.size(); ++k)
        (k < n_test ? test_part : train_part).traces.push_back(log.traces[order[k]]);
    auto by_id = [](const Trace& a, const Trace& b) { return a.case_id < b.case_id; };
    std::sort(train_part.traces.begin(), train_part.traces.end(), by_id);
    std::sort(test_part.traces.begin(), test_part.traces.end(), by_id);
    return {std::move(train_part), std::move(test_part)};
}

// --- model file ---

std::string model_to_json(const LogisticModel& model) {
    ordered_json j;
    ordered_json features = ordered_json::array();
    for (const auto& f : model.feature_schema.features) {
        ordered_json fj;
        fj["name"] = f.name;
        fj["kind"] = f.kind == FeatureKind::Numeric ? "numeric" : "binary";
        if (f.kind == FeatureKind::Numeric) {
            fj["lower"] = f.lower;
            fj["upper"] = f.upper;
        }
        features.push_back(std::move(fj));
    }
    j["schema"] = {{"process_name", model.feature_schema.process_name},
                   {"hash", model.feature_schema.hash},
                   {"features", std::move(features)}};
    j["scaler"] = {{"mean", model.scaler.mean}, {"std", model.scaler.stddev}};
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    const Hyperparams& hp = model.hyperparams;
    j["hyperparams"] = {{"learning_rate", hp.learning_rate},
                        {"l2", hp.l2},
                        {"epochs", hp.epochs},
                        {"tol", hp.tol},
                        {"seed", hp.seed}};
    const TrainMeta& meta = model.train_meta;
    j["train_meta"] = {{"n_cases", meta.n_cases},
                       {"n_negative", meta.n_negative},
                       {"epochs_run", meta.epochs_run},
                       {"final_loss", meta.final_loss},
                       {"final_max_gradient", meta.final_max_gradient},
                       {"converged", meta.converged}};
    return j.dump(2) + "\n";
}

LogisticModel model_from_json(std::string_view text, const ProcessDefinition& def) {
    FeatureSchema expected = build_schema(def);
    try {
        auto j = nlohmann::json::parse(text);
        LogisticModel model;
        const auto& sj = j.at("schema");
        std::string hash = sj.at("hash").get<std::string>();
        if (hash != expected.hash)
            throw Error(ErrorKind::SchemaMismatch, "model schema " + hash + " does not match process schema " +
                                                       expected.hash);
        model.feature_schema = expected;
        model.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
        model.scaler.stddev = j.at("scaler").at("std").get<std::vector<double>>();
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
        const auto& hj = j.at("hyperparams");
        model.hyperparams.learning_rate = hj.at("learning_rate").get<double>();
        model.hyperparams.l2 = hj.at("l2").get<double>();
        model.hyperparams.epochs = hj.at("epochs").get<int>();
        model.hyperparams.tol = hj.at("tol").get<double>();
        model.hyperparams.seed = hj.at("seed").get<std::uint64_t>();
        const auto& mj = j.at("train_meta");
        model.train_meta.n_cases = mj.at("n_cases").get<std::size_t>();
        model.train_meta.n_negative = mj.at("n_negative").get<std::size_t>();
        model.train_meta.epochs_run = mj.at("epochs_run").get<int>();
        model.train_meta.final_loss = mj.at("final_loss").get<double>();
        model.train_meta.final_max_gradient = mj.at("final_max_gradient").get<double>();
        model.train_meta.converged = mj.at("converged").get<bool>();
        const std::size_t d = expected.arity();
        if (model.weights.size() != d || model.scaler.mean.size() != d || model.scaler.stddev.size() != d)
            throw Error(ErrorKind::SchemaMismatch, "model arrays do not match schema arity");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::FormatError, std::string("model file: ") + e.what());
    }
}

void save_model(const LogisticModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << model_to_json(model);
}

LogisticModel load_model(const std::string& path, const ProcessDefinition& def) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str(), def);
}

}  // namespace procex
