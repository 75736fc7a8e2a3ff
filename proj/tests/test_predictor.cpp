#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "procex/features.hpp"
#include "procex/predictor.hpp"
#include "procex/simulation.hpp"

using namespace procex;
using procex::testing::error_kind;

namespace {

ProcessDefinition one_attr() {
    return parse_process("process p\nattr x: numeric in [-1, 1]\nstart -> e\nend e label POSITIVE");
}

EventLog two_points() {
    EventLog log;
    log.process_name = "p";
    log.traces.push_back({"a", {{"x", -1.0}}, {}, Label::Positive});
    log.traces.push_back({"b", {{"x", 1.0}}, {}, Label::Negative});
    return log;
}

struct LoanFixture {
    ProcessDefinition def = testing::loan();
    FeatureSchema schema = build_schema(def);
    EventLog log = generate_log(def, {{}, 0.0, 10000, 42});
};

const LoanFixture& loan_fixture() {
    static const LoanFixture f;
    return f;
}

}  // namespace

TEST_CASE("separable two-point set") {
    ProcessDefinition def = one_attr();
    Hyperparams hp;
    hp.l2 = 0.0;
    LogisticModel m = train(two_points(), build_schema(def), hp);
    CHECK(m.weights.at(0) > 0.0);
    CHECK(evaluate(m, two_points()).accuracy == 1.0);
    CHECK(m.predict_proba(FeatureVector{1.0}) > 0.5);
    CHECK(m.predict_proba(FeatureVector{-1.0}) < 0.5);
}

TEST_CASE("training input checks") {
    FeatureSchema s = build_schema(one_attr());
    EventLog empty;
    CHECK(error_kind([&] { train(empty, s); }) == ErrorKind::EmptyLog);
    EventLog single = two_points();
    single.traces[1].label = Label::Positive;
    CHECK(error_kind([&] { train(single, s); }) == ErrorKind::SingleClassLog);
    Hyperparams bad;
    bad.learning_rate = -1.0;
    CHECK(error_kind([&] { train(two_points(), s, bad); }) == ErrorKind::InvalidArgument);
    Hyperparams wild;
    wild.learning_rate = 10.0;
    wild.l2 = 10.0;
    CHECK(error_kind([&] { train(two_points(), s, wild); }) == ErrorKind::Diverged);
}

TEST_CASE("loan model accuracy and behaviour") {
    const LoanFixture& f = loan_fixture();
    auto [train_part, test_part] = split_log(f.log, 0.2, 42);
    LogisticModel m = train(train_part, f.schema);
    Metrics test = evaluate(m, test_part);
    CHECK(test.n == 2000);
    CHECK(test.accuracy >= 0.85);
    CHECK(test.accuracy <= 0.92);
    CHECK(test.true_positive + test.false_positive + test.true_negative + test.false_negative == 2000);
    CHECK(test.auc > 0.8);

    // A rejected skilled-path case is predicted NEGATIVE.
    CHECK(m.predict_proba(FeatureVector{580, 300000, 1, 0, 1}) > 0.5);
    CHECK(m.predict_proba(FeatureVector{700, 50000, 0, 1, 1}) < 0.5);

    // Monotone in every feature along the sign of its weight.
    FeatureVector base{600, 250000, 1, 0, 1};
    for (std::size_t i = 0; i < 2; ++i) {
        FeatureVector up = base;
        up[i] += 10.0;
        if (m.weights[i] > 0) CHECK(m.predict_proba(up) > m.predict_proba(base));
        if (m.weights[i] < 0) CHECK(m.predict_proba(up) < m.predict_proba(base));
    }
    CHECK(error_kind([&] { m.predict_proba(FeatureVector{1, 2}); }) == ErrorKind::SchemaMismatch);

    // Loss never increases at the default learning rate.
    const auto& h = m.train_meta.loss_history;
    REQUIRE(h.size() >= 2);
    for (std::size_t i = 1; i < h.size(); ++i) REQUIRE(h[i] <= h[i - 1] + 1e-15);
}

TEST_CASE("zero model predicts one half") {
    LogisticModel m;
    m.feature_schema = build_schema(testing::loan());
    m.scaler = {std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)};
    m.weights.assign(5, 0.0);
    CHECK(m.predict_proba(FeatureVector{580, 300000, 1, 0, 1}) == 0.5);
    CHECK(m.predict_proba(FeatureVector{300, 1000, 0, 0, 0}) == 0.5);
}

TEST_CASE("strong regularization shrinks weights to the base rate") {
    const LoanFixture& f = loan_fixture();
    Hyperparams hp;
    hp.l2 = 100.0;
    hp.learning_rate = 0.01;
    hp.epochs = 5000;
    LogisticModel m = train(f.log, f.schema, hp);
    for (double w : m.weights) CHECK(std::fabs(w) < 0.01);
    double negatives = 0;
    for (const auto& t : f.log.traces) negatives += t.label == Label::Negative;
    double base_rate = negatives / static_cast<double>(f.log.traces.size());
    CHECK(std::fabs(m.predict_proba(FeatureVector{580, 300000, 1, 0, 1}) - base_rate) < 0.01);
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int instance = 0; instance < 20; ++instance) {
        std::size_t n = 3 + gen() % 6, d = 1 + gen() % 4;
        std::vector<FeatureVector> rows(n, FeatureVector(d));
        std::vector<double> targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (double& x : rows[i]) x = nd(gen);
            targets[i] = static_cast<double>(gen() % 2);
        }
        std::vector<double> w(d);
        for (double& x : w) x = nd(gen);
        double b = nd(gen), l2 = std::fabs(nd(gen)) * 0.1;
        Objective obj = logistic_objective(w, b, rows, targets, l2);
        const double h = 1e-5;
        auto rel = [](double a, double e) { return std::fabs(a - e) / std::max(1e-8, std::fabs(a) + std::fabs(e)); };
        for (std::size_t k = 0; k < d; ++k) {
            std::vector<double> plus = w, minus = w;
            plus[k] += h;
            minus[k] -= h;
            double fd = (logistic_objective(plus, b, rows, targets, l2).loss -
                         logistic_objective(minus, b, rows, targets, l2).loss) / (2 * h);
            REQUIRE(rel(obj.grad_weights[k], fd) < 1e-6);
        }
        double fd_b = (logistic_objective(w, b + h, rows, targets, l2).loss -
                       logistic_objective(w, b - h, rows, targets, l2).loss) / (2 * h);
        REQUIRE(rel(obj.grad_bias, fd_b) < 1e-6);
    }
}

TEST_CASE("sigmoid is stable at the extremes") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-1000.0) >= 0.0);
    CHECK(sigmoid(1000.0) <= 1.0);
    CHECK(std::isfinite(sigmoid(-1000.0)));
    CHECK(sigmoid(-40.0) < sigmoid(-39.0));
    CHECK(sigmoid(-40.0) > 0.0);
}

TEST_CASE("evaluation metrics") {
    std::vector<double> perfect{0.9, 0.8, 0.2, 0.1};
    std::vector<bool> truth{true, true, false, false};
    Metrics m = evaluate_scores(perfect, truth);
    CHECK(m.accuracy == 1.0);
    CHECK(m.auc == 1.0);
    CHECK(m.true_positive == 2);
    CHECK(m.true_negative == 2);

    std::vector<double> flat(4, 0.5);
    CHECK(evaluate_scores(flat, truth).auc == 0.5);

    std::vector<double> inverted{0.1, 0.2, 0.8, 0.9};
    Metrics inv = evaluate_scores(inverted, truth);
    CHECK(inv.auc == 0.0);
    CHECK(inv.false_positive == 2);
    CHECK(inv.false_negative == 2);

    CHECK(error_kind([] { evaluate_scores(std::vector<double>{}, std::vector<bool>{}); }) == ErrorKind::EmptyLog);
}

TEST_CASE("split is a deterministic sorted partition") {
    EventLog log = generate_log(testing::loan(), {{}, 0.0, 101, 3});
    auto [a, b] = split_log(log, 0.2, 9);
    CHECK(b.traces.size() == 20);
    CHECK(a.traces.size() == 81);
    std::set<std::string> ids;
    for (const auto* part : {&a, &b}) {
        for (std::size_t i = 1; i < part->traces.size(); ++i)
            CHECK(part->traces[i - 1].case_id < part->traces[i].case_id);
        for (const auto& t : part->traces) ids.insert(t.case_id);
    }
    CHECK(ids.size() == 101);
    auto [a2, b2] = split_log(log, 0.2, 9);
    CHECK(b2.traces == b.traces);
    auto [a3, b3] = split_log(log, 0.2, 10);
    CHECK(b3.traces != b.traces);
    CHECK(split_log(log, 0.0, 1).second.traces.empty());
    CHECK(error_kind([&] { split_log(log, 1.0, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("model serialization") {
    const LoanFixture& f = loan_fixture();
    EventLog small = generate_log(f.def, {{}, 0.0, 500, 1});
    Hyperparams hp;
    hp.epochs = 200;
    LogisticModel m = train(small, f.schema, hp);
    std::string text = model_to_json(m);
    CHECK(text == model_to_json(train(small, f.schema, hp)));

    LogisticModel back = model_from_json(text, f.def);
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.scaler == m.scaler);
    CHECK(back.hyperparams == m.hyperparams);
    CHECK(model_to_json(back) == text);
    FeatureVector probe{612.5, 123456.0, 0, 1, 1};
    CHECK(back.predict_proba(probe) == m.predict_proba(probe));

    ProcessDefinition other = parse_process(
        "process loan_approval\nattr credit_score: numeric in [300, 850]\nstart -> submit_application\n"
        "activity submit_application -> e\nend e label POSITIVE");
    CHECK(error_kind([&] { model_from_json(text, other); }) == ErrorKind::SchemaMismatch);
    CHECK(error_kind([&] { model_from_json("{not json", f.def); }) == ErrorKind::FormatError);
    CHECK(error_kind([&] { model_from_json("{}", f.def); }) == ErrorKind::FormatError);
}
