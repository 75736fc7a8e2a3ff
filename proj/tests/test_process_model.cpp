#include "doctest.h"

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "procex/process_model.hpp"
#include "random_process.hpp"
#include "sweep_oracle.hpp"

using namespace procex;
using procex::testing::error_kind;

namespace {

std::size_t count_kind(const ProcessDefinition& def, std::size_t variant_index) {
    return static_cast<std::size_t>(std::count_if(def.nodes.begin(), def.nodes.end(),
                                                  [&](const Node& n) { return n.body.index() == variant_index; }));
}

const char* kMinimal = "process p\nattr a: numeric in [0,1]\nstart -> x\nend x label POSITIVE";

std::vector<ErrorKind> rules_of(const std::string& text) {
    std::vector<ErrorKind> out;
    for (const auto& f : validate(parse_process_unchecked(text)).findings) out.push_back(f.rule);
    return out;
}

bool has_rule(const std::string& text, ErrorKind kind) {
    auto rules = rules_of(text);
    return std::find(rules.begin(), rules.end(), kind) != rules.end();
}

}  // namespace

TEST_CASE("loan fixture parses with the expected node counts") {
    ProcessDefinition def = testing::loan();
    CHECK(def.name == "loan_approval");
    CHECK(def.attributes.size() == 2);
    CHECK(count_kind(def, 0) == 3);  // activities
    CHECK(count_kind(def, 1) == 1);  // xor gateways
    CHECK(count_kind(def, 2) == 2);  // choice gateways
    CHECK(count_kind(def, 3) == 2);  // end nodes
    CHECK(def.activity_names() == std::vector<std::string>{"skilled_agent_review", "standard_review", "submit_application"});
    CHECK(validate(def).ok());
}

TEST_CASE("minimal process has no activities") {
    ProcessDefinition def = parse_process(kMinimal);
    CHECK(def.activity_names().empty());
    CHECK(def.start == "x");
    CHECK(validate(def).ok());
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_process("process p\nattr a: numeric in [0 1]\nstart -> x\nend x label POSITIVE");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.kind() == ErrorKind::SyntaxError);
        CHECK(e.line() == 2);
        CHECK(e.col() == 23);
        CHECK(e.expected() == "','");
    }
    CHECK(error_kind([] { parse_process("process p\nstart -> x\nend x label MAYBE"); }) == ErrorKind::SyntaxError);
    CHECK(error_kind([] { parse_process("process p\nactivity start -> x"); }) == ErrorKind::SyntaxError);
    CHECK(error_kind([] { parse_process(""); }) == ErrorKind::SyntaxError);
    CHECK(error_kind([] {
              parse_process("process p\nattr a: numeric in [0,1]\nstart -> g\n"
                            "gateway g { when a < -> x otherwise -> x }\nend x label POSITIVE");
          }) == ErrorKind::SyntaxError);
}

TEST_CASE("validation rules") {
    const std::string base = "process p\nattr score: numeric in [0, 100]\nstart -> g\n";

    SUBCASE("unknown target") {
        std::string text = base + "gateway g { when score < 10 -> missing_node otherwise -> x }\nend x label POSITIVE";
        auto findings = validate(parse_process_unchecked(text)).findings;
        REQUIRE(findings.size() == 1);
        CHECK(findings[0].rule == ErrorKind::UnknownTarget);
        CHECK(findings[0].subject == "missing_node");
        CHECK(error_kind([&] { parse_process(text); }) == ErrorKind::UnknownTarget);
    }
    SUBCASE("bad probability sum") {
        std::string text = base + "gateway g choice { 0.5 -> x 0.6 -> y }\nend x label POSITIVE\nend y label NEGATIVE";
        CHECK(rules_of(text) == std::vector<ErrorKind>{ErrorKind::BadProbabilitySum});
        CHECK(error_kind([&] { parse_process(text); }) == ErrorKind::BadProbabilitySum);
    }
    SUBCASE("probability sum within tolerance") {
        CHECK(rules_of(base + "gateway g choice { 0.1 -> x 0.2 -> y 0.7 -> x }\nend x label POSITIVE\nend y label NEGATIVE")
                  .empty());
    }
    SUBCASE("bad probability") {
        CHECK(has_rule(base + "gateway g choice { 0 -> x 1 -> y }\nend x label POSITIVE\nend y label NEGATIVE",
                       ErrorKind::BadProbability));
    }
    SUBCASE("unreachable node") {
        std::string text = base + "gateway g { when score < 10 -> x otherwise -> x }\nactivity orphan -> x\nend x label POSITIVE";
        CHECK(rules_of(text) == std::vector<ErrorKind>{ErrorKind::UnreachableNode});
        CHECK(error_kind([&] { parse_process(text); }) == ErrorKind::UnreachableNode);
    }
    SUBCASE("cycle") {
        std::string text = base + "gateway g { when score < 10 -> a otherwise -> x }\nactivity a -> b\nactivity b -> g\nend x label POSITIVE";
        CHECK(has_rule(text, ErrorKind::CyclicGraph));
        CHECK(error_kind([&] { parse_process(text); }) == ErrorKind::CyclicGraph);
    }
    SUBCASE("duplicate names") {
        CHECK(has_rule(base + "gateway g { when score < 10 -> x otherwise -> x }\nend x label POSITIVE\nend x label NEGATIVE",
                       ErrorKind::DuplicateName));
        CHECK(has_rule("process p\nattr a: numeric in [0,1]\nattr a: numeric in [0,2]\nstart -> x\nend x label POSITIVE",
                       ErrorKind::DuplicateName));
    }
    SUBCASE("unknown attribute in guard") {
        std::string text = base + "gateway g { when income > 5 -> x otherwise -> x }\nend x label POSITIVE";
        CHECK(rules_of(text) == std::vector<ErrorKind>{ErrorKind::UnknownAttribute});
    }
    SUBCASE("bad bounds") {
        CHECK(has_rule("process p\nattr a: numeric in [2, 1]\nstart -> x\nend x label POSITIVE", ErrorKind::BadBounds));
        CHECK(has_rule("process p\nattr a: numeric in [1, 1]\nstart -> x\nend x label POSITIVE", ErrorKind::BadBounds));
    }
    SUBCASE("invalid name") {
        CHECK(has_rule("process p\nattr Score: numeric in [0, 1]\nstart -> x\nend x label POSITIVE", ErrorKind::InvalidName));
    }
    SUBCASE("no end node") {
        CHECK(has_rule("process p\nstart -> a\nactivity a -> b\nactivity b -> c", ErrorKind::NoEndNode));
    }
    SUBCASE("loan fixture has no findings") { CHECK(validate(testing::loan()).ok()); }
}

TEST_CASE("guard evaluation") {
    ProcessDefinition def = testing::loan();
    const auto& route = std::get<XorGateway>(def.find_node("route")->body);
    const GuardExpr& guard = route.branches.at(0).guard;
    CHECK(eval_guard(guard, {{"credit_score", 580}, {"loan_amount", 300000}}));
    CHECK_FALSE(eval_guard(guard, {{"credit_score", 700}, {"loan_amount", 300000}}));
    CHECK(error_kind([&] { eval_guard(guard, {{"credit_score", 580}}); }) == ErrorKind::MissingAttribute);
    CHECK(guard_attributes(guard) == std::set<std::string>{"credit_score", "loan_amount"});

    GuardExpr not_less = GuardExpr::negate(GuardExpr::group(GuardExpr::compare("a", CompareOp::Less, 0.5)));
    CHECK(eval_guard(not_less, {{"a", 0.5}}));
    CHECK(serialize(not_less) == "!(a < 0.5)");

    GuardExpr eq = GuardExpr::compare("a", CompareOp::Equal, 0.25);
    CHECK(eval_guard(eq, {{"a", 0.25}}));
    CHECK_FALSE(eval_guard(eq, {{"a", 0.2500001}}));
}

TEST_CASE("guards obey De Morgan over random assignments") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const CompareOp ops[] = {CompareOp::Less, CompareOp::LessEqual, CompareOp::Greater, CompareOp::GreaterEqual,
                             CompareOp::Equal};
    for (int i = 0; i < 1000; ++i) {
        GuardExpr a = GuardExpr::compare("x", ops[gen() % 5], std::round(unit(gen) * 10) / 10);
        GuardExpr b = GuardExpr::compare("y", ops[gen() % 5], std::round(unit(gen) * 10) / 10);
        GuardExpr lhs = GuardExpr::negate(GuardExpr::group(GuardExpr::all_of({a, b})));
        GuardExpr rhs = GuardExpr::any_of({GuardExpr::negate(a), GuardExpr::negate(b)});
        AttributeAssignment attrs{{"x", std::round(unit(gen) * 10) / 10}, {"y", std::round(unit(gen) * 10) / 10}};
        REQUIRE(eval_guard(lhs, attrs) == eval_guard(rhs, attrs));
    }
}

TEST_CASE("operator precedence: && binds tighter than ||") {
    std::string text = "process p\nattr a: numeric in [0, 1]\nattr b: numeric in [0, 1]\nattr c: numeric in [0, 1]\n"
                       "start -> g\ngateway g { when a < 0.5 || b < 0.5 && c < 0.5 -> x otherwise -> y }\n"
                       "end x label POSITIVE\nend y label NEGATIVE";
    ProcessDefinition def = parse_process(text);
    const GuardExpr& g = std::get<XorGateway>(def.find_node("g")->body).branches[0].guard;
    CHECK(g.kind == GuardExpr::Kind::Or);
    CHECK(eval_guard(g, {{"a", 0.1}, {"b", 0.9}, {"c", 0.9}}));
    CHECK_FALSE(eval_guard(g, {{"a", 0.9}, {"b", 0.1}, {"c", 0.9}}));
}

TEST_CASE("serialization round-trips") {
    SUBCASE("loan fixture") {
        ProcessDefinition def = testing::loan();
        std::string once = serialize(def);
        CHECK(parse_process(once) == def);
        CHECK(serialize(parse_process(once)) == once);
    }
    SUBCASE("random processes") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            CAPTURE(seed);
            std::string text = testing::random_process_text(seed);
            ProcessDefinition def = parse_process(text);
            std::string once = serialize(def);
            REQUIRE(parse_process(once) == def);
            REQUIRE(serialize(parse_process(once)) == once);
        }
    }
    SUBCASE("comments and exponents") {
        ProcessDefinition def =
            parse_process("# header\nprocess p  # name\nattr a: numeric in [-1e3, 2.5E2]\nstart -> x\nend x label NEGATIVE\n");
        CHECK(def.attributes.at(0).lower == -1000.0);
        CHECK(def.attributes.at(0).upper == 250.0);
        CHECK(parse_process(serialize(def)) == def);
    }
}

TEST_CASE("random process generator stays within its contract") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        CAPTURE(seed);
        ProcessDefinition def = parse_process(testing::random_process_text(seed));
        std::size_t gateways = count_kind(def, 1) + count_kind(def, 2);
        CHECK(gateways <= 6);
        CHECK(def.attributes.size() <= 5);
    }
}

TEST_CASE("causality graph") {
    SUBCASE("loan fixture") {
        CausalityGraph g = derive_causality_graph(testing::loan());
        std::set<CausalEdge> expected{{"credit_score", "skilled_agent_review"},
                                      {"credit_score", "standard_review"},
                                      {"loan_amount", "skilled_agent_review"},
                                      {"loan_amount", "standard_review"}};
        CHECK(g.edges == expected);
        CHECK(g.contains("credit_score", "skilled_agent_review"));
        CHECK_FALSE(g.contains("credit_score", "submit_application"));
    }
    SUBCASE("linear chain has no edges") {
        ProcessDefinition def = parse_process(
            "process p\nattr a: numeric in [0,1]\nstart -> s\nactivity s -> t\nactivity t -> x\nend x label POSITIVE");
        CHECK(derive_causality_graph(def).edges.empty());
    }
    SUBCASE("branches that rejoin immediately cause nothing") {
        ProcessDefinition def = parse_process(
            "process p\nattr q: numeric in [0,1]\nstart -> g\ngateway g { when q < 0.5 -> a otherwise -> a }\n"
            "activity a -> x\nend x label POSITIVE");
        CHECK(derive_causality_graph(def).edges.empty());
    }
    SUBCASE("only the guarded branch's activities are effects") {
        ProcessDefinition def = parse_process(
            "process p\nattr q: numeric in [0,1]\nattr r: numeric in [0,1]\nstart -> g\n"
            "gateway g { when q < 0.5 -> a otherwise -> j }\nactivity a -> j\nactivity j -> x\nend x label POSITIVE");
        CHECK(derive_causality_graph(def).edges == std::set<CausalEdge>{{"q", "a"}});
    }
    SUBCASE("sweep oracle agrees on the loan fixture") {
        ProcessDefinition def = testing::loan();
        std::set<std::pair<std::string, std::string>> derived;
        for (const auto& e : derive_causality_graph(def).edges) derived.emplace(e.source, e.target);
        CHECK(derived == testing::sweep_causality(def));
    }
    SUBCASE("sweep oracle agrees on random processes") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            CAPTURE(seed);
            ProcessDefinition def = parse_process(testing::random_process_text(seed));
            std::set<std::pair<std::string, std::string>> derived;
            for (const auto& e : derive_causality_graph(def).edges) derived.emplace(e.source, e.target);
            CHECK(derived == testing::sweep_causality(def));
        }
    }
}

TEST_CASE("reachable indicator vectors") {
    ProcessDefinition def = testing::loan();
    // order: skilled_agent_review, standard_review, submit_application
    CHECK(reachable_indicators(def, {{"credit_score", 580}, {"loan_amount", 300000}}) ==
          std::set<IndicatorVector>{{1, 0, 1}});
    CHECK(reachable_indicators(def, {{"credit_score", 700}, {"loan_amount", 50000}}) ==
          std::set<IndicatorVector>{{0, 1, 1}});
    CHECK(reachable_indicators(parse_process(kMinimal), {{"a", 0.3}}) == std::set<IndicatorVector>{IndicatorVector{}});

    ProcessDefinition branchy = parse_process(
        "process p\nattr a: numeric in [0,1]\nstart -> c\ngateway c choice { 0.5 -> s 0.5 -> t }\n"
        "activity s -> x\nactivity t -> x\nend x label POSITIVE");
    CHECK(reachable_indicators(branchy, {{"a", 0.0}}) == std::set<IndicatorVector>{{1, 0}, {0, 1}});
}

TEST_CASE("reachable indicator set is never empty and matches path enumeration") {
    std::mt19937_64 gen(99);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CAPTURE(seed);
        ProcessDefinition def = parse_process(testing::random_process_text(seed));
        std::vector<std::string> acts = def.activity_names();
        for (int trial = 0; trial < 10; ++trial) {
            AttributeAssignment attrs;
            for (const auto& a : def.attributes)
                attrs[a.name] = std::uniform_real_distribution<double>(a.lower - 1, a.upper + 1)(gen);
            auto reachable = reachable_indicators(def, attrs);
            REQUIRE_FALSE(reachable.empty());
            std::set<IndicatorVector> oracle;
            for (const auto& path : testing::enumerate_paths(def, attrs)) {
                IndicatorVector v;
                for (const auto& act : acts) v.push_back(path.count(act) ? 1 : 0);
                oracle.insert(v);
            }
            REQUIRE(reachable == oracle);
        }
    }
}
