#pragma once

// Process-definition model: the textual DSL, structural validation, guard
// evaluation, and the analyses that read causal structure and feasible
// activity sets off the graph.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "procex/errors.hpp"

namespace procex {

using AttributeAssignment = std::map<std::string, double, std::less<>>;

/// One presence flag per activity, aligned to `ProcessDefinition::activity_names()`.
using IndicatorVector = std::vector<std::uint8_t>;

enum class Label { Positive, Negative };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct AttributeDecl {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;

    bool operator==(const AttributeDecl&) const = default;
};

enum class CompareOp { Less, LessEqual, Greater, GreaterEqual, Equal };

std::string_view to_string(CompareOp op);

/// Guard expression tree. `Group` records explicit parentheses so that the
/// serialized form reproduces the parsed tree exactly.
struct GuardExpr {
    enum class Kind { Compare, And, Or, Not, Group };

    Kind kind = Kind::Compare;
    std::string attribute;
    CompareOp op = CompareOp::Less;
    double constant = 0.0;
    std::vector<GuardExpr> children;

    static GuardExpr compare(std::string attribute, CompareOp op, double constant);
    static GuardExpr all_of(std::vector<GuardExpr> terms);
    static GuardExpr any_of(std::vector<GuardExpr> terms);
    static GuardExpr negate(GuardExpr operand);
    static GuardExpr group(GuardExpr inner);

    bool operator==(const GuardExpr&) const = default;
};

struct Activity {
    std::string successor;
    bool operator==(const Activity&) const = default;
};

struct XorBranch {
    GuardExpr guard;
    std::string target;
    bool operator==(const XorBranch&) const = default;
};

struct XorGateway {
    std::vector<XorBranch> branches;
    std::string otherwise;
    bool operator==(const XorGateway&) const = default;
};

struct ChoiceBranch {
    double probability = 0.0;
    std::string target;
    bool operator==(const ChoiceBranch&) const = default;
};

struct ChoiceGateway {
    std::vector<ChoiceBranch> branches;
    bool operator==(const ChoiceGateway&) const = default;
};

struct EndNode {
    Label label = Label::Positive;
    bool operator==(const EndNode&) const = default;
};

struct Node {
    std::string name;
    std::variant<Activity, XorGateway, ChoiceGateway, EndNode> body;

    bool is_activity() const { return std::holds_alternative<Activity>(body); }
    bool is_end() const { return std::holds_alternative<EndNode>(body); }
    /// Successor names in branch order (xor: whens then otherwise).
    std::vector<std::string> targets() const;

    bool operator==(const Node&) const = default;
};

struct ProcessDefinition {
    std::string name;
    std::vector<AttributeDecl> attributes;
    std::string start;
    std::vector<Node> nodes;

    const Node* find_node(std::string_view node_name) const;
    const AttributeDecl* find_attribute(std::string_view attr_name) const;

    /// Lexicographically sorted; independent of declaration order.
    std::vector<std::string> activity_names() const;
    std::vector<std::string> attribute_names() const;

    bool operator==(const ProcessDefinition&) const = default;
};

struct Finding {
    ErrorKind rule;
    std::string subject;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

struct CausalEdge {
    std::string source;  // attribute feature
    std::string target;  // activity indicator feature
    auto operator<=>(const CausalEdge&) const = default;
};

/// Edges kept sorted (lexicographic by source, then target).
struct CausalityGraph {
    std::set<CausalEdge> edges;

    bool contains(std::string_view source, std::string_view target) const;
    bool operator==(const CausalityGraph&) const = default;
};

/// Syntax-only parse; structural rules are left to `validate`.
ProcessDefinition parse_process_unchecked(std::string_view text);

/// Parses and validates; throws the first finding as an `Error`.
ProcessDefinition parse_process(std::string_view text);

ProcessDefinition load_process_file(const std::string& path);

/// Canonical DSL text, one declaration per line.
std::string serialize(const ProcessDefinition& def);
std::string serialize(const GuardExpr& guard);

ValidationReport validate(const ProcessDefinition& def);

/// Throws `MissingAttribute` when the guard reads an attribute absent from `attrs`.
bool eval_guard(const GuardExpr& guard, const AttributeAssignment& attrs);

/// Attribute names read by the guard, sorted and deduplicated.
std::set<std::string> guard_attributes(const GuardExpr& guard);

CausalityGraph derive_causality_graph(const ProcessDefinition& def);

/// Feasible indicator vectors over all root-to-end paths: xor branches fixed
/// by the guards under `attrs`, choice branches free.
std::set<IndicatorVector> reachable_indicators(const ProcessDefinition& def,
                                               const AttributeAssignment& attrs);

}  // namespace procex
