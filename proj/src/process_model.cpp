#include "procex/process_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace procex {

namespace {

constexpr std::array kKeywords = {
    "process", "attr",    "numeric", "in",    "start",    "activity", "gateway",
    "when",    "otherwise", "choice", "end",  "label",    "POSITIVE", "NEGATIVE",
};

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool is_identifier(std::string_view word) {
    if (word.empty()) return false;
    auto head = static_cast<unsigned char>(word.front());
    if (!(std::isalpha(head) || head == '_')) return false;
    return std::all_of(word.begin() + 1, word.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_';
    });
}

bool is_attribute_name(std::string_view word) {
    if (word.empty()) return false;
    char head = word.front();
    if (!((head >= 'a' && head <= 'z') || head == '_')) return false;
    return std::all_of(word.begin() + 1, word.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

// --- lexing ---

enum class Tok {
    Ident, Number, Arrow, LBrace, RBrace, LBracket, RBracket, LParen, RParen,
    Colon, Comma, AndAnd, OrOr, Bang, Less, LessEqual, Greater, GreaterEqual, EqualEqual, Eof,
};

struct Token {
    Tok type;
    std::string text;
    double number = 0.0;
    std::size_t line = 1;
    std::size_t col = 1;
};

std::string describe(const Token& tok) {
    if (tok.type == Tok::Eof) return "end of input";
    return "'" + tok.text + "'";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token tok{Tok::Eof, "", 0.0, line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back(tok);
                return out;
            }
            char c = src_[pos_];
            char next = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
            auto uc = static_cast<unsigned char>(c);
            if (std::isalpha(uc) || c == '_') {
                std::size_t begin = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                tok.type = Tok::Ident;
                tok.text = std::string(src_.substr(begin, pos_ - begin));
            } else if (std::isdigit(uc) || ((c == '-' || c == '+' || c == '.') &&
                                            (std::isdigit(static_cast<unsigned char>(next)) || next == '.'))) {
                lex_number(tok);
            } else if (c == '-' && next == '>') {
                symbol(tok, Tok::Arrow, 2);
            } else if (c == '&' && next == '&') {
                symbol(tok, Tok::AndAnd, 2);
            } else if (c == '|' && next == '|') {
                symbol(tok, Tok::OrOr, 2);
            } else if (c == '<' && next == '=') {
                symbol(tok, Tok::LessEqual, 2);
            } else if (c == '>' && next == '=') {
                symbol(tok, Tok::GreaterEqual, 2);
            } else if (c == '=' && next == '=') {
                symbol(tok, Tok::EqualEqual, 2);
            } else {
                switch (c) {
                    case '{': symbol(tok, Tok::LBrace, 1); break;
                    case '}': symbol(tok, Tok::RBrace, 1); break;
                    case '[': symbol(tok, Tok::LBracket, 1); break;
                    case ']': symbol(tok, Tok::RBracket, 1); break;
                    case '(': symbol(tok, Tok::LParen, 1); break;
                    case ')': symbol(tok, Tok::RParen, 1); break;
                    case ':': symbol(tok, Tok::Colon, 1); break;
                    case ',': symbol(tok, Tok::Comma, 1); break;
                    case '!': symbol(tok, Tok::Bang, 1); break;
                    case '<': symbol(tok, Tok::Less, 1); break;
                    case '>': symbol(tok, Tok::Greater, 1); break;
                    default:
                        throw SyntaxError(line_, col_, "token", "'" + std::string(1, c) + "'");
                }
            }
            out.push_back(std::move(tok));
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    void symbol(Token& tok, Tok type, std::size_t width) {
        tok.type = type;
        tok.text = std::string(src_.substr(pos_, width));
        for (std::size_t i = 0; i < width; ++i) advance();
    }

    void lex_number(Token& tok) {
        std::size_t begin = pos_;
        auto digit_at = [&](std::size_t i) {
            return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
        };
        if (src_[pos_] == '-' || src_[pos_] == '+') advance();
        while (digit_at(pos_)) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (digit_at(pos_)) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            std::size_t save_col = col_;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
            if (!digit_at(pos_)) {
                pos_ = save;
                col_ = save_col;
            }
            while (digit_at(pos_)) advance();
        }
        tok.type = Tok::Number;
        tok.text = std::string(src_.substr(begin, pos_ - begin));
        std::string_view digits = tok.text;
        if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tok.number);
        if (ec != std::errc() || ptr != digits.data() + digits.size())
            throw SyntaxError(tok.line, tok.col, "number", "'" + tok.text + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

// --- parsing ---

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ProcessDefinition process() {
        ProcessDefinition def;
        expect_keyword("process");
        def.name = identifier("process name");
        bool have_start = false;
        while (peek().type != Tok::Eof) {
            const Token& tok = peek();
            if (tok.type != Tok::Ident) fail("declaration");
            if (tok.text == "attr") {
                def.attributes.push_back(attribute());
            } else if (tok.text == "start") {
                if (have_start) fail("a single start declaration");
                next();
                expect(Tok::Arrow, "'->'");
                def.start = identifier("start node name");
                have_start = true;
            } else if (tok.text == "activity") {
                next();
                Node node;
                node.name = identifier("activity name");
                expect(Tok::Arrow, "'->'");
                node.body = Activity{identifier("successor node name")};
                def.nodes.push_back(std::move(node));
            } else if (tok.text == "gateway") {
                def.nodes.push_back(gateway());
            } else if (tok.text == "end") {
                next();
                Node node;
                node.name = identifier("end node name");
                expect_keyword("label");
                const Token& lab = peek();
                if (lab.type != Tok::Ident || (lab.text != "POSITIVE" && lab.text != "NEGATIVE"))
                    fail("POSITIVE or NEGATIVE");
                node.body = EndNode{parse_label(next().text)};
                def.nodes.push_back(std::move(node));
            } else {
                fail("declaration (attr, start, activity, gateway, end)");
            }
        }
        if (!have_start) fail("start declaration");
        return def;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() {
        const Token& tok = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return tok;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& tok = peek();
        throw SyntaxError(tok.line, tok.col, expected, describe(tok));
    }

    const Token& expect(Tok type, const std::string& what) {
        if (peek().type != type) fail(what);
        return next();
    }

    bool at_keyword(std::string_view word) const {
        return peek().type == Tok::Ident && peek().text == word;
    }

    void expect_keyword(std::string_view word) {
        if (!at_keyword(word)) fail("'" + std::string(word) + "'");
        next();
    }

    std::string identifier(const std::string& what) {
        if (peek().type != Tok::Ident || is_keyword(peek().text)) fail(what);
        return next().text;
    }

    double number(const std::string& what) { return expect(Tok::Number, what).number; }

    AttributeDecl attribute() {
        expect_keyword("attr");
        AttributeDecl decl;
        decl.name = identifier("attribute name");
        expect(Tok::Colon, "':'");
        expect_keyword("numeric");
        expect_keyword("in");
        expect(Tok::LBracket, "'['");
        decl.lower = number("lower bound");
        expect(Tok::Comma, "','");
        decl.upper = number("upper bound");
        expect(Tok::RBracket, "']'");
        return decl;
    }

    Node gateway() {
        expect_keyword("gateway");
        Node node;
        node.name = identifier("gateway name");
        if (at_keyword("choice")) {
            next();
            expect(Tok::LBrace, "'{'");
            ChoiceGateway choice;
            while (peek().type != Tok::RBrace) {
                if (peek().type != Tok::Number) fail("probability or '}'");
                ChoiceBranch branch;
                branch.probability = next().number;
                expect(Tok::Arrow, "'->'");
                branch.target = identifier("target node name");
                choice.branches.push_back(std::move(branch));
            }
            next();
            node.body = std::move(choice);
            return node;
        }
        expect(Tok::LBrace, "'{' or 'choice'");
        XorGateway xor_gw;
        while (at_keyword("when")) {
            next();
            XorBranch branch;
            branch.guard = expr();
            expect(Tok::Arrow, "'->'");
            branch.target = identifier("target node name");
            xor_gw.branches.push_back(std::move(branch));
        }
        expect_keyword("otherwise");
        expect(Tok::Arrow, "'->'");
        xor_gw.otherwise = identifier("target node name");
        expect(Tok::RBrace, "'}'");
        node.body = std::move(xor_gw);
        return node;
    }

    GuardExpr expr() {
        std::vector<GuardExpr> terms;
        terms.push_back(conjunction());
        while (peek().type == Tok::OrOr) {
            next();
            terms.push_back(conjunction());
        }
        return terms.size() == 1 ? std::move(terms.front()) : GuardExpr::any_of(std::move(terms));
    }

    GuardExpr conjunction() {
        std::vector<GuardExpr> terms;
        terms.push_back(unary());
        while (peek().type == Tok::AndAnd) {
            next();
            terms.push_back(unary());
        }
        return terms.size() == 1 ? std::move(terms.front()) : GuardExpr::all_of(std::move(terms));
    }

    GuardExpr unary() {
        if (peek().type == Tok::Bang) {
            next();
            return GuardExpr::negate(primary());
        }
        return primary();
    }

    GuardExpr primary() {
        if (peek().type == Tok::LParen) {
            next();
            GuardExpr inner = expr();
            expect(Tok::RParen, "')'");
            return GuardExpr::group(std::move(inner));
        }
        std::string attr = identifier("attribute name or '('");
        CompareOp op;
        switch (peek().type) {
            case Tok::Less: op = CompareOp::Less; break;
            case Tok::LessEqual: op = CompareOp::LessEqual; break;
            case Tok::Greater: op = CompareOp::Greater; break;
            case Tok::GreaterEqual: op = CompareOp::GreaterEqual; break;
            case Tok::EqualEqual: op = CompareOp::Equal; break;
            default: fail("comparison operator");
        }
        next();
        double value = number("numeric constant");
        return GuardExpr::compare(std::move(attr), op, value);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

using NodeIndex = std::unordered_map<std::string_view, std::size_t>;

NodeIndex index_nodes(const ProcessDefinition& def) {
    NodeIndex index;
    for (std::size_t i = 0; i < def.nodes.size(); ++i) index.emplace(def.nodes[i].name, i);
    return index;
}

std::size_t lookup(const NodeIndex& index, const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw Error(ErrorKind::UnknownTarget, name);
    return it->second;
}

void collect_attributes(const GuardExpr& guard, std::set<std::string>& out) {
    if (guard.kind == GuardExpr::Kind::Compare) {
        out.insert(guard.attribute);
        return;
    }
    for (const auto& child : guard.children) collect_attributes(child, out);
}

}  // namespace

// --- labels, operators, builders ---

std::string_view to_string(Label label) {
    return label == Label::Positive ? "POSITIVE" : "NEGATIVE";
}

Label parse_label(std::string_view text) {
    if (text == "POSITIVE") return Label::Positive;
    if (text == "NEGATIVE") return Label::Negative;
    throw Error(ErrorKind::BadLabel, std::string(text));
}

std::string_view to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Less: return "<";
        case CompareOp::LessEqual: return "<=";
        case CompareOp::Greater: return ">";
        case CompareOp::GreaterEqual: return ">=";
        case CompareOp::Equal: return "==";
    }
    return "?";
}

GuardExpr GuardExpr::compare(std::string attribute, CompareOp op, double constant) {
    GuardExpr g;
    g.kind = Kind::Compare;
    g.attribute = std::move(attribute);
    g.op = op;
    g.constant = constant;
    return g;
}

GuardExpr GuardExpr::all_of(std::vector<GuardExpr> terms) {
    GuardExpr g;
    g.kind = Kind::And;
    g.children = std::move(terms);
    return g;
}

GuardExpr GuardExpr::any_of(std::vector<GuardExpr> terms) {
    GuardExpr g;
    g.kind = Kind::Or;
    g.children = std::move(terms);
    return g;
}

GuardExpr GuardExpr::negate(GuardExpr operand) {
    GuardExpr g;
    g.kind = Kind::Not;
    g.children.push_back(std::move(operand));
    return g;
}

GuardExpr GuardExpr::group(GuardExpr inner) {
    GuardExpr g;
    g.kind = Kind::Group;
    g.children.push_back(std::move(inner));
    return g;
}

std::vector<std::string> Node::targets() const {
    return std::visit(
        [](const auto& b) -> std::vector<std::string> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Activity>) {
                return {b.successor};
            } else if constexpr (std::is_same_v<T, XorGateway>) {
                std::vector<std::string> out;
                for (const auto& br : b.branches) out.push_back(br.target);
                out.push_back(b.otherwise);
                return out;
            } else if constexpr (std::is_same_v<T, ChoiceGateway>) {
                std::vector<std::string> out;
                for (const auto& br : b.branches) out.push_back(br.target);
                return out;
            } else {
                return {};
            }
        },
        body);
}

const Node* ProcessDefinition::find_node(std::string_view node_name) const {
    for (const auto& node : nodes)
        if (node.name == node_name) return &node;
    return nullptr;
}

const AttributeDecl* ProcessDefinition::find_attribute(std::string_view attr_name) const {
    for (const auto& attr : attributes)
        if (attr.name == attr_name) return &attr;
    return nullptr;
}

std::vector<std::string> ProcessDefinition::activity_names() const {
    std::vector<std::string> out;
    for (const auto& node : nodes)
        if (node.is_activity()) out.push_back(node.name);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> ProcessDefinition::attribute_names() const {
    std::vector<std::string> out;
    for (const auto& attr : attributes) out.push_back(attr.name);
    std::sort(out.begin(), out.end());
    return out;
}

bool CausalityGraph::contains(std::string_view source, std::string_view target) const {
    return edges.count(CausalEdge{std::string(source), std::string(target)}) > 0;
}

// --- parse / serialize ---

ProcessDefinition parse_process_unchecked(std::string_view text) {
    return Parser(Lexer(text).run()).process();
}

ProcessDefinition parse_process(std::string_view text) {
    ProcessDefinition def = parse_process_unchecked(text);
    ValidationReport report = validate(def);
    if (!report.ok()) {
        const Finding& first = report.findings.front();
        throw Error(first.rule, first.subject);
    }
    return def;
}

ProcessDefinition load_process_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_process(buf.str());
}

std::string serialize(const GuardExpr& guard) {
    using K = GuardExpr::Kind;
    switch (guard.kind) {
        case K::Compare:
            return guard.attribute + " " + std::string(to_string(guard.op)) + " " +
                   format_number(guard.constant);
        case K::Group:
            return "(" + serialize(guard.children.front()) + ")";
        case K::Not:
            return "!" + serialize(guard.children.front());
        case K::And:
        case K::Or: {
            std::string sep = guard.kind == K::And ? " && " : " || ";
            std::string out;
            for (std::size_t i = 0; i < guard.children.size(); ++i) {
                if (i) out += sep;
                out += serialize(guard.children[i]);
            }
            return out;
        }
    }
    return {};
}

std::string serialize(const ProcessDefinition& def) {
    std::ostringstream out;
    out << "process " << def.name << '\n';
    for (const auto& attr : def.attributes)
        out << "attr " << attr.name << ": numeric in [" << format_number(attr.lower) << ", "
            << format_number(attr.upper) << "]\n";
    out << "start -> " << def.start << '\n';
    for (const auto& node : def.nodes) {
        std::visit(
            [&](const auto& b) {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, Activity>) {
                    out << "activity " << node.name << " -> " << b.successor << '\n';
                } else if constexpr (std::is_same_v<T, XorGateway>) {
                    out << "gateway " << node.name << " {";
                    for (const auto& br : b.branches)
                        out << " when " << serialize(br.guard) << " -> " << br.target;
                    out << " otherwise -> " << b.otherwise << " }\n";
                } else if constexpr (std::is_same_v<T, ChoiceGateway>) {
                    out << "gateway " << node.name << " choice {";
                    for (const auto& br : b.branches)
                        out << ' ' << format_number(br.probability) << " -> " << br.target;
                    out << " }\n";
                } else {
                    out << "end " << node.name << " label " << to_string(b.label) << '\n';
                }
            },
            node.body);
    }
    return out.str();
}

// --- validation ---

ValidationReport validate(const ProcessDefinition& def) {
    ValidationReport report;
    auto add = [&](ErrorKind rule, const std::string& subject, const std::string& message) {
        report.findings.push_back({rule, subject, message});
    };

    if (!is_identifier(def.name) || is_keyword(def.name))
        add(ErrorKind::InvalidName, def.name, "process name is not an identifier");

    std::set<std::string> seen;
    for (const auto& attr : def.attributes) {
        if (!is_attribute_name(attr.name) || is_keyword(attr.name))
            add(ErrorKind::InvalidName, attr.name, "attribute name must match [a-z_][a-z0-9_]*");
        if (!seen.insert(attr.name).second)
            add(ErrorKind::DuplicateName, attr.name, "attribute declared more than once");
        if (!(std::isfinite(attr.lower) && std::isfinite(attr.upper) && attr.lower < attr.upper))
            add(ErrorKind::BadBounds, attr.name, "attribute bounds require lower < upper");
    }
    for (const auto& node : def.nodes) {
        if (!is_identifier(node.name) || is_keyword(node.name))
            add(ErrorKind::InvalidName, node.name, "node name is not an identifier");
        if (!seen.insert(node.name).second)
            add(ErrorKind::DuplicateName, node.name, "name already used by a node or attribute");
    }

    NodeIndex index = index_nodes(def);
    if (!index.count(def.start)) add(ErrorKind::UnknownTarget, def.start, "start node does not exist");
    for (const auto& node : def.nodes)
        for (const auto& target : node.targets())
            if (!index.count(target))
                add(ErrorKind::UnknownTarget, target, "referenced by node " + node.name);

    for (const auto& node : def.nodes) {
        if (const auto* xor_gw = std::get_if<XorGateway>(&node.body)) {
            for (const auto& br : xor_gw->branches) {
                std::set<std::string> used;
                collect_attributes(br.guard, used);
                for (const auto& name : used)
                    if (!def.find_attribute(name))
                        add(ErrorKind::UnknownAttribute, name, "guard in gateway " + node.name);
            }
        } else if (const auto* choice = std::get_if<ChoiceGateway>(&node.body)) {
            double sum = 0.0;
            for (const auto& br : choice->branches) {
                if (!(br.probability > 0.0 && br.probability <= 1.0))
                    add(ErrorKind::BadProbability, node.name,
                        "branch probability " + format_number(br.probability) + " outside (0, 1]");
                sum += br.probability;
            }
            if (!(std::fabs(sum - 1.0) <= 1e-9))
                add(ErrorKind::BadProbabilitySum, node.name,
                    "branch probabilities sum to " + format_number(sum));
        }
    }

    if (std::none_of(def.nodes.begin(), def.nodes.end(), [](const Node& n) { return n.is_end(); }))
        add(ErrorKind::NoEndNode, def.name, "process has no end node");

    // Cycle detection over the edges that resolve.
    std::vector<int> color(def.nodes.size(), 0);
    std::set<std::string> cyclic;
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        color[i] = 1;
        for (const auto& target : def.nodes[i].targets()) {
            auto it = index.find(target);
            if (it == index.end()) continue;
            if (color[it->second] == 1)
                cyclic.insert(def.nodes[it->second].name);
            else if (color[it->second] == 0)
                visit(it->second);
        }
        color[i] = 2;
    };
    for (std::size_t i = 0; i < def.nodes.size(); ++i)
        if (color[i] == 0) visit(i);
    for (const auto& name : cyclic) add(ErrorKind::CyclicGraph, name, "node lies on a cycle");

    std::vector<bool> reached(def.nodes.size(), false);
    if (auto it = index.find(def.start); it != index.end()) {
        std::vector<std::size_t> stack{it->second};
        reached[it->second] = true;
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            for (const auto& target : def.nodes[i].targets()) {
                auto jt = index.find(target);
                if (jt != index.end() && !reached[jt->second]) {
                    reached[jt->second] = true;
                    stack.push_back(jt->second);
                }
            }
        }
        for (std::size_t i = 0; i < def.nodes.size(); ++i)
            if (!reached[i])
                add(ErrorKind::UnreachableNode, def.nodes[i].name, "not reachable from start");
    }
    return report;
}

// --- guards ---

bool eval_guard(const GuardExpr& guard, const AttributeAssignment& attrs) {
    using K = GuardExpr::Kind;
    switch (guard.kind) {
        case K::Compare: {
            auto it = attrs.find(guard.attribute);
            if (it == attrs.end()) throw Error(ErrorKind::MissingAttribute, guard.attribute);
            double v = it->second;
            switch (guard.op) {
                case CompareOp::Less: return v < guard.constant;
                case CompareOp::LessEqual: return v <= guard.constant;
                case CompareOp::Greater: return v > guard.constant;
                case CompareOp::GreaterEqual: return v >= guard.constant;
                case CompareOp::Equal: return v == guard.constant;
            }
            return false;
        }
        case K::Group: return eval_guard(guard.children.front(), attrs);
        case K::Not: return !eval_guard(guard.children.front(), attrs);
        case K::And:
            return std::all_of(guard.children.begin(), guard.children.end(),
                               [&](const GuardExpr& c) { return eval_guard(c, attrs); });
        case K::Or:
            return std::any_of(guard.children.begin(), guard.children.end(),
                               [&](const GuardExpr& c) { return eval_guard(c, attrs); });
    }
    return false;
}

std::set<std::string> guard_attributes(const GuardExpr& guard) {
    std::set<std::string> out;
    collect_attributes(guard, out);
    return out;
}

// --- analyses ---

namespace {

enum class Occurrence { Never, Sometimes, Always };

// Per node: activities on some path to an end, and on every path.
struct Coverage {
    std::vector<bool> some;
    std::vector<bool> every;
};

}  // namespace

CausalityGraph derive_causality_graph(const ProcessDefinition& def) {
    NodeIndex index = index_nodes(def);
    std::vector<std::string> activities = def.activity_names();
    std::map<std::string, std::size_t, std::less<>> slot;
    for (std::size_t i = 0; i < activities.size(); ++i) slot.emplace(activities[i], i);

    std::vector<std::optional<Coverage>> memo(def.nodes.size());
    std::function<const Coverage&(std::size_t)> cover = [&](std::size_t i) -> const Coverage& {
        if (memo[i]) return *memo[i];
        const Node& node = def.nodes[i];
        Coverage c{std::vector<bool>(activities.size(), false),
                   std::vector<bool>(activities.size(), false)};
        auto targets = node.targets();
        if (node.is_activity()) {
            c = cover(lookup(index, targets.front()));
            std::size_t s = slot.at(node.name);
            c.some[s] = c.every[s] = true;
        } else if (!targets.empty()) {
            std::fill(c.every.begin(), c.every.end(), true);
            for (const auto& t : targets) {
                const Coverage& sub = cover(lookup(index, t));
                for (std::size_t k = 0; k < activities.size(); ++k) {
                    c.some[k] = c.some[k] || sub.some[k];
                    c.every[k] = c.every[k] && sub.every[k];
                }
            }
        }
        memo[i] = std::move(c);
        return *memo[i];
    };
    auto occurrence = [&](const std::string& target, std::size_t k) {
        const Coverage& c = cover(lookup(index, target));
        if (c.every[k]) return Occurrence::Always;
        return c.some[k] ? Occurrence::Sometimes : Occurrence::Never;
    };

    // A `when` guard decides between its own target and the branches after it,
    // so its attributes cause every activity whose occurrence differs there.
    CausalityGraph graph;
    for (const auto& node : def.nodes) {
        const auto* xor_gw = std::get_if<XorGateway>(&node.body);
        if (!xor_gw) continue;
        std::vector<std::string> targets = node.targets();
        for (std::size_t i = 0; i < xor_gw->branches.size(); ++i) {
            std::set<std::string> attrs = guard_attributes(xor_gw->branches[i].guard);
            for (std::size_t k = 0; k < activities.size(); ++k) {
                Occurrence own = occurrence(targets[i], k);
                bool differs = false;
                for (std::size_t j = i + 1; j < targets.size() && !differs; ++j)
                    differs = occurrence(targets[j], k) != own;
                if (!differs) continue;
                for (const auto& attr : attrs) graph.edges.insert({attr, activities[k]});
            }
        }
    }
    return graph;
}

std::set<IndicatorVector> reachable_indicators(const ProcessDefinition& def,
                                               const AttributeAssignment& attrs) {
    NodeIndex index = index_nodes(def);
    std::vector<std::string> activities = def.activity_names();
    std::map<std::string, std::size_t, std::less<>> slot;
    for (std::size_t i = 0; i < activities.size(); ++i) slot.emplace(activities[i], i);

    std::vector<std::optional<std::set<IndicatorVector>>> memo(def.nodes.size());
    std::function<const std::set<IndicatorVector>&(std::size_t)> suffixes =
        [&](std::size_t i) -> const std::set<IndicatorVector>& {
        if (memo[i]) return *memo[i];
        const Node& node = def.nodes[i];
        std::set<IndicatorVector> out;
        std::visit(
            [&](const auto& b) {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, Activity>) {
                    std::size_t s = slot.at(node.name);
                    for (IndicatorVector v : suffixes(lookup(index, b.successor))) {
                        v[s] = 1;
                        out.insert(std::move(v));
                    }
                } else if constexpr (std::is_same_v<T, XorGateway>) {
                    std::string chosen = b.otherwise;
                    for (const auto& br : b.branches) {
                        if (eval_guard(br.guard, attrs)) {
                            chosen = br.target;
                            break;
                        }
                    }
                    out = suffixes(lookup(index, chosen));
                } else if constexpr (std::is_same_v<T, ChoiceGateway>) {
                    for (const auto& br : b.branches) {
                        const auto& sub = suffixes(lookup(index, br.target));
                        out.insert(sub.begin(), sub.end());
                    }
                } else {
                    out.insert(IndicatorVector(activities.size(), 0));
                }
            },
            node.body);
        memo[i] = std::move(out);
        return *memo[i];
    };
    return suffixes(lookup(index, def.start));
}

}  // namespace procex
