#include "sweep_oracle.hpp"

#include <algorithm>
#include <functional>

namespace procex::testing {

namespace {

void collect_thresholds(const GuardExpr& g, std::map<std::string, std::set<double>>& out) {
    if (g.kind == GuardExpr::Kind::Compare) out[g.attribute].insert(g.constant);
    for (const auto& c : g.children) collect_thresholds(c, out);
}

}  // namespace

std::vector<std::set<std::string>> enumerate_paths(const ProcessDefinition& def, const AttributeAssignment& attrs) {
    std::vector<std::set<std::string>> paths;
    std::set<std::string> current;
    std::function<void(const std::string&)> dfs = [&](const std::string& name) {
        const Node* node = def.find_node(name);
        if (const auto* a = std::get_if<Activity>(&node->body)) {
            current.insert(name);
            dfs(a->successor);
            current.erase(name);
        } else if (const auto* x = std::get_if<XorGateway>(&node->body)) {
            for (const auto& b : x->branches)
                if (eval_guard(b.guard, attrs)) return dfs(b.target);
            dfs(x->otherwise);
        } else if (const auto* c = std::get_if<ChoiceGateway>(&node->body)) {
            for (const auto& b : c->branches) dfs(b.target);
        } else {
            paths.push_back(current);
        }
    };
    dfs(def.start);
    return paths;
}

std::set<std::pair<std::string, std::string>> sweep_causality(const ProcessDefinition& def) {
    std::map<std::string, std::set<double>> thresholds;
    for (const auto& node : def.nodes)
        if (const auto* x = std::get_if<XorGateway>(&node.body))
            for (const auto& b : x->branches) collect_thresholds(b.guard, thresholds);

    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (const auto& a : def.attributes) {
        std::set<double> points{a.lower, a.upper};
        for (double t : thresholds[a.name]) points.insert(t);
        std::vector<double> sorted(points.begin(), points.end());
        std::vector<double> grid = sorted;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) grid.push_back(0.5 * (sorted[i] + sorted[i + 1]));
        std::sort(grid.begin(), grid.end());
        names.push_back(a.name);
        values.push_back(grid);
    }

    std::vector<std::string> activities;
    for (const auto& node : def.nodes)
        if (node.is_activity()) activities.push_back(node.name);

    // Presence profile per activity: bit 0 = seen absent, bit 1 = seen present.
    auto profile = [&](const AttributeAssignment& attrs) {
        std::map<std::string, int> p;
        for (const auto& path : enumerate_paths(def, attrs))
            for (const auto& act : activities) p[act] |= path.count(act) ? 2 : 1;
        return p;
    };

    std::set<std::pair<std::string, std::string>> edges;
    std::vector<std::size_t> index(names.size(), 0);
    for (;;) {
        AttributeAssignment base;
        for (std::size_t i = 0; i < names.size(); ++i) base[names[i]] = values[i][index[i]];
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (index[i] != 0) continue;  // each line of the sweep is visited once
            AttributeAssignment attrs = base;
            std::map<std::string, int> first;
            for (std::size_t v = 0; v < values[i].size(); ++v) {
                attrs[names[i]] = values[i][v];
                std::map<std::string, int> p = profile(attrs);
                if (v == 0) {
                    first = p;
                    continue;
                }
                for (const auto& act : activities)
                    if (p[act] != first[act]) edges.emplace(names[i], act);
            }
        }
        std::size_t k = 0;
        while (k < names.size() && ++index[k] == values[k].size()) index[k++] = 0;
        if (k == names.size()) break;
    }
    return edges;
}

}  // namespace procex::testing
