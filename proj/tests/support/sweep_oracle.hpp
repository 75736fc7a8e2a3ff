#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "procex/process_model.hpp"

namespace procex::testing {

/// Every root-to-end path's activity set, found by plain depth-first search.
std::vector<std::set<std::string>> enumerate_paths(const ProcessDefinition& def, const AttributeAssignment& attrs);

/// Brute-force causality edges. For every point of a grid over each
/// attribute's critical values (bounds, guard thresholds and the midpoints
/// between them), vary one attribute at a time and record which activities
/// change their feasible presence set {0}, {1} or {0, 1}.
std::set<std::pair<std::string, std::string>> sweep_causality(const ProcessDefinition& def);

}  // namespace procex::testing
