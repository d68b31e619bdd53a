#pragma once

#include <map>
#include <set>
#include <string>

#include "tableq/cells.hpp"

namespace tableq::graph {

// Sheet-level dependency network: an edge A -> B with count n means formulas
// on sheet A contain n references to cells or ranges on sheet B.
struct DepGraph {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, long long> edges;

  friend bool operator==(const DepGraph&, const DepGraph&) = default;
};

// Nodes are all sheets hosting cells plus all referenced sheets. Self edges
// are dropped unless include_self is set. A range counts as one reference.
DepGraph sheet_deps(const cells::Workbook& workbook, bool include_self = false);

// DOT digraph text with quoted identifiers, one node statement per sheet and
// one edge statement per edge, in name order. Edge labels carry reference
// counts unless with_counts is false.
std::string emit_dot(const DepGraph& graph, bool with_counts = true);

}  // namespace tableq::graph
