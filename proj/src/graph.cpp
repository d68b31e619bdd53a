#include "tableq/graph.hpp"

#include <variant>

namespace tableq::graph {

using cells::Formula;

namespace {

void collect_ref_sheets(const Formula& f, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Formula::Ref>) {
          out.push_back(node.addr.sheet);
        } else if constexpr (std::is_same_v<T, Formula::Range>) {
          out.push_back(node.tl.sheet);
        } else if constexpr (std::is_same_v<T, Formula::Neg>) {
          collect_ref_sheets(node.operand, out);
        } else if constexpr (std::is_same_v<T, Formula::Bin>) {
          collect_ref_sheets(node.lhs, out);
          collect_ref_sheets(node.rhs, out);
        } else if constexpr (std::is_same_v<T, Formula::Call>) {
          for (const auto& a : node.args) collect_ref_sheets(a, out);
        }
      },
      f.node());
}

std::string dot_quote(const std::string& id) {
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

DepGraph sheet_deps(const cells::Workbook& workbook, bool include_self) {
  DepGraph g;
  for (const auto& [addr, formula] : workbook.cells) {
    g.nodes.insert(addr.sheet);
    std::vector<std::string> targets;
    collect_ref_sheets(formula, targets);
    for (auto& target : targets) {
      g.nodes.insert(target);
      if (target == addr.sheet && !include_self) continue;
      ++g.edges[{addr.sheet, std::move(target)}];
    }
  }
  return g;
}

std::string emit_dot(const DepGraph& graph, bool with_counts) {
  std::string out = "digraph sheets {\n";
  for (const auto& node : graph.nodes) out += "  " + dot_quote(node) + ";\n";
  for (const auto& [edge, count] : graph.edges) {
    out += "  " + dot_quote(edge.first) + " -> " + dot_quote(edge.second);
    if (with_counts) out += " [label=\"" + std::to_string(count) + "\"]";
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace tableq::graph
