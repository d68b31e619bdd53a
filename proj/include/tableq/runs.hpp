#pragma once

#include <string>

#include "tableq/cells.hpp"
#include "tableq/dsl.hpp"

namespace tableq::runs {

// Canonical listing of a workbook, one A1 equation per line.
std::string list_workbook(const cells::Workbook& workbook);

// Partitions the cells of each sheet into maximal rectangles whose formulas
// are identical up to constant increments in cell addresses or numeric
// literals, greedily largest-first. Expanding the result always reproduces
// the input workbook exactly. Single cells become plain equations.
dsl::RunListing detect_runs(const cells::Workbook& workbook);

// Run notation: fixed parts print as plain A1 text, bound parts as
// [V0 in 4:13] (or [C:D] when the right-hand side uses no variables).
// parse_run_listing inverts this.
std::string serialize_run_listing(const dsl::RunListing& listing);
std::string serialize_run_equation(const dsl::RunEquation& eq);

// Substitutes every binder assignment into the template, one cell per
// assignment. Duplicate target cells and references pushed left of column A
// or above row 1 are errors.
cells::Workbook expand_runs(const dsl::RunListing& listing);

}  // namespace tableq::runs
