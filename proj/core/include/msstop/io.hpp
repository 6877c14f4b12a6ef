#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "msstop/bootstrap.hpp"
#include "msstop/design.hpp"
#include "msstop/fit.hpp"
#include "msstop/parameters.hpp"
#include "msstop/selection.hpp"
#include "msstop/simulate.hpp"

namespace msstop {

/// History file:
///
///     # comment
///     T=3 K=5,5,5 G=2 avail=1,2*3 Amax=3 amax=5*3
///     0 1 0 0 0  0 0 0 0 0  0 2 2 0 0  4
///
/// The header is the leading run of key=value tokens (may span lines). `K`
/// and `amax` take comma lists where `v*n` repeats v n times; `avail` is a
/// `|`-separated per-period list of comma-joined states, each group
/// optionally suffixed `*n`. `avail`, `Amax`, `amax` are optional. Each body
/// row holds sum K(t) outcomes and a trailing count. Duplicate rows are merged
/// and reported through `warnings`.
Dataset parse_history(std::istream& in, std::vector<std::string>* warnings = nullptr);
Dataset read_history_file(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_history(std::ostream& out, const Dataset& data);

/// Header-only form of the history file.
StudyDesign parse_design(std::istream& in);
std::string design_header(const StudyDesign& design);

nlohmann::json to_json(const StudyDesign& design);
nlohmann::json to_json(const ParameterSet& params);
/// Validates against `design`; throws ParseError on missing keys.
ParameterSet parameters_from_json(const nlohmann::json& j, const StudyDesign& design);

nlohmann::json to_json(const FitResult& fit, const StructureLayout& layout, long observed);
nlohmann::json to_json(const BootstrapResult& result);
nlohmann::json to_json(const SelectionResult& result);
nlohmann::json truth_json(const SimTruth& truth, const StudyDesign& design);

/// Tidy human-readable table: name, estimate, SE, CI low, CI high.
std::string estimates_table(const std::vector<ReportedValue>& values,
                            const std::vector<BootstrapSummary>* summaries = nullptr);

}  // namespace msstop
