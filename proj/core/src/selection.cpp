#include "msstop/selection.hpp"

#include <sstream>

#include "msstop/errors.hpp"

namespace msstop {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

SelectionStep make_step(int round, std::string move, const FitResult& fit) {
  return {round, std::move(move), fit.structure, fit.loglik, fit.aic, fit.n_params, fit.converged, false};
}

}  // namespace

std::string StructureMove::label() const { return std::string(family_key(family)) + ": " + spec; }

std::vector<StructureMove> parse_moves(std::string_view text) {
  std::vector<StructureMove> moves;
  int line_number = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_number;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_number, "expected 'family: spec'");
    const auto family = family_from_key(trim(line.substr(0, colon)));
    if (!family) throw ParseError(line_number, "unknown family '" + std::string(trim(line.substr(0, colon))) + "'");
    const std::string spec(trim(line.substr(colon + 1)));
    try {
      (void)with_family(ModelStructure{}, *family, spec);
    } catch (const std::exception& e) {
      throw ParseError(line_number, e.what());
    }
    moves.push_back({*family, spec});
  }
  return moves;
}

SelectionResult step_up_selection(const Dataset& data, const std::vector<StructureMove>& moves,
                                  const ModelStructure& base, const FitOptions& options) {
  SelectionResult result;
  FitResult current = fit(data, base, options);
  result.trace.push_back(make_step(0, "", current));
  result.trace.back().accepted = true;

  std::vector<bool> used(moves.size(), false);
  for (int round = 1;; ++round) {
    std::size_t best_move = moves.size();
    std::size_t best_step = 0;
    FitResult best_fit;
    for (std::size_t m = 0; m < moves.size(); ++m) {
      if (used[m]) continue;
      const ModelStructure candidate = with_family(current.structure, moves[m].family, moves[m].spec);
      if (to_string(candidate) == to_string(current.structure)) continue;
      FitResult f = fit(data, candidate, options);
      result.trace.push_back(make_step(round, moves[m].label(), f));
      if (f.converged && (best_move == moves.size() || f.aic < best_fit.aic)) {
        best_move = m;
        best_step = result.trace.size() - 1;
        best_fit = std::move(f);
      }
    }
    if (best_move == moves.size() || !(best_fit.aic < current.aic)) break;
    used[best_move] = true;
    result.trace[best_step].accepted = true;
    current = std::move(best_fit);
  }
  result.best = current.structure;
  result.best_fit = std::move(current);
  return result;
}

}  // namespace msstop
