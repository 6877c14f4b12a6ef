#include "msstop/structure.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "msstop/errors.hpp"

namespace msstop {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 7> kFamilyKeys{{
    {Family::recruitment, "r"},
    {Family::survival, "s"},
    {Family::arrival, "beta"},
    {Family::retention, "phi"},
    {Family::initial_state, "alpha"},
    {Family::transition, "psi"},
    {Family::capture, "p"},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view factor_key(Factor f) {
  switch (f) {
    case Factor::year: return "year";
    case Factor::occasion: return "occasion";
    case Factor::age: return "age";
    case Factor::state: return "state";
  }
  return "";
}

std::string_view covariate_key(Covariate c) {
  switch (c) {
    case Covariate::year: return "year.linear";
    case Covariate::occasion: return "occasion.linear";
    case Covariate::age: return "age.linear";
    case Covariate::none: break;
  }
  return "";
}

Term parse_term(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ParseError(0, "empty term");
  Term term;
  if (text == "const") return term;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto stop = std::min(text.find(':', start), text.size());
    const auto part = trim(text.substr(start, stop - start));
    bool matched = false;
    for (Factor f : {Factor::year, Factor::occasion, Factor::age, Factor::state}) {
      if (part == factor_key(f)) {
        if (std::find(term.factors.begin(), term.factors.end(), f) != term.factors.end()) {
          throw ParseError(0, "factor '" + std::string(part) + "' repeated in term '" + std::string(text) + "'");
        }
        term.factors.push_back(f);
        matched = true;
      }
    }
    for (Covariate c : {Covariate::year, Covariate::occasion, Covariate::age}) {
      if (part == covariate_key(c)) {
        if (term.covariate != Covariate::none) {
          throw ParseError(0, "term '" + std::string(text) + "' has more than one linear covariate");
        }
        term.covariate = c;
        matched = true;
      }
    }
    if (!matched) throw ParseError(0, "unknown term component '" + std::string(part) + "'");
    start = stop + 1;
  }
  return term;
}

std::string term_text(const Term& term) {
  if (term.factors.empty() && term.covariate == Covariate::none) return "const";
  std::string out;
  for (Factor f : term.factors) {
    if (!out.empty()) out += ':';
    out += factor_key(f);
  }
  if (term.covariate != Covariate::none) {
    if (!out.empty()) out += ':';
    out += covariate_key(term.covariate);
  }
  return out;
}

SimplexForm parse_simplex_form(std::string_view spec, bool allow_shared) {
  if (spec == "uniform") return SimplexForm::uniform;
  if (spec == "year") return SimplexForm::by_year;
  if (allow_shared && spec == "const") return SimplexForm::shared;
  throw ParseError(0, "expected " + std::string(allow_shared ? "uniform, const or year" : "uniform or year") +
                          ", got '" + std::string(spec) + "'");
}

std::string_view simplex_form_text(SimplexForm f) {
  switch (f) {
    case SimplexForm::uniform: return "uniform";
    case SimplexForm::shared: return "const";
    case SimplexForm::by_year: return "year";
  }
  return "";
}

void apply(ModelStructure& s, Family family, std::string_view spec) {
  spec = trim(spec);
  switch (family) {
    case Family::recruitment: s.recruitment = parse_simplex_form(spec, false); break;
    case Family::survival: s.survival = parse_predictor(spec); break;
    case Family::retention: s.retention = parse_predictor(spec); break;
    case Family::capture: s.capture = parse_predictor(spec); break;
    case Family::initial_state: s.initial_state = parse_simplex_form(spec, true); break;
    case Family::transition: s.transition = parse_simplex_form(spec, true); break;
    case Family::arrival:
      if (spec == "uniform") {
        s.arrival = ArrivalForm::uniform;
        s.arrival_predictor = {};
      } else if (spec == "year") {
        s.arrival = ArrivalForm::by_year;
        s.arrival_predictor = {};
      } else if (spec.starts_with("logistic(") && spec.ends_with(")")) {
        s.arrival = ArrivalForm::logistic;
        s.arrival_predictor = parse_predictor(spec.substr(9, spec.size() - 10));
      } else {
        throw ParseError(0, "expected uniform, year or logistic(<terms>), got '" + std::string(spec) + "'");
      }
      break;
  }
}

}  // namespace

std::string_view family_key(Family family) noexcept {
  for (const auto& [f, key] : kFamilyKeys) {
    if (f == family) return key;
  }
  return "";
}

std::optional<Family> family_from_key(std::string_view key) noexcept {
  for (const auto& [f, k] : kFamilyKeys) {
    if (k == key) return f;
  }
  return std::nullopt;
}

LinearPredictor parse_predictor(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ParseError(0, "empty predictor");
  LinearPredictor predictor;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto stop = std::min(text.find('+', start), text.size());
    Term term = parse_term(text.substr(start, stop - start));
    if (std::find(predictor.terms.begin(), predictor.terms.end(), term) != predictor.terms.end()) {
      throw ParseError(0, "term '" + term_text(term) + "' appears twice");
    }
    predictor.terms.push_back(std::move(term));
    start = stop + 1;
  }
  return predictor;
}

std::string to_string(const LinearPredictor& predictor) {
  std::string out;
  for (const auto& term : predictor.terms) {
    if (!out.empty()) out += " + ";
    out += term_text(term);
  }
  return out;
}

std::string family_spec(const ModelStructure& s, Family family) {
  switch (family) {
    case Family::recruitment: return std::string(simplex_form_text(s.recruitment));
    case Family::survival: return to_string(s.survival);
    case Family::retention: return to_string(s.retention);
    case Family::capture: return to_string(s.capture);
    case Family::initial_state: return std::string(simplex_form_text(s.initial_state));
    case Family::transition: return std::string(simplex_form_text(s.transition));
    case Family::arrival:
      switch (s.arrival) {
        case ArrivalForm::uniform: return "uniform";
        case ArrivalForm::by_year: return "year";
        case ArrivalForm::logistic: return "logistic(" + to_string(s.arrival_predictor) + ")";
      }
  }
  return "";
}

ModelStructure parse_structure(std::string_view text) {
  ModelStructure s;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::vector<Family> declared;
  while (start < text.size()) {
    const auto stop = std::min(text.find('\n', start), text.size());
    auto line = text.substr(start, stop - start);
    start = stop + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "expected 'family: spec'");
    const auto key = trim(line.substr(0, colon));
    const auto family = family_from_key(key);
    if (!family) throw ParseError(line_no, "unknown parameter family '" + std::string(key) + "'");
    if (std::find(declared.begin(), declared.end(), *family) != declared.end()) {
      throw ParseError(line_no, "family '" + std::string(key) + "' declared twice");
    }
    declared.push_back(*family);
    try {
      apply(s, *family, line.substr(colon + 1));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return s;
}

std::string to_string(const ModelStructure& structure) {
  std::string out;
  for (const auto& [family, key] : kFamilyKeys) {
    out += key;
    out += ": ";
    out += family_spec(structure, family);
    out += '\n';
  }
  return out;
}

ModelStructure with_family(const ModelStructure& structure, Family family, std::string_view spec) {
  ModelStructure out = structure;
  apply(out, family, spec);
  return out;
}

ModelStructure constant_structure() { return ModelStructure{}; }

ModelStructure generating_structure() {
  return parse_structure(
      "r: year\n"
      "s: const\n"
      "beta: logistic(const + year:occasion.linear)\n"
      "phi: occasion + age.linear\n"
      "alpha: const\n"
      "psi: const\n"
      "p: state\n");
}

ModelStructure newt_structure() {
  return parse_structure(
      "r: year\n"
      "s: const\n"
      "beta: logistic(const + year:occasion.linear)\n"
      "phi: const + year:occasion.linear\n"
      "alpha: year\n"
      "psi: year\n"
      "p: year:state\n");
}

std::optional<ModelStructure> named_structure(std::string_view name) {
  if (name == "constant") return constant_structure();
  if (name == "generating") return generating_structure();
  if (name == "newt") return newt_structure();
  return std::nullopt;
}

}  // namespace msstop
