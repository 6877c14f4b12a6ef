#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "msstop/errors.hpp"
#include "msstop/io.hpp"

namespace msstop {

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto end = text.find(sep, begin);
    out.emplace_back(text.substr(begin, end == std::string_view::npos ? end : end - begin));
    if (end == std::string_view::npos) return out;
    begin = end + 1;
  }
}

long parse_integer(std::string_view text, std::size_t line, std::string_view what) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, "expected an integer for " + std::string(what) + ", got '" + std::string(text) + "'");
  }
  return value;
}

/// Splits an item of the form `v*n` into (v, n); n defaults to 1.
std::pair<std::string, long> repeat(std::string_view item, std::size_t line, std::string_view what) {
  const auto star = item.rfind('*');
  if (star == std::string_view::npos) return {std::string(item), 1};
  const long n = parse_integer(item.substr(star + 1), line, what);
  if (n < 1) throw ParseError(line, "repeat count must be positive in " + std::string(what));
  return {std::string(item.substr(0, star)), n};
}

std::vector<int> int_list(std::string_view text, std::size_t line, std::string_view what) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    const auto [value, n] = repeat(item, line, what);
    const long v = parse_integer(value, line, what);
    out.insert(out.end(), static_cast<std::size_t>(n), static_cast<int>(v));
  }
  return out;
}

std::vector<std::vector<int>> availability_list(std::string_view text, std::size_t line) {
  std::vector<std::vector<int>> out;
  for (const auto& group : split(text, '|')) {
    const auto [states, n] = repeat(group, line, "avail");
    std::vector<int> listed;
    for (const auto& s : split(states, ',')) listed.push_back(static_cast<int>(parse_integer(s, line, "avail")));
    out.insert(out.end(), static_cast<std::size_t>(n), listed);
  }
  return out;
}

std::string run_length(const std::vector<int>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    if (i > 0) out << ',';
    out << values[i];
    if (j - i > 1) out << '*' << (j - i);
    i = j;
  }
  return out.str();
}

std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> tokens;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream words(raw);
    for (std::string w; words >> w;) tokens.push_back({std::move(w), line});
  }
  return tokens;
}

/// Consumes the leading key=value tokens.
StudyDesign design_from_tokens(const std::vector<Token>& tokens, std::size_t& position) {
  std::optional<long> T, G, max_primary;
  std::optional<std::vector<int>> K, max_secondary;
  std::optional<std::vector<std::vector<int>>> avail;
  std::size_t line = tokens.empty() ? 0 : tokens.front().line;
  for (; position < tokens.size(); ++position) {
    const auto& tok = tokens[position];
    const auto eq = tok.text.find('=');
    if (eq == std::string::npos) break;
    line = tok.line;
    const std::string key = tok.text.substr(0, eq);
    const std::string_view value = std::string_view(tok.text).substr(eq + 1);
    if (key == "T") {
      T = parse_integer(value, line, "T");
    } else if (key == "G") {
      G = parse_integer(value, line, "G");
    } else if (key == "K") {
      K = int_list(value, line, "K");
    } else if (key == "Amax") {
      max_primary = parse_integer(value, line, "Amax");
    } else if (key == "amax") {
      max_secondary = int_list(value, line, "amax");
    } else if (key == "avail") {
      avail = availability_list(value, line);
    } else {
      throw ParseError(line, "unknown header key '" + key + "'");
    }
  }
  if (!T || !K || !G) throw ParseError(line, "header must declare T, K and G");
  if (*T < 1 || *G < 1) throw ParseError(line, "T and G must be positive");
  const auto periods = static_cast<std::size_t>(*T);
  if (K->size() != periods) throw ParseError(line, "K lists " + std::to_string(K->size()) + " periods, T is " + std::to_string(*T));
  if (max_secondary && max_secondary->size() != periods) throw ParseError(line, "amax must list one value per period");
  if (avail && avail->size() != periods) throw ParseError(line, "avail must list one group per period");

  std::vector<std::vector<bool>> availability(periods, std::vector<bool>(static_cast<std::size_t>(*G), !avail));
  if (avail) {
    for (std::size_t t = 0; t < periods; ++t) {
      for (int g : (*avail)[t]) {
        if (g < 1 || g > *G) throw ParseError(line, "avail names state " + std::to_string(g) + " outside 1.." + std::to_string(*G));
        availability[t][static_cast<std::size_t>(g - 1)] = true;
      }
    }
  }
  try {
    return StudyDesign(*K, static_cast<int>(*G), std::move(availability),
                       max_primary ? static_cast<int>(*max_primary) : static_cast<int>(*T),
                       max_secondary ? *max_secondary : *K);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

StudyDesign parse_design(std::istream& in) {
  const auto tokens = tokenize(in);
  std::size_t position = 0;
  StudyDesign design = design_from_tokens(tokens, position);
  if (position != tokens.size()) throw ParseError(tokens[position].line, "unexpected text after the header");
  return design;
}

std::string design_header(const StudyDesign& design) {
  std::ostringstream out;
  const int T = design.periods();
  const int G = design.states();
  out << "T=" << T << " K=" << run_length(design.occasions()) << " G=" << G;

  bool restricted = false;
  std::vector<std::string> groups;
  for (int t = 0; t < T; ++t) {
    std::string group;
    for (int g = 0; g < G; ++g) {
      if (!design.available(t, g)) {
        restricted = true;
        continue;
      }
      if (!group.empty()) group += ',';
      group += std::to_string(g + 1);
    }
    groups.push_back(group);
  }
  if (restricted) {
    out << " avail=";
    for (std::size_t i = 0; i < groups.size();) {
      std::size_t j = i;
      while (j < groups.size() && groups[j] == groups[i]) ++j;
      if (i > 0) out << '|';
      out << groups[i];
      if (j - i > 1) out << '*' << (j - i);
      i = j;
    }
  }
  if (design.max_primary_age() != T) out << " Amax=" << design.max_primary_age();
  if (design.max_secondary_ages() != design.occasions()) out << " amax=" << run_length(design.max_secondary_ages());
  return out.str();
}

Dataset parse_history(std::istream& in, std::vector<std::string>* warnings) {
  const auto tokens = tokenize(in);
  std::size_t position = 0;
  StudyDesign design = design_from_tokens(tokens, position);
  const auto width = static_cast<std::size_t>(design.total_occasions());
  const int G = design.states();

  std::vector<int> period_of(width);
  for (int t = 0; t < design.periods(); ++t) {
    for (int k = 0; k < design.occasions(t); ++k) period_of[static_cast<std::size_t>(design.offset(t) + k)] = t;
  }

  std::vector<CaptureHistory> histories;
  std::vector<long> counts;
  std::map<CaptureHistory, std::pair<std::size_t, std::size_t>> seen;  // history -> (index, first line)
  while (position < tokens.size()) {
    const std::size_t line = tokens[position].line;
    std::size_t end = position;
    while (end < tokens.size() && tokens[end].line == line) ++end;
    if (end - position != width + 1) {
      throw ParseError(line, "row has " + std::to_string(end - position) + " entries, expected " +
                                 std::to_string(width + 1));
    }
    CaptureHistory h(width);
    bool captured = false;
    for (std::size_t i = 0; i < width; ++i) {
      const long x = parse_integer(tokens[position + i].text, line, "an outcome");
      if (x < 0 || x > G) throw ParseError(line, "outcome " + std::to_string(x) + " outside 0.." + std::to_string(G));
      if (x > 0 && !design.available(period_of[i], static_cast<int>(x - 1))) {
        throw ParseError(line, "state " + std::to_string(x) + " is not available in period " +
                                   std::to_string(period_of[i] + 1));
      }
      h[i] = static_cast<std::uint8_t>(x);
      captured = captured || x > 0;
    }
    if (!captured) throw ParseError(line, "history is never captured");
    const long count = parse_integer(tokens[position + width].text, line, "the count");
    if (count < 1) throw ParseError(line, "count must be at least 1");

    if (auto it = seen.find(h); it != seen.end()) {
      counts[it->second.first] += count;
      if (warnings) {
        warnings->push_back("line " + std::to_string(line) + ": duplicate of line " +
                            std::to_string(it->second.second) + ", counts merged");
      }
    } else {
      seen.emplace(h, std::make_pair(histories.size(), line));
      histories.push_back(std::move(h));
      counts.push_back(count);
    }
    position = end;
  }
  return Dataset(std::move(design), std::move(histories), std::move(counts));
}

Dataset read_history_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  return parse_history(in, warnings);
}

void write_history(std::ostream& out, const Dataset& data) {
  const auto& design = data.design();
  out << design_header(design) << '\n';
  for (std::size_t j = 0; j < data.unique_count(); ++j) {
    for (int t = 0; t < design.periods(); ++t) {
      if (t > 0) out << ' ';
      for (auto x : data.slice(j, t)) out << static_cast<int>(x) << ' ';
    }
    out << ' ' << data.counts()[j] << '\n';
  }
}

}  // namespace msstop
