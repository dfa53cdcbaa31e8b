#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "retrogate/reaction/template.hpp"

namespace retrogate::reaction {

/// Templates ordered by decreasing popularity, then by text.
class TemplateLibrary {
public:
  TemplateLibrary() = default;
  explicit TemplateLibrary(std::vector<ReactionTemplate> templates) : templates_(std::move(templates)) {
    std::sort(templates_.begin(), templates_.end(), [](const auto &a, const auto &b) {
      return a.popularity != b.popularity ? a.popularity > b.popularity : a.text < b.text;
    });
    for (std::size_t i = 0; i < templates_.size(); ++i)
      by_text_[templates_[i].text] = i;
  }

  std::size_t size() const noexcept { return templates_.size(); }
  bool empty() const noexcept { return templates_.empty(); }
  const ReactionTemplate &operator[](std::size_t i) const { return templates_[i]; }
  const std::vector<ReactionTemplate> &templates() const noexcept { return templates_; }

  std::optional<std::size_t> find(const std::string &text) const {
    auto it = by_text_.find(text);
    if (it == by_text_.end())
      return std::nullopt;
    return it->second;
  }

  std::uint64_t total_popularity() const {
    std::uint64_t total = 0;
    for (const auto &t : templates_)
      total += static_cast<std::uint64_t>(t.popularity);
    return total;
  }

  /// One "template<TAB>count" line per template.
  void write(std::ostream &out) const {
    for (const auto &t : templates_)
      out << t.text << '\t' << t.popularity << '\n';
  }

  static TemplateLibrary read(std::istream &in, int radius = 1) {
    std::vector<ReactionTemplate> templates;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      if (line.empty() || line[0] == '#')
        continue;
      const auto tab = line.find('\t');
      int count = 1;
      if (tab != std::string::npos) {
        try {
          count = std::stoi(line.substr(tab + 1));
        } catch (const std::exception &) {
          throw Error(ErrorCode::ParseError, "bad popularity on line " + std::to_string(number));
        }
        if (count < 1)
          throw Error(ErrorCode::ParseError, "popularity must be >= 1 on line " + std::to_string(number));
      }
      try {
        templates.push_back(parse_template(line.substr(0, tab), radius, count));
      } catch (const Error &e) {
        throw Error(e.code(), "line " + std::to_string(number) + ": " + e.detail(), e.offset());
      }
    }
    return TemplateLibrary(std::move(templates));
  }

  static TemplateLibrary load(const std::string &path, int radius = 1) {
    std::ifstream in(path);
    if (!in)
      throw Error(ErrorCode::Io, "cannot open template library " + path);
    return read(in, radius);
  }

  void save(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
      throw Error(ErrorCode::Io, "cannot write template library " + path);
    write(out);
  }

private:
  std::vector<ReactionTemplate> templates_;
  std::map<std::string, std::size_t> by_text_;
};

struct ExtractionResult {
  TemplateLibrary library;
  /// Template text per corpus reaction; empty when extraction failed.
  std::vector<std::string> per_reaction;
  std::vector<std::pair<std::string, std::string>> failures; // (reaction id, message)
};

/// Extracts one template per reaction and merges identical ones, counting
/// popularity.
inline ExtractionResult extract_templates(const std::vector<Reaction> &corpus, int radius = 1) {
  ExtractionResult result;
  std::map<std::string, ReactionTemplate> merged;
  for (const Reaction &rxn : corpus) {
    try {
      ReactionTemplate t = extract_template(rxn, radius);
      result.per_reaction.push_back(t.text);
      auto [it, inserted] = merged.try_emplace(t.text, t);
      if (!inserted)
        ++it->second.popularity;
    } catch (const Error &e) {
      result.per_reaction.emplace_back();
      result.failures.emplace_back(rxn.id, e.what());
    }
  }
  std::vector<ReactionTemplate> templates;
  for (auto &[text, t] : merged)
    templates.push_back(std::move(t));
  result.library = TemplateLibrary(std::move(templates));
  return result;
}

} // namespace retrogate::reaction
