#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "retrogate/reaction/reaction.hpp"
#include "retrogate/retrieval/keys.hpp"

namespace retrogate::retrieval {

/// Reaction ids grouped by coarse and fine transformation key. Immutable
/// after construction; queries are safe from several threads.
class ReferenceIndex {
public:
  using Clusters = std::map<std::string, std::vector<std::string>>; // ids sorted

  std::size_t corpus_size = 0;
  std::uint64_t corpus_hash = 0;
  Clusters coarse;
  Clusters fine;
  std::vector<std::string> no_op; // reactions with an empty center
  std::vector<reaction::CorpusIssue> issues;

  static constexpr int kFormatVersion = 1;

  std::size_t cluster_count() const { return coarse.size() + fine.size(); }

  const std::vector<std::string> *coarse_cluster(const std::string &key) const { return find(coarse, key); }
  const std::vector<std::string> *fine_cluster(const std::string &key) const { return find(fine, key); }

  /// Sorted text form: header, then one line per cluster. Bit-exact for a
  /// fixed corpus.
  void write(std::ostream &out) const {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(corpus_hash));
    out << "# reference index\n";
    out << "version\t" << kFormatVersion << "\n";
    out << "corpus_hash\t" << hash << "\n";
    out << "corpus_size\t" << corpus_size << "\n";
    auto dump = [&](char tag, const Clusters &clusters) {
      for (const auto &[key, ids] : clusters) {
        out << tag << '\t' << key;
        for (const std::string &id : ids)
          out << '\t' << id;
        out << '\n';
      }
    };
    dump('C', coarse);
    dump('F', fine);
    if (!no_op.empty()) {
      out << 'N';
      for (const std::string &id : no_op)
        out << '\t' << id;
      out << '\n';
    }
  }

  static ReferenceIndex read(std::istream &in) {
    ReferenceIndex index;
    std::string line;
    std::size_t number = 0;
    bool versioned = false;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty() || line[0] == '#')
        continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      for (std::string f; std::getline(ss, f, '\t');)
        fields.push_back(f);
      auto fail = [&](const std::string &what) {
        return Error(ErrorCode::ParseError, "index line " + std::to_string(number) + ": " + what);
      };
      const std::string &tag = fields[0];
      try {
        if (tag == "version") {
          if (fields.size() != 2 || std::stoi(fields[1]) != kFormatVersion)
            throw fail("unsupported format version");
          versioned = true;
        } else if (tag == "corpus_hash" && fields.size() == 2) {
          index.corpus_hash = std::stoull(fields[1], nullptr, 16);
        } else if (tag == "corpus_size" && fields.size() == 2) {
          index.corpus_size = std::stoull(fields[1]);
        } else if ((tag == "C" || tag == "F") && fields.size() >= 3) {
          (tag == "C" ? index.coarse : index.fine)[fields[1]].assign(fields.begin() + 2, fields.end());
        } else if (tag == "N") {
          index.no_op.assign(fields.begin() + 1, fields.end());
        } else {
          throw fail("unrecognised record");
        }
      } catch (const std::logic_error &) {
        throw fail("malformed number");
      }
    }
    if (!versioned)
      throw Error(ErrorCode::ParseError, "index has no version header");
    return index;
  }

  static ReferenceIndex load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw Error(ErrorCode::Io, "cannot open index " + path);
    return read(in);
  }

  void save(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
      throw Error(ErrorCode::Io, "cannot write index " + path);
    write(out);
  }

private:
  static const std::vector<std::string> *find(const Clusters &c, const std::string &key) {
    auto it = c.find(key);
    return it == c.end() ? nullptr : &it->second;
  }
};

/// Indexes every reaction under both keys. Reactions whose keys cannot be
/// computed are reported in `issues` and skipped; duplicate ids are an
/// error.
inline ReferenceIndex build_index(const std::vector<reaction::Reaction> &corpus) {
  ReferenceIndex index;
  index.corpus_size = corpus.size();
  index.corpus_hash = reaction::corpus_hash(corpus);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const reaction::Reaction &rxn = corpus[i];
    if (!ids.insert(rxn.id).second)
      throw Error(ErrorCode::DuplicateId, "duplicate reaction id '" + rxn.id + "'");
    PatternKeys keys;
    try {
      keys = pattern_keys(rxn);
    } catch (const Error &e) {
      index.issues.push_back({i + 1, rxn.id + ": " + e.what()});
      continue;
    }
    if (keys.coarse == kNoOpKey) {
      index.no_op.push_back(rxn.id);
      continue;
    }
    index.coarse[keys.coarse].push_back(rxn.id);
    index.fine[keys.fine].push_back(rxn.id);
  }
  for (auto *clusters : {&index.coarse, &index.fine})
    for (auto &[key, members] : *clusters)
      std::sort(members.begin(), members.end());
  std::sort(index.no_op.begin(), index.no_op.end());
  return index;
}

/// Number of distinct precedents in the query's coarse and fine clusters,
/// not counting the query itself. Unknown or empty-center reactions give 0.
inline std::size_t n_ref(const PatternKeys &keys, const std::string &query_id, const ReferenceIndex &index) {
  if (keys.coarse == kNoOpKey)
    return 0;
  std::set<std::string> refs;
  for (const auto *ids : {index.coarse_cluster(keys.coarse), index.fine_cluster(keys.fine)})
    if (ids)
      refs.insert(ids->begin(), ids->end());
  if (!query_id.empty())
    refs.erase(query_id);
  return refs.size();
}

inline std::size_t n_ref(const reaction::Reaction &rxn, const ReferenceIndex &index) {
  PatternKeys keys;
  try {
    keys = pattern_keys(rxn);
  } catch (const Error &) {
    return 0;
  }
  return n_ref(keys, rxn.id, index);
}

inline double rrs_from_count(std::size_t n) { return std::log(static_cast<double>(n) + 1.0); }

inline double rrs_score(const reaction::Reaction &rxn, const ReferenceIndex &index) {
  return rrs_from_count(n_ref(rxn, index));
}

} // namespace retrogate::retrieval
