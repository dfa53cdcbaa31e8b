#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "retrogate/reaction/reaction.hpp"
#include "retrogate/scoring/tokens.hpp"

namespace retrogate::scoring {

/// Anything that assigns each token of a sequence its conditional
/// log-probability given the preceding tokens. Implementations must be
/// deterministic and safe to call concurrently.
class TokenProbabilityModel {
public:
  virtual ~TokenProbabilityModel() = default;
  virtual std::vector<double> log_probs(const std::vector<std::string> &tokens) const = 0;
};

/// Order-k token Markov chain with additive smoothing. The vocabulary holds
/// every training token plus an unknown token and an end marker, so each
/// context's distribution sums to one over vocabulary_size() outcomes.
class MarkovModel final : public TokenProbabilityModel {
public:
  static constexpr int kFormatVersion = 1;
  static constexpr const char *kUnknown = "<unk>";
  static constexpr const char *kEnd = "</s>";

  MarkovModel() = default;

  static MarkovModel train(const std::vector<std::vector<std::string>> &sequences, int order, double smoothing) {
    if (sequences.empty())
      throw Error(ErrorCode::EmptyCorpus, "cannot train a token model on an empty corpus");
    if (order < 1)
      throw Error(ErrorCode::InvalidParams, "model order must be >= 1");
    if (!(smoothing > 0.0) || !std::isfinite(smoothing))
      throw Error(ErrorCode::InvalidParams, "smoothing must be positive");
    MarkovModel m;
    m.order_ = order;
    m.smoothing_ = smoothing;
    std::map<std::string, std::uint32_t> seen;
    seen[kUnknown] = 0;
    seen[kEnd] = 0;
    for (const auto &s : sequences)
      for (const auto &t : s)
        seen[t] = 0;
    for (auto &[token, id] : seen) {
      id = static_cast<std::uint32_t>(m.vocab_.size());
      m.vocab_.push_back(token);
    }
    m.ids_ = std::move(seen);
    for (const auto &s : sequences) {
      const auto ids = m.encode(s);
      Context ctx(static_cast<std::size_t>(order), m.begin_id());
      for (std::uint32_t id : ids) {
        m.add(ctx, id);
        ctx.erase(ctx.begin());
        ctx.push_back(id);
      }
      m.add(ctx, m.ids_.at(kEnd));
    }
    return m;
  }

  int order() const noexcept { return order_; }
  double smoothing() const noexcept { return smoothing_; }
  std::size_t vocabulary_size() const noexcept { return vocab_.size(); }
  const std::vector<std::string> &vocabulary() const noexcept { return vocab_; }
  std::uint64_t corpus_hash = 0;

  std::vector<double> log_probs(const std::vector<std::string> &tokens) const override {
    std::vector<double> out;
    out.reserve(tokens.size());
    Context ctx(static_cast<std::size_t>(order_), begin_id());
    for (std::uint32_t id : encode(tokens)) {
      out.push_back(log_prob(ctx, id));
      ctx.erase(ctx.begin());
      ctx.push_back(id);
    }
    return out;
  }

  /// log P(token | context) for a context of exactly order() ids.
  double log_prob(const std::vector<std::uint32_t> &ctx, std::uint32_t id) const {
    const auto v = static_cast<double>(vocab_.size());
    auto it = counts_.find(ctx);
    double joint = 0.0, total = 0.0;
    if (it != counts_.end()) {
      total = static_cast<double>(it->second.total);
      auto jt = it->second.next.find(id);
      if (jt != it->second.next.end())
        joint = static_cast<double>(jt->second);
    }
    return std::log((joint + smoothing_) / (total + smoothing_ * v));
  }

  std::uint32_t id_of(const std::string &token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? ids_.at(kUnknown) : it->second;
  }
  std::uint32_t begin_id() const noexcept { return static_cast<std::uint32_t>(vocab_.size()); }

  /// Contexts observed in training, for inspection.
  std::vector<std::vector<std::uint32_t>> contexts() const {
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto &[ctx, c] : counts_)
      out.push_back(ctx);
    return out;
  }

  /// exp of the mean negative log-probability per token.
  double perplexity(const std::vector<std::vector<std::string>> &sequences) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &s : sequences)
      for (double lp : log_probs(s)) {
        sum -= lp;
        ++n;
      }
    return n == 0 ? 1.0 : std::exp(sum / static_cast<double>(n));
  }

  void write(std::ostream &out) const {
    char buf[64];
    out << "# token markov model\n";
    out << "version\t" << kFormatVersion << "\n";
    out << "order\t" << order_ << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", smoothing_);
    out << "smoothing\t" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(corpus_hash));
    out << "corpus_hash\t" << buf << "\n";
    out << "vocab\t" << vocab_.size() << "\n";
    for (const auto &t : vocab_)
      out << t << "\n";
    std::size_t rows = 0;
    for (const auto &[ctx, c] : counts_)
      rows += c.next.size();
    out << "counts\t" << rows << "\n";
    for (const auto &[ctx, c] : counts_)
      for (const auto &[id, n] : c.next) {
        for (std::size_t i = 0; i < ctx.size(); ++i)
          out << (i ? " " : "") << ctx[i];
        out << '\t' << id << '\t' << n << '\n';
      }
  }

  static MarkovModel read(std::istream &in) {
    auto fail = [](const std::string &why) { return Error(ErrorCode::ParseError, "token model: " + why); };
    MarkovModel m;
    std::string line;
    auto next = [&]() {
      do {
        if (!std::getline(in, line))
          throw fail("unexpected end of file");
      } while (!line.empty() && line[0] == '#');
      return line;
    };
    auto field = [&](const std::string &name) {
      const std::string l = next();
      const auto tab = l.find('\t');
      if (tab == std::string::npos || l.substr(0, tab) != name)
        throw fail("expected '" + name + "'");
      return l.substr(tab + 1);
    };
    try {
      if (std::stoi(field("version")) != kFormatVersion)
        throw fail("unsupported version");
      m.order_ = std::stoi(field("order"));
      m.smoothing_ = std::stod(field("smoothing"));
      m.corpus_hash = std::stoull(field("corpus_hash"), nullptr, 16);
      const std::size_t v = std::stoull(field("vocab"));
      for (std::size_t i = 0; i < v; ++i) {
        // Raw read: "#" is a token here, not a comment.
        if (!std::getline(in, line))
          throw fail("unexpected end of file");
        m.vocab_.push_back(line);
        m.ids_[m.vocab_.back()] = static_cast<std::uint32_t>(i);
      }
      if (!m.ids_.count(kUnknown) || !m.ids_.count(kEnd))
        throw fail("vocabulary lacks special tokens");
      const std::size_t rows = std::stoull(field("counts"));
      for (std::size_t r = 0; r < rows; ++r) {
        std::stringstream ss(next());
        std::string ctx_text, id_text, n_text;
        std::getline(ss, ctx_text, '\t');
        std::getline(ss, id_text, '\t');
        std::getline(ss, n_text, '\t');
        Context ctx;
        std::stringstream cs(ctx_text);
        for (std::uint32_t x; cs >> x;)
          ctx.push_back(x);
        if (ctx.size() != static_cast<std::size_t>(m.order_))
          throw fail("context length does not match order");
        auto &c = m.counts_[ctx];
        const std::uint64_t n = std::stoull(n_text);
        c.next[static_cast<std::uint32_t>(std::stoul(id_text))] += n;
        c.total += n;
      }
    } catch (const std::logic_error &) {
      throw fail("malformed number");
    }
    if (m.order_ < 1 || !(m.smoothing_ > 0.0))
      throw fail("invalid parameters");
    return m;
  }

  static MarkovModel load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw Error(ErrorCode::Io, "cannot open token model " + path);
    return read(in);
  }

  void save(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
      throw Error(ErrorCode::Io, "cannot write token model " + path);
    write(out);
  }

private:
  using Context = std::vector<std::uint32_t>;
  struct Counts {
    std::map<std::uint32_t, std::uint64_t> next;
    std::uint64_t total = 0;
  };

  std::vector<std::uint32_t> encode(const std::vector<std::string> &tokens) const {
    std::vector<std::uint32_t> out;
    out.reserve(tokens.size());
    for (const auto &t : tokens)
      out.push_back(id_of(t));
    return out;
  }

  void add(const Context &ctx, std::uint32_t id) {
    auto &c = counts_[ctx];
    ++c.next[id];
    ++c.total;
  }

  int order_ = 1;
  double smoothing_ = 1.0;
  std::vector<std::string> vocab_;
  std::map<std::string, std::uint32_t> ids_;
  std::map<Context, Counts> counts_;
};

/// Trains on the serialized form of every corpus reaction.
inline MarkovModel train_markov_model(const std::vector<Reaction> &corpus, int order = 3, double smoothing = 0.05) {
  std::vector<std::vector<std::string>> sequences;
  for (const Reaction &r : corpus)
    sequences.push_back(serialize(r).tokens);
  MarkovModel m = MarkovModel::train(sequences, order, smoothing);
  m.corpus_hash = reaction::corpus_hash(corpus);
  return m;
}

} // namespace retrogate::scoring
