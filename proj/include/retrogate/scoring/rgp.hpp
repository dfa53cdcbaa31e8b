#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <string>
#include <vector>

#include "retrogate/chem/fingerprint.hpp"
#include "retrogate/eval/metrics.hpp"
#include "retrogate/hash.hpp"
#include "retrogate/reaction/reaction.hpp"

namespace retrogate::scoring {

/// Anything mapping a reaction to a plausibility score in [0, 1].
class PlausibilityClassifier {
public:
  virtual ~PlausibilityClassifier() = default;
  virtual double score(const reaction::Reaction &rxn) const = 0;
};

struct FingerprintParams {
  int radius = 2;
  int n_bits = 1024;
};

/// Sparse binary features: product bits, OR of reactant bits, and their
/// XOR, laid out in three consecutive blocks of n_bits.
inline std::vector<std::uint32_t> reaction_features(const reaction::Reaction &rxn, const FingerprintParams &fp) {
  const chem::Fingerprint product = chem::circular_fingerprint(rxn.product, fp.radius, fp.n_bits);
  chem::Fingerprint reactants(fp.radius, fp.n_bits);
  for (const chem::Molecule &m : rxn.reactants)
    reactants = reactants | chem::circular_fingerprint(m, fp.radius, fp.n_bits);
  std::vector<std::uint32_t> out;
  const auto n = static_cast<std::uint32_t>(fp.n_bits);
  for (std::uint32_t b : product.on_bits())
    out.push_back(b);
  for (std::uint32_t b : reactants.on_bits())
    out.push_back(n + b);
  for (std::uint32_t b : (product ^ reactants).on_bits())
    out.push_back(2 * n + b);
  return out;
}

/// L2-regularised logistic regression over sparse binary features.
/// The bias is not regularised.
class LogisticModel {
public:
  LogisticModel() = default;
  explicit LogisticModel(std::size_t dim, double l2 = 1e-3) : weights(dim, 0.0), l2(l2) {}

  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 1e-3;

  double logit(const std::vector<std::uint32_t> &x) const {
    double z = bias;
    for (std::uint32_t i : x)
      z += weights[i];
    return z;
  }

  double probability(const std::vector<std::uint32_t> &x) const { return 1.0 / (1.0 + std::exp(-logit(x))); }

  /// Mean logistic loss plus (l2 / 2) |w|^2. Parameters are (weights..., bias).
  static double loss(const std::vector<double> &params, double l2, const std::vector<std::vector<std::uint32_t>> &xs,
                     const std::vector<int> &ys) {
    const std::size_t dim = params.size() - 1;
    double s = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double z = params[dim];
      for (std::uint32_t i : xs[k])
        z += params[i];
      // log(1 + e^z) - y z, computed stably.
      const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      s += softplus - ys[k] * z;
    }
    double reg = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      reg += params[i] * params[i];
    return s / static_cast<double>(xs.size()) + 0.5 * l2 * reg;
  }

  static std::vector<double> gradient(const std::vector<double> &params, double l2,
                                      const std::vector<std::vector<std::uint32_t>> &xs, const std::vector<int> &ys) {
    const std::size_t dim = params.size() - 1;
    std::vector<double> g(params.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double z = params[dim];
      for (std::uint32_t i : xs[k])
        z += params[i];
      const double r = (1.0 / (1.0 + std::exp(-z)) - ys[k]) * inv_n;
      for (std::uint32_t i : xs[k])
        g[i] += r;
      g[dim] += r;
    }
    for (std::size_t i = 0; i < dim; ++i)
      g[i] += l2 * params[i];
    return g;
  }

  std::vector<double> params() const {
    std::vector<double> p = weights;
    p.push_back(bias);
    return p;
  }

  void set_params(const std::vector<double> &p) {
    weights.assign(p.begin(), p.end() - 1);
    bias = p.back();
  }

  /// Full-batch gradient descent with Armijo backtracking; the loss never
  /// increases between epochs. Returns the loss after every epoch (entry 0
  /// is the starting loss).
  std::vector<double> fit(const std::vector<std::vector<std::uint32_t>> &xs, const std::vector<int> &ys,
                          int epochs = 200, double tolerance = 1e-8) {
    std::vector<double> p = params();
    double f = loss(p, l2, xs, ys);
    std::vector<double> history{f};
    double step = 1.0;
    for (int e = 0; e < epochs; ++e) {
      const std::vector<double> g = gradient(p, l2, xs, ys);
      double gg = 0.0;
      for (double x : g)
        gg += x * x;
      if (gg < tolerance * tolerance)
        break;
      step *= 2.0;
      std::vector<double> trial(p.size());
      double ft = f;
      for (int tries = 0; tries < 60; ++tries) {
        for (std::size_t i = 0; i < p.size(); ++i)
          trial[i] = p[i] - step * g[i];
        ft = loss(trial, l2, xs, ys);
        if (ft <= f - 1e-4 * step * gg)
          break;
        step *= 0.5;
      }
      if (ft > f)
        break; // no descent step found
      p.swap(trial);
      f = ft;
      history.push_back(f);
    }
    set_params(p);
    return history;
  }
};

/// Fingerprint logistic-regression plausibility baseline.
class RgpBaseline final : public PlausibilityClassifier {
public:
  static constexpr int kFormatVersion = 1;

  FingerprintParams fingerprint;
  LogisticModel model;
  std::uint64_t corpus_hash = 0;

  double score(const reaction::Reaction &rxn) const override {
    return model.probability(reaction_features(rxn, fingerprint));
  }

  void write(std::ostream &out) const {
    char buf[64];
    out << "# fingerprint logistic plausibility model\n";
    out << "version\t" << kFormatVersion << "\n";
    out << "radius\t" << fingerprint.radius << "\n";
    out << "n_bits\t" << fingerprint.n_bits << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", model.l2);
    out << "l2\t" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(corpus_hash));
    out << "corpus_hash\t" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", model.bias);
    out << "bias\t" << buf << "\n";
    out << "weights\t" << model.weights.size() << "\n";
    for (double w : model.weights) {
      std::snprintf(buf, sizeof buf, "%.17g", w);
      out << buf << "\n";
    }
  }

  static RgpBaseline read(std::istream &in) {
    auto fail = [](const std::string &why) { return Error(ErrorCode::ParseError, "plausibility model: " + why); };
    RgpBaseline m;
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
      m.fingerprint.radius = std::stoi(field("radius"));
      m.fingerprint.n_bits = std::stoi(field("n_bits"));
      m.model.l2 = std::stod(field("l2"));
      m.corpus_hash = std::stoull(field("corpus_hash"), nullptr, 16);
      m.model.bias = std::stod(field("bias"));
      const std::size_t n = std::stoull(field("weights"));
      if (n != 3 * static_cast<std::size_t>(m.fingerprint.n_bits))
        throw fail("weight count does not match fingerprint width");
      m.model.weights.resize(n);
      for (double &w : m.model.weights)
        w = std::stod(next());
    } catch (const std::logic_error &) {
      throw fail("malformed number");
    }
    return m;
  }

  static RgpBaseline load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw Error(ErrorCode::Io, "cannot open plausibility model " + path);
    return read(in);
  }

  void save(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
      throw Error(ErrorCode::Io, "cannot write plausibility model " + path);
    write(out);
  }
};

struct RgpTrainOptions {
  FingerprintParams fingerprint;
  double l2 = 1e-3;
  int epochs = 200;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct RgpTrainResult {
  RgpBaseline classifier;
  std::vector<double> loss_history;
  double heldout_auc = 0.0;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
};

/// Trains on positives (label 1) against negatives (label 0). The held-out
/// fold is chosen by a seeded hash of each feature vector, so identical
/// reactions always fall in the same fold whatever their label; about
/// `holdout_fraction` of each class is held out for the reported ROC-AUC.
inline RgpTrainResult train_rgp_baseline(const std::vector<reaction::Reaction> &positives,
                                         const std::vector<reaction::Reaction> &negatives,
                                         const RgpTrainOptions &opts = {}) {
  if (positives.empty() || negatives.empty())
    throw Error(ErrorCode::DegenerateData, "training needs both positive and negative reactions");
  if (!chem::valid_fingerprint_width(opts.fingerprint.n_bits) || opts.fingerprint.radius < 0)
    throw Error(ErrorCode::InvalidParams, "bad fingerprint parameters");
  if (!(opts.holdout_fraction >= 0.0 && opts.holdout_fraction < 1.0))
    throw Error(ErrorCode::InvalidParams, "holdout fraction must be in [0, 1)");
  std::vector<std::vector<std::uint32_t>> train_x, test_x;
  std::vector<int> train_y, test_y;
  const auto cut = static_cast<std::uint64_t>(opts.holdout_fraction * 1e6);
  auto split = [&](const std::vector<reaction::Reaction> &rxns, int label) {
    for (const reaction::Reaction &r : rxns) {
      auto x = reaction_features(r, opts.fingerprint);
      std::uint64_t h = mix64(opts.seed ^ 0x9e3779b97f4a7c15ull);
      for (std::uint32_t i : x)
        h = hash_combine(h, i);
      if (h % 1000000 < cut) {
        test_x.push_back(std::move(x));
        test_y.push_back(label);
      } else {
        train_x.push_back(std::move(x));
        train_y.push_back(label);
      }
    }
  };
  split(positives, 1);
  split(negatives, 0);
  if (std::count(train_y.begin(), train_y.end(), 1) == 0 || std::count(train_y.begin(), train_y.end(), 0) == 0)
    throw Error(ErrorCode::DegenerateData, "training split lacks a class");

  RgpTrainResult result;
  result.classifier.fingerprint = opts.fingerprint;
  result.classifier.model = LogisticModel(3 * static_cast<std::size_t>(opts.fingerprint.n_bits), opts.l2);
  result.loss_history = result.classifier.model.fit(train_x, train_y, opts.epochs);
  result.train_size = train_x.size();
  result.heldout_size = test_x.size();
  if (std::count(test_y.begin(), test_y.end(), 1) > 0 && std::count(test_y.begin(), test_y.end(), 0) > 0) {
    std::vector<double> scores;
    std::vector<bool> labels;
    for (std::size_t k = 0; k < test_x.size(); ++k) {
      scores.push_back(result.classifier.model.logit(test_x[k]));
      labels.push_back(test_y[k] == 1);
    }
    result.heldout_auc = eval::roc_auc(scores, labels);
  } else {
    result.heldout_auc = std::nan("");
  }
  return result;
}

} // namespace retrogate::scoring
