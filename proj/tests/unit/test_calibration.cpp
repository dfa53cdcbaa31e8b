#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <tuple>

#include "retrogate/reaction/library.hpp"
#include "retrogate/reaction/negatives.hpp"
#include "retrogate/scoring/meta.hpp"
#include "retrogate/scoring/rgp.hpp"
#include "support.hpp"

using namespace retrogate;
using namespace retrogate::scoring;
using reaction::Reaction;

namespace {

const std::vector<Reaction> &corpus() {
  static const std::vector<Reaction> c = reaction::read_corpus(test_support::data_path("corpus_1k.rxn")).reactions;
  return c;
}

std::vector<LabeledScore> gaussians(std::uint64_t seed, std::size_t n, double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<LabeledScore> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    const double shift = pos ? separation : 0.0;
    out.push_back({g(rng) + shift, g(rng) + shift, static_cast<std::size_t>(rng() % 4), pos});
  }
  return out;
}

// Exhaustive evaluation of every grid pair, written without the library's
// confusion helper: the winner is the lexicographic maximum of
// (recall, precision, -thr_rgp, -thr_rp) among pairs meeting the target.
CalibrationResult exhaustive(const std::vector<LabeledScore> &data, double target, std::size_t points) {
  double lo_a = INFINITY, hi_a = -INFINITY, lo_b = INFINITY, hi_b = -INFINITY;
  for (const auto &d : data) {
    lo_a = std::min(lo_a, d.s_rgp), hi_a = std::max(hi_a, d.s_rgp);
    lo_b = std::min(lo_b, d.s_rp), hi_b = std::max(hi_b, d.s_rp);
  }
  std::vector<std::tuple<double, double, double, double>> rows; // recall, precision, -a, -b
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j < points; ++j) {
      const double a = lo_a + (hi_a - lo_a) * static_cast<double>(i) / static_cast<double>(points - 1);
      const double b = lo_b + (hi_b - lo_b) * static_cast<double>(j) / static_cast<double>(points - 1);
      int tp = 0, fp = 0, pos = 0;
      for (const auto &d : data) {
        pos += d.positive;
        if (d.n_ref == 0 || !(d.s_rgp > a) || !(d.s_rp > b))
          continue;
        (d.positive ? tp : fp)++;
      }
      const double p = tp + fp ? double(tp) / (tp + fp) : 0.0, r = double(tp) / pos;
      if (p >= target)
        rows.emplace_back(r, p, -a, -b);
    }
  if (rows.empty())
    return {};
  const auto best = *std::max_element(rows.begin(), rows.end());
  return {-std::get<2>(best), -std::get<3>(best), std::get<1>(best), std::get<0>(best), true};
}

} // namespace

TEST(Calibration, SeparableReachesPerfectPoint) {
  std::vector<LabeledScore> data;
  for (int i = 0; i < 40; ++i)
    data.push_back({0.6 + 0.01 * i, 0.55 + 0.01 * i, 2, true});
  for (int i = 0; i < 40; ++i)
    data.push_back({0.01 * i, 0.5 - 0.01 * i, 2, false});
  const CalibrationResult c = calibrate_thresholds(data, 0.8);
  EXPECT_TRUE(c.achieved);
  EXPECT_EQ(c.precision, 1.0);
  EXPECT_EQ(c.recall, 1.0);
}

TEST(Calibration, MatchesExhaustiveGridOnOverlappingGaussians) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto data = gaussians(seed, 400, 1.5);
    const CalibrationResult got = calibrate_thresholds(data, 0.8, 41);
    const CalibrationResult want = exhaustive(data, 0.8, 41);
    ASSERT_TRUE(want.achieved);
    EXPECT_TRUE(got.achieved);
    EXPECT_GE(got.precision, 0.8);
    EXPECT_EQ(got.thr_rgp, want.thr_rgp);
    EXPECT_EQ(got.thr_rp, want.thr_rp);
    EXPECT_EQ(got.precision, want.precision);
    EXPECT_EQ(got.recall, want.recall);
  }
}

TEST(Calibration, UnreachableTargetFallsBackToBestPrecision) {
  std::vector<LabeledScore> data;
  for (int i = 0; i < 20; ++i)
    data.push_back({0.5, 0.5, 1, i % 2 == 0}); // indistinguishable
  data.push_back({0.1, 0.1, 1, false});
  const CalibrationResult c = calibrate_thresholds(data, 0.8);
  EXPECT_FALSE(c.achieved);
  EXPECT_NEAR(c.precision, 0.5, 1e-12);
  try {
    calibrate_thresholds({{0.1, 0.2, 1, true}}, 0.8);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateData);
  }
}

TEST(Rgp, GradientMatchesFiniteDifferences) {
  FingerprintParams fp{2, 512};
  std::vector<std::vector<std::uint32_t>> xs;
  std::vector<int> ys;
  for (std::size_t i = 0; i < 60; ++i) {
    xs.push_back(reaction_features(corpus()[i * 13], fp));
    ys.push_back(static_cast<int>(i % 2));
  }
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  const std::size_t dim = 3 * 512 + 1;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> w(dim);
    for (double &x : w)
      x = g(rng);
    const double l2 = 0.01;
    const auto grad = LogisticModel::gradient(w, l2, xs, ys);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double h = 1e-5;
      std::vector<double> a = w, b = w;
      a[i] += h;
      b[i] -= h;
      const double fd = (LogisticModel::loss(a, l2, xs, ys) - LogisticModel::loss(b, l2, xs, ys)) / (2 * h);
      diff += (fd - grad[i]) * (fd - grad[i]);
      norm += grad[i] * grad[i];
    }
    EXPECT_LT(std::sqrt(diff / norm), 1e-5) << trial;
  }
}

TEST(Rgp, SeparableFeaturesGiveAucOne) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<std::uint32_t>> xs, test;
  std::vector<int> ys, test_y;
  for (int i = 0; i < 400; ++i) {
    const int y = i % 2;
    std::vector<std::uint32_t> x{static_cast<std::uint32_t>(y)}; // bit 0 or bit 1 marks the class
    for (int k = 0; k < 10; ++k)
      x.push_back(2 + static_cast<std::uint32_t>(rng() % 200));
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    (i < 300 ? xs : test).push_back(x);
    (i < 300 ? ys : test_y).push_back(y);
  }
  LogisticModel m(202, 1e-3);
  const auto history = m.fit(xs, ys, 100);
  for (std::size_t k = 1; k < history.size(); ++k)
    EXPECT_LE(history[k], history[k - 1]);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (std::size_t k = 0; k < test.size(); ++k) {
    scores.push_back(m.probability(test[k]));
    labels.push_back(test_y[k] == 1);
  }
  EXPECT_EQ(eval::roc_auc(scores, labels), 1.0);
}

TEST(Rgp, IdenticalClassesGiveChanceAuc) {
  RgpTrainOptions opts;
  opts.seed = 7;
  opts.epochs = 50;
  const auto r = train_rgp_baseline(corpus(), corpus(), opts);
  EXPECT_NEAR(r.heldout_auc, 0.5, 0.05);
  try {
    train_rgp_baseline(corpus(), {}, opts);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateData);
  }
}

TEST(Rgp, SeparatesCorpusFromGeneratedNegatives) {
  const auto lib = reaction::extract_templates(corpus(), 1).library;
  std::vector<Reaction> negatives;
  for (auto mode : {reaction::NegativeMode::Forward, reaction::NegativeMode::Retro2}) {
    reaction::NegativeOptions o;
    o.mode = mode;
    o.count = 500;
    o.seed = 42;
    auto part = reaction::generate_negatives(corpus(), lib, o);
    negatives.insert(negatives.end(), part.begin(), part.end());
  }
  RgpTrainOptions opts;
  opts.seed = 42;
  const auto r = train_rgp_baseline(corpus(), negatives, opts);
  std::cout << "held-out ROC-AUC " << r.heldout_auc << " (train " << r.train_size << ", held out "
            << r.heldout_size << ")\n";
  EXPECT_GT(r.heldout_auc, 0.7);
  for (std::size_t k = 1; k < r.loss_history.size(); ++k)
    EXPECT_LE(r.loss_history[k], r.loss_history[k - 1]);
  const double s = r.classifier.score(corpus()[0]);
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);

  std::stringstream a;
  r.classifier.write(a);
  std::stringstream in(a.str());
  const RgpBaseline back = RgpBaseline::read(in);
  EXPECT_EQ(back.score(corpus()[5]), r.classifier.score(corpus()[5]));
}
