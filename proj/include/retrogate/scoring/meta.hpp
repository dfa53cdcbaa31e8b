#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "retrogate/error.hpp"

namespace retrogate::scoring {

/// max(s_RGP, s_RP) when the reaction has at least one precedent, else 0.
/// Both scores are expected on a common [0, 1] scale.
inline double meta_continuous(double s_rgp, double s_rp, std::size_t n_ref) {
  return n_ref > 0 ? std::max(s_rgp, s_rp) : 0.0;
}

/// Accepts a reaction iff both scores strictly exceed their thresholds and
/// it has at least one precedent.
inline bool meta_binary(double s_rgp, double s_rp, std::size_t n_ref, double thr_rgp, double thr_rp) {
  return s_rgp > thr_rgp && s_rp > thr_rp && n_ref > 0;
}

struct LabeledScore {
  double s_rgp = 0.0;
  double s_rp = 0.0;
  std::size_t n_ref = 0;
  bool positive = false;
};

struct CalibrationResult {
  double thr_rgp = 0.0;
  double thr_rp = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool achieved = false; // false: target unreachable, best-precision point returned
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
};

inline Confusion evaluate_thresholds(const std::vector<LabeledScore> &data, double thr_rgp, double thr_rp) {
  Confusion c;
  for (const LabeledScore &d : data) {
    const bool accept = meta_binary(d.s_rgp, d.s_rp, d.n_ref, thr_rgp, thr_rp);
    if (accept && d.positive)
      ++c.tp;
    else if (accept)
      ++c.fp;
    else if (d.positive)
      ++c.fn;
  }
  return c;
}

/// `points` evenly spaced values from the minimum to the maximum of `values`.
inline std::vector<double> uniform_grid(const std::vector<double> &values, std::size_t points) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi || points < 2)
    return {*lo};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

/// Grid search over (thr_RGP, thr_RP) for the pair with precision >= target
/// and maximal recall; ties go to higher precision, then lower thresholds.
/// When no grid point reaches the target, the highest-precision point is
/// returned with achieved = false.
inline CalibrationResult calibrate_thresholds(const std::vector<LabeledScore> &data, double target_precision,
                                              std::size_t grid_points = 101) {
  std::size_t positives = 0;
  for (const auto &d : data)
    positives += d.positive;
  if (positives == 0 || positives == data.size())
    throw Error(ErrorCode::DegenerateData, "calibration needs both positive and negative examples");
  std::vector<double> rgp, rp;
  for (const auto &d : data) {
    rgp.push_back(d.s_rgp);
    rp.push_back(d.s_rp);
  }
  const auto grid_rgp = uniform_grid(rgp, grid_points), grid_rp = uniform_grid(rp, grid_points);

  CalibrationResult best, fallback;
  bool have_best = false, have_fallback = false;
  for (double a : grid_rgp)
    for (double b : grid_rp) {
      const Confusion c = evaluate_thresholds(data, a, b);
      const double p = c.precision(), r = c.recall();
      if (p >= target_precision) {
        if (!have_best || r > best.recall || (r == best.recall && p > best.precision)) {
          best = {a, b, p, r, true};
          have_best = true;
        }
      }
      if (!have_fallback || p > fallback.precision || (p == fallback.precision && r > fallback.recall)) {
        fallback = {a, b, p, r, false};
        have_fallback = true;
      }
    }
  // Grids ascend, so the first point found among equals has the lowest
  // thresholds (RGP first, then RP).
  return have_best ? best : fallback;
}

} // namespace retrogate::scoring
