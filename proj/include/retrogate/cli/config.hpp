#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "retrogate/error.hpp"

namespace retrogate::cli {

/// Every tunable of the pipeline. Values come from defaults, then a
/// key=value file, then command-line flags.
struct Config {
  // paths
  std::string corpus;
  std::string negatives;
  std::string stock;
  std::string templates;
  std::string index;
  std::string prior;
  std::string rgp;
  std::string thresholds;
  std::string data_dir;
  std::string in;
  std::string out;
  std::string scores;
  std::string labels;
  std::string target;
  std::string model;
  // scoring
  double alpha = 1.0;
  double beta = 1.5;
  double gamma = 2.5;
  double epsilon = 1e-6;
  double thr_rgp = 0.5;
  double thr_rp = 0.5;
  double target_precision = 0.8;
  int template_radius = 1;
  int markov_order = 3;
  double smoothing = 0.05;
  // classifier
  int fp_radius = 2;
  int fp_bits = 1024;
  double l2 = 1e-3;
  int epochs = 200;
  double holdout_fraction = 0.2;
  // negatives
  std::string mode = "forward";
  std::size_t n = 500;
  bool popularity_weighted = false;
  // search
  std::size_t expansion_limit = 500;
  std::size_t top_k = 0;
  std::size_t max_candidates = 50;
  bool filter = true;
  // service
  std::string addr; // empty: REVIEW_ADDR or 127.0.0.1:8077
  // run
  std::uint64_t seed = 42;
  bool quiet = false;
};

namespace detail {

struct Field {
  std::function<void(Config &, const std::string &)> set;
  std::function<std::string(const Config &)> get;
};

inline std::string fmt_double(double v) {
  if (std::isinf(v))
    return v < 0 ? "-inf" : "inf";
  // Shortest of %.15g / %.17g that reads back exactly.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v)
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string &key, const std::string &v) {
  if (v == "-inf")
    return -std::numeric_limits<double>::infinity();
  if (v == "inf")
    return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::logic_error &) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x))
    throw Error(ErrorCode::InvalidArgument, key + ": expected a number, got '" + v + "'");
  return x;
}

inline long long parse_int(const std::string &key, const std::string &v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::logic_error &) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw Error(ErrorCode::InvalidArgument, key + ": expected an integer, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw Error(ErrorCode::InvalidArgument, key + ": expected true or false, got '" + v + "'");
}

template <class T> Field text(T Config::*m) {
  return {[m](Config &c, const std::string &v) { c.*m = v; }, [m](const Config &c) { return c.*m; }};
}

inline Field real(double Config::*m) {
  return {[m](Config &c, const std::string &v) { c.*m = parse_double("", v); },
          [m](const Config &c) { return fmt_double(c.*m); }};
}

template <class T> Field integer(T Config::*m) {
  return {[m](Config &c, const std::string &v) {
            const long long x = parse_int("", v);
            if constexpr (std::is_unsigned_v<T>)
              if (x < 0)
                throw Error(ErrorCode::InvalidArgument, "expected a non-negative integer, got '" + v + "'");
            c.*m = static_cast<T>(x);
          },
          [m](const Config &c) { return std::to_string(c.*m); }};
}

inline Field boolean(bool Config::*m) {
  return {[m](Config &c, const std::string &v) { c.*m = parse_bool("", v); },
          [m](const Config &c) { return std::string(c.*m ? "true" : "false"); }};
}

} // namespace detail

inline const std::map<std::string, detail::Field> &config_fields() {
  using namespace detail;
  static const std::map<std::string, Field> fields = {
      {"corpus", text(&Config::corpus)},
      {"negatives", text(&Config::negatives)},
      {"stock", text(&Config::stock)},
      {"templates", text(&Config::templates)},
      {"index", text(&Config::index)},
      {"prior", text(&Config::prior)},
      {"rgp", text(&Config::rgp)},
      {"thresholds", text(&Config::thresholds)},
      {"data_dir", text(&Config::data_dir)},
      {"in", text(&Config::in)},
      {"out", text(&Config::out)},
      {"scores", text(&Config::scores)},
      {"labels", text(&Config::labels)},
      {"target", text(&Config::target)},
      {"model", text(&Config::model)},
      {"alpha", real(&Config::alpha)},
      {"beta", real(&Config::beta)},
      {"gamma", real(&Config::gamma)},
      {"epsilon", real(&Config::epsilon)},
      {"thr_rgp", real(&Config::thr_rgp)},
      {"thr_rp", real(&Config::thr_rp)},
      {"target_precision", real(&Config::target_precision)},
      {"template_radius", integer(&Config::template_radius)},
      {"markov_order", integer(&Config::markov_order)},
      {"smoothing", real(&Config::smoothing)},
      {"fp_radius", integer(&Config::fp_radius)},
      {"fp_bits", integer(&Config::fp_bits)},
      {"l2", real(&Config::l2)},
      {"epochs", integer(&Config::epochs)},
      {"holdout_fraction", real(&Config::holdout_fraction)},
      {"mode", text(&Config::mode)},
      {"n", integer(&Config::n)},
      {"popularity_weighted", boolean(&Config::popularity_weighted)},
      {"expansion_limit", integer(&Config::expansion_limit)},
      {"top_k", integer(&Config::top_k)},
      {"max_candidates", integer(&Config::max_candidates)},
      {"filter", boolean(&Config::filter)},
      {"addr", text(&Config::addr)},
      {"seed", integer(&Config::seed)},
      {"quiet", boolean(&Config::quiet)},
  };
  return fields;
}

/// Sets one key; unknown keys and malformed values throw InvalidArgument.
inline void set_value(Config &c, const std::string &key, const std::string &value) {
  const auto &fields = config_fields();
  auto it = fields.find(key);
  if (it == fields.end())
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  try {
    it->second.set(c, value);
  } catch (const Error &e) {
    throw Error(ErrorCode::InvalidArgument, key + ": " + e.detail());
  }
}

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Applies "key = value" lines. '#' starts a comment line.
inline void apply_config_text(Config &c, std::istream &in, const std::string &source = "config") {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, source + " line " + std::to_string(number) + ": expected key=value");
    try {
      set_value(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const Error &e) {
      throw Error(ErrorCode::InvalidArgument, source + " line " + std::to_string(number) + ": " + e.detail());
    }
  }
}

inline void apply_config_file(Config &c, const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open config file " + path);
  apply_config_text(c, in, path);
}

/// Range checks on every numeric parameter.
inline void validate(const Config &c) {
  auto fail = [](const std::string &m) { throw Error(ErrorCode::InvalidArgument, m); };
  for (auto [name, w] : {std::pair{"alpha", c.alpha}, {"beta", c.beta}, {"gamma", c.gamma}})
    if (!(w > 0.0))
      fail(std::string(name) + " must be > 0");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
    fail("epsilon must be in (0, 1)");
  if (!(c.target_precision > 0.0 && c.target_precision <= 1.0))
    fail("target_precision must be in (0, 1]");
  if (c.template_radius < 0 || c.template_radius > 3)
    fail("template_radius must be in [0, 3]");
  if (c.markov_order < 1 || c.markov_order > 12)
    fail("markov_order must be in [1, 12]");
  if (!(c.smoothing > 0.0))
    fail("smoothing must be > 0");
  if (c.fp_radius < 0 || c.fp_radius > 6)
    fail("fp_radius must be in [0, 6]");
  if (c.fp_bits != 512 && c.fp_bits != 1024 && c.fp_bits != 2048 && c.fp_bits != 4096)
    fail("fp_bits must be one of 512, 1024, 2048, 4096");
  if (!(c.l2 >= 0.0))
    fail("l2 must be >= 0");
  if (c.epochs < 1)
    fail("epochs must be >= 1");
  if (!(c.holdout_fraction >= 0.0 && c.holdout_fraction < 1.0))
    fail("holdout_fraction must be in [0, 1)");
  if (c.mode != "forward" && c.mode != "retro2")
    fail("mode must be forward or retro2");
  if (c.expansion_limit < 1)
    fail("expansion_limit must be >= 1");
  if (c.max_candidates < 1)
    fail("max_candidates must be >= 1");
}

/// The resolved configuration as key=value text, keys sorted.
inline std::string dump_config(const Config &c) {
  std::string out;
  for (const auto &[key, field] : config_fields())
    out += key + "=" + field.get(c) + "\n";
  return out;
}

} // namespace retrogate::cli
