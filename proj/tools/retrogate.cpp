#include <csignal>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "retrogate/cli/commands.hpp"
#include "retrogate/service/server.hpp"

using namespace retrogate;
using namespace retrogate::cli;

namespace {

struct Command {
  const char *name;
  const char *help;
  std::vector<const char *> keys;
  std::function<nlohmann::json(const Config &)> run;
};

service::ReviewServer *g_server = nullptr;

nlohmann::json cmd_serve(const Config &c) {
  service::ServerConfig sc = service::ServerConfig::from_env();
  if (!c.data_dir.empty())
    sc.data_dir = c.data_dir;
  if (!c.addr.empty())
    sc.set_address(c.addr);
  service::ReviewServer server(sc);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  if (!c.quiet)
    std::cerr << "serving " << server.store().route_count() << " routes from " << sc.data_dir << " on "
              << sc.host << ":" << sc.port << "\n";
  server.listen();
  g_server = nullptr;
  return {{"stopped", true}};
}

std::string flag_name(const std::string &key) {
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

void print_error(const Error &e) {
  nlohmann::json err = {{"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
  if (e.offset())
    err["offset"] = *e.offset();
  std::cerr << nlohmann::json{{"error", err}}.dump() << "\n";
}

} // namespace

int main(int argc, char **argv) {
  const std::vector<const char *> scoring_keys = {"prior", "rgp", "index", "thresholds", "thr_rgp", "thr_rp"};
  auto with = [](std::vector<const char *> a, const std::vector<const char *> &b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const std::vector<Command> commands = {
      {"canonicalize", "Rewrite molecules or reaction records in canonical SMILES", {"in", "out"}, cmd_canonicalize},
      {"extract-templates", "Extract a template library from a reaction corpus",
       {"corpus", "template_radius", "out"}, cmd_extract_templates},
      {"build-index", "Build the precedent index of a reaction corpus", {"corpus", "out"}, cmd_build_index},
      {"gen-negatives", "Generate implausible reactions from a corpus and templates",
       {"corpus", "templates", "template_radius", "mode", "n", "popularity_weighted", "out"}, cmd_gen_negatives},
      {"train", "Train the reaction prior (rp) or the plausibility classifier (rgp)",
       {"model", "corpus", "negatives", "out", "markov_order", "smoothing", "alpha", "beta", "gamma", "epsilon",
        "template_radius", "fp_radius", "fp_bits", "l2", "epochs", "holdout_fraction"},
       cmd_train},
      {"score", "Score reactions and write one JSON line per reaction", with({"in", "out"}, scoring_keys),
       cmd_score},
      {"calibrate", "Grid-search thresholds on labeled scores", {"scores", "target_precision", "out"},
       cmd_calibrate},
      {"plan", "Search a synthesis route for a target molecule",
       with({"target", "stock", "templates", "template_radius", "expansion_limit", "top_k", "max_candidates",
             "filter", "out"},
            scoring_keys),
       cmd_plan},
      {"eval", "Metrics report over a label log and scored reactions", {"labels", "scores", "out"}, cmd_eval},
      {"serve", "Run the review API", {"data_dir", "addr"}, cmd_serve},
  };

  CLI::App app{"Retrosynthesis reaction plausibility tools"};
  app.require_subcommand(1);
  struct Parsed {
    std::string config;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
    bool quiet = false;
    std::string seed;
  };
  std::map<std::string, Parsed> parsed;
  std::map<std::string, CLI::App *> subs;
  for (const Command &cmd : commands) {
    CLI::App *sub = app.add_subcommand(cmd.name, cmd.help);
    Parsed &p = parsed[cmd.name];
    sub->add_option("--config", p.config, "key=value configuration file");
    sub->add_option("--seed", p.seed, "random seed");
    sub->add_flag("--quiet", p.quiet, "print nothing on success");
    sub->add_option("--set", p.sets, "override any setting as key=value");
    for (const char *key : cmd.keys) {
      std::string k = key;
      if (k == "model") {
        sub->add_option("model", p.flags[k], "rp or rgp")->check(CLI::IsMember({"rp", "rgp"}));
        continue;
      }
      sub->add_option(flag_name(k), p.flags[k]);
    }
    subs[cmd.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  for (const Command &cmd : commands) {
    CLI::App *sub = subs[cmd.name];
    if (!sub->parsed())
      continue;
    Parsed &p = parsed[cmd.name];
    try {
      Config config;
      if (!p.config.empty())
        apply_config_file(config, p.config);
      // Precedence: defaults, --config, the thresholds file, then flags.
      if (p.flags.count("thresholds") && sub->count("--thresholds") > 0)
        config.thresholds = p.flags["thresholds"];
      if (!config.thresholds.empty())
        apply_config_file(config, config.thresholds);
      for (const auto &[key, value] : p.flags)
        if (key == "model" ? !value.empty() : sub->count(flag_name(key)) > 0)
          set_value(config, key, value);
      for (const std::string &kv : p.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw Error(ErrorCode::InvalidArgument, "--set expects key=value, got '" + kv + "'");
        set_value(config, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!p.seed.empty())
        set_value(config, "seed", p.seed);
      if (p.quiet)
        config.quiet = true;
      validate(config);
      const nlohmann::json summary = cmd.run(config);
      if (!config.quiet)
        std::cout << summary.dump(2) << "\n";
      return 0;
    } catch (const Error &e) {
      print_error(e);
      return 1;
    } catch (const std::exception &e) {
      print_error(Error(ErrorCode::Io, e.what()));
      return 1;
    }
  }
  return 2;
}
