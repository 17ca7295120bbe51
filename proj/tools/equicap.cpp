#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "equicap/experiment.hpp"

using equicap::ExperimentConfig;

namespace {

void add_seed(CLI::App* cmd, ExperimentConfig& c, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "Base seed (random when omitted; always recorded)");
  cmd->callback([&c, &seed, cmd] {
    if (cmd->count("--seed")) c.seed = seed;
  });
}

void add_out(CLI::App* cmd, ExperimentConfig& c) { cmd->add_option("--out", c.out, "Write the result to this file"); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity of group-invariant perceptrons: exact counts, sampled fractions and GCNN sweeps"};
  app.set_version_flag("--version", std::string("equicap ") + equicap::kVersion);
  app.require_subcommand(1);

  ExperimentConfig c;
  std::uint64_t seed = 0;

  auto* cover = app.add_subcommand("cover", "Fraction of separable dichotomies f(P, N)");
  cover->add_option("--p", c.p, "Number of points")->required();
  cover->add_option("--n", c.n, "Dimension")->required();
  cover->add_flag("--exact", c.exact, "Print the reduced rational num/den");
  cover->add_flag("--count", c.count, "Print the dichotomy count C(P, N)");

  auto* fraction = app.add_subcommand("fraction", "Sampled separable fraction of random orbits");
  fraction->add_option("--rep", c.rep, "regular, regular:m, regular-sum:m,k, rotation:m, dsum:m1,m2, "
                                       "regular-augmented:k or a JSON path")
      ->capture_default_str();
  fraction->add_option("--group", c.group, "Group for regular reps: Z5, cyclic:5, Z4xZ4 or a JSON path")
      ->capture_default_str();
  fraction->add_option("--p", c.p, "Number of orbits")->required();
  fraction->add_option("--trials", c.trials, "Number of sampled dichotomies")->capture_default_str();
  fraction->add_flag("--raw-orbits", c.raw_orbits, "Solve the full orbits instead of their centroids");
  fraction->add_option("--probe", c.probe, "lp or logistic")->capture_default_str();
  add_seed(fraction, c, seed);
  add_out(fraction, c);

  auto* sweep = app.add_subcommand("gcnn-sweep", "Separable fraction versus channel count for a random layer");
  sweep->add_option("--arch", c.arch, "conv, conv-maxpool, conv-avgpool or dsum:m1,m2")->capture_default_str();
  sweep->add_option("--p", c.p, "Number of inputs (default 40, or 16 for dsum)");
  sweep->add_option("--channels", c.channels, "Comma-separated output channel counts")->delimiter(',');
  sweep->add_option("--trials", c.trials, "Dichotomies per input seed")->capture_default_str();
  sweep->add_option("--input-seeds", c.input_seeds, "Independent filter and input draws")->capture_default_str();
  sweep->add_option("--width", c.width, "Input width")->capture_default_str();
  sweep->add_option("--length", c.length, "Input length")->capture_default_str();
  sweep->add_option("--in-channels", c.in_channels, "Input channels")->capture_default_str();
  sweep->add_option("--filter", c.filter, "Square filter size")->capture_default_str();
  sweep->add_option("--pool", c.pool, "Pooling window")->capture_default_str();
  sweep->add_flag("--allow-non-coprime", c.allow_non_coprime, "Accept dsum moduli sharing a factor");
  sweep->add_option("--probe", c.probe, "lp or logistic")->capture_default_str();
  add_seed(sweep, c, seed);
  add_out(sweep, c);

  auto* verify = app.add_subcommand("verify", "Run property suites and print a JSON report");
  verify->add_option("--suite", c.suite, "Suite name or all")->capture_default_str();
  verify->add_flag("--inject-duplicate-anchor", c.inject_duplicate_anchor,
                   "Duplicate an anchor in the general-position suite");
  add_seed(verify, c, seed);
  add_out(verify, c);

  auto* figure = app.add_subcommand("figure1-data", "Orbits and fixed subspaces of the three small examples");
  add_seed(figure, c, seed);
  add_out(figure, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return equicap::kExitConfig;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  return equicap::run(c, std::cout, std::cerr);
}
