#include <iostream>

#include "CLI11.hpp"
#include "mtlw/commands.hpp"

int main(int argc, char** argv) {
  using namespace mtlw::tools;

  CLI::App app{"mtlw: multitask loss weighting experiments on a multi-exit CNN"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string out;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "experiment JSON")->required();
    cmd->add_option("--out", out, "output directory (data dir for gen-data)");
    cmd->add_option("--seed", opts.seed, "override the config seed");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate the synthetic dataset");
  add_common(gen);
  CLI::App* tr = app.add_subcommand("train", "train one model");
  add_common(tr);
  CLI::App* grid = app.add_subcommand("grid-search", "sweep exit assignments");
  add_common(grid);
  grid->add_flag("--ordered-only", opts.ordered_only, "only age <= country <= emotion");
  CLI::App* ev = app.add_subcommand("evaluate", "score a trained checkpoint");
  add_common(ev);
  ev->add_option("--split", opts.split, "train|val|test")->capture_default_str();
  CLI::App* rep = app.add_subcommand("report", "compare finished runs");
  rep->add_option("run_dirs", opts.run_dirs, "run directories")->required();
  rep->add_option("--out", out, "write report.csv and report.txt here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (!out.empty()) opts.out = out;

  if (gen->parsed()) return cmd_gen_data(opts, std::cout, std::cerr);
  if (tr->parsed()) return cmd_train(opts, std::cout, std::cerr);
  if (grid->parsed()) return cmd_grid_search(opts, std::cout, std::cerr);
  if (ev->parsed()) return cmd_evaluate(opts, std::cout, std::cerr);
  return cmd_report(opts, std::cout, std::cerr);
}
