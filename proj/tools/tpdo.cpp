// tpdo <taylor|extend|l2bound|compose|periodise|solve> --config path.json
//      [--output dir] [--seed u64] [--threads k]

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "tpdo/cli.hpp"

int main(int argc, char** argv) {
  using namespace tpdo::cli;

  CLI::App app{"Toroidal pseudodifferential operator toolkit"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  int threads = 1;
  const std::map<std::string, std::string> about = {
      {"taylor", "discrete Taylor remainder bounds"},
      {"extend", "theta cutoff and symbol extension off the lattice"},
      {"l2bound", "L2 bound estimate against the operator norm"},
      {"compose", "direct vs asymptotic FSO compositions"},
      {"periodise", "periodisation and its commutation with quantization"},
      {"solve", "hyperbolic evolution, norms and self-convergence"}};
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config, "JSON config")->required();
    sub->add_option("--output", output, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsageError;
  }

  auto* sub = app.get_subcommands().front();
  RunOptions options;
  if (sub->count("--output") > 0) options.output = output;
  if (sub->count("--seed") > 0) options.seed = seed;
  if (sub->count("--threads") > 0) options.threads = threads;

  const auto result = run_file(sub->get_name(), config, options);
  for (const auto& line : result.messages) std::cout << line << '\n';
  for (const auto& file : result.files) std::cout << "wrote " << file.string() << '\n';
  return result.exit_code;
}
