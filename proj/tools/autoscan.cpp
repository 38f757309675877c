#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autoscan/cli.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string tok = text.substr(pos, comma - pos);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    pos = comma + 1;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-robot autoscanning simulator"};
  app.require_subcommand(1);

  std::string scene, out_dir = "out", instance, events, svg_out = "render.svg";
  std::string seeds_text = "0", scheduling, mode_policy;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  bool overwrite = false, oracle = false;

  CLI::App* run = app.add_subcommand("run", "simulate one configuration");
  run->add_option("--scene", scene, "scene file")->required();
  run->add_option("--seed", seed, "random seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--set", sets, "parameter override key=value");
  run->add_option("--scheduling", scheduling, "taskflow | synchronous");
  run->add_option("--mode-policy", mode_policy, "dynamic | frozen");
  run->add_flag("--overwrite", overwrite, "replace existing outputs");

  CLI::App* sweep = app.add_subcommand("sweep", "run the comparison grid");
  sweep->add_option("--scene", scene, "scene file")->required();
  sweep->add_option("--seeds", seeds_text, "comma-separated seed list");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--set", sets, "parameter override key=value");

  CLI::App* solve =
      app.add_subcommand("solve-instance", "assign a standalone instance");
  solve->add_option("--instance", instance, "instance file")->required();
  solve->add_option("--seed", seed, "random seed");
  solve->add_option("--set", sets, "parameter override key=value");
  solve->add_flag("--oracle", oracle, "compare against exhaustive optimum");

  CLI::App* render = app.add_subcommand("render", "draw a recorded run");
  render->add_option("--scene", scene, "scene file")->required();
  render->add_option("--events", events, "events.jsonl from a run")->required();
  render->add_option("--out", svg_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> all_sets;
  if (!scheduling.empty()) all_sets.push_back("scheduling=" + scheduling);
  if (!mode_policy.empty()) all_sets.push_back("mode_policy=" + mode_policy);
  all_sets.insert(all_sets.end(), sets.begin(), sets.end());

  if (run->parsed())
    return autoscan::cmd_run(scene, seed, out_dir, all_sets, overwrite);
  if (sweep->parsed())
    return autoscan::cmd_sweep(scene, parse_seed_list(seeds_text), out_dir,
                               all_sets);
  if (solve->parsed())
    return autoscan::cmd_solve_instance(instance, seed, oracle, all_sets);
  if (render->parsed()) return autoscan::cmd_render(scene, events, svg_out);
  return 1;
}
