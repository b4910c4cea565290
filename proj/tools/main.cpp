#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "twinmodel/errors.hpp"

namespace {

// exit codes: 0 success, 1 numerical failure, 2 config invalid, 3 missing input
constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;
constexpr int kMissingInput = 3;

int run(const std::string& command, twin::cli::CommandContext& ctx) {
  using namespace twin::cli;
  if (command == "generate")
    cmd_generate(ctx);
  else if (command == "train")
    cmd_train(ctx);
  else if (command == "gradient")
    cmd_gradient(ctx);
  else if (command == "report")
    cmd_report(ctx);
  else if (command == "sweep")
    cmd_sweep(ctx);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gray-box twin-model gradient estimation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  int jobs = 1;
  bool truth_mode = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--out", out_dir, "run directory")->required();
    sub->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { has_seed = true; });
    sub->add_option("--jobs", jobs, "concurrent sub-runs in sweep mode");
    sub->add_flag("--truth-mode", truth_mode,
                  "also compute the reference gradient from the truth model");
  };

  for (const char* name : {"generate", "train", "gradient", "report", "sweep"})
    add_common(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    twin::cli::CommandContext ctx;
    ctx.config = twin::cli::load_config(config_path);
    if (has_seed) ctx.config.seed = seed_override;
    ctx.config_path = config_path;
    ctx.out_dir = out_dir;
    ctx.truth_mode = truth_mode;
    ctx.jobs = jobs;
    return run(command, ctx);
  } catch (const twin::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const twin::io_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kMissingInput;
  } catch (const twin::error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kNumerical;
  }
}
