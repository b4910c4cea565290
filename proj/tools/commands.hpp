#pragma once

#include <string>

#include "config.hpp"

namespace twin::cli {

struct CommandContext {
  ExperimentConfig config;
  std::string config_path;
  std::string out_dir;
  bool truth_mode = false;
  int jobs = 1;
};

void cmd_generate(const CommandContext& ctx);
void cmd_train(const CommandContext& ctx);
void cmd_gradient(const CommandContext& ctx);
void cmd_report(const CommandContext& ctx);
void cmd_sweep(const CommandContext& ctx);

}  // namespace twin::cli
