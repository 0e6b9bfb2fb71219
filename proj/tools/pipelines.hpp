#pragma once

#include <string>

#include "run_config.hpp"

namespace decaykit::cli {

int cmd_preprocess(const RunConfig& cfg);
int cmd_decay(const RunConfig& cfg);
int cmd_holdout(const RunConfig& cfg);
int cmd_simulate_breeding(const RunConfig& cfg);
int cmd_simulate_crosspop(const RunConfig& cfg);

struct ReportInputs {
  std::string curve_path;
  std::string holdout_path;      // optional
  std::string generations_path;  // optional
  std::string populations_path;  // optional
  std::string output_dir = "out";
  double window = 0.01;
  bool plot = true;
};

int cmd_report(const ReportInputs& inputs);

}  // namespace decaykit::cli
