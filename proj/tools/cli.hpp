#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rcd::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

struct SynthOptions {
  std::string out;
  std::size_t count = 10;
  std::string size = "64x64";
  std::size_t kernels = 4;
  std::size_t kernel_size = 9;
  double density = 2.0;
  std::uint64_t seed = 0;
  bool clip = false;
};

struct DerainOptions {
  std::string input;
  std::string kernels;
  std::string mode = "analytic";
  std::string checkpoint;
  int stages = -1;  // -1: 17 in analytic mode, all stages of a checkpoint
  double threshold = 1e-3;
  std::string trace;
  std::string truth;
  std::string out;
};

struct TrainOptions {
  std::string data;
  std::string out;
  std::string loss_log;  // default: <out>.loss.csv
  std::string resume;
  std::size_t stages = 5;
  std::size_t kernels = 4;
  std::size_t kernel_size = 9;
  std::size_t blocks = 1;
  std::size_t hidden = 8;
  std::size_t epochs = 50;
  std::size_t batch_size = 4;
  std::size_t patch_size = 32;
  double learning_rate = 1e-3;
  double lr_decay_factor = 5.0;
  std::size_t lr_decay_every = 25;
  double lambda_final = 1.0;
  double lambda_other = 0.1;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::string pred;
  std::string truth;
  std::string out;
};

struct AblateOptions {
  TrainOptions train;
  std::string test;
  std::string stages_list = "0,2,5,8";
  std::string out;
  std::string checkpoint_dir;
  double holdout = 0.1;
  bool assert_monotone = false;
  double slack_db = 0.2;
};

int cmd_synth(const SynthOptions& opt);
int cmd_derain(const DerainOptions& opt);
int cmd_train(const TrainOptions& opt);
int cmd_eval(const EvalOptions& opt);
int cmd_ablate_stages(const AblateOptions& opt);

// Parses arguments (argv[0] is the program name) and dispatches. Library
// errors become exit codes; nothing escapes as an exception.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace rcd::cli
