#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "rcd/checkpoint.hpp"
#include "rcd/error.hpp"
#include "rcd/image_io.hpp"
#include "rcd/metrics.hpp"
#include "rcd/rcdt.hpp"
#include "rcd/solver.hpp"
#include "rcd/synth.hpp"
#include "rcd/training.hpp"

namespace rcd::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t pos = 0;
    const long h = std::stol(text.substr(0, x), &pos);
    if (pos != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const long w = std::stol(rest, &pos);
    if (pos != rest.size() || h <= 0 || w <= 0) throw std::invalid_argument(text);
    return {static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
  } catch (const std::logic_error&) {
    throw UsageError("invalid --size '" + text + "', expected HxW");
  }
}

std::vector<std::size_t> parse_stage_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("invalid stage list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty stage list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string());
  }
}

std::string fixed4(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

struct LoadedPair {
  std::string id;
  TrainingPair pair;
};

std::vector<LoadedPair> load_dataset(const fs::path& root) {
  const DatasetScan scan = scan_dataset(root);
  for (const auto& id : scan.unmatched) {
    std::cerr << "warning: " << id << " has no partner in " << root << ", skipped\n";
  }
  std::vector<LoadedPair> out;
  for (const auto& e : scan.pairs) {
    LoadedPair p{e.id, {load_png(e.rain), load_png(e.norain)}};
    if (p.pair.observed.shape() != p.pair.truth.shape()) {
      throw ShapeError("rain/norain size mismatch for id " + e.id);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<TrainingPair> pairs_of(const std::vector<LoadedPair>& loaded) {
  std::vector<TrainingPair> out;
  for (const auto& p : loaded) out.push_back(p.pair);
  return out;
}

ModelConfig model_config(const TrainOptions& opt, std::size_t stages) {
  ModelConfig m;
  m.stages = stages;
  m.kernels = opt.kernels;
  m.kernel_size = opt.kernel_size;
  m.blocks = opt.blocks;
  m.hidden = opt.hidden;
  return m;
}

TrainConfig train_config(const TrainOptions& opt, std::size_t stages) {
  TrainConfig t;
  t.weights = default_loss_weights(stages);
  for (auto& v : t.weights.lambda) v = opt.lambda_other;
  for (auto& v : t.weights.gamma) v = opt.lambda_other;
  t.weights.lambda.back() = opt.lambda_final;
  if (stages > 0) t.weights.gamma.back() = opt.lambda_final;
  t.learning_rate = opt.learning_rate;
  t.lr_decay_factor = opt.lr_decay_factor;
  t.lr_decay_every = opt.lr_decay_every;
  t.epochs = opt.epochs;
  t.batch_size = opt.batch_size;
  t.patch_size = opt.patch_size;
  t.seed = opt.seed;
  return t;
}

TrainResult train_model(const TrainOptions& opt, std::size_t stages,
                        const std::vector<TrainingPair>& data) {
  if (data.empty()) throw IoError("training dataset is empty");
  LearnableSet init;
  if (!opt.resume.empty()) {
    init = load_checkpoint(opt.resume);
    if (init.stages() != stages) {
      throw ConfigError("resume checkpoint has " + std::to_string(init.stages()) +
                        " stages, requested " + std::to_string(stages));
    }
  } else {
    init = init_learnable(model_config(opt, stages), opt.patch_size, opt.seed);
  }
  return train(data, std::move(init), train_config(opt, stages),
               [](std::size_t epoch, double loss) {
                 std::cerr << "epoch " << epoch << " loss " << loss << "\n";
               });
}

void write_panel(const fs::path& path, const std::vector<const Image*>& rows) {
  const std::size_t h = height(*rows.front()), w = width(*rows.front());
  Image panel = make_image(h * rows.size(), w);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      auto src = rows[r]->plane(c);
      std::copy(src.begin(), src.end(), panel.plane(c).begin() + r * h * w);
    }
  }
  save_png(path, panel);
}

std::vector<std::pair<std::string, fs::path>> derain_inputs(const fs::path& input) {
  std::vector<std::pair<std::string, fs::path>> out;
  if (fs::is_directory(input)) {
    for (const auto& id : list_png_ids(input)) out.emplace_back(id, input / (id + ".png"));
    if (out.empty()) throw IoError("no PNG files in " + input.string());
  } else if (fs::is_regular_file(input)) {
    out.emplace_back(input.stem().string(), input);
  } else {
    throw IoError("input " + input.string() + " does not exist");
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_synth(const SynthOptions& opt) {
  const auto [h, w] = parse_size(opt.size);
  if (opt.kernels == 0) throw UsageError("--kernels must be positive");
  if (opt.kernel_size % 2 == 0) throw UsageError("--kernel-size must be odd");
  if (!(opt.density > 0.0)) throw UsageError("--density must be positive");
  const fs::path root = opt.out;
  ensure_directory(root / "rain");
  ensure_directory(root / "norain");
  ensure_directory(root / "maps");

  Rng rng(opt.seed);
  SynthParams params;
  params.kernels = make_streak_bank(opt.kernels, opt.kernel_size, {}, rng);
  params.density = opt.density;
  params.clip = opt.clip;
  save_kernel_bank(root / "C_true.rcdt", params.kernels);

  double total_nonzero = 0.0, total_psnr = 0.0;
  for (std::size_t i = 0; i < opt.count; ++i) {
    const std::string id = dataset_id(i);
    const Image background = make_background(h, w, rng);
    const SynthPair pair = synth_pair(background, params, rng);
    write_dataset_pair(root, id, pair.observed, pair.background);
    save_tensor(root / "maps" / (id + ".rcdt"), pair.maps);
    for (double v : pair.maps.values()) total_nonzero += (v != 0.0);
    total_psnr += psnr_y(pair.background, pair.observed);
  }
  std::cout << "wrote " << opt.count << " pairs of " << h << "x" << w << " to "
            << root.string() << "\n";
  std::cout << "kernels " << opt.kernels << " (k=" << opt.kernel_size << ")\n";
  if (opt.count > 0) {
    std::cout << "mean nonzeros per map "
              << fixed4(total_nonzero / static_cast<double>(opt.count * opt.kernels))
              << "\n";
    std::cout << "mean input psnr_db " << fixed4(total_psnr / opt.count) << "\n";
  }
  return kExitOk;
}

int cmd_derain(const DerainOptions& opt) {
  if (opt.out.empty()) throw UsageError("--out is required");
  if (opt.mode != "analytic" && opt.mode != "checkpoint") {
    throw UsageError("--mode must be analytic or checkpoint");
  }
  if (opt.stages < -1) throw UsageError("--stages must be nonnegative");

  LearnableSet learned;
  KernelBank bank;
  if (opt.mode == "checkpoint") {
    if (opt.checkpoint.empty()) throw UsageError("checkpoint mode needs --checkpoint");
    if (!fs::exists(opt.checkpoint)) {
      throw IoError("checkpoint " + opt.checkpoint + " not found");
    }
    learned = load_checkpoint(opt.checkpoint);
    if (opt.stages > static_cast<int>(learned.stages())) {
      throw UsageError("checkpoint has only " + std::to_string(learned.stages()) +
                       " stages");
    }
    if (opt.stages >= 0) {
      learned.prox_m.resize(opt.stages);
      learned.prox_b.resize(opt.stages);
      if (opt.stages == 0) {
        learned.eta1_raw = Tensor();
        learned.eta2_raw = Tensor();
      } else {
        const std::size_t S = opt.stages;
        learned.eta1_raw = Tensor({S}, std::vector<double>(
            learned.eta1_raw.values().begin(), learned.eta1_raw.values().begin() + S));
        learned.eta2_raw = Tensor({S}, std::vector<double>(
            learned.eta2_raw.values().begin(), learned.eta2_raw.values().begin() + S));
      }
    }
    bank = learned.kernels;
  } else {
    if (opt.kernels.empty()) throw UsageError("analytic mode needs --kernels");
    bank = load_kernel_bank(opt.kernels);
  }

  const fs::path out = opt.out;
  ensure_directory(out / "B");
  ensure_directory(out / "R");
  for (const auto& [id, path] : derain_inputs(opt.input)) {
    const Image observed = load_png(path);
    std::optional<Image> truth;
    if (!opt.truth.empty()) {
      const fs::path tp = fs::path(opt.truth) / (id + ".png");
      if (fs::exists(tp)) truth = load_png(tp);
    }

    SolverConfig cfg;
    std::vector<StageParams> per_stage;
    if (opt.mode == "checkpoint") {
      cfg = learned.solver_config();
      per_stage = learned.stage_params();
    } else {
      cfg = analytic_config(bank, height(observed), width(observed),
                            opt.stages < 0 ? 17 : static_cast<std::size_t>(opt.stages),
                            opt.threshold);
    }
    cfg.record_trace = !opt.trace.empty();
    const RunResult result =
        run(observed, bank, cfg, per_stage, truth ? &*truth : nullptr);
    save_png(out / "B" / (id + ".png"), result.background);
    save_png(out / "R" / (id + ".png"), result.rain);

    if (cfg.record_trace) {
      const fs::path dir = fs::path(opt.trace) / id;
      ensure_directory(dir);
      std::ofstream csv(dir / "stages.csv");
      csv << "stage,objective_after_m,objective,psnr_db\n";
      for (std::size_t s = 0; s < result.trace.stages.size(); ++s) {
        const StageRecord& rec = result.trace.stages[s];
        std::ostringstream name;
        name << "stage_" << std::setw(2) << std::setfill('0') << (s + 1) << ".png";
        write_panel(dir / name.str(), {&rec.background, &rec.rain, &rec.background_hat});
        csv << (s + 1) << ',' << std::setprecision(10) << rec.objective_after_m << ','
            << rec.objective << ',';
        if (rec.psnr_db) csv << fixed4(*rec.psnr_db);
        csv << "\n";
      }
    }
    std::cout << id << ": derained with " << cfg.stages << " stages\n";
  }
  return kExitOk;
}

int cmd_train(const TrainOptions& opt) {
  if (opt.out.empty()) throw UsageError("--out is required");
  const auto loaded = load_dataset(opt.data);
  if (loaded.empty()) throw IoError("dataset " + opt.data + " has no image pairs");
  const TrainResult result = train_model(opt, opt.stages, pairs_of(loaded));
  save_checkpoint(opt.out, result.params);
  const std::string log_path = opt.loss_log.empty() ? opt.out + ".loss.csv" : opt.loss_log;
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot write " + log_path);
  log << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    log << (e + 1) << ',' << std::setprecision(10) << result.epoch_loss[e] << "\n";
  }
  std::cout << "checkpoint written to " << opt.out << "\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& opt) {
  const auto pred_ids = list_png_ids(opt.pred);
  const auto truth_ids = list_png_ids(opt.truth);
  std::vector<std::string> matched, skipped;
  std::set_intersection(pred_ids.begin(), pred_ids.end(), truth_ids.begin(),
                        truth_ids.end(), std::back_inserter(matched));
  std::set_symmetric_difference(pred_ids.begin(), pred_ids.end(), truth_ids.begin(),
                                truth_ids.end(), std::back_inserter(skipped));
  for (const auto& id : skipped) std::cerr << "skipped unmatched id " << id << "\n";
  if (matched.empty()) {
    std::cerr << "no matching ids between " << opt.pred << " and " << opt.truth << "\n";
    return kExitData;
  }

  std::ostringstream csv;
  csv << "id,psnr_db,ssim\n";
  double sum_psnr = 0.0, sum_ssim = 0.0;
  for (const auto& id : matched) {
    const Image pred = load_png(fs::path(opt.pred) / (id + ".png"));
    const Image truth = load_png(fs::path(opt.truth) / (id + ".png"));
    if (pred.shape() != truth.shape()) {
      throw ShapeError("size mismatch for id " + id);
    }
    const double p = psnr_y(truth, pred);
    const double s = ssim_y(truth, pred);
    sum_psnr += p;
    sum_ssim += s;
    csv << id << ',' << fixed4(p) << ',' << fixed4(s) << "\n";
  }
  const double n = static_cast<double>(matched.size());
  csv << "mean," << fixed4(sum_psnr / n) << ',' << fixed4(sum_ssim / n) << "\n";
  if (opt.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream file(opt.out);
    if (!file) throw IoError("cannot write " + opt.out);
    file << csv.str();
    std::cout << "mean psnr_db " << fixed4(sum_psnr / n) << " ssim "
              << fixed4(sum_ssim / n) << " over " << matched.size() << " images\n";
  }
  return kExitOk;
}

int cmd_ablate_stages(const AblateOptions& opt) {
  const auto stage_list = parse_stage_list(opt.stages_list);
  auto loaded = load_dataset(opt.train.data);
  std::vector<LoadedPair> test;
  if (!opt.test.empty()) {
    test = load_dataset(opt.test);
  } else {
    if (!(opt.holdout > 0.0 && opt.holdout < 1.0)) {
      throw UsageError("--holdout must lie in (0, 1)");
    }
    const auto n_test = static_cast<std::size_t>(
        std::ceil(opt.holdout * static_cast<double>(loaded.size())));
    if (n_test == 0 || n_test >= loaded.size()) {
      throw IoError("dataset too small to hold out test images");
    }
    test.assign(loaded.end() - n_test, loaded.end());
    loaded.resize(loaded.size() - n_test);
  }
  if (loaded.empty() || test.empty()) throw IoError("empty training or test split");
  const auto train_pairs = pairs_of(loaded);

  std::ostringstream table;
  table << "stages,psnr_db,ssim\n";
  std::vector<double> means;
  for (std::size_t S : stage_list) {
    std::cerr << "training S=" << S << "\n";
    const TrainResult result = train_model(opt.train, S, train_pairs);
    if (!opt.checkpoint_dir.empty()) {
      ensure_directory(opt.checkpoint_dir);
      save_checkpoint(fs::path(opt.checkpoint_dir) / ("S" + std::to_string(S) + ".rcdc"),
                      result.params);
    }
    const SolverConfig cfg = result.params.solver_config();
    const auto per_stage = result.params.stage_params();
    double sum_psnr = 0.0, sum_ssim = 0.0;
    for (const auto& t : test) {
      const RunResult r = run(t.pair.observed, result.params.kernels, cfg, per_stage);
      sum_psnr += psnr_y(t.pair.truth, r.background);
      sum_ssim += ssim_y(t.pair.truth, r.background);
    }
    const double n = static_cast<double>(test.size());
    means.push_back(sum_psnr / n);
    table << S << ',' << fixed4(sum_psnr / n) << ',' << fixed4(sum_ssim / n) << "\n";
  }
  std::cout << table.str();
  if (!opt.out.empty()) {
    std::ofstream file(opt.out);
    if (!file) throw IoError("cannot write " + opt.out);
    file << table.str();
  }
  if (opt.assert_monotone) {
    for (std::size_t i = 1; i < means.size(); ++i) {
      if (means[i] < means[i - 1] - opt.slack_db) {
        std::cerr << "PSNR decreased from S=" << stage_list[i - 1] << " to S="
                  << stage_list[i] << " beyond " << opt.slack_db << " dB slack\n";
        return 1;
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

namespace {

void add_train_flags(CLI::App* sub, TrainOptions& t) {
  sub->add_option("--data", t.data, "dataset root with rain/ and norain/")->required();
  sub->add_option("--epochs", t.epochs, "training epochs")->capture_default_str();
  sub->add_option("--seed", t.seed, "random seed")->capture_default_str();
  sub->add_option("--kernels", t.kernels, "number of rain kernels N")->capture_default_str();
  sub->add_option("--kernel-size", t.kernel_size, "rain kernel size k (odd)")->capture_default_str();
  sub->add_option("--blocks", t.blocks, "residual blocks per prox network")->capture_default_str();
  sub->add_option("--hidden", t.hidden, "hidden channels per prox network")->capture_default_str();
  sub->add_option("--batch-size", t.batch_size, "pairs per Adam step")->capture_default_str();
  sub->add_option("--patch-size", t.patch_size, "square training patch size")->capture_default_str();
  sub->add_option("--lr", t.learning_rate, "initial learning rate")->capture_default_str();
  sub->add_option("--lr-decay-factor", t.lr_decay_factor, "learning rate divisor")->capture_default_str();
  sub->add_option("--lr-decay-every", t.lr_decay_every, "epochs between decays")->capture_default_str();
  sub->add_option("--lambda-final", t.lambda_final, "final-stage loss weight")->capture_default_str();
  sub->add_option("--lambda-other", t.lambda_other, "loss weight of earlier stages")->capture_default_str();
  sub->add_option("--resume", t.resume, "initialize from a checkpoint");
}

// Splices the keys of a --config file in right after the subcommand name, so
// that anything given on the command line comes later and wins.
std::vector<std::string> with_config_file(const std::vector<std::string>& args) {
  std::string file;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (file.empty()) return args;
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(file)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (item.inputs.size() != 1) {
      throw CLI::ConversionError(item.name, "config key needs exactly one value");
    }
    const bool own = item.parents.empty() ||
                     (item.parents.size() == 1 && item.parents.front() == args[1]);
    out.push_back("--" + (own ? item.name : item.fullname()) + "=" + item.inputs.front());
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Rain convolutional dictionary deraining toolkit", "rcd"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.set_help_all_flag("--help-all");

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic rainy/clean dataset");
  s->add_option("--config", config_path, "key = value configuration file");
  s->add_option("--out", synth.out, "output dataset root")->required();
  s->add_option("--count", synth.count, "number of pairs")->capture_default_str();
  s->add_option("--size", synth.size, "image size HxW")->capture_default_str();
  s->add_option("--kernels", synth.kernels, "number of rain kernels")->capture_default_str();
  s->add_option("--kernel-size", synth.kernel_size, "rain kernel size (odd)")->capture_default_str();
  s->add_option("--density", synth.density, "activations per 1000 pixels per map")->capture_default_str();
  s->add_option("--seed", synth.seed, "random seed")->capture_default_str();
  s->add_flag("--clip", synth.clip, "clip rainy images to [0, 1.5]");

  DerainOptions derain;
  auto* d = app.add_subcommand("derain", "remove rain from PNG images");
  d->add_option("--config", config_path, "key = value configuration file");
  d->add_option("--input", derain.input, "PNG file or directory")->required();
  d->add_option("--kernels", derain.kernels, "kernel bank (.rcdt) for analytic mode");
  d->add_option("--mode", derain.mode, "analytic or checkpoint")
      ->check(CLI::IsMember({"analytic", "checkpoint"}))
      ->capture_default_str();
  d->add_option("--checkpoint", derain.checkpoint, "trained checkpoint");
  d->add_option("--stages", derain.stages, "number of stages (default 17 / all)");
  d->add_option("--threshold", derain.threshold, "soft-threshold level (analytic)")
      ->capture_default_str();
  d->add_option("--trace", derain.trace, "directory for per-stage panels");
  d->add_option("--truth", derain.truth, "clean images for trace PSNR");
  d->add_option("--out", derain.out, "output directory")->required();

  TrainOptions train_opt;
  auto* t = app.add_subcommand("train", "train the unrolled network");
  t->add_option("--config", config_path, "key = value configuration file");
  add_train_flags(t, train_opt);
  t->add_option("--out", train_opt.out, "checkpoint path")->required();
  t->add_option("--stages", train_opt.stages, "number of stages S")->capture_default_str();
  t->add_option("--loss-log", train_opt.loss_log, "per-epoch loss CSV");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "PSNR/SSIM on the luminance channel");
  e->add_option("--config", config_path, "key = value configuration file");
  e->add_option("--pred", eval.pred, "directory of derained PNGs")->required();
  e->add_option("--truth", eval.truth, "directory of clean PNGs")->required();
  e->add_option("--out", eval.out, "metrics CSV (stdout if omitted)");

  AblateOptions ablate;
  auto* a = app.add_subcommand("ablate-stages", "train and evaluate several stage counts");
  a->add_option("--config", config_path, "key = value configuration file");
  add_train_flags(a, ablate.train);
  a->add_option("--test", ablate.test, "held-out dataset root");
  a->add_option("--holdout", ablate.holdout, "held-out fraction when --test is absent")
      ->capture_default_str();
  a->add_option("--stages-list", ablate.stages_list, "comma-separated stage counts")
      ->capture_default_str();
  a->add_option("--out", ablate.out, "table CSV");
  a->add_option("--checkpoint-dir", ablate.checkpoint_dir, "keep per-S checkpoints");
  a->add_flag("--assert-monotone", ablate.assert_monotone,
              "fail if PSNR drops with S beyond the slack");
  a->add_option("--slack", ablate.slack_db, "monotonicity slack in dB")->capture_default_str();

  std::vector<std::string> reversed;
  try {
    const auto expanded = with_config_file(args);
    reversed.assign(expanded.rbegin(), expanded.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp& err) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& err) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::cerr << err.what() << "\n";
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  std::cerr << "# resolved configuration: " << chosen->get_name() << "\n"
            << chosen->config_to_str(true, false);

  try {
    if (chosen == s) return cmd_synth(synth);
    if (chosen == d) return cmd_derain(derain);
    if (chosen == t) return cmd_train(train_opt);
    if (chosen == e) return cmd_eval(eval);
    return cmd_ablate_stages(ablate);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  }
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace rcd::cli
