#include "rcd/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rcd/conv.hpp"
#include "rcd/error.hpp"

namespace rcd {

void ModelConfig::validate() const {
  if (kernels == 0) throw ConfigError("model needs at least one rain kernel");
  if (kernel_size % 2 == 0) throw ConfigError("kernel size must be odd");
  if (blocks == 0) throw ConfigError("prox networks need at least one block");
  if (hidden < 3 || hidden < kernels) {
    throw ConfigError("prox hidden width must be at least max(3, kernels)");
  }
}

void LossWeights::validate() const {
  if (lambda.size() != gamma.size() + 1) {
    throw ConfigError("loss weights need S+1 lambda and S gamma entries");
  }
  for (double v : lambda) {
    if (!(v >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  }
  for (double v : gamma) {
    if (!(v >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  }
  if (!(lambda.back() > 0.0) || (!gamma.empty() && !(gamma.back() > 0.0))) {
    throw ConfigError("final-stage loss weights must be positive");
  }
}

LossWeights default_loss_weights(std::size_t stages) {
  LossWeights w;
  w.lambda.assign(stages + 1, 0.1);
  w.gamma.assign(stages, 0.1);
  w.lambda.back() = 1.0;
  if (stages > 0) w.gamma.back() = 1.0;
  if (stages > 0) {
    const double other = *std::max_element(w.lambda.begin(), w.lambda.end() - 1);
    if (w.lambda.back() / other != 10.0) {
      throw ConfigError("final-stage weight must dominate the others tenfold");
    }
  }
  return w;
}

void TrainConfig::validate() const {
  weights.validate();
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lr_decay_factor > 0.0)) throw ConfigError("lr decay factor must be positive");
  if (lr_decay_every == 0) throw ConfigError("lr decay period must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (patch_size == 0) throw ConfigError("patch size must be positive");
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
  return learning_rate /
         std::pow(lr_decay_factor, static_cast<double>(epoch / lr_decay_every));
}

double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

double LearnableSet::eta1(std::size_t stage) const {
  return softplus(eta1_raw[stage]);
}

double LearnableSet::eta2(std::size_t stage) const {
  return sigmoid(eta2_raw[stage]);
}

namespace {

template <class Set, class T>
std::vector<std::pair<std::string, T*>> collect_tensors(Set& p, T* kernels) {
  std::vector<std::pair<std::string, T*>> out;
  out.emplace_back("kernels", kernels);
  out.emplace_back("init_kernel", &p.init_kernel);
  if (p.stages() > 0) {
    out.emplace_back("eta1_raw", &p.eta1_raw);
    out.emplace_back("eta2_raw", &p.eta2_raw);
  }
  for (std::size_t s = 0; s < p.stages(); ++s) {
    const std::string stage = "stage" + std::to_string(s + 1) + ".";
    for (auto* prox : {&p.prox_m[s], &p.prox_b[s]}) {
      const std::string head = stage + (prox == &p.prox_m[s] ? "prox_m." : "prox_b.");
      const auto names = prox->tensor_names();
      const auto tensors = prox->tensors();
      for (std::size_t i = 0; i < names.size(); ++i) {
        out.emplace_back(head + names[i], tensors[i]);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> LearnableSet::named_tensors() {
  return collect_tensors(*this, &kernels.mutable_filter());
}

std::vector<std::pair<std::string, const Tensor*>> LearnableSet::named_tensors()
    const {
  return collect_tensors(*this, &kernels.filter());
}

std::size_t LearnableSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_tensors()) n += t->size();
  return n;
}

std::vector<StageParams> LearnableSet::stage_params() const {
  std::vector<StageParams> out;
  for (std::size_t s = 0; s < stages(); ++s) {
    out.push_back({eta1(s), eta2(s), ResidualProx{prox_m[s]},
                   ResidualProx{prox_b[s]}});
  }
  return out;
}

SolverConfig LearnableSet::solver_config() const {
  SolverConfig cfg;
  cfg.stages = stages();
  cfg.init_kernel = init_kernel;
  cfg.prox_m = IdentityProx{};
  cfg.prox_b = IdentityProx{};
  cfg.eta1 = stages() > 0 ? eta1(0) : 1.0;
  cfg.eta2 = stages() > 0 ? eta2(0) : kDefaultEta2;
  cfg.trace_regularizers.g2 = Penalty::kNone;
  return cfg;
}

void LearnableSet::validate() const {
  require_filter(init_kernel, "init kernel");
  if (filter_in(init_kernel) != 3 || filter_out(init_kernel) != 3) {
    throw ShapeError("init kernel must map 3 channels to 3 channels");
  }
  if (prox_m.size() != prox_b.size()) {
    throw ShapeError("prox_m and prox_b stage counts differ");
  }
  const std::size_t S = stages();
  if (S > 0 && (eta1_raw.shape() != Shape{S} || eta2_raw.shape() != Shape{S})) {
    throw ShapeError("step-size tensors must have one entry per stage");
  }
  for (std::size_t s = 0; s < S; ++s) {
    prox_m[s].validate();
    prox_b[s].validate();
    if (prox_m[s].in_channels() != kernels.count() ||
        prox_m[s].out_channels() != kernels.count()) {
      throw ShapeError("M prox channel count must equal the kernel count");
    }
    if (prox_b[s].in_channels() != 3 || prox_b[s].out_channels() != 3) {
      throw ShapeError("B prox must map 3 channels to 3 channels");
    }
  }
}

LearnableSet zeros_like(const LearnableSet& p) {
  LearnableSet z = p;
  for (auto& [name, t] : z.named_tensors()) t->fill(0.0);
  return z;
}

LearnableSet init_learnable(const ModelConfig& cfg, std::size_t patch_size,
                            std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  LearnableSet p;
  Tensor filter({cfg.kernel_size, cfg.kernel_size, cfg.kernels, 3});
  for (auto& v : filter.values()) v = normal(rng);
  p.kernels = KernelBank(std::move(filter));
  p.kernels.normalize_slices();
  p.init_kernel = box_blur_init_kernel();

  const std::size_t S = cfg.stages;
  for (std::size_t s = 0; s < S; ++s) {
    p.prox_m.push_back(identity_prox_params(cfg.kernels, cfg.hidden, cfg.blocks,
                                            cfg.block_init_std, rng()));
    p.prox_b.push_back(identity_prox_params(3, cfg.hidden, cfg.blocks,
                                            cfg.block_init_std, rng()));
  }
  if (S > 0) {
    const std::size_t grid = std::max<std::size_t>(patch_size, cfg.kernel_size);
    const double eta1 =
        kDefaultEta1Fraction * estimate_eta1_bound(p.kernels, grid, grid);
    p.eta1_raw = Tensor({S}, inverse_softplus(eta1));
    p.eta2_raw = Tensor({S}, logit(kDefaultEta2));
  }
  return p;
}

// ---------------------------------------------------------------------------

ForwardTape forward(const LearnableSet& p, const Image& observed) {
  require_image(observed, "forward");
  ForwardTape tape;
  tape.observed = observed;
  tape.initial_background = initial_background(observed, p.init_kernel);
  RainMapStack maps = make_maps(p.kernels.count(), height(observed), width(observed));
  const Image* background = &tape.initial_background;
  tape.stages.reserve(p.stages());
  for (std::size_t s = 0; s < p.stages(); ++s) {
    StageTape st;
    st.maps_prev = std::move(maps);
    st.background_prev = *background;
    st.diff = synthesize_rain(p.kernels, st.maps_prev);
    st.diff += st.background_prev;
    st.diff -= observed;
    st.grad = analyze_rain(p.kernels, st.diff);
    RainMapStack z = st.maps_prev;
    z.axpy(-p.eta1(s), st.grad);
    st.m = residual_prox_tape(p.prox_m[s], z);
    st.rain = synthesize_rain(p.kernels, st.m.output);
    st.background_hat = observed - st.rain;
    const double eta2 = p.eta2(s);
    Image mixed = (1.0 - eta2) * st.background_prev;
    mixed.axpy(eta2, st.background_hat);
    st.b = residual_prox_tape(p.prox_b[s], mixed);
    if (!st.b.output.all_finite() || !st.m.output.all_finite()) {
      throw NumericalError("non-finite values after stage " + std::to_string(s + 1));
    }
    maps = st.m.output;
    tape.stages.push_back(std::move(st));
    background = &tape.stages.back().b.output;
  }
  return tape;
}

double loss(const std::vector<Image>& backgrounds, const std::vector<Image>& rains,
            const Image& truth, const Image& observed, const LossWeights& w) {
  const std::size_t S = w.stages();
  if (backgrounds.size() != S + 1 || rains.size() != S) {
    throw ShapeError("loss: expected " + std::to_string(S + 1) +
                     " backgrounds and " + std::to_string(S) + " rain layers");
  }
  double total = 0.0;
  for (std::size_t s = 0; s <= S; ++s) {
    if (w.lambda[s] != 0.0) {
      total += w.lambda[s] * frob_norm_sq(backgrounds[s] - truth);
    }
  }
  const Image true_rain = observed - truth;
  for (std::size_t s = 1; s <= S; ++s) {
    if (w.gamma[s - 1] != 0.0) {
      total += w.gamma[s - 1] * frob_norm_sq(true_rain - rains[s - 1]);
    }
  }
  return total;
}

double loss(const ForwardTape& tape, const Image& truth, const LossWeights& w) {
  std::vector<Image> backgrounds{tape.initial_background};
  std::vector<Image> rains;
  for (const auto& st : tape.stages) {
    backgrounds.push_back(st.b.output);
    rains.push_back(st.rain);
  }
  return loss(backgrounds, rains, truth, tape.observed, w);
}

namespace {

void accumulate(ProxParams& into, const ProxParams& g) {
  auto dst = into.tensors();
  auto src = g.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] += *src[i];
}

}  // namespace

double loss_and_gradient(const LearnableSet& p, const Image& observed,
                         const Image& truth, const LossWeights& w,
                         LearnableSet* grad) {
  const std::size_t S = p.stages();
  if (w.stages() != S) {
    throw ConfigError("loss weights cover " + std::to_string(w.stages()) +
                      " stages, model has " + std::to_string(S));
  }
  require_same_shape(observed, truth, "loss_and_gradient");
  const ForwardTape tape = forward(p, observed);
  const double value = loss(tape, truth, w);
  if (!grad) return value;

  const std::size_t k = p.kernels.kernel_size();
  Tensor& g_filter = grad->kernels.mutable_filter();
  const Image true_rain = observed - truth;

  Image g_background = Tensor::zeros_like(observed);
  RainMapStack g_maps = make_maps(p.kernels.count(), height(observed), width(observed));

  for (std::size_t s = S; s >= 1; --s) {
    const StageTape& st = tape.stages[s - 1];
    const std::size_t i = s - 1;

    // Loss terms attached to this stage's outputs.
    g_background.axpy(2.0 * w.lambda[s], st.b.output - truth);
    Image g_rain = (-2.0 * w.gamma[i]) * (true_rain - st.rain);

    // B(s) = prox_b(mixed), mixed = (1 - eta2) B(s-1) + eta2 (O - R(s))
    ProxGradient pb = residual_prox_backward(p.prox_b[i], st.b, g_background);
    accumulate(grad->prox_b[i], pb.params);
    const double eta2 = p.eta2(i);
    const double d_eta2 = inner(pb.input, st.background_hat - st.background_prev);
    grad->eta2_raw[i] += d_eta2 * eta2 * (1.0 - eta2);
    Image g_background_prev = (1.0 - eta2) * pb.input;
    g_rain.axpy(-eta2, pb.input);

    // R(s) = C (x) M(s)
    g_maps += analyze_rain(p.kernels, g_rain);
    g_filter += conv_filter_grad(st.m.output, g_rain, k);

    // M(s) = prox_m(M(s-1) - eta1 * grad), grad = C (x)^T diff
    ProxGradient pm = residual_prox_backward(p.prox_m[i], st.m, g_maps);
    accumulate(grad->prox_m[i], pm.params);
    const double eta1 = p.eta1(i);
    grad->eta1_raw[i] += -inner(pm.input, st.grad) * sigmoid(p.eta1_raw[i]);
    RainMapStack g_maps_prev = pm.input;
    const RainMapStack g_grad = (-eta1) * pm.input;

    // grad = C (x)^T diff
    g_filter += conv_filter_grad(g_grad, st.diff, k);
    const Image g_diff = synthesize_rain(p.kernels, g_grad);

    // diff = C (x) M(s-1) + B(s-1) - O
    g_background_prev += g_diff;
    g_maps_prev += analyze_rain(p.kernels, g_diff);
    g_filter += conv_filter_grad(st.maps_prev, g_diff, k);

    g_background = std::move(g_background_prev);
    g_maps = std::move(g_maps_prev);
  }

  g_background.axpy(2.0 * w.lambda[0], tape.initial_background - truth);
  grad->init_kernel += initial_background_kernel_grad(observed, g_background,
                                        filter_size(p.init_kernel));
  return value;
}

LearnableSet backward(const Image& observed, const Image& truth,
                      const LearnableSet& p, const LossWeights& w) {
  LearnableSet grad = zeros_like(p);
  loss_and_gradient(p, observed, truth, w, &grad);
  return grad;
}

// ---------------------------------------------------------------------------

namespace {

Image crop(const Image& img, std::size_t y0, std::size_t x0, std::size_t size) {
  Image out = make_image(size, size);
  const std::size_t w = width(img);
  for (std::size_t c = 0; c < 3; ++c) {
    auto src = img.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < size; ++i) {
      std::copy_n(src.begin() + (y0 + i) * w + x0, size, dst.begin() + i * size);
    }
  }
  return out;
}

struct AdamState {
  std::vector<Tensor> m, v;
  std::size_t step = 0;
};

}  // namespace

TrainResult train(const std::vector<TrainingPair>& dataset, LearnableSet initial,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  initial.validate();
  if (cfg.weights.stages() != initial.stages()) {
    throw ConfigError("loss weights do not match the model's stage count");
  }
  TrainResult result{std::move(initial), {}};
  if (cfg.epochs == 0) return result;
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  for (const auto& pair : dataset) {
    require_image(pair.observed, "train");
    require_same_shape(pair.observed, pair.truth, "train");
    if (height(pair.observed) < cfg.patch_size || width(pair.observed) < cfg.patch_size) {
      throw ConfigError("patch size " + std::to_string(cfg.patch_size) +
                        " exceeds a training image of size " +
                        shape_string(pair.observed.shape()));
    }
  }

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  LearnableSet& params = result.params;
  AdamState adam;
  for (const auto& [name, t] : params.named_tensors()) {
    adam.m.push_back(Tensor::zeros_like(*t));
    adam.v.push_back(Tensor::zeros_like(*t));
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      LearnableSet grad = zeros_like(params);
      for (std::size_t b = start; b < stop; ++b) {
        const TrainingPair& pair = dataset[order[b]];
        const std::size_t h = height(pair.observed), w = width(pair.observed);
        std::uniform_int_distribution<std::size_t> dy(0, h - cfg.patch_size);
        std::uniform_int_distribution<std::size_t> dx(0, w - cfg.patch_size);
        const std::size_t y0 = dy(rng), x0 = dx(rng);
        const Image o = crop(pair.observed, y0, x0, cfg.patch_size);
        const Image t = crop(pair.truth, y0, x0, cfg.patch_size);
        epoch_total += loss_and_gradient(params, o, t, cfg.weights, &grad);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      ++adam.step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
      auto p_named = params.named_tensors();
      auto g_named = grad.named_tensors();
      for (std::size_t i = 0; i < p_named.size(); ++i) {
        Tensor& p = *p_named[i].second;
        const Tensor& g = *g_named[i].second;
        Tensor& m = adam.m[i];
        Tensor& v = adam.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
          const double gj = g[j] * scale;
          m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * gj;
          v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * gj * gj;
          p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + kEps);
        }
      }
    }
    const double mean = epoch_total / static_cast<double>(dataset.size());
    if (!std::isfinite(mean)) {
      throw NumericalError("training loss became non-finite in epoch " +
                           std::to_string(epoch + 1));
    }
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

DeskRecipe desk_recipe(std::size_t stages) {
  DeskRecipe r;
  r.model.stages = stages;
  r.model.kernels = 4;
  r.model.kernel_size = 9;
  r.model.blocks = 1;
  r.model.hidden = 8;
  r.train.weights = default_loss_weights(stages);
  r.train.epochs = 50;
  r.train.batch_size = 4;
  r.train.patch_size = 32;
  r.train.seed = 0;
  return r;
}

}  // namespace rcd
