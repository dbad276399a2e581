#include "deferlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "deferlab/errors.hpp"
#include "deferlab/rng.hpp"
#include "deferlab/surrogates.hpp"

namespace deferlab {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

ScoreModel ScoreModel::make_linear(int in_dim, int out_dim) {
  if (in_dim < 1 || out_dim < 1) throw OutOfRangeError("model dimensions must be positive");
  ScoreModel m;
  m.arch = Arch::linear;
  m.in_dim = in_dim;
  m.out_dim = out_dim;
  m.params.assign(m.param_count(), 0.0);
  return m;
}

ScoreModel ScoreModel::make_mlp(int in_dim, int hidden, int out_dim) {
  if (in_dim < 1 || hidden < 1 || out_dim < 1) {
    throw OutOfRangeError("model dimensions must be positive");
  }
  ScoreModel m;
  m.arch = Arch::mlp;
  m.in_dim = in_dim;
  m.out_dim = out_dim;
  m.hidden = hidden;
  m.params.assign(m.param_count(), 0.0);
  return m;
}

std::size_t ScoreModel::param_count() const {
  const std::size_t in = static_cast<std::size_t>(in_dim);
  const std::size_t out = static_cast<std::size_t>(out_dim);
  if (arch == Arch::linear) return out * in + out;
  const std::size_t h = static_cast<std::size_t>(hidden);
  return h * in + h + out * h + out;
}

void ScoreModel::init_weights(double scale, std::uint64_t seed) {
  if (scale < 0.0) throw NegativeInputError("weight init scale must be non-negative");
  Rng rng(hash_seed(seed, 0xC0FFEEULL));
  params.assign(param_count(), 0.0);
  for (double& p : params) p = rng.uniform(-scale, scale);
}

std::vector<double> ScoreModel::forward(const Vec& x) const {
  if (static_cast<int>(x.size()) != in_dim) {
    throw DimensionMismatchError("feature dimension does not match the model");
  }
  const std::size_t in = static_cast<std::size_t>(in_dim);
  const std::size_t out = static_cast<std::size_t>(out_dim);
  std::vector<double> scores(out, 0.0);
  if (arch == Arch::linear) {
    const double* W = params.data();
    const double* b = params.data() + out * in;
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += W[o * in + i] * x[i];
      scores[o] = s;
    }
    return scores;
  }
  const std::size_t h = static_cast<std::size_t>(hidden);
  const double* W1 = params.data();
  const double* b1 = params.data() + h * in;
  const double* W2 = b1 + h;
  const double* b2 = W2 + out * h;
  std::vector<double> a(h);
  for (std::size_t j = 0; j < h; ++j) {
    double z = b1[j];
    for (std::size_t i = 0; i < in; ++i) z += W1[j * in + i] * x[i];
    a[j] = std::tanh(z);
  }
  for (std::size_t o = 0; o < out; ++o) {
    double s = b2[o];
    for (std::size_t j = 0; j < h; ++j) s += W2[o * h + j] * a[j];
    scores[o] = s;
  }
  return scores;
}

void ScoreModel::backward(const Vec& x, const std::vector<double>& dscores,
                          std::vector<double>& grad) const {
  if (static_cast<int>(x.size()) != in_dim || static_cast<int>(dscores.size()) != out_dim) {
    throw DimensionMismatchError("backward shapes do not match the model");
  }
  if (grad.size() != param_count()) {
    throw DimensionMismatchError("gradient buffer does not match the parameter count");
  }
  const std::size_t in = static_cast<std::size_t>(in_dim);
  const std::size_t out = static_cast<std::size_t>(out_dim);
  if (arch == Arch::linear) {
    double* dW = grad.data();
    double* db = grad.data() + out * in;
    for (std::size_t o = 0; o < out; ++o) {
      for (std::size_t i = 0; i < in; ++i) dW[o * in + i] += dscores[o] * x[i];
      db[o] += dscores[o];
    }
    return;
  }
  const std::size_t h = static_cast<std::size_t>(hidden);
  const double* W1 = params.data();
  const double* b1 = params.data() + h * in;
  const double* W2 = b1 + h;
  double* dW1 = grad.data();
  double* db1 = grad.data() + h * in;
  double* dW2 = db1 + h;
  double* db2 = dW2 + out * h;

  std::vector<double> a(h);
  for (std::size_t j = 0; j < h; ++j) {
    double z = b1[j];
    for (std::size_t i = 0; i < in; ++i) z += W1[j * in + i] * x[i];
    a[j] = std::tanh(z);
  }
  std::vector<double> dz(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    double da = 0.0;
    for (std::size_t o = 0; o < out; ++o) da += dscores[o] * W2[o * h + j];
    dz[j] = da * (1.0 - a[j] * a[j]);
  }
  for (std::size_t o = 0; o < out; ++o) {
    for (std::size_t j = 0; j < h; ++j) dW2[o * h + j] += dscores[o] * a[j];
    db2[o] += dscores[o];
  }
  for (std::size_t j = 0; j < h; ++j) {
    for (std::size_t i = 0; i < in; ++i) dW1[j * in + i] += dz[j] * x[i];
    db1[j] += dz[j];
  }
}

namespace {

void validate_training_inputs(const ScoreModel& model, const std::vector<Sample>& data,
                              LossKind kind) {
  if (data.empty()) throw EmptyDataError("training needs a non-empty dataset");
  int max_label = model.out_dim;
  switch (kind) {
    case LossKind::lce:
    case LossKind::cross_entropy_classes:
      if (model.out_dim < 3) throw DimensionMismatchError("model needs K+1 >= 3 heads");
      max_label = model.out_dim - 1;
      break;
    case LossKind::cross_entropy_all:
      if (model.out_dim < 2) throw DimensionMismatchError("classifier needs at least two heads");
      break;
    case LossKind::expert_correctness:
      if (model.out_dim != 1) throw DimensionMismatchError("expert head must have one output");
      max_label = 1 << 30;
      break;
  }
  const bool needs_expert = (kind == LossKind::lce || kind == LossKind::expert_correctness);
  for (const Sample& s : data) {
    if (static_cast<int>(s.x.size()) != model.in_dim) {
      throw DimensionMismatchError("feature dimension does not match the model");
    }
    if (s.y < 1 || s.y > max_label) throw OutOfRangeError("label out of range for the model");
    if (needs_expert && !s.m.has_value()) {
      throw MissingExpertLabelError("this objective needs expert predictions on every sample");
    }
  }
}

// Loss value and d(loss)/d(scores) for one sample.
double sample_loss(const std::vector<double>& scores, const Sample& s, LossKind kind,
                   std::vector<double>* dscores) {
  switch (kind) {
    case LossKind::lce: {
      const int K = static_cast<int>(scores.size()) - 1;
      const std::vector<double> w = cost_weights(cost_vector_01(s.y, *s.m == s.y, K));
      double W = 0.0;
      for (double v : w) W += v;
      const double lse = logsumexp(scores);
      double loss = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) loss += w[i] * (lse - scores[i]);
      if (dscores) {
        const std::vector<double> p = softmax(scores);
        dscores->assign(scores.size(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i) (*dscores)[i] = W * p[i] - w[i];
      }
      return loss;
    }
    case LossKind::cross_entropy_all: {
      const double lse = logsumexp(scores);
      const std::size_t target = static_cast<std::size_t>(s.y - 1);
      if (dscores) {
        const std::vector<double> p = softmax(scores);
        dscores->assign(scores.size(), 0.0);
        for (std::size_t i = 0; i < scores.size(); ++i) (*dscores)[i] = p[i];
        (*dscores)[target] -= 1.0;
      }
      return lse - scores[target];
    }
    case LossKind::cross_entropy_classes: {
      std::vector<double> head(scores.begin(), scores.end() - 1);
      const double lse = logsumexp(head);
      const std::size_t target = static_cast<std::size_t>(s.y - 1);
      if (dscores) {
        dscores->assign(scores.size(), 0.0);
        for (std::size_t i = 0; i < head.size(); ++i) (*dscores)[i] = std::exp(head[i] - lse);
        (*dscores)[target] -= 1.0;
      }
      return lse - head[target];
    }
    case LossKind::expert_correctness: {
      const double z = scores[0];
      const double target = (*s.m == s.y) ? 1.0 : 0.0;
      if (dscores) {
        dscores->assign(1, sigmoid(z) - target);
      }
      return softplus(z) - target * z;
    }
  }
  throw Error("unreachable loss kind");
}

}  // namespace

double mean_loss(const ScoreModel& model, const std::vector<Sample>& data, LossKind kind) {
  validate_training_inputs(model, data, kind);
  double total = 0.0;
  for (const Sample& s : data) {
    total += sample_loss(model.forward(s.x), s, kind, nullptr);
  }
  return total / static_cast<double>(data.size());
}

namespace {

TrainResult train_gd_impl(ScoreModel model, const std::vector<Sample>& data,
                          const TrainConfig& cfg, LossKind kind, bool reinit) {
  if (cfg.learning_rate <= 0.0) throw OutOfRangeError("learning rate must be positive");
  if (cfg.epochs < 0) throw OutOfRangeError("epoch count must be non-negative");
  if (cfg.batch_size < 1) throw OutOfRangeError("batch size must be at least 1");
  validate_training_inputs(model, data, kind);
  if (reinit) model.init_weights(cfg.weight_init_scale, cfg.seed);

  TrainResult result;
  const std::size_t n = data.size();
  const std::size_t B = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
  const bool full_batch = (B == n);

  result.initial_loss = mean_loss(model, data, kind);
  result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.param_count(), 0.0);
  std::vector<double> dscores;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!full_batch) {
      // Epoch-seeded Fisher-Yates shuffle; the full-batch path never draws
      // randomness after initialization.
      Rng rng(hash_seed(cfg.seed, 0xE70C0000ULL + static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)));
        std::swap(order[i], order[j]);
      }
    }
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < n; start += B) {
      const std::size_t stop = std::min(start + B, n);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        const Sample& s = data[order[k]];
        epoch_total += sample_loss(model.forward(s.x), s, kind, &dscores);
        model.backward(s.x, dscores, grad);
      }
      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < grad.size(); ++p) model.params[p] -= scale * grad[p];
    }
    const double epoch_mean = epoch_total / static_cast<double>(n);
    result.epoch_loss.push_back(epoch_mean);
    if (!std::isfinite(epoch_mean) ||
        (result.initial_loss > 0.0 && epoch_mean > 1000.0 * result.initial_loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

TrainResult train_gd(ScoreModel model, const std::vector<Sample>& data, const TrainConfig& cfg,
                     LossKind kind) {
  return train_gd_impl(std::move(model), data, cfg, kind, true);
}

TrainResult train_joint(const ScoreModel& model, const std::vector<Sample>& data_l,
                        const TrainConfig& cfg) {
  return train_gd_impl(model, data_l, cfg, LossKind::lce, true);
}

StagedResult train_staged(const ScoreModel& classifier, const ScoreModel& expert_head,
                          const std::vector<Sample>& data_all, const std::vector<Sample>& data_l,
                          const TrainConfig& cfg) {
  TrainResult cls = train_gd_impl(classifier, data_all, cfg, LossKind::cross_entropy_all, true);
  TrainResult head = train_gd_impl(expert_head, data_l, cfg, LossKind::expert_correctness, true);

  StagedResult out;
  out.classifier = cls.model;
  out.expert_head = head.model;
  auto cls_ptr = std::make_shared<ScoreModel>(cls.model);
  auto head_ptr = std::make_shared<ScoreModel>(head.model);
  out.system.h = [cls_ptr](const Vec& x) {
    return static_cast<int>(argmax_lowest(cls_ptr->forward(x))) + 1;
  };
  out.system.r = [cls_ptr, head_ptr](const Vec& x) {
    const double expert_acc = sigmoid(head_ptr->forward(x)[0]);
    const std::vector<double> p = softmax(cls_ptr->forward(x));
    const double top = *std::max_element(p.begin(), p.end());
    // Strict comparison: a tie keeps the prediction.
    return expert_acc > top ? 1 : 0;
  };
  return out;
}

TrainResult train_joint_semisupervised(const ScoreModel& model, const std::vector<Sample>& data_u,
                                       const std::vector<Sample>& data_l, const TrainConfig& cfg) {
  TrainResult phase1 = train_gd_impl(model, data_u, cfg, LossKind::cross_entropy_classes, true);
  return train_gd_impl(phase1.model, data_l, cfg, LossKind::lce, false);
}

DeferralSystem decode_model(const ScoreModel& model) {
  if (model.out_dim < 3) throw DimensionMismatchError("decoding needs K+1 >= 3 heads");
  auto ptr = std::make_shared<ScoreModel>(model);
  const std::size_t K = static_cast<std::size_t>(model.out_dim - 1);
  DeferralSystem sys;
  sys.h = [ptr, K](const Vec& x) {
    std::vector<double> f = ptr->forward(x);
    f.resize(K);
    return static_cast<int>(argmax_lowest(f)) + 1;
  };
  sys.r = [ptr, K](const Vec& x) {
    const std::vector<double> f = ptr->forward(x);
    return argmax_lowest(f) == K ? 1 : 0;
  };
  return sys;
}

}  // namespace deferlab
