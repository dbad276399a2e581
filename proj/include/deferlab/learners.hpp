#pragma once

// Parametric score models (linear and one-hidden-layer tanh MLP) trained by
// plain minibatch gradient descent, plus the three deferral training
// pipelines: joint surrogate training on K+1 heads, a staged
// classifier-then-expert-head baseline, and a semi-supervised joint variant
// that pretrains the class heads on expert-unlabeled data.

#include <cstdint>
#include <memory>
#include <vector>

#include "deferlab/core.hpp"

namespace deferlab {

struct ScoreModel {
  enum class Arch { linear, mlp };
  Arch arch = Arch::linear;
  int in_dim = 1;
  int out_dim = 2;
  int hidden = 0;
  // linear: W (out x in, row-major), then b (out).
  // mlp: W1 (hidden x in), b1 (hidden), W2 (out x hidden), b2 (out).
  std::vector<double> params;

  static ScoreModel make_linear(int in_dim, int out_dim);
  static ScoreModel make_mlp(int in_dim, int hidden, int out_dim);

  std::size_t param_count() const;
  // Uniform [-scale, scale] entries from the given seed.
  void init_weights(double scale, std::uint64_t seed);
  std::vector<double> forward(const Vec& x) const;
  // Accumulate d(loss)/d(params) into grad given d(loss)/d(scores).
  void backward(const Vec& x, const std::vector<double>& dscores, std::vector<double>& grad) const;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  // Batches of this size after an epoch-seeded shuffle; any value >= n means
  // full-batch descent (no shuffle), which is bit-reproducible.
  int batch_size = 1 << 30;
  std::uint64_t seed = 0;
  double weight_init_scale = 0.1;
};

// Per-sample objectives the descent loop knows how to differentiate.
enum class LossKind {
  lce,                 // cost-weighted cross-entropy over all K+1 heads (needs y and m)
  cross_entropy_all,   // softmax cross-entropy over all heads, target y
  cross_entropy_classes,  // softmax cross-entropy over the first K of K+1 heads, target y
  expert_correctness,  // logistic loss on a single head, target I{m == y}
};

// Generic descent; initializes weights from cfg and returns the trained
// model along with the loss trajectory. Throws DivergenceError when the
// epoch loss stops being finite or exceeds 1000x the initial loss.
struct TrainResult {
  ScoreModel model;
  std::vector<double> epoch_loss;
  double initial_loss = 0.0;
};

TrainResult train_gd(ScoreModel model, const std::vector<Sample>& data, const TrainConfig& cfg,
                     LossKind kind);

// Mean per-sample loss of a model on a dataset (no updates).
double mean_loss(const ScoreModel& model, const std::vector<Sample>& data, LossKind kind);

// Joint surrogate training: model has K+1 heads, every sample needs an
// expert prediction. Decoded head K+1 defers.
TrainResult train_joint(const ScoreModel& model, const std::vector<Sample>& data_l,
                        const TrainConfig& cfg);

struct StagedResult {
  ScoreModel classifier;   // K heads
  ScoreModel expert_head;  // 1 head, P(expert correct) = sigmoid(score)
  DeferralSystem system;   // defer when predicted expert accuracy strictly
                           // exceeds the classifier's top softmax probability
};

// Classifier on all of data_all (labels only), expert-correctness head on
// data_l (needs expert predictions).
StagedResult train_staged(const ScoreModel& classifier, const ScoreModel& expert_head,
                          const std::vector<Sample>& data_all, const std::vector<Sample>& data_l,
                          const TrainConfig& cfg);

// Phase 1: cross-entropy on the first K heads over expert-unlabeled data.
// Phase 2: the joint surrogate on the expert-labeled data, continuing from
// the phase-1 parameters. Each phase runs cfg.epochs epochs.
TrainResult train_joint_semisupervised(const ScoreModel& model, const std::vector<Sample>& data_u,
                                       const std::vector<Sample>& data_l, const TrainConfig& cfg);

// argmax decoding of a K+1-head model into a deferral system.
DeferralSystem decode_model(const ScoreModel& model);

}  // namespace deferlab
